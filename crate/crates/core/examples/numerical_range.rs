//! Support function of a field of values and the accretivity constant of a generator.

use accretive::fixtures;
use accretive::holomap::{CMatrix, SphereSampler};
use accretive::numrange::{accretivity_constant, check_assumption_a, support_function};
use num_complex::Complex64;

fn main() -> accretive::Result<()> {
    let a = CMatrix::from_rows(vec![
        vec![Complex64::new(1.0, 0.0), Complex64::new(2.0, 0.0)],
        vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
    ])?;
    println!("theta      K_A(theta)");
    for k in 0..8 {
        let theta = k as f64 * std::f64::consts::FRAC_PI_4;
        println!("{theta:8.4}  {:10.6}", support_function(&a, theta));
    }

    let sampler = SphereSampler::with_default_radii(1, 256)?;
    for fx in fixtures::corpus() {
        let acc = accretivity_constant(&fx.generator, &sampler);
        println!(
            "{:<10} a_star = {:.6}  K = {:.3}  K1 = {:.3}  assumption A: {}",
            fx.name,
            acc.a_star,
            acc.k_pi,
            acc.k_0,
            check_assumption_a(&fx.generator, fx.a)
        );
    }
    Ok(())
}
