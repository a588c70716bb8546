//! Integrates `∂u/∂t + f(u) = 0` and compares with the product formula
//! `G_{t/n}^n(x)`.

use accretive::fixtures;
use accretive::holomap::CVector;
use accretive::resolvent::ResolventFamily;
use accretive::semigroup::{convergence_study, integrate_cauchy, squeezing_check};
use num_complex::Complex64;

fn main() -> accretive::Result<()> {
    let fx = fixtures::quadratic();
    let x = CVector::new(vec![Complex64::new(0.4, 0.1), Complex64::new(-0.3, 0.5)]);
    let traj = integrate_cauchy(&fx.generator, &x, 3.0, 1e-10)?;
    println!("{} accepted steps, {} rejected", traj.steps, traj.rejected);
    for (t, n) in traj.times.iter().zip(&traj.norms).step_by((traj.times.len() / 8).max(1)) {
        println!("  t = {t:.3}  |u| = {n:.8}  e^(-at)|x| = {:.8}", (-fx.a * t).exp() * x.norm());
    }
    println!("squeezing holds: {}", squeezing_check(&fx.generator, fx.a, &x, 3.0)?.passed());

    let fam = ResolventFamily::new(fx.generator.clone(), fx.a)?;
    let table = convergence_study(&fam, 1.0, &x, &[4, 16, 64, 256, 1024])?;
    for row in &table.rows {
        println!("  n = {:5}  |G^n - u| = {:e}", row.n, row.error);
    }
    Ok(())
}
