//! Solves `w + λf(w) = x` for the map `f(z) = z(1 − z)/(1 + z)` and compares
//! with the closed form `x/(2 − x)` at `λ = 1`.

use accretive::fixtures;
use accretive::holomap::CVector;
use accretive::resolvent::{singularity_radius_1d, ResolventFamily, SolverOptions};
use num_complex::Complex64;

fn main() -> accretive::Result<()> {
    let fx = fixtures::extremal();
    let fam = ResolventFamily::new(fx.generator.clone(), fx.a)?;
    let x = CVector::scalar(Complex64::new(0.6, 0.3));
    let opts = SolverOptions {
        record_trace: true,
        ..SolverOptions::default()
    };
    let r = fam.solve_with(1.0, &x, &opts)?;
    println!("G_1(x)      = {}", r.w[0]);
    println!("x/(2 - x)   = {}", x[0] / (2.0 - x[0]));
    println!("residual    = {:e} after {} Newton steps", r.residual, r.iterations);
    for row in &r.trace {
        println!("  mu = {:.4}  residual = {:e}", row.mu, row.residual);
    }

    for lambda in [3.0, 4.0, 10.0] {
        let ray = singularity_radius_1d(&fam, lambda, Complex64::new(1.0, 0.0))?;
        let oracle: f64 = 3.0 * lambda - 1.0 - 2.0 * (2.0 * lambda * (lambda - 1.0)).sqrt();
        println!("lambda = {lambda:4}: branch ends at {:.10} (closed form {oracle:.10})", ray.radius);
    }
    Ok(())
}
