//! Distortion constants, radii and starlikeness thresholds on a `λ` grid.

use accretive::bounds::{self, BoundsProfile};

fn main() -> accretive::Result<()> {
    let p = BoundsProfile::new(0.0, -1.0, 1.0)?
        .with_sup_norm(|r| r * (1.0 + r) / (1.0 - r))
        .with_bound_b(0.1);
    let lambdas: Vec<f64> = (0..12).map(|k| 0.25 * 2f64.powi(k)).collect();
    let table = bounds::bounds_table(&p, &lambdas, 1e-10)?;
    println!("{:>9} {:>9} {:>9} {:>10} {:>9}", "lambda", "alpha", "beta", "rho", "gamma");
    for r in &table.rows {
        println!(
            "{:9.3} {:9.5} {:9.5} {:10.5} {:>9}",
            r.lambda,
            r.alpha,
            r.beta.unwrap_or(f64::NAN),
            r.rho,
            r.gamma.map_or("-".to_owned(), |g| format!("{g:.5}"))
        );
    }
    let s = &table.scalars;
    println!("lambda* = {:.8} ({:?})", s.lambda_star, s.lambda_star_status);
    println!("d_max = {:.6} at lambda = {:.6}", s.d_max, s.d_argmax);
    if let Some((lo, hi)) = s.order_half_window {
        println!("order 1/2 outside ({lo:.6}, {hi:.6})");
    }
    Ok(())
}
