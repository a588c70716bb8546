//! Sampled order of starlikeness of resolvents, and the threshold `λ*`
//! beyond which order ½ is guaranteed.

use accretive::bounds;
use accretive::fixtures;
use accretive::holomap::SphereSampler;
use accretive::resolvent::ResolventFamily;
use accretive::starlike::{order_estimate, verify_theorem_order1, ResolventQuantity};

fn main() -> accretive::Result<()> {
    let sampler = SphereSampler::with_default_radii(3, 256)?;
    let fx = fixtures::extremal();
    let fam = ResolventFamily::new(fx.generator.clone(), fx.a)?;
    let p = fx.profile(&sampler)?;
    let star = bounds::lambda_star(&p, 1e-10)?;
    println!("lambda* = {:.8}", star.lambda);
    for lambda in [1.0, 10.0, 60.0, 200.0] {
        let est = order_estimate(&ResolventQuantity { family: &fam, lambda }, &sampler)?;
        let check = verify_theorem_order1(&fam, lambda, &p, &sampler)?;
        println!(
            "lambda = {lambda:6}: gamma_hat = {:.6}, order 1/2 check {}",
            est.gamma_hat,
            if check.is_applicable() { check.passed().to_string() } else { "n/a".to_owned() }
        );
    }
    Ok(())
}
