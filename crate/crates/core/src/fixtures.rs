//! Reference generators with known constants.

use num_complex::Complex64;

use crate::bounds::BoundsProfile;
use crate::error::Result;
use crate::holomap::{CMatrix, GeneratorMap, HomogeneousTerm, Monomial, SphereSampler};

/// A generator in `N_a` together with what is known about it in closed form.
#[derive(Debug, Clone)]
pub struct Fixture {
    pub name: &'static str,
    pub generator: GeneratorMap,
    pub a: f64,
    /// `a` is the exact infimum rather than a lower bound with slack.
    pub analytic_a: bool,
    /// `b` with `‖f'(x) − f'(0)‖ ≤ b‖x‖`.
    pub bound_b: Option<f64>,
    /// Closed form of `M_f(r)`.
    pub sup_norm: Option<fn(f64) -> f64>,
    /// The generator is linear.
    pub linear: bool,
}

impl Fixture {
    /// Bounds profile, using the closed-form `M_f` when available.
    pub fn profile(&self, sampler: &SphereSampler) -> Result<BoundsProfile> {
        let mut p = BoundsProfile::from_generator(&self.generator, self.a, sampler)?;
        if let Some(m) = self.sup_norm {
            p = p.with_sup_norm(m);
        }
        if let Some(b) = self.bound_b {
            p = p.with_bound_b(b);
        }
        Ok(p)
    }
}

fn c(v: f64) -> Complex64 {
    Complex64::new(v, 0.0)
}

/// `f(z) = z`, `a = 1`.
pub fn identity() -> Fixture {
    Fixture {
        name: "identity",
        generator: GeneratorMap::linear(CMatrix::identity(1)).expect("valid"),
        a: 1.0,
        analytic_a: true,
        bound_b: Some(0.0),
        sup_norm: Some(|r| r),
        linear: true,
    }
}

/// `f(z) = z(1 − z)/(1 + z)`, `a = 0`, `K = −1`, `K₁ = 1`.
pub fn extremal() -> Fixture {
    Fixture {
        name: "extremal",
        generator: extremal_map(),
        a: 0.0,
        analytic_a: true,
        bound_b: None,
        sup_norm: Some(|r| r * (1.0 + r) / (1.0 - r)),
        linear: false,
    }
}

pub fn extremal_map() -> GeneratorMap {
    GeneratorMap::rational_disk(vec![c(0.0), c(1.0), c(-1.0)], vec![c(1.0), c(1.0)]).expect("valid")
}

/// `f(x) = diag(1, 2)x`, `a = 1`.
pub fn diagonal() -> Fixture {
    Fixture {
        name: "diagonal",
        generator: GeneratorMap::linear(
            CMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, 2.0]]).expect("square"),
        )
        .expect("valid"),
        a: 1.0,
        analytic_a: true,
        bound_b: Some(0.0),
        sup_norm: Some(|r| 2.0 * r),
        linear: true,
    }
}

/// `f(x₁, x₂) = (x₁ + x₂²/2, x₂)`, `a = 1/2` (the infimum is `1 − 1/(3√3)`).
pub fn quadratic() -> Fixture {
    let term =
        HomogeneousTerm::new(2, 2, vec![Monomial::new(0, vec![0, 2], c(0.5))]).expect("valid");
    Fixture {
        name: "quadratic",
        generator: GeneratorMap::polynomial(CMatrix::identity(2), vec![term]).expect("valid"),
        a: 0.5,
        analytic_a: false,
        bound_b: Some(1.0),
        sup_norm: None,
        linear: false,
    }
}

/// `f(z) = −z`, not accretive.
pub fn negative() -> GeneratorMap {
    GeneratorMap::linear(CMatrix::scalar(c(-1.0))).expect("valid")
}

/// The generators in `N_a` satisfying Assumption A.
pub fn corpus() -> Vec<Fixture> {
    vec![identity(), extremal(), diagonal(), quadratic()]
}
