//! Closed-form constants for resolvents of mappings in `N_a`.
//!
//! Everything is computed from a [`BoundsProfile`]: the accretivity constant
//! `a`, the support values `K = K_{f'(0)}(π) < 0` and `K₁ = K_{f'(0)}(0)`,
//! an optional bound `b ≥ sup ‖f'(x) − f'(0)‖`, and access to `M_f(r)`.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::holomap::{sup_norm, GeneratorMap, SphereSampler};
use crate::numrange::support_function;
use crate::output::fmt_f64;

/// `M_f(1⁻)` above this value makes `β` vacuous when `α = 1`.
pub const UNBOUNDED_SUP_NORM: f64 = 1e6;
/// Radius standing in for `1⁻` when `α(λ) = 1`.
const BOUNDARY_RADIUS: f64 = 1.0 - 1e-9;
/// Relative size of the certified tail at which the `Ψ` series is truncated.
const PSI_TAIL_RATIO: f64 = 1e-10;
const PSI_MAX_TERMS: usize = 50_000_000;

pub type SupNormFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Deliberate defects used by the mutation check of the verification suite.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Mutation {
    AlphaSignError,
}

/// Scalar data from which every bound is computed.
#[derive(Clone)]
pub struct BoundsProfile {
    pub a: f64,
    /// `K = K_{f'(0)}(π)`.
    pub k: f64,
    /// `K₁ = K_{f'(0)}(0)`.
    pub k1: f64,
    /// `b` with `‖f'(x) − f'(0)‖ < b` on the ball, when known.
    pub bound_b: Option<f64>,
    pub dim: usize,
    sup_norm: Option<SupNormFn>,
    mutation: Option<Mutation>,
}

impl fmt::Debug for BoundsProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BoundsProfile")
            .field("a", &self.a)
            .field("k", &self.k)
            .field("k1", &self.k1)
            .field("bound_b", &self.bound_b)
            .field("dim", &self.dim)
            .field("has_sup_norm", &self.sup_norm.is_some())
            .finish()
    }
}

impl BoundsProfile {
    /// Checks `a ≥ 0`, `K < 0`, `K + a ≤ 0` and `K₁ ≥ a`.
    pub fn new(a: f64, k: f64, k1: f64) -> Result<Self> {
        if !(a >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "a = {a} must be non-negative"
            )));
        }
        if !(k < 0.0 && k + a <= 1e-12) {
            return Err(Error::InvalidArgument(format!(
                "K = {k} with a = {a} violates K < 0, K + a <= 0"
            )));
        }
        if k1 < a - 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "K1 = {k1} is below a = {a}"
            )));
        }
        Ok(Self {
            a,
            k,
            k1,
            bound_b: None,
            dim: 1,
            sup_norm: None,
            mutation: None,
        })
    }

    /// Profile of a generator: `K`, `K₁` from the numerical range of
    /// `f'(0)`, `M_f` by sphere maximisation with `sampler`.
    pub fn from_generator(f: &GeneratorMap, a: f64, sampler: &SphereSampler) -> Result<Self> {
        let lin = f.derivative_at_origin();
        let k = support_function(&lin, std::f64::consts::PI);
        let k1 = support_function(&lin, 0.0);
        let map = f.clone();
        let sampler = sampler.clone();
        Ok(Self::new(a, k, k1)?
            .with_dim(f.dim())
            .with_sup_norm(move |r| sup_norm(&map, r, &sampler).unwrap_or(f64::NAN)))
    }

    pub fn with_bound_b(mut self, b: f64) -> Self {
        self.bound_b = Some(b);
        self
    }

    pub fn with_dim(mut self, dim: usize) -> Self {
        self.dim = dim;
        self
    }

    pub fn with_sup_norm(mut self, m: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.sup_norm = Some(Arc::new(m));
        self
    }

    pub(crate) fn with_mutation(mut self, m: Mutation) -> Self {
        self.mutation = Some(m);
        self
    }

    /// `M_f(r)`, if the profile has access to it.
    pub fn sup_norm(&self, r: f64) -> Option<f64> {
        self.sup_norm.as_ref().map(|m| m(r))
    }

    /// `1 − λK`, the lower bound on `‖(I + λA)x‖/‖x‖`.
    fn damping(&self, lambda: f64) -> f64 {
        match self.mutation {
            Some(Mutation::AlphaSignError) => 1.0 + lambda * self.k,
            None => 1.0 - lambda * self.k,
        }
    }

    /// Smallest `λ` with `α(λ) < 1`: `0` when `a > 0`, otherwise `2/|K|`.
    pub fn psi_domain_start(&self) -> f64 {
        if self.a > 0.0 {
            0.0
        } else {
            2.0 / self.k.abs()
        }
    }
}

/// `α(λ) = min(3/(1 − λK), 1/(1 + λa))`.
pub fn alpha(p: &BoundsProfile, lambda: f64) -> f64 {
    (3.0 / p.damping(lambda)).min(1.0 / (1.0 + lambda * p.a))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Beta {
    pub value: f64,
    /// `α(λ) = 1` and `M_f` is unbounded near the sphere; the bound is `0`.
    pub vacuous: bool,
}

/// `β(λ) = α/(α + λ M_f(α))`.
pub fn beta(p: &BoundsProfile, lambda: f64) -> Result<Beta> {
    let a = alpha(p, lambda);
    let radius = if a >= 1.0 { BOUNDARY_RADIUS } else { a };
    let m = p
        .sup_norm(radius)
        .ok_or_else(|| Error::InvalidArgument("profile has no access to M_f".into()))?;
    if a >= 1.0 && !(m <= UNBOUNDED_SUP_NORM) {
        return Ok(Beta {
            value: 0.0,
            vacuous: true,
        });
    }
    Ok(Beta {
        value: a / (a + lambda * m),
        vacuous: false,
    })
}

/// Radius `ρ` of the ball where an inverse (or resolvent) extends, and the
/// radius `R` of the ball it maps into.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Radii {
    pub rho: f64,
    pub outer: f64,
}

/// Extension radii of `G_λ`:
/// `ρ = (√(−2λ(a+K)) − √(−(2λa+λK+1)))²`, `R = √(2λ(a+K)/(2λa+λK+1)) − 1`
/// when `3a + K < 0` and `λ > 2/|3a+K|`; otherwise `(1 + λa, 1)`.
pub fn resolvent_radii(p: &BoundsProfile, lambda: f64) -> Radii {
    let s = 3.0 * p.a + p.k;
    if s < 0.0 && lambda > 2.0 / s.abs() {
        let u = -2.0 * lambda * (p.a + p.k);
        let v = -(2.0 * lambda * p.a + lambda * p.k + 1.0);
        Radii {
            rho: (u.sqrt() - v.sqrt()).powi(2),
            outer: (u / v).sqrt() - 1.0,
        }
    } else {
        Radii {
            rho: 1.0 + lambda * p.a,
            outer: 1.0,
        }
    }
}

/// Inverse-function radii for `h` with `Re⟨e^{-iθ}h(x), x⟩ ≤ −c‖x‖²` and
/// `K_{h'(0)}(θ) = k_theta`.
///
/// In the second branch the closed form is cross-checked against
/// `c·ρ₁(τ₂) = c(3b − 4 − 2√(2(b−1)(b−2)))`, `b = −k_theta/c`.
pub fn inverse_radii(c: f64, k_theta: f64) -> Result<Radii> {
    if !(c >= 0.0) || k_theta > -c {
        return Err(Error::InvalidArgument(format!(
            "inverse radii need c >= 0 and K <= -c (c = {c}, K = {k_theta})"
        )));
    }
    if k_theta > -3.0 * c {
        return Ok(Radii { rho: c, outer: 1.0 });
    }
    if k_theta == 0.0 {
        return Err(Error::InvalidArgument("degenerate case c = K = 0".into()));
    }
    let rho = ((2.0 * c + 2.0 * k_theta).abs().sqrt() - (2.0 * c + k_theta).abs().sqrt()).powi(2);
    let outer = ((2.0 * c + 2.0 * k_theta) / (2.0 * c + k_theta)).sqrt() - 1.0;
    if c > 0.0 {
        let check = c * proof_optimum(-k_theta / c);
        if (check - rho).abs() > 1e-12 * rho.max(1.0) {
            return Err(Error::InvalidArgument(format!(
                "radius cross-check failed: {rho} vs {check}"
            )));
        }
    }
    Ok(Radii { rho, outer })
}

/// `ρ₁(τ₂) = 3b − 4 − 2√(2(b−1)(b−2))`, the maximum of
/// `τ ↦ (τ² − bτ)/(2 − b − τ)` on `[1, b]` for `b > 3`.
pub fn proof_optimum(proof_b: f64) -> f64 {
    3.0 * proof_b - 4.0 - 2.0 * (2.0 * (proof_b - 1.0) * (proof_b - 2.0)).sqrt()
}

/// `Ψ(λ) = 2λ(K₁−a)/(1−λK) · Σ_{n≥2} n^{(2n−1)/(n−1)} α(λ)^{n−1}`.
///
/// The series is cut at the first `N` whose tail majorant
/// `Σ_{n>N} 2n²α^{n−1}` (summed in closed form) drops below `10⁻¹⁰` of the
/// partial sum, so the truncation error is certified.
pub fn psi(p: &BoundsProfile, lambda: f64) -> Result<f64> {
    let a = check_psi_domain(p, lambda)?;
    let prefactor = 2.0 * lambda * (p.k1 - p.a) / p.damping(lambda);
    if prefactor == 0.0 {
        return Ok(0.0);
    }
    let ln_a = a.ln();
    let mut sum = 0.0;
    for n in 2..PSI_MAX_TERMS {
        let nf = n as f64;
        sum += ((2.0 * nf - 1.0) / (nf - 1.0) * nf.ln() + (nf - 1.0) * ln_a).exp();
        if psi_tail_majorant(a, n) < PSI_TAIL_RATIO * sum {
            return Ok(prefactor * sum);
        }
    }
    Err(Error::Truncation(format!(
        "Psi series at lambda = {lambda} (alpha = {a}) needs more than {PSI_MAX_TERMS} terms"
    )))
}

/// `Σ_{n=N+1}^∞ 2n² x^{n−1}`.
pub fn psi_tail_majorant(x: f64, big_n: usize) -> f64 {
    let m = big_n as f64 + 1.0;
    let q = 1.0 - x;
    2.0 * x.powi(big_n as i32) * (m * m / q + 2.0 * m * x / (q * q) + x * (1.0 + x) / (q * q * q))
}

/// `Ψ₁(λ) = 4λ(K₁−a)/(1−λK) · α(4 − 3α + α²)/(1 − α)³ ≥ Ψ(λ)`.
pub fn psi1(p: &BoundsProfile, lambda: f64) -> Result<f64> {
    let a = check_psi_domain(p, lambda)?;
    Ok(
        4.0 * lambda * (p.k1 - p.a) / p.damping(lambda) * a * (4.0 - 3.0 * a + a * a)
            / (1.0 - a).powi(3),
    )
}

fn check_psi_domain(p: &BoundsProfile, lambda: f64) -> Result<f64> {
    let a = alpha(p, lambda);
    if lambda > 0.0 && a < 1.0 && a > 0.0 {
        Ok(a)
    } else {
        Err(Error::InvalidArgument(format!(
            "Psi is defined only where 0 < alpha < 1 (lambda = {lambda}, alpha = {a})"
        )))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LambdaStarStatus {
    /// `λ` solves `Ψ(λ) = 1`.
    Root,
    /// `Ψ < 1` on the whole domain; `λ` is the domain infimum.
    AlwaysBelowOne,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LambdaStar {
    pub lambda: f64,
    pub status: LambdaStarStatus,
}

/// Largest root of `Ψ(λ) = 1`, by bisection on the decreasing `Ψ`.
///
/// Bisection stops once `|Ψ(λ) − 1| ≤ tol` or the bracket is at machine
/// resolution.
pub fn lambda_star(p: &BoundsProfile, tol: f64) -> Result<LambdaStar> {
    let start = p.psi_domain_start();
    if p.k1 - p.a <= 0.0 {
        return Ok(LambdaStar {
            lambda: start,
            status: LambdaStarStatus::AlwaysBelowOne,
        });
    }
    let mut lo = start;
    let mut hi = start + 1.0;
    while psi(p, hi)? >= 1.0 {
        lo = hi;
        hi = start + 2.0 * (hi - start);
        if hi > 1e15 {
            return Err(Error::NonConvergence("Psi stays above 1".into()));
        }
    }
    let mut best = hi;
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let v = psi(p, mid)?;
        best = mid;
        if (v - 1.0).abs() <= tol && hi - lo <= 1e-12 * hi {
            break;
        }
        if v > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(LambdaStar {
        lambda: best,
        status: LambdaStarStatus::Root,
    })
}

/// `a_λ = max(a/(1+λa), (−2−λK)/(λ(1−λK)))`, the accretivity constant of `f∘G_λ`.
pub fn a_lambda(p: &BoundsProfile, lambda: f64) -> f64 {
    (p.a / (1.0 + lambda * p.a)).max((-2.0 - lambda * p.k) / (lambda * p.damping(lambda)))
}

/// `(1 − α(λ))/λ`, the same constant derived through `α`.
pub fn a_lambda_from_alpha(p: &BoundsProfile, lambda: f64) -> f64 {
    (1.0 - alpha(p, lambda)) / lambda
}

/// `b_λ = (1 + λa)β(λ)²`, the accretivity constant of `G_λ`.
pub fn b_lambda(p: &BoundsProfile, lambda: f64) -> Result<f64> {
    let b = beta(p, lambda)?;
    Ok((1.0 + lambda * p.a) * b.value * b.value)
}

/// `d(λ) = λα(λ)/(1 − λK)`.
pub fn d_lambda(p: &BoundsProfile, lambda: f64) -> f64 {
    lambda * alpha(p, lambda) / p.damping(lambda)
}

/// Maximum of `d` and its location: `λ = 1/√(a|K|)` when `9a ≥ |K|`,
/// otherwise `λ = 2/|3a + K|`.
pub fn d_max(p: &BoundsProfile) -> (f64, f64) {
    let k = p.k.abs();
    let argmax = if 9.0 * p.a >= k {
        1.0 / (p.a * k).sqrt()
    } else {
        2.0 / (3.0 * p.a + p.k).abs()
    };
    (d_lambda(p, argmax), argmax)
}

/// Right end of the domain of [`gamma_order`], `2/(2 + √5)`.
pub fn gamma_domain_end() -> f64 {
    2.0 / (2.0 + 5f64.sqrt())
}

/// Order of starlikeness `γ(t)` guaranteed for `t = b·d(λ)`.
pub fn gamma_order(t: f64) -> Result<f64> {
    let end = gamma_domain_end();
    if !(t > 0.0 && t <= end) {
        return Err(Error::InvalidArgument(format!(
            "t = {t} is outside (0, {end}]"
        )));
    }
    Ok(if t < 0.4 {
        2.0 * (1.0 - 2.0 * t) / (2.0 - t)
    } else {
        (4.0 - 8.0 * t - t * t) / (2.0 * (4.0 - 8.0 * t + 3.0 * t * t))
    })
}

/// Thresholds `1 + 21b/4 ∓ √((21b/4)² + 21b/2)` outside of which the resolvent
/// of a normalised generator (`a = 0`, `f'(0) = I`) is starlike of order ½.
pub fn order_half_window(bound_b: f64) -> Result<(f64, f64)> {
    if !(bound_b > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "b = {bound_b} must be positive"
        )));
    }
    let c = 21.0 * bound_b / 4.0;
    let r = (c * c + 2.0 * c).sqrt();
    Ok((1.0 + c - r, 1.0 + c + r))
}

/// The direct condition `γ(b·d(λ)) ≥ ½` (with `b·d(λ)` in the domain of `γ`).
pub fn order_half_direct(p: &BoundsProfile, bound_b: f64, lambda: f64) -> bool {
    let t = bound_b * d_lambda(p, lambda);
    if t == 0.0 {
        return true;
    }
    gamma_order(t).map_or(false, |g| g >= 0.5)
}

/// One row of a [`BoundsTable`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsRow {
    pub lambda: f64,
    pub alpha: f64,
    pub beta: Option<f64>,
    pub beta_vacuous: bool,
    pub rho: f64,
    pub outer_radius: f64,
    pub a_lambda: f64,
    pub b_lambda: Option<f64>,
    pub d: f64,
    pub psi: Option<f64>,
    pub psi1: Option<f64>,
    pub gamma: Option<f64>,
    pub order_half_direct: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsScalars {
    pub lambda_star: f64,
    pub lambda_star_status: LambdaStarStatus,
    pub d_max: f64,
    pub d_argmax: f64,
    pub order_half_window: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsTable {
    pub rows: Vec<BoundsRow>,
    pub scalars: BoundsScalars,
}

/// Tabulates every bound on a `λ` grid.
pub fn bounds_table(p: &BoundsProfile, lambdas: &[f64], star_tol: f64) -> Result<BoundsTable> {
    let rows = lambdas
        .iter()
        .map(|&lambda| {
            let radii = resolvent_radii(p, lambda);
            let beta = p.sup_norm.as_ref().map(|_| beta(p, lambda)).transpose()?;
            let d = d_lambda(p, lambda);
            let gamma = p.bound_b.map(|b| {
                let t = b * d;
                if t == 0.0 {
                    Some(1.0)
                } else {
                    gamma_order(t).ok()
                }
            });
            Ok(BoundsRow {
                lambda,
                alpha: alpha(p, lambda),
                beta: beta.map(|b| b.value),
                beta_vacuous: beta.map_or(false, |b| b.vacuous),
                rho: radii.rho,
                outer_radius: radii.outer,
                a_lambda: a_lambda(p, lambda),
                b_lambda: beta.map(|b| (1.0 + lambda * p.a) * b.value * b.value),
                d,
                psi: psi(p, lambda).ok(),
                psi1: psi1(p, lambda).ok(),
                gamma: gamma.flatten(),
                order_half_direct: p.bound_b.map(|b| order_half_direct(p, b, lambda)),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let star = lambda_star(p, star_tol)?;
    let (d_max_value, d_argmax) = d_max(p);
    let normalised = p.a == 0.0 && (p.k + 1.0).abs() < 1e-12;
    Ok(BoundsTable {
        rows,
        scalars: BoundsScalars {
            lambda_star: star.lambda,
            lambda_star_status: star.status,
            d_max: d_max_value,
            d_argmax,
            order_half_window: p
                .bound_b
                .filter(|b| normalised && *b > 0.0)
                .and_then(|b| order_half_window(b).ok()),
        },
    })
}

impl BoundsTable {
    pub fn csv_rows(&self) -> (Vec<String>, Vec<Vec<String>>) {
        let header = [
            "lambda",
            "alpha",
            "beta",
            "beta_vacuous",
            "rho",
            "R",
            "a_lambda",
            "b_lambda",
            "d",
            "psi",
            "psi1",
            "gamma",
            "order_half_direct",
        ]
        .map(String::from)
        .to_vec();
        let opt = |v: Option<f64>| v.map(fmt_f64).unwrap_or_default();
        let rows = self
            .rows
            .iter()
            .map(|r| {
                vec![
                    fmt_f64(r.lambda),
                    fmt_f64(r.alpha),
                    opt(r.beta),
                    r.beta_vacuous.to_string(),
                    fmt_f64(r.rho),
                    fmt_f64(r.outer_radius),
                    fmt_f64(r.a_lambda),
                    opt(r.b_lambda),
                    fmt_f64(r.d),
                    opt(r.psi),
                    opt(r.psi1),
                    opt(r.gamma),
                    r.order_half_direct
                        .map(|b| b.to_string())
                        .unwrap_or_default(),
                ]
            })
            .collect();
        (header, rows)
    }
}
