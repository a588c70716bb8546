//! Starlikeness of biholomorphic maps and of resolvents.
//!
//! For `h` with `h(0) = 0` the quantity `s(x) = ⟨h'(x)⁻¹h(x), x⟩/‖x‖²`
//! lies in the disk `|s − 1/(2γ)| ≤ 1/(2γ)` iff `Re(1/s) ≥ γ`, so the order
//! of starlikeness is estimated as the sampled infimum of `Re(1/s)`.

use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{self, BoundsProfile, LambdaStarStatus};
use crate::error::{Error, Result};
use crate::holomap::{CMatrix, CVector, GeneratorMap, SphereSampler};
use crate::numrange::min_pair;
use crate::output::{fmt_f64, write_csv};
use crate::report::{DiagnosticsReport, SampleRecord};
use crate::resolvent::ResolventFamily;

/// Slack below a claimed order before a theorem check fails.
pub const ORDER_TOL: f64 = 1e-3;
/// Largest step of the finite-difference model of `G_λ'`.
pub const FD_STEP: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Generic,
    ResolventIdentity,
}

/// Something that produces `s(x)` at points of the ball.
pub trait QuantitySource: Sync {
    fn dim(&self) -> usize;
    fn quantity(&self, x: &CVector) -> Result<Complex64>;
    fn method(&self) -> Method;
}

/// `s(x) = ⟨h'(x)⁻¹h(x), x⟩/‖x‖²`, with `h'(x)⁻¹h(x)` from a linear solve.
pub fn starlike_quantity<H, D>(h_eval: H, h_deriv: D, x: &CVector) -> Result<Complex64>
where
    H: Fn(&CVector) -> CVector,
    D: Fn(&CVector) -> CMatrix,
{
    let n2 = x.norm_sqr();
    if n2 == 0.0 {
        return Err(Error::InvalidArgument("s(x) is undefined at x = 0".into()));
    }
    let v = h_deriv(x).solve(&h_eval(x))?;
    Ok(v.inner(x)? / n2)
}

/// A map given by closures for `h` and `h'`.
pub struct FnQuantity<H, D> {
    dim: usize,
    eval: H,
    deriv: D,
}

impl<H, D> FnQuantity<H, D>
where
    H: Fn(&CVector) -> CVector + Sync,
    D: Fn(&CVector) -> CMatrix + Sync,
{
    pub fn new(dim: usize, eval: H, deriv: D) -> Self {
        Self { dim, eval, deriv }
    }
}

impl<H, D> QuantitySource for FnQuantity<H, D>
where
    H: Fn(&CVector) -> CVector + Sync,
    D: Fn(&CVector) -> CMatrix + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn quantity(&self, x: &CVector) -> Result<Complex64> {
        starlike_quantity(&self.eval, &self.deriv, x)
    }

    fn method(&self) -> Method {
        Method::Generic
    }
}

/// `s(x)` of a generator map itself.
pub struct MapQuantity<'a>(pub &'a GeneratorMap);

impl QuantitySource for MapQuantity<'_> {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn quantity(&self, x: &CVector) -> Result<Complex64> {
        starlike_quantity(|y| self.0.value_at(y), |y| self.0.jacobian_at(y), x)
    }

    fn method(&self) -> Method {
        Method::Generic
    }
}

/// `s(x)` of `G_λ` through the resolvent identity.
pub struct ResolventQuantity<'a> {
    pub family: &'a ResolventFamily,
    pub lambda: f64,
}

impl QuantitySource for ResolventQuantity<'_> {
    fn dim(&self) -> usize {
        self.family.dim()
    }

    fn quantity(&self, x: &CVector) -> Result<Complex64> {
        resolvent_starlike_quantity(self.family, self.lambda, x)
    }

    fn method(&self) -> Method {
        Method::ResolventIdentity
    }
}

/// `s(x)` for `G = G_λ` from `G'(x)⁻¹G(x) = w + λf'(w)w`, `w = G(x)`.
pub fn resolvent_starlike_quantity(
    fam: &ResolventFamily,
    lambda: f64,
    x: &CVector,
) -> Result<Complex64> {
    let n2 = x.norm_sqr();
    if n2 == 0.0 {
        return Err(Error::InvalidArgument("s(x) is undefined at x = 0".into()));
    }
    let w = fam.resolve(lambda, x)?;
    let jw = fam.generator().jacobian_at(&w).mul_vec_unchecked(&w);
    let v = w.axpy(Complex64::new(lambda, 0.0), &jw);
    Ok(v.inner_unchecked(x) / n2)
}

/// `s(x)` for `G_λ` from [`starlike_quantity`] with `G_λ'` replaced by
/// central differences.
pub fn resolvent_starlike_quantity_fd(
    fam: &ResolventFamily,
    lambda: f64,
    x: &CVector,
) -> Result<Complex64> {
    let h = FD_STEP.min((1.0 - x.norm()) / 4.0);
    let g = fam.resolve(lambda, x)?;
    let n = x.dim();
    let mut jac = CMatrix::zeros(n);
    for k in 0..n {
        let e = CVector::basis(n, k);
        let plus = fam.resolve(lambda, &x.axpy(Complex64::new(h, 0.0), &e))?;
        let minus = fam.resolve(lambda, &x.axpy(Complex64::new(-h, 0.0), &e))?;
        let col = (&plus - &minus).scale_real(0.5 / h);
        for i in 0..n {
            jac[(i, k)] = col[i];
        }
    }
    starlike_quantity(|_| g.clone(), |_| jac.clone(), x)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderEstimate {
    /// `min Re(1/s)` over the samples, clamped to `[0, 1]`.
    pub gamma_hat: f64,
    /// The minimum before clamping.
    pub raw_min: f64,
    pub worst_point: CVector,
    pub samples_used: usize,
    pub method: Method,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuantitySample {
    pub x: CVector,
    pub s: Complex64,
    pub re_inv_s: f64,
}

/// `s(x)` and `Re(1/s(x))` at every sample point.
pub fn quantity_samples(
    source: &dyn QuantitySource,
    sampler: &SphereSampler,
) -> Result<Vec<QuantitySample>> {
    sampler
        .points(source.dim())
        .into_par_iter()
        .map(|x| {
            let s = source.quantity(&x)?;
            if s == Complex64::new(0.0, 0.0) {
                return Err(Error::NonConvergence(format!(
                    "s(x) = 0 at {:?}",
                    x.coords()
                )));
            }
            Ok(QuantitySample {
                re_inv_s: s.inv().re,
                x,
                s,
            })
        })
        .collect()
}

pub fn write_samples_csv(samples: &[QuantitySample], path: &Path) -> Result<()> {
    let dim = samples.first().map_or(0, |s| s.x.dim());
    let mut header = Vec::new();
    for k in 0..dim {
        header.push(format!("re_x{k}"));
        header.push(format!("im_x{k}"));
    }
    header.extend(["re_s", "im_s", "re_inv_s"].map(String::from));
    let rows: Vec<Vec<String>> = samples
        .iter()
        .map(|q| {
            let mut row = Vec::new();
            for z in q.x.coords() {
                row.push(fmt_f64(z.re));
                row.push(fmt_f64(z.im));
            }
            row.extend([fmt_f64(q.s.re), fmt_f64(q.s.im), fmt_f64(q.re_inv_s)]);
            row
        })
        .collect();
    write_csv(path, &header, &rows)
}

pub fn order_from_samples(samples: &[QuantitySample], method: Method) -> Result<OrderEstimate> {
    let (raw_min, idx) = samples
        .iter()
        .enumerate()
        .map(|(i, q)| (q.re_inv_s, i))
        .fold((f64::INFINITY, usize::MAX), min_pair);
    if idx == usize::MAX {
        return Err(Error::InvalidArgument("no samples".into()));
    }
    Ok(OrderEstimate {
        gamma_hat: raw_min.clamp(0.0, 1.0),
        raw_min,
        worst_point: samples[idx].x.clone(),
        samples_used: samples.len(),
        method,
    })
}

/// Sampled order of starlikeness.
pub fn order_estimate(
    source: &dyn QuantitySource,
    sampler: &SphereSampler,
) -> Result<OrderEstimate> {
    order_from_samples(&quantity_samples(source, sampler)?, source.method())
}

fn order_report(
    title: String,
    fam: &ResolventFamily,
    lambda: f64,
    claimed: f64,
    sampler: &SphereSampler,
) -> Result<DiagnosticsReport> {
    let source = ResolventQuantity {
        family: fam,
        lambda,
    };
    let samples = quantity_samples(&source, sampler)?;
    let mut report = DiagnosticsReport::new(title, ORDER_TOL);
    for q in samples {
        report.push(
            SampleRecord::at(&q.x)
                .with_parameter(lambda)
                .value("re_s", q.s.re)
                .value("im_s", q.s.im)
                .value("re_inv_s", q.re_inv_s)
                .value("claimed_order", claimed)
                .check("order", q.re_inv_s - claimed),
        );
    }
    Ok(report)
}

/// For `λ ≥ λ*`, `G_λ` is starlike of order ½.
pub fn verify_theorem_order1(
    fam: &ResolventFamily,
    lambda: f64,
    p: &BoundsProfile,
    sampler: &SphereSampler,
) -> Result<DiagnosticsReport> {
    let title = format!("order 1/2 beyond lambda* at lambda = {lambda}");
    let star = bounds::lambda_star(p, 1e-10)?;
    if star.status == LambdaStarStatus::Root && lambda < star.lambda {
        return Ok(DiagnosticsReport::not_applicable(
            title,
            ORDER_TOL,
            format!("lambda = {lambda} is below lambda* = {}", star.lambda),
        ));
    }
    order_report(title, fam, lambda, 0.5, sampler)
}

/// Sampled `sup ‖f'(x) − f'(0)‖/‖x‖`, an estimate of `b`.
pub fn estimate_bound_b(f: &GeneratorMap, sampler: &SphereSampler) -> f64 {
    let a = f.derivative_at_origin();
    sampler
        .points(f.dim())
        .par_iter()
        .map(|x| (&f.jacobian_at(x) - &a).operator_norm() / x.norm())
        .reduce(|| 0.0, f64::max)
}

/// `G_λ` is starlike of order `γ(b·d(λ))` when `b·d(λ) ≤ 2/(2 + √5)`.
///
/// `b` comes from the profile, or from [`estimate_bound_b`] if absent.
pub fn verify_theorem_order2(
    fam: &ResolventFamily,
    lambda: f64,
    p: &BoundsProfile,
    sampler: &SphereSampler,
) -> Result<DiagnosticsReport> {
    let title = format!("order gamma(b d) at lambda = {lambda}");
    let b = p
        .bound_b
        .unwrap_or_else(|| estimate_bound_b(fam.generator(), sampler));
    let t = b * bounds::d_lambda(p, lambda);
    let claimed = if t == 0.0 {
        1.0
    } else if t > bounds::gamma_domain_end() {
        return Ok(DiagnosticsReport::not_applicable(
            title,
            ORDER_TOL,
            format!("b d(lambda) = {t} exceeds 2/(2+sqrt 5)"),
        ));
    } else {
        bounds::gamma_order(t)?
    };
    order_report(title, fam, lambda, claimed, sampler)
}
