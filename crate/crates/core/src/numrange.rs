//! Numerical range of linear operators, accretivity constants, and the
//! pointwise inequalities characterising the classes `N_a`.
//!
//! On the Euclidean ball the numerical range `V(A)` is the field of values
//! `{⟨Ax, x⟩ : ‖x‖ = 1}`, whose support function in direction `θ` is the
//! largest eigenvalue of the Hermitian part of `e^{-iθ}A`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::holomap::{poly_term_norm, CMatrix, CVector, GeneratorMap, SphereSampler};
use crate::report::{DiagnosticsReport, SampleRecord};

/// Safety margin between a sampled accretivity constant and any constant
/// certified from it.
pub const CERTIFICATION_MARGIN: f64 = 1e-6;

/// Tolerance on the pointwise inequality margins.
pub const INEQUALITY_TOL: f64 = 1e-9;

const JACOBI_OFF_DIAGONAL_TOL: f64 = 1e-12;
const JACOBI_MAX_SWEEPS: usize = 100;

/// Eigenvalues of a Hermitian matrix in ascending order.
///
/// The n×n Hermitian matrix `H = S + iT` is embedded as the real symmetric
/// matrix `[[S, -T], [T, S]]`, whose spectrum is that of `H` with every
/// eigenvalue doubled, and diagonalised by cyclic Jacobi rotations.
pub fn hermitian_eigenvalues(h: &CMatrix) -> Vec<f64> {
    let n = h.dim();
    let m = 2 * n;
    let mut a = vec![0.0; m * m];
    for i in 0..n {
        for j in 0..n {
            let z = h[(i, j)];
            a[i * m + j] = z.re;
            a[(i + n) * m + (j + n)] = z.re;
            a[i * m + (j + n)] = -z.im;
            a[(i + n) * m + j] = z.im;
        }
    }
    let mut eig = symmetric_jacobi(a, m);
    eig.sort_by(f64::total_cmp);
    eig.into_iter().step_by(2).collect()
}

fn symmetric_jacobi(mut a: Vec<f64>, n: usize) -> Vec<f64> {
    let scale: f64 = a.iter().map(|v| v * v).sum::<f64>().sqrt();
    let threshold = JACOBI_OFF_DIAGONAL_TOL.max(1e-15 * scale);
    for _ in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j] * a[i * n + j])
            .sum::<f64>()
            .sqrt();
        if off <= threshold {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[i * n + i]).collect()
}

/// `K_A(θ) = sup_{w ∈ V(A)} Re(e^{-iθ} w)`.
pub fn support_function(a: &CMatrix, theta: f64) -> f64 {
    let rotated = a.scale(Complex64::from_polar(1.0, -theta));
    hermitian_eigenvalues(&rotated.hermitian_part())
        .last()
        .copied()
        .unwrap_or(f64::NEG_INFINITY)
}

/// Sampled accretivity data of a generator.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AccretivityReport {
    /// `min Re⟨f(x),x⟩/‖x‖²` over the samples: an upper estimate of the
    /// true infimum.
    pub a_star: f64,
    /// `K = K_{f'(0)}(π)`.
    pub k_pi: f64,
    /// `K₁ = K_{f'(0)}(0)`.
    pub k_0: f64,
    pub assumption_a: bool,
    pub worst_point: CVector,
    pub samples_used: usize,
    pub sample_based: bool,
}

impl AccretivityReport {
    /// Whether `a` may be used as a certified accretivity constant.
    ///
    /// A user-supplied constant must sit at least [`CERTIFICATION_MARGIN`]
    /// below the sampled minimum. A constant known in closed form only has
    /// to be consistent with the samples.
    pub fn certifies(&self, a: f64, analytic: bool) -> bool {
        a >= 0.0
            && if analytic {
                a <= self.a_star + INEQUALITY_TOL
            } else {
                a <= self.a_star - CERTIFICATION_MARGIN
            }
    }
}

/// Estimates the largest `a` with `Re⟨f(x),x⟩ ≥ a‖x‖²` on the ball.
pub fn accretivity_constant(f: &GeneratorMap, sampler: &SphereSampler) -> AccretivityReport {
    let points = sampler.points(f.dim());
    let (a_star, idx) = points
        .par_iter()
        .enumerate()
        .map(|(i, x)| {
            let ratio = f.value_at(x).inner_unchecked(x).re / x.norm_sqr();
            (ratio, i)
        })
        .reduce(|| (f64::INFINITY, usize::MAX), min_pair);
    let a = f.derivative_at_origin();
    let k_pi = support_function(&a, std::f64::consts::PI);
    let k_0 = support_function(&a, 0.0);
    AccretivityReport {
        a_star,
        k_pi,
        k_0,
        assumption_a: k_pi < 0.0 && k_pi + a_star <= 0.0,
        worst_point: points[idx].clone(),
        samples_used: points.len(),
        sample_based: true,
    }
}

/// Minimum by value, ties broken by the smaller index.
pub(crate) fn min_pair(a: (f64, usize), b: (f64, usize)) -> (f64, usize) {
    match a.0.total_cmp(&b.0) {
        std::cmp::Ordering::Less => a,
        std::cmp::Ordering::Greater => b,
        std::cmp::Ordering::Equal => {
            if a.1 <= b.1 {
                a
            } else {
                b
            }
        }
    }
}

/// `K_{f'(0)}(π) < 0` and `K_{f'(0)}(π) + a ≤ 0`.
pub fn check_assumption_a(f: &GeneratorMap, a: f64) -> bool {
    let k = support_function(&f.derivative_at_origin(), std::f64::consts::PI);
    k < 0.0 && k + a <= 0.0
}

/// Pointwise margins of the three equivalent descriptions of `f ∈ N_a`:
///
/// * `disk`: `⟨f(x),x⟩` lies in the disk with centre
///   `c(x) = (⟨Ax,x⟩ + ‖x‖²·conj⟨Ax,x⟩ − 2a‖x‖⁴)/(1−‖x‖²)` and radius
///   `r(x) = 2‖x‖(Re⟨Ax,x⟩ − a‖x‖²)/(1−‖x‖²)`;
/// * `lower`: `Re⟨Ax,x⟩(1−‖x‖)/(1+‖x‖) + 2a‖x‖³/(1+‖x‖) ≤ Re⟨f(x),x⟩`;
/// * `derivative`: `Re[2⟨f(x),x⟩ + (1−‖x‖²)⟨f'(x)x,x⟩] ≥ a‖x‖²(1+‖x‖²)`.
pub fn prop_ineq_diagnostics(
    f: &GeneratorMap,
    a: f64,
    sampler: &SphereSampler,
) -> DiagnosticsReport {
    let lin = f.derivative_at_origin();
    let records: Vec<SampleRecord> = sampler
        .points(f.dim())
        .par_iter()
        .map(|x| {
            let r2 = x.norm_sqr();
            let r = r2.sqrt();
            let p = lin.mul_vec_unchecked(x).inner_unchecked(x);
            let v = f.value_at(x).inner_unchecked(x);
            let center = (p + p.conj() * r2 - 2.0 * a * r2 * r2) / (1.0 - r2);
            let radius = 2.0 * r * (p.re - a * r2) / (1.0 - r2);
            let lower = p.re * (1.0 - r) / (1.0 + r) + 2.0 * a * r2 * r / (1.0 + r);
            let dfx = f.jacobian_at(x).mul_vec_unchecked(x).inner_unchecked(x);
            let lhs_iv = (2.0 * v + (1.0 - r2) * dfx).re;
            let rhs_iv = a * r2 * (1.0 + r2);
            SampleRecord::at(x)
                .value("re_value", v.re)
                .value("im_value", v.im)
                .value("re_center", center.re)
                .value("im_center", center.im)
                .value("radius", radius)
                .check("disk", radius - (v - center).norm())
                .check("lower", v.re - lower)
                .check("derivative", lhs_iv - rhs_iv)
        })
        .collect();
    let mut report = DiagnosticsReport::new("accretivity inequalities", INEQUALITY_TOL);
    report.extend(records);
    report
}

/// Compares `‖P_n‖` with `2 n^{n/(n−1)} (K_{f'(0)}(0) − a)` for `n = 2..=max_degree`.
pub fn coefficient_bound_check(
    f: &GeneratorMap,
    a: f64,
    max_degree: u32,
    sampler: &SphereSampler,
) -> crate::Result<DiagnosticsReport> {
    let k1 = support_function(&f.derivative_at_origin(), 0.0);
    let mut report = DiagnosticsReport::new("homogeneous coefficient bounds", INEQUALITY_TOL);
    for n in 2..=max_degree.max(2) {
        let part = f.homogeneous_part(n)?;
        let norm = poly_term_norm(&part, sampler);
        let nf = f64::from(n);
        let bound = 2.0 * nf.powf(nf / (nf - 1.0)) * (k1 - a);
        report.push(
            SampleRecord::for_parameter(nf)
                .value("norm_estimate", norm)
                .value("bound", bound)
                .check("coefficient", bound - norm),
        );
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::holomap::{HomogeneousTerm, Monomial};
    use std::f64::consts::PI;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn sampler() -> SphereSampler {
        SphereSampler::with_default_radii(5, 300).unwrap()
    }

    fn identity() -> GeneratorMap {
        GeneratorMap::linear(CMatrix::identity(1)).unwrap()
    }

    fn extremal() -> GeneratorMap {
        GeneratorMap::rational_disk(vec![c(0.0), c(1.0), c(-1.0)], vec![c(1.0), c(1.0)]).unwrap()
    }

    fn quadratic() -> GeneratorMap {
        let p = HomogeneousTerm::new(2, 2, vec![Monomial::new(0, vec![0, 2], c(0.5))]).unwrap();
        GeneratorMap::polynomial(CMatrix::identity(2), vec![p]).unwrap()
    }

    #[test]
    fn jacobi_matches_known_spectra() {
        let h = CMatrix::from_rows(vec![
            vec![c(2.0), Complex64::new(0.0, 1.0)],
            vec![Complex64::new(0.0, -1.0), c(2.0)],
        ])
        .unwrap();
        let eig = hermitian_eigenvalues(&h);
        assert!((eig[0] - 1.0).abs() < 1e-12 && (eig[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn support_function_examples() {
        let d = CMatrix::from_diagonal(&[c(1.0), c(2.0)]);
        assert!((support_function(&d, 0.0) - 2.0).abs() < 1e-12);
        assert!((support_function(&d, PI) + 1.0).abs() < 1e-12);

        let a = Complex64::new(0.3, -1.2);
        for theta in [0.0, 0.7, 2.0, PI] {
            let expected = (Complex64::from_polar(1.0, -theta) * a).re;
            assert!((support_function(&CMatrix::scalar(a), theta) - expected).abs() < 1e-12);
        }

        let j = CMatrix::from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]]).unwrap();
        assert!((support_function(&j, 0.0) - 1.5).abs() < 1e-12);
    }

    #[test]
    fn accretivity_examples() {
        let r = accretivity_constant(&identity(), &sampler());
        assert!((r.a_star - 1.0).abs() < 1e-12);
        assert!(r.assumption_a);

        let r = accretivity_constant(&extremal(), &sampler());
        assert!(r.a_star >= 0.0 && r.a_star < 1e-2, "{}", r.a_star);

        let r = accretivity_constant(&quadratic(), &sampler());
        let expected = 1.0 - 1.0 / (3.0 * 3f64.sqrt());
        assert!(
            r.a_star >= expected - 1e-9 && r.a_star < expected + 2e-3,
            "{}",
            r.a_star
        );
        assert!(r.a_star <= r.k_0);
    }

    #[test]
    fn negative_identity_is_not_accretive() {
        let f = GeneratorMap::linear(CMatrix::scalar(c(-1.0))).unwrap();
        let r = accretivity_constant(&f, &sampler());
        assert!(r.a_star < 0.0);
        assert!(!r.assumption_a);
        assert!(!r.certifies(0.0, false));
    }

    #[test]
    fn certification_rules() {
        let r = accretivity_constant(&identity(), &sampler());
        assert!(r.certifies(1.0, true));
        assert!(!r.certifies(1.0, false));
        assert!(r.certifies(0.99, false));
        assert!(!r.certifies(-0.1, false));
    }

    #[test]
    fn assumption_a_examples() {
        assert!(check_assumption_a(&identity(), 1.0));
        assert!(check_assumption_a(&extremal(), 0.0));
        let rot = GeneratorMap::linear(CMatrix::scalar(Complex64::new(0.0, 1.0))).unwrap();
        assert!(!check_assumption_a(&rot, 0.0));
    }

    #[test]
    fn identity_inequalities() {
        let s = SphereSampler::new(3, 4, vec![0.5]).unwrap();
        let rep = prop_ineq_diagnostics(&identity(), 1.0, &s);
        for rec in &rep.records {
            assert!(rec.get("radius").unwrap().abs() < 1e-15);
            assert!((rec.get("re_center").unwrap() - 0.25).abs() < 1e-15);
            assert!((rec.get("re_value").unwrap() - 0.25).abs() < 1e-15);
        }
        assert!(rep.passed());
        let rep = prop_ineq_diagnostics(&identity(), 1.0, &sampler());
        for rec in &rep.records {
            let r = rec.point.as_ref().unwrap().norm();
            let lower = rec.checks.iter().find(|c| c.name == "lower").unwrap();
            assert!(lower.margin.abs() < 1e-10);
            let deriv = rec.checks.iter().find(|c| c.name == "derivative").unwrap();
            assert!((deriv.margin - r * r * (2.0 - 2.0 * r * r)).abs() < 1e-12);
        }
    }

    #[test]
    fn nonlinear_fixtures_satisfy_inequalities() {
        assert!(prop_ineq_diagnostics(&extremal(), 0.0, &sampler()).passed());
        assert!(prop_ineq_diagnostics(&quadratic(), 0.5, &sampler()).passed());
    }

    #[test]
    fn coefficient_bound_examples() {
        let rep = coefficient_bound_check(&quadratic(), 0.5, 8, &sampler()).unwrap();
        let first = &rep.records[0];
        assert!((first.get("norm_estimate").unwrap() - 0.5).abs() < 1e-6);
        assert!((first.get("bound").unwrap() - 4.0).abs() < 1e-12);
        assert!(rep.passed());

        let rep = coefficient_bound_check(&identity(), 1.0, 8, &sampler()).unwrap();
        assert!(rep
            .records
            .iter()
            .all(|r| r.get("norm_estimate") == Some(0.0)));
        assert!(rep.passed());

        let rep = coefficient_bound_check(&extremal(), 0.0, 8, &sampler()).unwrap();
        assert!((rep.records[0].get("norm_estimate").unwrap() - 2.0).abs() < 1e-9);
        assert!((rep.records[0].get("bound").unwrap() - 8.0).abs() < 1e-12);
        assert!(rep.passed());
    }
}
