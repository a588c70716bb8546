//! The resolvent `G_λ = (I + λf)⁻¹` of a generator in `N_a`.
//!
//! [`ResolventFamily::solve`] follows the branch through `G_0 = I`: the
//! parameter is continued from `0` to `λ` and each stage is solved by damped
//! Newton iteration on `F(w) = w + μf(w) − x`.

use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{self, BoundsProfile};
use crate::error::{Error, Result};
use crate::holomap::{CMatrix, CVector, GeneratorMap, SphereSampler};
use crate::numrange::{check_assumption_a, INEQUALITY_TOL};
use crate::output::{fmt_f64, write_csv};
use crate::report::{DiagnosticsReport, SampleRecord};

/// Below this `λ` the resolvent is the identity.
pub const LAMBDA_FLOOR: f64 = 1e-12;
/// Largest accepted change of `w` across one continuation step.
pub const MAX_CONTINUATION_JUMP: f64 = 0.1;
/// Cap of the ray march in [`singularity_radius_1d`].
pub const SINGULARITY_CAP: f64 = 10.0;
const DEGENERATE_JACOBIAN: f64 = 1e-8;
const ARMIJO: f64 = 1e-4;

/// Schedule of the intermediate parameters `μ_k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ContinuationPath {
    /// `μ_k = λk/N`.
    Linear,
    /// `μ_k = λ2^{k−N}` for `k ≥ 1`.
    Geometric,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub continuation_steps: usize,
    pub path: ContinuationPath,
    pub record_trace: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iter: 50,
            continuation_steps: 8,
            path: ContinuationPath::Linear,
            record_trace: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRow {
    pub step: usize,
    pub mu: f64,
    pub w: CVector,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveResult {
    pub w: CVector,
    /// `‖w + λf(w) − x‖`.
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    pub continuation_steps: usize,
    pub trace: Vec<TraceRow>,
}

impl SolveResult {
    pub fn trace_csv_rows(&self) -> (Vec<String>, Vec<Vec<String>>) {
        let dim = self.w.dim();
        let mut header = vec!["step".to_owned(), "mu".to_owned()];
        for k in 0..dim {
            header.push(format!("re_w{k}"));
            header.push(format!("im_w{k}"));
        }
        header.push("residual".to_owned());
        let rows = self
            .trace
            .iter()
            .map(|t| {
                let mut row = vec![t.step.to_string(), fmt_f64(t.mu)];
                for z in t.w.coords() {
                    row.push(fmt_f64(z.re));
                    row.push(fmt_f64(z.im));
                }
                row.push(fmt_f64(t.residual));
                row
            })
            .collect();
        (header, rows)
    }

    pub fn write_trace(&self, path: &Path) -> Result<()> {
        let (header, rows) = self.trace_csv_rows();
        write_csv(path, &header, &rows)
    }
}

/// `{G_λ}_{λ>0}` for a generator satisfying Assumption A.
#[derive(Debug, Clone)]
pub struct ResolventFamily {
    generator: GeneratorMap,
    a: f64,
    options: SolverOptions,
}

impl ResolventFamily {
    pub fn new(generator: GeneratorMap, a: f64) -> Result<Self> {
        if !check_assumption_a(&generator, a) {
            return Err(Error::InvalidGenerator(format!(
                "Assumption A fails for a = {a}: need K < 0 and K + a <= 0"
            )));
        }
        Ok(Self {
            generator,
            a,
            options: SolverOptions::default(),
        })
    }

    pub fn with_options(mut self, options: SolverOptions) -> Self {
        self.options = options;
        self
    }

    pub fn generator(&self) -> &GeneratorMap {
        &self.generator
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn options(&self) -> &SolverOptions {
        &self.options
    }

    pub fn dim(&self) -> usize {
        self.generator.dim()
    }

    /// Solves `w + λf(w) = x`; non-convergence is reported in the result.
    pub fn solve(&self, lambda: f64, x: &CVector) -> Result<SolveResult> {
        self.solve_with(lambda, x, &self.options)
    }

    pub fn solve_with(
        &self,
        lambda: f64,
        x: &CVector,
        opts: &SolverOptions,
    ) -> Result<SolveResult> {
        if !(lambda > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "lambda = {lambda} must be positive"
            )));
        }
        x.check_dim(self.dim())?;
        if !(x.norm() < 1.0) {
            return Err(Error::OutsideBall { norm: x.norm() });
        }
        if lambda < LAMBDA_FLOOR {
            return Ok(SolveResult {
                residual: self.residual(lambda, x, x),
                w: x.clone(),
                iterations: 0,
                converged: true,
                continuation_steps: 0,
                trace: Vec::new(),
            });
        }

        let n = opts.continuation_steps.max(1);
        let mut targets: Vec<f64> = (1..=n)
            .rev()
            .map(|k| match opts.path {
                ContinuationPath::Linear => lambda * k as f64 / n as f64,
                ContinuationPath::Geometric => lambda * 0.5f64.powi((n - k) as i32),
            })
            .collect();
        let mut w = x.clone();
        let mut mu_done = 0.0;
        let mut iterations = 0;
        let mut steps = 0;
        let mut trace = Vec::new();
        if opts.record_trace {
            trace.push(TraceRow {
                step: 0,
                mu: 0.0,
                w: w.clone(),
                residual: 0.0,
            });
        }

        while let Some(mu) = targets.pop() {
            let attempt = self.newton(mu, x, &w, opts);
            iterations += attempt.iterations;
            match attempt.w {
                Some(next) if next.distance(&w) < MAX_CONTINUATION_JUMP => {
                    w = next;
                    mu_done = mu;
                    steps += 1;
                    if opts.record_trace {
                        trace.push(TraceRow {
                            step: steps,
                            mu,
                            w: w.clone(),
                            residual: attempt.residual,
                        });
                    }
                }
                _ => {
                    if mu - mu_done <= lambda * 1e-10 {
                        return Ok(SolveResult {
                            residual: self.residual(mu_done, x, &w),
                            w,
                            iterations,
                            converged: false,
                            continuation_steps: steps,
                            trace,
                        });
                    }
                    targets.push(mu);
                    targets.push(0.5 * (mu_done + mu));
                }
            }
        }
        let residual = self.residual(lambda, x, &w);
        Ok(SolveResult {
            converged: residual < opts.tol && w.norm() < 1.0,
            residual,
            w,
            iterations,
            continuation_steps: steps,
            trace,
        })
    }

    /// `G_λ(x)`, failing if the solver does not converge.
    pub fn resolve(&self, lambda: f64, x: &CVector) -> Result<CVector> {
        let r = self.solve(lambda, x)?;
        if r.converged {
            Ok(r.w)
        } else {
            Err(Error::NonConvergence(format!(
                "resolvent at lambda = {lambda}: residual {:e} after {} iterations",
                r.residual, r.iterations
            )))
        }
    }

    /// Solves at many points in parallel; results keep the input order.
    pub fn solve_many(&self, lambda: f64, xs: &[CVector]) -> Vec<Result<SolveResult>> {
        xs.par_iter().map(|x| self.solve(lambda, x)).collect()
    }

    fn residual(&self, mu: f64, x: &CVector, w: &CVector) -> f64 {
        self.generator
            .value_at(w)
            .scale_real(mu)
            .axpy(Complex64::new(1.0, 0.0), w)
            .distance(x)
    }

    fn newton(&self, mu: f64, x: &CVector, start: &CVector, opts: &SolverOptions) -> NewtonOutcome {
        let dim = self.dim();
        let mut w = start.clone();
        let mut res_vec = &(&w + &self.generator.value_at(&w).scale_real(mu)) - x;
        let mut res = res_vec.norm();
        for it in 0..opts.max_iter {
            if res < opts.tol {
                return NewtonOutcome {
                    w: Some(w),
                    residual: res,
                    iterations: it,
                };
            }
            let jac = &CMatrix::identity(dim) + &(&self.generator.jacobian_at(&w) * mu);
            let Ok(delta) = jac.solve(&(-&res_vec)) else {
                break;
            };
            let mut t = 1.0;
            let accepted = loop {
                let trial = w.axpy(Complex64::new(t, 0.0), &delta);
                if trial.norm() < 1.0 && trial.is_finite() {
                    let r = &(&trial + &self.generator.value_at(&trial).scale_real(mu)) - x;
                    let rn = r.norm();
                    if rn <= (1.0 - ARMIJO * t) * res {
                        break Some((trial, r, rn));
                    }
                }
                t *= 0.5;
                if t < 1e-10 {
                    break None;
                }
            };
            let Some((trial, r, rn)) = accepted else {
                break;
            };
            w = trial;
            res_vec = r;
            res = rn;
        }
        NewtonOutcome {
            w: (res < opts.tol).then_some(w),
            residual: res,
            iterations: opts.max_iter,
        }
    }
}

struct NewtonOutcome {
    w: Option<CVector>,
    residual: f64,
    iterations: usize,
}

fn solve_record(
    fam: &ResolventFamily,
    lambda: f64,
    x: &CVector,
) -> std::result::Result<SolveResult, String> {
    match fam.solve(lambda, x) {
        Ok(r) if r.converged => Ok(r),
        Ok(r) => Err(format!(
            "solver did not converge (residual {:e})",
            r.residual
        )),
        Err(e) => Err(e.to_string()),
    }
}

/// Checks `β(λ)‖x‖ ≤ ‖G_λ(x)‖ ≤ α(λ)‖x‖` at every sample point.
pub fn verify_distortion(
    fam: &ResolventFamily,
    lambda: f64,
    sampler: &SphereSampler,
    profile: &BoundsProfile,
) -> Result<DiagnosticsReport> {
    let alpha = bounds::alpha(profile, lambda);
    let beta = bounds::beta(profile, lambda)?;
    let records: Vec<SampleRecord> = sampler
        .points(fam.dim())
        .par_iter()
        .map(|x| {
            let rec = SampleRecord::at(x).with_parameter(lambda);
            match solve_record(fam, lambda, x) {
                Ok(r) => {
                    let ratio = r.w.norm() / x.norm();
                    let rec = rec
                        .value("ratio", ratio)
                        .value("alpha", alpha)
                        .value("beta", beta.value)
                        .value("residual", r.residual)
                        .check("upper", alpha - ratio)
                        .check("lower", ratio - beta.value);
                    if beta.vacuous {
                        rec.note("lower bound vacuous")
                    } else {
                        rec
                    }
                }
                Err(e) => rec.check("solve", f64::NAN).note(e),
            }
        })
        .collect();
    let mut report =
        DiagnosticsReport::new(format!("distortion at lambda = {lambda}"), INEQUALITY_TOL);
    report.extend(records);
    Ok(report)
}

/// Checks `‖w + λf(w)‖ ≥ 1` for `α(λ) ≤ ‖w‖ < 1`.
///
/// The sampler radii `r` are mapped to `α + (1 − α)r`.
pub fn boundary_pushout_check(
    fam: &ResolventFamily,
    lambda: f64,
    sampler: &SphereSampler,
    profile: &BoundsProfile,
) -> Result<DiagnosticsReport> {
    let title = format!("boundary push-out at lambda = {lambda}");
    let alpha = bounds::alpha(profile, lambda);
    if alpha >= 1.0 {
        return Ok(DiagnosticsReport::not_applicable(
            title,
            INEQUALITY_TOL,
            "alpha(lambda) = 1 leaves no annulus",
        ));
    }
    let radii = sampler
        .radii()
        .iter()
        .map(|r| alpha + (1.0 - alpha) * r)
        .collect();
    let points = sampler.with_radii(radii)?.points(fam.dim());
    let f = fam.generator();
    let records: Vec<SampleRecord> = points
        .par_iter()
        .map(|w| {
            let image = w.axpy(Complex64::new(lambda, 0.0), &f.value_at(w)).norm();
            SampleRecord::at(w)
                .with_parameter(lambda)
                .value("image_norm", image)
                .check("pushout", image - 1.0)
        })
        .collect();
    let mut report = DiagnosticsReport::new(title, INEQUALITY_TOL);
    report.extend(records);
    Ok(report)
}

/// Sampled accretivity of `f∘G_λ` and `G_λ`, compared with `a_λ` and `b_λ`.
pub fn composed_accretivity(
    fam: &ResolventFamily,
    lambda: f64,
    sampler: &SphereSampler,
    profile: &BoundsProfile,
) -> Result<DiagnosticsReport> {
    let a_l = bounds::a_lambda(profile, lambda);
    let beta = bounds::beta(profile, lambda)?;
    let b_l = (1.0 + lambda * profile.a) * beta.value * beta.value;
    let f = fam.generator();
    let records: Vec<SampleRecord> = sampler
        .points(fam.dim())
        .par_iter()
        .map(|x| {
            let rec = SampleRecord::at(x).with_parameter(lambda);
            match solve_record(fam, lambda, x) {
                Ok(r) => {
                    let n2 = x.norm_sqr();
                    let composed = f.value_at(&r.w).inner_unchecked(x).re / n2;
                    let resolvent = r.w.inner_unchecked(x).re / n2;
                    rec.value("composed_ratio", composed)
                        .value("resolvent_ratio", resolvent)
                        .check("composed", composed - a_l)
                        .check("resolvent", resolvent - b_l)
                }
                Err(e) => rec.check("solve", f64::NAN).note(e),
            }
        })
        .collect();
    let mut report = DiagnosticsReport::new(
        format!("composed accretivity at lambda = {lambda}"),
        INEQUALITY_TOL,
    );
    report.extend(records);
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RayRadius {
    /// Largest `t` reached along `x = t·direction`.
    pub radius: f64,
    /// The march hit [`SINGULARITY_CAP`] without breaking down.
    pub capped: bool,
}

/// Marches `x = t·direction` outward and returns the largest `t` at which the
/// resolvent branch can still be continued.
///
/// Each step uses a tangent predictor and a Newton corrector; a step fails on
/// divergence, a jump of `w` above [`MAX_CONTINUATION_JUMP`], or
/// `|1 + λf'(w)| < 10⁻⁸`, and is then halved down to `10⁻¹²`.
pub fn singularity_radius_1d(
    fam: &ResolventFamily,
    lambda: f64,
    direction: Complex64,
) -> Result<RayRadius> {
    if fam.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            found: fam.dim(),
        });
    }
    if !((direction.norm() - 1.0).abs() < 1e-12) {
        return Err(Error::InvalidArgument(
            "direction must have modulus 1".into(),
        ));
    }
    let f = fam.generator();
    let value = |w: Complex64| f.value_at(&CVector::scalar(w))[0];
    let slope = |w: Complex64| 1.0 + lambda * f.jacobian_at(&CVector::scalar(w))[(0, 0)];

    let mut t = 0.5;
    let mut w = fam.resolve(lambda, &CVector::scalar(direction * t))?[0];
    let max_step: f64 = 0.05;
    let mut h = max_step;
    while h >= 1e-12 {
        if t >= SINGULARITY_CAP {
            return Ok(RayRadius {
                radius: SINGULARITY_CAP,
                capped: true,
            });
        }
        let step = h.min(SINGULARITY_CAP - t);
        let target = direction * (t + step);
        let d = slope(w);
        let mut z = w + direction * step / d;
        let mut ok = false;
        for _ in 0..30 {
            let d = slope(z);
            if !(d.norm() >= DEGENERATE_JACOBIAN) {
                break;
            }
            let r = z + lambda * value(z) - target;
            if !r.is_finite() {
                break;
            }
            if r.norm() < 1e-13 {
                ok = true;
                break;
            }
            z -= r / d;
        }
        ok = ok && slope(z).norm() >= DEGENERATE_JACOBIAN && (z - w).norm() < MAX_CONTINUATION_JUMP;
        if ok {
            t += step;
            w = z;
            h = (1.5 * h).min(max_step);
        } else {
            h *= 0.5;
        }
    }
    Ok(RayRadius {
        radius: t,
        capped: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::holomap::CMatrix;

    fn extremal() -> GeneratorMap {
        let c = |v: f64| Complex64::new(v, 0.0);
        GeneratorMap::rational_disk(vec![c(0.0), c(1.0), c(-1.0)], vec![c(1.0), c(1.0)]).unwrap()
    }

    fn scalar(v: f64) -> CVector {
        CVector::from_real(&[v])
    }

    /// Root of `(1−λ)w² + (1+λ−x)w − x = 0` with `w(0) = 0`.
    fn extremal_oracle(lambda: f64, x: f64) -> f64 {
        let (a, b, c) = (1.0 - lambda, 1.0 + lambda - x, -x);
        if a == 0.0 {
            return -c / b;
        }
        let disc = (b * b - 4.0 * a * c).sqrt();
        let r1 = (-b + disc) / (2.0 * a);
        let r2 = (-b - disc) / (2.0 * a);
        if r1.abs() < r2.abs() {
            r1
        } else {
            r2
        }
    }

    #[test]
    fn closed_form_resolvents() {
        let fam = ResolventFamily::new(extremal(), 0.0).unwrap();
        let w = fam.resolve(1.0, &scalar(0.5)).unwrap();
        assert!((w[0].re - 1.0 / 3.0).abs() < 1e-12);

        let id =
            ResolventFamily::new(GeneratorMap::linear(CMatrix::identity(1)).unwrap(), 1.0).unwrap();
        for l in [0.1, 1.0, 7.5] {
            let w = id.resolve(l, &scalar(0.8)).unwrap();
            assert!((w[0].re - 0.8 / (1.0 + l)).abs() < 1e-12);
        }

        let diag =
            GeneratorMap::linear(CMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, 2.0]]).unwrap())
                .unwrap();
        let fam = ResolventFamily::new(diag, 1.0).unwrap();
        let w = fam.resolve(2.0, &CVector::from_real(&[0.4, 0.2])).unwrap();
        assert!((w[0].re - 0.4 / 3.0).abs() < 1e-12 && (w[1].re - 0.04).abs() < 1e-12);
    }

    #[test]
    fn extremal_matches_algebraic_branch() {
        let fam = ResolventFamily::new(extremal(), 0.0).unwrap();
        for lambda in [0.5, 1.0, 4.0, 60.0] {
            for x in [-0.99, -0.5, 0.0, 0.3, 0.9, 0.999] {
                let w = fam.resolve(lambda, &scalar(x)).unwrap();
                assert!(
                    (w[0].re - extremal_oracle(lambda, x)).abs() < 1e-10,
                    "{lambda} {x}"
                );
                assert!(w[0].im.abs() < 1e-14);
            }
        }
        let w = fam.resolve(4.0, &scalar(0.5)).unwrap();
        assert!((w[0].re - (4.5 - 14.25f64.sqrt()) / 6.0).abs() < 1e-12);
    }

    #[test]
    fn paths_agree_and_trace_is_recorded() {
        let fam = ResolventFamily::new(extremal(), 0.0).unwrap();
        let x = CVector::new(vec![Complex64::new(0.3, 0.6)]);
        let lin = fam.solve(10.0, &x).unwrap();
        let opts = SolverOptions {
            path: ContinuationPath::Geometric,
            record_trace: true,
            ..SolverOptions::default()
        };
        let geo = fam.solve_with(10.0, &x, &opts).unwrap();
        assert!(lin.converged && geo.converged);
        assert!(lin.w.distance(&geo.w) < 1e-8);
        assert_eq!(geo.trace.len(), geo.continuation_steps + 1);
        let (header, rows) = geo.trace_csv_rows();
        assert_eq!(header, ["step", "mu", "re_w0", "im_w0", "residual"]);
        assert_eq!(rows.len(), geo.trace.len());
    }

    #[test]
    fn degenerate_inputs() {
        let fam = ResolventFamily::new(extremal(), 0.0).unwrap();
        let r = fam.solve(1e-13, &scalar(0.4)).unwrap();
        assert_eq!(r.w, scalar(0.4));
        assert!(fam.solve(0.0, &scalar(0.4)).is_err());
        assert!(fam.solve(1.0, &scalar(1.0)).is_err());
        assert!(fam.solve(1.0, &CVector::from_real(&[0.1, 0.1])).is_err());
        assert_eq!(fam.resolve(3.0, &scalar(0.0)).unwrap(), scalar(0.0));
        let neg = GeneratorMap::linear(CMatrix::scalar(Complex64::new(-1.0, 0.0))).unwrap();
        assert!(ResolventFamily::new(neg, 0.0).is_err());
    }

    #[test]
    fn singularity_radius_matches_discriminant() {
        let fam = ResolventFamily::new(extremal(), 0.0).unwrap();
        for lambda in [3.0f64, 4.0, 10.0] {
            let expected = 3.0 * lambda - 1.0 - 2.0 * (2.0 * lambda * (lambda - 1.0)).sqrt();
            let r = singularity_radius_1d(&fam, lambda, Complex64::new(1.0, 0.0)).unwrap();
            assert!(!r.capped);
            assert!(
                (r.radius - expected).abs() < 1e-6,
                "{lambda}: {} vs {expected}",
                r.radius
            );
        }
        let id =
            ResolventFamily::new(GeneratorMap::linear(CMatrix::identity(1)).unwrap(), 1.0).unwrap();
        let r = singularity_radius_1d(&id, 2.0, Complex64::new(0.0, 1.0)).unwrap();
        assert!(r.capped && r.radius == SINGULARITY_CAP);
    }

    #[test]
    fn corollary_checks_on_extremal() {
        let fam = ResolventFamily::new(extremal(), 0.0).unwrap();
        let sampler = SphereSampler::with_default_radii(7, 24).unwrap();
        let profile = BoundsProfile::from_generator(fam.generator(), 0.0, &sampler).unwrap();
        for lambda in [1.0, 4.0, 20.0] {
            assert!(verify_distortion(&fam, lambda, &sampler, &profile)
                .unwrap()
                .passed());
            assert!(boundary_pushout_check(&fam, lambda, &sampler, &profile)
                .unwrap()
                .passed());
            assert!(composed_accretivity(&fam, lambda, &sampler, &profile)
                .unwrap()
                .passed());
        }
        assert!(!boundary_pushout_check(&fam, 1.0, &sampler, &profile)
            .unwrap()
            .is_applicable());
    }

    #[test]
    fn linear_bounds_are_tight() {
        let id =
            ResolventFamily::new(GeneratorMap::linear(CMatrix::identity(1)).unwrap(), 1.0).unwrap();
        let sampler = SphereSampler::with_default_radii(3, 8).unwrap();
        let profile = BoundsProfile::from_generator(id.generator(), 1.0, &sampler).unwrap();
        let d = verify_distortion(&id, 4.0, &sampler, &profile).unwrap();
        assert!(d.passed());
        assert!(d.worst_margin("upper").unwrap().abs() < 1e-12);
        let c = composed_accretivity(&id, 4.0, &sampler, &profile).unwrap();
        assert!(c.passed());
        assert!(c.worst_margin("composed").unwrap().abs() < 1e-12);
        assert!(c.worst_margin("resolvent").unwrap().abs() < 1e-12);
    }
}
