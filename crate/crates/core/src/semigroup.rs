//! The semigroup `u(t, x)` generated by `f`: `∂u/∂t + f(u) = 0`, `u(0) = x`.

use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::holomap::{CVector, GeneratorMap};
use crate::output::{fmt_f64, write_csv};
use crate::report::{DiagnosticsReport, SampleRecord};
use crate::resolvent::ResolventFamily;

/// Allowed excursion outside the closed ball before a run is rejected.
pub const ESCAPE_TOL: f64 = 1e-8;
/// States at or beyond this norm are pulled back radially.
pub const CLAMP_RADIUS: f64 = 1.0 - 1e-12;
pub const SQUEEZING_TOL: f64 = 1e-8;
/// Tolerance of the reference solution in [`convergence_study`].
pub const REFERENCE_TOL: f64 = 1e-13;
const MAX_STEPS: usize = 1_000_000;

// Dormand–Prince 5(4)
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClampRecord {
    pub t: f64,
    pub norm_before: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<CVector>,
    pub norms: Vec<f64>,
    pub steps: usize,
    pub rejected: usize,
    pub clamps: Vec<ClampRecord>,
}

impl Trajectory {
    pub fn final_state(&self) -> &CVector {
        self.states
            .last()
            .expect("trajectory holds the initial state")
    }

    pub fn csv_rows(&self) -> (Vec<String>, Vec<Vec<String>>) {
        let dim = self.states[0].dim();
        let mut header = vec!["t".to_owned()];
        for k in 0..dim {
            header.push(format!("re_u{k}"));
            header.push(format!("im_u{k}"));
        }
        header.push("norm".to_owned());
        let rows = self
            .times
            .iter()
            .zip(&self.states)
            .zip(&self.norms)
            .map(|((t, u), n)| {
                let mut row = vec![fmt_f64(*t)];
                for z in u.coords() {
                    row.push(fmt_f64(z.re));
                    row.push(fmt_f64(z.im));
                }
                row.push(fmt_f64(*n));
                row
            })
            .collect();
        (header, rows)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let (header, rows) = self.csv_rows();
        write_csv(path, &header, &rows)
    }
}

/// Integrates `u' = −f(u)` on `[0, T]` with an embedded Dormand–Prince 5(4)
/// pair.
///
/// A step is accepted when the embedded error estimate is below `tol·h`
/// (error per unit step). The remaining interval is always split into equal
/// pieces, so the final step is never a sliver.
pub fn integrate_cauchy(f: &GeneratorMap, x: &CVector, t_end: f64, tol: f64) -> Result<Trajectory> {
    x.check_dim(f.dim())?;
    if !(x.norm() < 1.0) {
        return Err(Error::OutsideBall { norm: x.norm() });
    }
    if !(t_end >= 0.0) || !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "need T >= 0 and tol > 0 (T = {t_end}, tol = {tol})"
        )));
    }
    let rhs = |u: &CVector| -&f.value_at(u);
    let mut traj = Trajectory {
        times: vec![0.0],
        states: vec![x.clone()],
        norms: vec![x.norm()],
        steps: 0,
        rejected: 0,
        clamps: Vec::new(),
    };
    let mut t = 0.0;
    let mut u = x.clone();
    let mut k1 = rhs(&u);
    let mut h = (0.01f64).min(t_end);

    while t < t_end {
        if traj.steps + traj.rejected > MAX_STEPS {
            return Err(Error::NonConvergence(format!(
                "step limit reached at t = {t}"
            )));
        }
        let remaining = t_end - t;
        let pieces = (remaining / h).ceil().max(1.0);
        h = remaining / pieces;
        let last = pieces == 1.0;
        let mut k = Vec::with_capacity(7);
        k.push(k1.clone());
        for s in 1..7 {
            let mut y = u.clone();
            for (j, kj) in k.iter().enumerate() {
                if A[s][j] != 0.0 {
                    y = y.axpy(Complex64::new(h * A[s][j], 0.0), kj);
                }
            }
            k.push(rhs(&y));
        }
        let mut next = u.clone();
        for (j, kj) in k.iter().enumerate().take(6) {
            if A[6][j] != 0.0 {
                next = next.axpy(Complex64::new(h * A[6][j], 0.0), kj);
            }
        }
        let mut err_vec = CVector::zeros(u.dim());
        for (j, kj) in k.iter().enumerate() {
            if E[j] != 0.0 {
                err_vec = err_vec.axpy(Complex64::new(h * E[j], 0.0), kj);
            }
        }
        let scale = tol * h;
        let err = err_vec.norm() / scale;
        if !err.is_finite() || !next.is_finite() {
            traj.rejected += 1;
            h *= 0.2;
            if h < 1e-14 {
                return Err(Error::NonConvergence(format!(
                    "step size underflow at t = {t}"
                )));
            }
            continue;
        }
        if err <= 1.0 {
            t = if last { t_end } else { t + h };
            let mut n = next.norm();
            if n > 1.0 + ESCAPE_TOL {
                return Err(Error::Escape { t, norm: n });
            }
            if n >= CLAMP_RADIUS {
                traj.clamps.push(ClampRecord { t, norm_before: n });
                if traj.clamps.len() > 1 {
                    return Err(Error::Escape { t, norm: n });
                }
                next = next.scale_real(CLAMP_RADIUS / n);
                n = CLAMP_RADIUS;
                k1 = rhs(&next);
            } else {
                k1 = k[6].clone();
            }
            u = next;
            traj.steps += 1;
            traj.times.push(t);
            traj.states.push(u.clone());
            traj.norms.push(n);
            let factor = 0.9 * err.max(1e-10).powf(-0.25);
            h *= factor.clamp(0.2, 5.0);
        } else {
            traj.rejected += 1;
            h *= (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
        }
    }
    Ok(traj)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ToleranceStudy {
    pub tolerances: Vec<f64>,
    pub errors: Vec<f64>,
    /// Least-squares slope of `log err` against `log tol`.
    pub slope: f64,
}

/// Final-state deviation on the ladder `tol0·2^{-k}`, `k = 0..=halvings`.
pub fn tolerance_study(
    f: &GeneratorMap,
    x: &CVector,
    t_end: f64,
    tol0: f64,
    halvings: usize,
    deviation: impl Fn(&CVector) -> f64,
) -> Result<ToleranceStudy> {
    let tolerances: Vec<f64> = (0..=halvings)
        .map(|k| tol0 * 0.5f64.powi(k as i32))
        .collect();
    let errors = tolerances
        .iter()
        .map(|&tol| Ok(deviation(integrate_cauchy(f, x, t_end, tol)?.final_state())))
        .collect::<Result<Vec<_>>>()?;
    let pts: Vec<(f64, f64)> = tolerances
        .iter()
        .zip(&errors)
        .map(|(t, e)| (t.ln(), e.ln()))
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok(ToleranceStudy {
        tolerances,
        errors,
        slope: sxy / sxx,
    })
}

/// Checks `‖u(t, x)‖ ≤ e^{−at}‖x‖` at every accepted step.
pub fn squeezing_check(
    f: &GeneratorMap,
    a: f64,
    x: &CVector,
    t_end: f64,
) -> Result<DiagnosticsReport> {
    let traj = integrate_cauchy(f, x, t_end, 1e-11)?;
    let x_norm = x.norm();
    let mut report = DiagnosticsReport::new(format!("squeezing with a = {a}"), SQUEEZING_TOL);
    for (t, n) in traj.times.iter().zip(&traj.norms) {
        let bound = (-a * t).exp() * x_norm;
        report.push(
            SampleRecord::for_parameter(*t)
                .value("norm", *n)
                .value("bound", bound)
                .check("squeeze", bound - n),
        );
    }
    Ok(report)
}

/// `(G_{t/n})^{[n]}(x)`.
pub fn product_formula(fam: &ResolventFamily, t: f64, n: usize, x: &CVector) -> Result<CVector> {
    if !(t > 0.0) || n == 0 {
        return Err(Error::InvalidArgument(format!(
            "need t > 0 and n >= 1 (t = {t}, n = {n})"
        )));
    }
    let step = t / n as f64;
    let mut w = x.clone();
    for k in 0..n {
        w = fam.resolve(step, &w).map_err(|e| {
            Error::NonConvergence(format!("product formula iterate {}: {e}", k + 1))
        })?;
    }
    Ok(w)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceTable {
    pub t: f64,
    pub reference: CVector,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceTable {
    pub fn is_strictly_decreasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].error < w[0].error)
    }

    pub fn csv_rows(&self) -> (Vec<String>, Vec<Vec<String>>) {
        let header = vec!["n".to_owned(), "error".to_owned()];
        let rows = self
            .rows
            .iter()
            .map(|r| vec![r.n.to_string(), fmt_f64(r.error)])
            .collect();
        (header, rows)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let (header, rows) = self.csv_rows();
        write_csv(path, &header, &rows)
    }
}

/// Distance of the product formula from the integrated flow for each `n`.
pub fn convergence_study(
    fam: &ResolventFamily,
    t: f64,
    x: &CVector,
    n_list: &[usize],
) -> Result<ConvergenceTable> {
    if n_list.is_empty() || n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument(
            "n_list must be non-empty and increasing".into(),
        ));
    }
    let reference = integrate_cauchy(fam.generator(), x, t, REFERENCE_TOL)?
        .final_state()
        .clone();
    let rows = n_list
        .par_iter()
        .map(|&n| {
            Ok(ConvergenceRow {
                n,
                error: product_formula(fam, t, n, x)?.distance(&reference),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceTable { t, reference, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::holomap::CMatrix;

    fn identity() -> GeneratorMap {
        GeneratorMap::linear(CMatrix::identity(1)).unwrap()
    }

    fn extremal() -> GeneratorMap {
        let c = |v: f64| Complex64::new(v, 0.0);
        GeneratorMap::rational_disk(vec![c(0.0), c(1.0), c(-1.0)], vec![c(1.0), c(1.0)]).unwrap()
    }

    #[test]
    fn linear_flows() {
        let tr = integrate_cauchy(&identity(), &CVector::from_real(&[0.5]), 1.0, 1e-10).unwrap();
        assert_eq!(tr.times[0], 0.0);
        assert_eq!(*tr.times.last().unwrap(), 1.0);
        assert!((tr.final_state()[0].re - 0.5 * (-1f64).exp()).abs() < 1e-10);

        let diag =
            GeneratorMap::linear(CMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, 2.0]]).unwrap())
                .unwrap();
        let x = CVector::new(vec![Complex64::new(0.3, 0.1), Complex64::new(-0.2, 0.4)]);
        let tr = integrate_cauchy(&diag, &x, 2.0, 1e-10).unwrap();
        let u = tr.final_state();
        assert!((u[0] - x[0] * (-2f64).exp()).norm() < 1e-10);
        assert!((u[1] - x[1] * (-4f64).exp()).norm() < 1e-10);

        let tr = integrate_cauchy(&identity(), &CVector::from_real(&[0.5]), 0.0, 1e-10).unwrap();
        assert_eq!(tr.states.len(), 1);
    }

    #[test]
    fn error_scales_at_least_linearly_with_tolerance() {
        let x = CVector::from_real(&[0.9]);
        let exact = 0.9 * (-3f64).exp();
        let study =
            tolerance_study(&identity(), &x, 3.0, 1e-6, 12, |u| (u[0].re - exact).abs()).unwrap();
        assert!(study.slope >= 1.0, "{study:?}");
        assert!(study.errors[12] <= study.errors[0] / 4096.0);
    }

    #[test]
    fn non_accretive_generator_escapes() {
        let neg = GeneratorMap::linear(CMatrix::scalar(Complex64::new(-1.0, 0.0))).unwrap();
        let err = integrate_cauchy(&neg, &CVector::from_real(&[0.5]), 2.0, 1e-9).unwrap_err();
        assert!(matches!(err, Error::Escape { .. }));
    }

    #[test]
    fn squeezing_and_monotonicity() {
        let r = squeezing_check(&identity(), 1.0, &CVector::from_real(&[0.7]), 3.0).unwrap();
        assert!(r.passed());
        assert!(r.worst_margin("squeeze").unwrap().abs() < 1e-9);

        let x = CVector::new(vec![Complex64::new(0.6, -0.5)]);
        assert!(squeezing_check(&extremal(), 0.0, &x, 5.0).unwrap().passed());
        let tr = integrate_cauchy(&extremal(), &x, 5.0, 1e-10).unwrap();
        assert!(tr.norms.windows(2).all(|w| w[1] <= w[0] + 1e-9));
        assert!(!squeezing_check(&identity(), 1.5, &x, 2.0).unwrap().passed());
    }

    #[test]
    fn semigroup_property() {
        let x = CVector::new(vec![Complex64::new(-0.4, 0.7)]);
        let tol = 1e-10;
        let whole = integrate_cauchy(&extremal(), &x, 1.0, tol).unwrap();
        let first = integrate_cauchy(&extremal(), &x, 0.3, tol).unwrap();
        let second = integrate_cauchy(&extremal(), first.final_state(), 0.7, tol).unwrap();
        assert!(whole.final_state().distance(second.final_state()) < 10.0 * tol);
    }

    #[test]
    fn product_formula_examples() {
        let fam = ResolventFamily::new(identity(), 1.0).unwrap();
        let x = CVector::from_real(&[0.5]);
        let w = product_formula(&fam, 1.0, 10, &x).unwrap();
        assert!((w[0].re - 0.5 / 1.1f64.powi(10)).abs() < 1e-12);
        let w = product_formula(&fam, 1.0, 100, &x).unwrap();
        assert!((w[0].re - 0.184856).abs() < 1e-6);
        assert_eq!(
            product_formula(&fam, 2.0, 1, &x).unwrap(),
            fam.resolve(2.0, &x).unwrap()
        );
        assert!(product_formula(&fam, 1.0, 0, &x).is_err());
    }

    #[test]
    fn convergence_errors_decrease() {
        let fam = ResolventFamily::new(identity(), 1.0).unwrap();
        let x = CVector::from_real(&[0.5]);
        let table = convergence_study(&fam, 1.0, &x, &[10, 100]).unwrap();
        let oracle = |n: i32| ((1.0 + 1.0 / n as f64).powi(-n) - (-1f64).exp()).abs() * 0.5;
        assert!((table.rows[0].error - oracle(10)).abs() < 1e-10);
        assert!((table.rows[1].error - oracle(100)).abs() < 1e-10);
        assert!((table.rows[0].error - 0.008832).abs() < 1e-6);

        let fam = ResolventFamily::new(extremal(), 0.0).unwrap();
        let table =
            convergence_study(&fam, 1.0, &CVector::from_real(&[0.6]), &[4, 16, 64, 256]).unwrap();
        assert!(table.is_strictly_decreasing());
        assert!(convergence_study(&fam, 1.0, &x, &[4, 4]).is_err());
    }
}
