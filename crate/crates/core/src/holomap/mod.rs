//! Complex linear algebra and holomorphic maps on the Euclidean unit ball of ℂⁿ.

mod linalg;
mod map;
mod poly;
mod sampler;

use std::f64::consts::PI;

use num_complex::Complex64;

pub use linalg::{inner_product, CMatrix, CVector};
pub use map::{GeneratorKind, GeneratorMap};
pub use poly::{HomogeneousTerm, Monomial};
pub use sampler::{SphereSampler, DEFAULT_RADII};

use crate::error::{Error, Result};

/// Evaluates `f` at `x`; `x` must lie in the open unit ball.
pub fn eval(f: &GeneratorMap, x: &CVector) -> Result<CVector> {
    f.eval(x)
}

/// Exact Jacobian `f'(x)`.
pub fn frechet(f: &GeneratorMap, x: &CVector) -> Result<CMatrix> {
    f.frechet(x)
}

pub fn taylor_homogeneous(f: &GeneratorMap, max_degree: u32) -> Result<Vec<HomogeneousTerm>> {
    f.taylor_homogeneous(max_degree)
}

/// Lower estimate of `M_f(r) = sup_{‖y‖<r} ‖f(y)‖`.
///
/// By the maximum principle the supremum sits on the sphere of radius `r`,
/// so only that sphere is searched: sampled directions first, then a local
/// refinement from the best ones (golden section on the phase circle in one
/// dimension, projected gradient ascent otherwise).
pub fn sup_norm(f: &GeneratorMap, r: f64, sampler: &SphereSampler) -> Result<f64> {
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "radius {r} is not in (0, 1)"
        )));
    }
    Ok(maximize_on_sphere(
        f.dim(),
        r,
        |x| f.value_at(x),
        |x| f.jacobian_at(x),
        sampler,
    ))
}

/// Estimate of `‖P‖ = sup_{‖x‖<1} ‖P(x)‖`; homogeneity reduces it to the unit sphere.
pub fn poly_term_norm(p: &HomogeneousTerm, sampler: &SphereSampler) -> f64 {
    if p.is_zero() {
        return 0.0;
    }
    maximize_on_sphere(
        p.dim(),
        1.0,
        |x| p.eval_unchecked(x),
        |x| {
            let mut jac = CMatrix::zeros(p.dim());
            p.accumulate_jacobian(x, &mut jac);
            jac
        },
        sampler,
    )
}

/// Maximum of `‖F(radius·u)‖` over unit `u`.
pub(crate) fn maximize_on_sphere<F, J>(
    dim: usize,
    radius: f64,
    value: F,
    jacobian: J,
    sampler: &SphereSampler,
) -> f64
where
    F: Fn(&CVector) -> CVector,
    J: Fn(&CVector) -> CMatrix,
{
    let dirs = sampler.directions(dim);
    let mut scored: Vec<(f64, usize)> = dirs
        .iter()
        .enumerate()
        .map(|(i, u)| (value(&u.scale_real(radius)).norm(), i))
        .collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let mut best = scored[0].0;

    if dim == 1 {
        let mut phases: Vec<f64> = dirs.iter().map(|u| u[0].arg()).collect();
        phases.sort_by(f64::total_cmp);
        let best_phase = dirs[scored[0].1][0].arg();
        let pos = phases
            .iter()
            .position(|p| *p == best_phase)
            .unwrap_or_default();
        let m = phases.len();
        let (lo, hi) = if m == 1 {
            (best_phase - PI, best_phase + PI)
        } else {
            let prev = if pos == 0 {
                phases[m - 1] - 2.0 * PI
            } else {
                phases[pos - 1]
            };
            let next = if pos + 1 == m {
                phases[0] + 2.0 * PI
            } else {
                phases[pos + 1]
            };
            (prev, next)
        };
        let g = |phi: f64| value(&CVector::scalar(Complex64::from_polar(radius, phi))).norm();
        let (_, v) = golden_section_max(g, lo, hi, 100);
        best = best.max(v);
    } else {
        for &(_, i) in scored.iter().take(3) {
            best = best.max(gradient_ascent(&dirs[i], radius, &value, &jacobian));
        }
    }
    best
}

fn golden_section_max<G: Fn(f64) -> f64>(
    g: G,
    mut lo: f64,
    mut hi: f64,
    iters: usize,
) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut g1 = g(x1);
    let mut g2 = g(x2);
    for _ in 0..iters {
        if g1 < g2 {
            lo = x1;
            x1 = x2;
            g1 = g2;
            x2 = lo + inv_phi * (hi - lo);
            g2 = g(x2);
        } else {
            hi = x2;
            x2 = x1;
            g2 = g1;
            x1 = hi - inv_phi * (hi - lo);
            g1 = g(x1);
        }
    }
    if g1 > g2 {
        (x1, g1)
    } else {
        (x2, g2)
    }
}

/// Projected gradient ascent of `‖F(r·u)‖²` on the unit sphere.
fn gradient_ascent<F, J>(start: &CVector, radius: f64, value: &F, jacobian: &J) -> f64
where
    F: Fn(&CVector) -> CVector,
    J: Fn(&CVector) -> CMatrix,
{
    let objective = |u: &CVector| value(&u.scale_real(radius)).norm_sqr();
    let mut u = start.clone();
    let mut g = objective(&u);
    let mut step = 0.5;
    for _ in 0..300 {
        let x = u.scale_real(radius);
        let fx = value(&x);
        let grad = jacobian(&x)
            .adjoint()
            .mul_vec_unchecked(&fx)
            .scale_real(radius);
        let radial = u.inner_unchecked(&grad).re;
        let tangent = grad.axpy(Complex64::new(-radial, 0.0), &u);
        let tnorm = tangent.norm();
        if tnorm < 1e-15 * (1.0 + g) {
            break;
        }
        let mut improved = false;
        while step > 1e-14 {
            let trial = u
                .axpy(Complex64::new(step / tnorm, 0.0), &tangent)
                .normalized()
                .expect("nonzero trial direction");
            let gt = objective(&trial);
            if gt > g {
                u = trial;
                g = gt;
                improved = true;
                step = (step * 2.0).min(1.0);
                break;
            }
            step *= 0.5;
        }
        if !improved {
            break;
        }
    }
    g.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn sampler() -> SphereSampler {
        SphereSampler::with_default_radii(11, 400).unwrap()
    }

    #[test]
    fn sup_norm_examples() {
        let extremal =
            GeneratorMap::rational_disk(vec![c(0.0), c(1.0), c(-1.0)], vec![c(1.0), c(1.0)])
                .unwrap();
        let m = sup_norm(&extremal, 0.6, &sampler()).unwrap();
        assert!((m - 2.4).abs() < 1e-9, "{m}");

        let id = GeneratorMap::linear(CMatrix::identity(1)).unwrap();
        assert!((sup_norm(&id, 0.37, &sampler()).unwrap() - 0.37).abs() < 1e-12);

        let diag = GeneratorMap::linear(CMatrix::from_diagonal(&[c(1.0), c(2.0)])).unwrap();
        assert!((sup_norm(&diag, 0.5, &sampler()).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn sup_norm_rejects_bad_radius() {
        let id = GeneratorMap::linear(CMatrix::identity(1)).unwrap();
        assert!(sup_norm(&id, 0.0, &sampler()).is_err());
        assert!(sup_norm(&id, 1.0, &sampler()).is_err());
    }

    #[test]
    fn poly_term_norm_examples() {
        let p = HomogeneousTerm::new(2, 2, vec![Monomial::new(0, vec![0, 2], c(0.5))]).unwrap();
        assert!((poly_term_norm(&p, &sampler()) - 0.5).abs() < 1e-9);

        assert_eq!(
            poly_term_norm(&HomogeneousTerm::zero(2, 3).unwrap(), &sampler()),
            0.0
        );

        let q = HomogeneousTerm::new(2, 2, vec![Monomial::new(0, vec![1, 1], c(1.0))]).unwrap();
        assert!((poly_term_norm(&q, &sampler()) - 0.5).abs() < 1e-9);
    }
}
