use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::linalg::{CMatrix, CVector};
use super::poly::{HomogeneousTerm, Monomial};
use crate::error::{Error, Result};

/// Radius of the circle on which a rational denominator must be zero-free.
const ROOT_SCAN_RADIUS: f64 = 1.0 - 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GeneratorKind {
    Polynomial,
    RationalDisk,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
enum Repr {
    Polynomial {
        linear: CMatrix,
        terms: Vec<HomogeneousTerm>,
    },
    RationalDisk {
        num: Vec<Complex64>,
        den: Vec<Complex64>,
    },
}

/// A holomorphic self-map of the unit ball vanishing at the origin: either a
/// linear map plus homogeneous polynomial terms on ℂⁿ, or a rational
/// function of one variable that is holomorphic on the unit disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorMap(Repr);

impl GeneratorMap {
    pub fn polynomial(linear: CMatrix, terms: Vec<HomogeneousTerm>) -> Result<Self> {
        let n = linear.dim();
        if n == 0 {
            return Err(Error::InvalidGenerator("dimension must be positive".into()));
        }
        if let Some(t) = terms.iter().find(|t| t.dim() != n) {
            return Err(Error::InvalidGenerator(format!(
                "term of dimension {} in a dimension-{n} map",
                t.dim()
            )));
        }
        Ok(Self(Repr::Polynomial { linear, terms }))
    }

    pub fn linear(a: CMatrix) -> Result<Self> {
        Self::polynomial(a, Vec::new())
    }

    /// `f(z) = num(z)/den(z)` with coefficients listed from the constant term up.
    pub fn rational_disk(num: Vec<Complex64>, den: Vec<Complex64>) -> Result<Self> {
        if num.first().map_or(true, |c| *c != Complex64::new(0.0, 0.0)) {
            return Err(Error::InvalidGenerator(
                "numerator must have a zero constant coefficient".into(),
            ));
        }
        if den.first().map_or(true, |c| *c == Complex64::new(0.0, 0.0)) {
            return Err(Error::InvalidGenerator(
                "denominator must have a nonzero constant coefficient".into(),
            ));
        }
        let zeros = zeros_inside_circle(&den, ROOT_SCAN_RADIUS)?;
        if zeros > 0 {
            return Err(Error::InvalidGenerator(format!(
                "denominator has {zeros} root(s) in the closed disk of radius {ROOT_SCAN_RADIUS}"
            )));
        }
        Ok(Self(Repr::RationalDisk { num, den }))
    }

    pub fn kind(&self) -> GeneratorKind {
        match self.0 {
            Repr::Polynomial { .. } => GeneratorKind::Polynomial,
            Repr::RationalDisk { .. } => GeneratorKind::RationalDisk,
        }
    }

    pub fn dim(&self) -> usize {
        match &self.0 {
            Repr::Polynomial { linear, .. } => linear.dim(),
            Repr::RationalDisk { .. } => 1,
        }
    }

    pub fn linear_part(&self) -> Option<&CMatrix> {
        match &self.0 {
            Repr::Polynomial { linear, .. } => Some(linear),
            Repr::RationalDisk { .. } => None,
        }
    }

    pub fn terms(&self) -> &[HomogeneousTerm] {
        match &self.0 {
            Repr::Polynomial { terms, .. } => terms,
            Repr::RationalDisk { .. } => &[],
        }
    }

    /// Numerator and denominator coefficients of a rational map.
    pub fn rational_coefficients(&self) -> Option<(&[Complex64], &[Complex64])> {
        match &self.0 {
            Repr::RationalDisk { num, den } => Some((num, den)),
            Repr::Polynomial { .. } => None,
        }
    }

    /// The linearisation `A = f'(0)`.
    pub fn derivative_at_origin(&self) -> CMatrix {
        match &self.0 {
            Repr::Polynomial { linear, .. } => linear.clone(),
            Repr::RationalDisk { num, den } => {
                let a1 = num.get(1).copied().unwrap_or_default();
                CMatrix::scalar(a1 / den[0])
            }
        }
    }

    pub fn eval(&self, x: &CVector) -> Result<CVector> {
        self.check_point(x)?;
        Ok(self.value_at(x))
    }

    pub fn frechet(&self, x: &CVector) -> Result<CMatrix> {
        self.check_point(x)?;
        Ok(self.jacobian_at(x))
    }

    fn check_point(&self, x: &CVector) -> Result<()> {
        x.check_dim(self.dim())?;
        let norm = x.norm();
        if norm < 1.0 {
            Ok(())
        } else {
            Err(Error::OutsideBall { norm })
        }
    }

    /// Evaluation without the open-ball check, for continuation paths and
    /// integrator stages that may step slightly outside.
    pub(crate) fn value_at(&self, x: &CVector) -> CVector {
        match &self.0 {
            Repr::Polynomial { linear, terms } => {
                let mut out = linear.mul_vec_unchecked(x);
                for t in terms {
                    let v = t.eval_unchecked(x);
                    for i in 0..out.dim() {
                        out[i] += v[i];
                    }
                }
                out
            }
            Repr::RationalDisk { num, den } => {
                let z = x[0];
                CVector::scalar(horner(num, z) / horner(den, z))
            }
        }
    }

    pub(crate) fn jacobian_at(&self, x: &CVector) -> CMatrix {
        match &self.0 {
            Repr::Polynomial { linear, terms } => {
                let mut jac = linear.clone();
                for t in terms {
                    t.accumulate_jacobian(x, &mut jac);
                }
                jac
            }
            Repr::RationalDisk { num, den } => {
                let z = x[0];
                let (n, dn) = horner_with_derivative(num, z);
                let (d, dd) = horner_with_derivative(den, z);
                CMatrix::scalar((dn * d - n * dd) / (d * d))
            }
        }
    }

    /// The map `c·f`.
    pub fn scaled(&self, c: f64) -> GeneratorMap {
        match &self.0 {
            Repr::Polynomial { linear, terms } => {
                let terms = terms
                    .iter()
                    .map(|t| {
                        let monomials = t
                            .monomials()
                            .iter()
                            .map(|m| Monomial::new(m.component, m.exponents.clone(), m.coeff * c))
                            .collect();
                        HomogeneousTerm::new(t.dim(), t.degree(), monomials)
                            .expect("scaling preserves term shape")
                    })
                    .collect();
                GeneratorMap(Repr::Polynomial {
                    linear: linear * c,
                    terms,
                })
            }
            Repr::RationalDisk { num, den } => GeneratorMap(Repr::RationalDisk {
                num: num.iter().map(|a| a * c).collect(),
                den: den.clone(),
            }),
        }
    }

    /// Taylor coefficients `c_0, …, c_max` of a rational map by power-series
    /// division; `None` for polynomial maps.
    pub fn rational_series(&self, max_degree: usize) -> Option<Vec<Complex64>> {
        let (num, den) = self.rational_coefficients()?;
        let mut c = Vec::with_capacity(max_degree + 1);
        for k in 0..=max_degree {
            let mut acc = num.get(k).copied().unwrap_or_default();
            for j in 1..=k.min(den.len().saturating_sub(1)) {
                acc -= den[j] * c[k - j];
            }
            c.push(acc / den[0]);
        }
        Some(c)
    }

    /// Homogeneous terms of degrees `2..=max_degree`: the stored terms of a
    /// polynomial map, or the series terms of a rational map.
    pub fn taylor_homogeneous(&self, max_degree: u32) -> Result<Vec<HomogeneousTerm>> {
        if max_degree < 2 {
            return Err(Error::InvalidArgument(format!(
                "max_degree must be at least 2, got {max_degree}"
            )));
        }
        match &self.0 {
            Repr::Polynomial { terms, .. } => Ok(terms
                .iter()
                .filter(|t| t.degree() <= max_degree)
                .cloned()
                .collect()),
            Repr::RationalDisk { .. } => {
                let series = self
                    .rational_series(max_degree as usize)
                    .expect("rational map has a series");
                (2..=max_degree)
                    .map(|k| {
                        HomogeneousTerm::new(
                            1,
                            k,
                            vec![Monomial::new(0, vec![k], series[k as usize])],
                        )
                    })
                    .collect()
            }
        }
    }

    /// The full degree-`n` homogeneous component (all stored pieces merged).
    pub fn homogeneous_part(&self, degree: u32) -> Result<HomogeneousTerm> {
        let mut part = HomogeneousTerm::zero(self.dim(), degree)?;
        for t in self.taylor_homogeneous(degree.max(2))? {
            if t.degree() == degree {
                part = part.merged(&t)?;
            }
        }
        Ok(part)
    }
}

fn horner(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c)
}

fn horner_with_derivative(coeffs: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let zero = Complex64::new(0.0, 0.0);
    coeffs
        .iter()
        .rev()
        .fold((zero, zero), |(p, dp), c| (p * z + c, dp * z + p))
}

/// Number of zeros of the polynomial strictly inside `|z| = radius`, by the
/// argument principle. Arcs of the circle are bisected until the phase jump
/// across each is below π/4, so a root just outside the circle is resolved.
fn zeros_inside_circle(coeffs: &[Complex64], radius: f64) -> Result<usize> {
    const ARCS: usize = 256;
    const MAX_DEPTH: u32 = 64;

    let at = |phi: f64| horner(coeffs, Complex64::from_polar(radius, phi));
    fn winding<F: Fn(f64) -> Complex64>(
        at: &F,
        (p0, v0): (f64, Complex64),
        (p1, v1): (f64, Complex64),
        depth: u32,
    ) -> Result<f64> {
        if v0.norm() == 0.0 || v1.norm() == 0.0 {
            return Err(Error::InvalidGenerator(
                "denominator vanishes on the scan circle".into(),
            ));
        }
        let jump = (v1 / v0).arg();
        if jump.abs() < PI / 4.0 {
            return Ok(jump);
        }
        if depth == MAX_DEPTH {
            return Err(Error::InvalidGenerator(
                "root scan did not resolve the denominator phase".into(),
            ));
        }
        let pm = 0.5 * (p0 + p1);
        let vm = at(pm);
        Ok(winding(at, (p0, v0), (pm, vm), depth + 1)?
            + winding(at, (pm, vm), (p1, v1), depth + 1)?)
    }

    let mut total = 0.0;
    for k in 0..ARCS {
        let p0 = 2.0 * PI * k as f64 / ARCS as f64;
        let p1 = 2.0 * PI * (k + 1) as f64 / ARCS as f64;
        total += winding(&at, (p0, at(p0)), (p1, at(p1)), 0)?;
    }
    Ok((total / (2.0 * PI)).round().max(0.0) as usize)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn extremal() -> GeneratorMap {
        GeneratorMap::rational_disk(vec![c(0.0), c(1.0), c(-1.0)], vec![c(1.0), c(1.0)]).unwrap()
    }

    fn quadratic() -> GeneratorMap {
        let p = HomogeneousTerm::new(2, 2, vec![Monomial::new(0, vec![0, 2], c(0.5))]).unwrap();
        GeneratorMap::polynomial(CMatrix::identity(2), vec![p]).unwrap()
    }

    #[test]
    fn eval_examples() {
        let v = extremal().eval(&CVector::from_real(&[0.5])).unwrap();
        assert!((v[0] - c(0.25 / 1.5)).norm() < 1e-15);

        let id = GeneratorMap::linear(CMatrix::identity(1)).unwrap();
        let z = CVector::scalar(Complex64::new(0.3, -0.2));
        assert_eq!(id.eval(&z).unwrap(), z);

        let v = quadratic().eval(&CVector::from_real(&[0.0, 0.4])).unwrap();
        assert!(v.max_abs_diff(&CVector::from_real(&[0.08, 0.4])) < 1e-15);
    }

    #[test]
    fn eval_at_origin_is_zero() {
        assert_eq!(
            extremal().eval(&CVector::zeros(1)).unwrap(),
            CVector::zeros(1)
        );
        assert_eq!(
            quadratic().eval(&CVector::zeros(2)).unwrap(),
            CVector::zeros(2)
        );
    }

    #[test]
    fn frechet_examples() {
        let id = GeneratorMap::linear(CMatrix::identity(1)).unwrap();
        assert_eq!(id.frechet(&CVector::zeros(1)).unwrap()[(0, 0)], c(1.0));
        assert_eq!(
            extremal().frechet(&CVector::zeros(1)).unwrap()[(0, 0)],
            c(1.0)
        );
        let j = quadratic()
            .frechet(&CVector::from_real(&[0.0, 0.4]))
            .unwrap();
        let expected = CMatrix::from_real_rows(&[&[1.0, 0.4], &[0.0, 1.0]]).unwrap();
        assert!((&j - &expected).frobenius_norm() < 1e-15);
    }

    #[test]
    fn points_outside_the_ball_are_rejected() {
        assert!(matches!(
            extremal().eval(&CVector::from_real(&[1.0])),
            Err(Error::OutsideBall { .. })
        ));
        assert!(quadratic()
            .frechet(&CVector::from_real(&[0.8, 0.8]))
            .is_err());
        assert!(matches!(
            quadratic().eval(&CVector::zeros(3)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn rational_construction_checks() {
        // nonzero constant numerator term
        assert!(GeneratorMap::rational_disk(vec![c(1.0), c(1.0)], vec![c(1.0)]).is_err());
        // zero constant denominator term
        assert!(GeneratorMap::rational_disk(vec![c(0.0), c(1.0)], vec![c(0.0), c(1.0)]).is_err());
        // root at z = 1/2
        assert!(GeneratorMap::rational_disk(vec![c(0.0), c(1.0)], vec![c(1.0), c(-2.0)]).is_err());
        // root at z = 2: fine
        assert!(GeneratorMap::rational_disk(vec![c(0.0), c(1.0)], vec![c(2.0), c(-1.0)]).is_ok());
        // simple root on the unit circle
        assert!(GeneratorMap::rational_disk(vec![c(0.0), c(1.0)], vec![c(1.0), c(1.0)]).is_ok());
        // a double root on the circle cannot be resolved in double precision
        assert!(
            GeneratorMap::rational_disk(vec![c(0.0), c(1.0)], vec![c(1.0), c(-2.0), c(1.0)])
                .is_err()
        );
    }

    #[test]
    fn rational_series_of_extremal_map() {
        let s = extremal().rational_series(6).unwrap();
        let expected = [0.0, 1.0, -2.0, 2.0, -2.0, 2.0, -2.0];
        for (a, e) in s.iter().zip(expected) {
            assert!((a - c(e)).norm() < 1e-14);
        }
    }

    #[test]
    fn taylor_homogeneous_cases() {
        let id = GeneratorMap::linear(CMatrix::identity(1)).unwrap();
        assert!(id.taylor_homogeneous(5).unwrap().is_empty());
        assert!(id.homogeneous_part(3).unwrap().is_zero());
        let q = quadratic().taylor_homogeneous(8).unwrap();
        assert_eq!(q.len(), 1);
        assert_eq!(q[0].degree(), 2);
        assert!(extremal().taylor_homogeneous(1).is_err());
    }

    #[test]
    fn scaled_map_scales_values() {
        let x = CVector::from_real(&[0.3, -0.2]);
        let f = quadratic();
        let g = f.scaled(2.5);
        assert!(
            g.eval(&x)
                .unwrap()
                .max_abs_diff(&f.eval(&x).unwrap().scale_real(2.5))
                < 1e-15
        );
    }
}
