//! Dense complex vectors and matrices of small dimension.
//!
//! Everything here works on the Euclidean (Hilbert) structure of ℂⁿ, so the
//! support functional of a point is the point itself and every duality
//! pairing is the inner product `⟨x, y⟩ = Σ xᵢ·conj(yᵢ)`.

use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// A point of ℂⁿ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CVector(Vec<Complex64>);

impl CVector {
    pub fn new(coords: Vec<Complex64>) -> Self {
        Self(coords)
    }

    pub fn zeros(dim: usize) -> Self {
        Self(vec![ZERO; dim])
    }

    /// Builds a vector from real coordinates.
    pub fn from_real(coords: &[f64]) -> Self {
        Self(coords.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    /// The one-dimensional vector `(z)`.
    pub fn scalar(z: Complex64) -> Self {
        Self(vec![z])
    }

    /// Unit basis vector `e_k` of ℂⁿ.
    pub fn basis(dim: usize, k: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.0[k] = ONE;
        v
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[Complex64] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<Complex64> {
        self.0
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// `⟨self, other⟩ = Σ selfᵢ·conj(otherᵢ)`.
    pub fn inner(&self, other: &CVector) -> Result<Complex64> {
        self.check_dim(other.dim())?;
        Ok(self.inner_unchecked(other))
    }

    pub(crate) fn inner_unchecked(&self, other: &CVector) -> Complex64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a * b.conj()).sum()
    }

    pub fn scale(&self, s: Complex64) -> CVector {
        CVector(self.0.iter().map(|z| z * s).collect())
    }

    pub fn scale_real(&self, s: f64) -> CVector {
        CVector(self.0.iter().map(|z| z * s).collect())
    }

    /// `self + s·other`.
    pub fn axpy(&self, s: Complex64, other: &CVector) -> CVector {
        CVector(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a + s * b)
                .collect(),
        )
    }

    /// The unit vector in the direction of `self`, or `None` for the zero vector.
    pub fn normalized(&self) -> Option<CVector> {
        let n = self.norm();
        (n > 0.0).then(|| self.scale_real(1.0 / n))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn max_abs_diff(&self, other: &CVector) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn distance(&self, other: &CVector) -> f64 {
        (self - other).norm()
    }

    pub(crate) fn check_dim(&self, dim: usize) -> Result<()> {
        if self.dim() == dim {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: dim,
                found: self.dim(),
            })
        }
    }
}

impl Index<usize> for CVector {
    type Output = Complex64;
    fn index(&self, i: usize) -> &Complex64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for CVector {
    fn index_mut(&mut self, i: usize) -> &mut Complex64 {
        &mut self.0[i]
    }
}

impl Add for &CVector {
    type Output = CVector;
    fn add(self, rhs: &CVector) -> CVector {
        CVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &CVector {
    type Output = CVector;
    fn sub(self, rhs: &CVector) -> CVector {
        CVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Neg for &CVector {
    type Output = CVector;
    fn neg(self) -> CVector {
        CVector(self.0.iter().map(|z| -z).collect())
    }
}

/// Inner product as a free function.
pub fn inner_product(x: &CVector, y: &CVector) -> Result<Complex64> {
    x.inner(y)
}

/// A square complex matrix stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CMatrix {
    n: usize,
    entries: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            entries: vec![ZERO; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_diagonal(diag: &[Complex64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, d) in diag.iter().enumerate() {
            m[(i, i)] = *d;
        }
        m
    }

    /// The 1×1 matrix `[z]`.
    pub fn scalar(z: Complex64) -> Self {
        Self::from_diagonal(&[z])
    }

    /// Builds a matrix from rows; fails unless the rows form a square array.
    pub fn from_rows(rows: Vec<Vec<Complex64>>) -> Result<Self> {
        let n = rows.len();
        let mut entries = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: row.len(),
                });
            }
            entries.extend(row);
        }
        Ok(Self { n, entries })
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&v| Complex64::new(v, 0.0)).collect())
                .collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Complex64]> {
        self.entries.chunks(self.n.max(1))
    }

    pub fn mul_vec(&self, x: &CVector) -> Result<CVector> {
        x.check_dim(self.n)?;
        Ok(self.mul_vec_unchecked(x))
    }

    pub(crate) fn mul_vec_unchecked(&self, x: &CVector) -> CVector {
        CVector::new(
            self.rows()
                .map(|row| row.iter().zip(x.coords()).map(|(a, b)| a * b).sum())
                .collect(),
        )
    }

    pub fn matmul(&self, other: &CMatrix) -> CMatrix {
        let n = self.n;
        let mut out = CMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn adjoint(&self) -> CMatrix {
        let n = self.n;
        let mut out = CMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn scale(&self, s: Complex64) -> CMatrix {
        CMatrix {
            n: self.n,
            entries: self.entries.iter().map(|z| z * s).collect(),
        }
    }

    /// `(M + Mᴴ)/2`.
    pub fn hermitian_part(&self) -> CMatrix {
        let adj = self.adjoint();
        CMatrix {
            n: self.n,
            entries: self
                .entries
                .iter()
                .zip(&adj.entries)
                .map(|(a, b)| (a + b) * 0.5)
                .collect(),
        }
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        (0..self.n).all(|i| (0..self.n).all(|j| (self[(i, j)] - self[(j, i)].conj()).norm() <= tol))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Largest singular value, `√λ_max(MᴴM)`.
    pub fn operator_norm(&self) -> f64 {
        let gram = self.adjoint().matmul(self);
        crate::numrange::hermitian_eigenvalues(&gram)
            .last()
            .copied()
            .unwrap_or(0.0)
            .max(0.0)
            .sqrt()
    }

    /// Solves `M v = b` by LU factorisation with partial pivoting.
    pub fn solve(&self, b: &CVector) -> Result<CVector> {
        b.check_dim(self.n)?;
        let n = self.n;
        let mut a = self.entries.clone();
        let mut rhs = b.coords().to_vec();
        let scale = self.frobenius_norm().max(f64::MIN_POSITIVE);
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&i, &j| a[i * n + col].norm().total_cmp(&a[j * n + col].norm()))
                .unwrap_or(col);
            if a[pivot * n + col].norm() <= 1e-14 * scale {
                return Err(Error::SingularMatrix);
            }
            if pivot != col {
                for j in 0..n {
                    a.swap(col * n + j, pivot * n + j);
                }
                rhs.swap(col, pivot);
            }
            let p = a[col * n + col];
            for i in col + 1..n {
                let factor = a[i * n + col] / p;
                if factor == ZERO {
                    continue;
                }
                for j in col..n {
                    let v = a[col * n + j];
                    a[i * n + j] -= factor * v;
                }
                let v = rhs[col];
                rhs[i] -= factor * v;
            }
        }
        let mut x = vec![ZERO; n];
        for i in (0..n).rev() {
            let tail: Complex64 = (i + 1..n).map(|j| a[i * n + j] * x[j]).sum();
            x[i] = (rhs[i] - tail) / a[i * n + i];
        }
        Ok(CVector::new(x))
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.entries[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.entries[i * self.n + j]
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &CMatrix) -> CMatrix {
        CMatrix {
            n: self.n,
            entries: self
                .entries
                .iter()
                .zip(&rhs.entries)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &CMatrix) -> CMatrix {
        CMatrix {
            n: self.n,
            entries: self
                .entries
                .iter()
                .zip(&rhs.entries)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl Mul<f64> for &CMatrix {
    type Output = CMatrix;
    fn mul(self, s: f64) -> CMatrix {
        self.scale(Complex64::new(s, 0.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn inner_product_examples() {
        let x = CVector::new(vec![c(1.0, 0.0), c(0.0, 1.0)]);
        let y = CVector::new(vec![c(0.0, 1.0), c(1.0, 0.0)]);
        assert!(x.inner(&y).unwrap().norm() < 1e-15);

        let e = CVector::from_real(&[1.0, 0.0]);
        assert_eq!(e.inner(&e).unwrap(), c(1.0, 0.0));

        let x = CVector::new(vec![c(0.6, 0.0), c(0.0, 0.8)]);
        assert!((x.inner(&x).unwrap() - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn inner_product_dimension_mismatch() {
        let x = CVector::zeros(2);
        let y = CVector::zeros(3);
        assert!(matches!(
            x.inner(&y),
            Err(Error::DimensionMismatch {
                expected: 3,
                found: 2
            })
        ));
    }

    #[test]
    fn zero_vector_has_zero_norm() {
        assert_eq!(CVector::zeros(4).norm(), 0.0);
        assert!(CVector::zeros(4).normalized().is_none());
    }

    #[test]
    fn lu_solve_recovers_rhs() {
        let m = CMatrix::from_rows(vec![
            vec![c(2.0, 1.0), c(0.5, 0.0), c(0.0, -1.0)],
            vec![c(0.0, 0.0), c(1.0, 0.0), c(3.0, 0.0)],
            vec![c(1.0, 1.0), c(0.0, 2.0), c(1.0, 0.0)],
        ])
        .unwrap();
        let x = CVector::new(vec![c(1.0, -1.0), c(0.5, 0.25), c(-2.0, 0.0)]);
        let b = m.mul_vec(&x).unwrap();
        let sol = m.solve(&b).unwrap();
        assert!(sol.max_abs_diff(&x) < 1e-13);
    }

    #[test]
    fn singular_matrix_is_reported() {
        let m = CMatrix::from_real_rows(&[&[1.0, 2.0], &[2.0, 4.0]]).unwrap();
        assert!(matches!(
            m.solve(&CVector::from_real(&[1.0, 1.0])),
            Err(Error::SingularMatrix)
        ));
    }

    #[test]
    fn non_square_rows_rejected() {
        assert!(CMatrix::from_rows(vec![vec![c(1.0, 0.0), c(0.0, 0.0)]]).is_err());
    }

    #[test]
    fn operator_norm_of_diagonal() {
        let m = CMatrix::from_diagonal(&[c(1.0, 0.0), c(0.0, -2.0)]);
        assert!((m.operator_norm() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn operator_norm_dominates_triangular_spectrum() {
        // eigenvalues of a triangular matrix sit on its diagonal
        let m = CMatrix::from_rows(vec![
            vec![c(0.3, 0.4), c(5.0, 0.0), c(1.0, 1.0)],
            vec![c(0.0, 0.0), c(-1.5, 0.0), c(2.0, -1.0)],
            vec![c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.9)],
        ])
        .unwrap();
        let spectral_radius = (0..3).map(|i| m[(i, i)].norm()).fold(0.0, f64::max);
        assert!(m.operator_norm() >= spectral_radius);
    }

    #[test]
    fn hermitian_part_is_hermitian() {
        let m = CMatrix::from_rows(vec![
            vec![c(1.0, 2.0), c(3.0, -1.0)],
            vec![c(0.5, 0.5), c(-2.0, 1.0)],
        ])
        .unwrap();
        assert!(m.hermitian_part().is_hermitian(1e-15));
    }
}
