use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::linalg::{CMatrix, CVector};
use crate::error::{Error, Result};

/// One monomial `coeff · Π x_k^{exponents[k]}` placed in output component
/// `component`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub component: usize,
    pub exponents: Vec<u32>,
    pub coeff: Complex64,
}

impl Monomial {
    pub fn new(component: usize, exponents: Vec<u32>, coeff: Complex64) -> Self {
        Self {
            component,
            exponents,
            coeff,
        }
    }

    fn total_degree(&self) -> u32 {
        self.exponents.iter().sum()
    }

    fn value(&self, x: &CVector) -> Complex64 {
        self.exponents
            .iter()
            .zip(x.coords())
            .fold(self.coeff, |acc, (&e, z)| acc * z.powu(e))
    }
}

/// A homogeneous polynomial map `P : ℂⁿ → ℂⁿ` of a fixed degree, stored as a
/// sparse list of monomials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomogeneousTerm {
    dim: usize,
    degree: u32,
    monomials: Vec<Monomial>,
}

impl HomogeneousTerm {
    pub fn new(dim: usize, degree: u32, monomials: Vec<Monomial>) -> Result<Self> {
        if degree < 2 {
            return Err(Error::InvalidGenerator(format!(
                "homogeneous terms must have degree >= 2, got {degree}"
            )));
        }
        for m in &monomials {
            if m.component >= dim {
                return Err(Error::InvalidGenerator(format!(
                    "monomial component {} out of range for dimension {dim}",
                    m.component
                )));
            }
            if m.exponents.len() != dim {
                return Err(Error::InvalidGenerator(format!(
                    "monomial has {} exponents, expected {dim}",
                    m.exponents.len()
                )));
            }
            if m.total_degree() != degree {
                return Err(Error::InvalidGenerator(format!(
                    "monomial of total degree {} in a degree-{degree} term",
                    m.total_degree()
                )));
            }
        }
        Ok(Self {
            dim,
            degree,
            monomials,
        })
    }

    /// The zero term of the given degree.
    pub fn zero(dim: usize, degree: u32) -> Result<Self> {
        Self::new(dim, degree, Vec::new())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn monomials(&self) -> &[Monomial] {
        &self.monomials
    }

    pub fn is_zero(&self) -> bool {
        self.monomials
            .iter()
            .all(|m| m.coeff == Complex64::new(0.0, 0.0))
    }

    /// Concatenates the monomials of two terms of equal degree.
    pub fn merged(&self, other: &HomogeneousTerm) -> Result<HomogeneousTerm> {
        if other.degree != self.degree {
            return Err(Error::InvalidArgument(format!(
                "cannot merge degree {} with degree {}",
                self.degree, other.degree
            )));
        }
        let mut monomials = self.monomials.clone();
        monomials.extend(other.monomials.iter().cloned());
        HomogeneousTerm::new(self.dim, self.degree, monomials)
    }

    pub fn eval(&self, x: &CVector) -> Result<CVector> {
        x.check_dim(self.dim)?;
        Ok(self.eval_unchecked(x))
    }

    pub(crate) fn eval_unchecked(&self, x: &CVector) -> CVector {
        let mut out = CVector::zeros(self.dim);
        for m in &self.monomials {
            out[m.component] += m.value(x);
        }
        out
    }

    /// Adds the Jacobian of this term at `x` into `jac`.
    pub(crate) fn accumulate_jacobian(&self, x: &CVector, jac: &mut CMatrix) {
        for m in &self.monomials {
            for (l, &e) in m.exponents.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let mut d = m.coeff * f64::from(e);
                for (k, (&ek, z)) in m.exponents.iter().zip(x.coords()).enumerate() {
                    let power = if k == l { ek - 1 } else { ek };
                    d *= z.powu(power);
                }
                jac[(m.component, l)] += d;
            }
        }
    }

    pub fn jacobian(&self, x: &CVector) -> Result<CMatrix> {
        x.check_dim(self.dim)?;
        let mut jac = CMatrix::zeros(self.dim);
        self.accumulate_jacobian(x, &mut jac);
        Ok(jac)
    }
}
