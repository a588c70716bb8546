use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::linalg::CVector;
use crate::error::{Error, Result};

/// Radial grid used when none is given; the outermost radius is `1 - 10⁻⁴`.
pub const DEFAULT_RADII: [f64; 8] = [0.1, 0.25, 0.5, 0.75, 0.9, 0.99, 0.999, 0.9999];

/// Seeded sampler of the sphere and ball of ℂⁿ.
///
/// Directions are normalised standard Gaussian vectors in ℝ²ⁿ, so they are
/// uniform on the unit sphere. Ball samples are the product of the radial
/// grid with the directions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphereSampler {
    seed: u64,
    count: usize,
    radii: Vec<f64>,
}

impl SphereSampler {
    pub fn new(seed: u64, count: usize, radii: Vec<f64>) -> Result<Self> {
        if count == 0 {
            return Err(Error::InvalidArgument(
                "sampler count must be positive".into(),
            ));
        }
        if radii.is_empty() {
            return Err(Error::InvalidArgument(
                "radial grid must not be empty".into(),
            ));
        }
        if let Some(r) = radii.iter().find(|r| !(**r > 0.0 && **r < 1.0)) {
            return Err(Error::InvalidArgument(format!(
                "radius {r} is not in (0, 1)"
            )));
        }
        Ok(Self { seed, count, radii })
    }

    pub fn with_default_radii(seed: u64, count: usize) -> Result<Self> {
        Self::new(seed, count, DEFAULT_RADII.to_vec())
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    /// Same seed and direction count, different radial grid.
    pub fn with_radii(&self, radii: Vec<f64>) -> Result<Self> {
        Self::new(self.seed, self.count, radii)
    }

    pub fn with_count(&self, count: usize) -> Result<Self> {
        Self::new(self.seed, count, self.radii.clone())
    }

    /// `count` unit directions in ℂ^dim.
    pub fn directions(&self, dim: usize) -> Vec<CVector> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut out = Vec::with_capacity(self.count);
        while out.len() < self.count {
            let v = CVector::new(
                (0..dim)
                    .map(|_| {
                        let re: f64 = StandardNormal.sample(&mut rng);
                        let im: f64 = StandardNormal.sample(&mut rng);
                        Complex64::new(re, im)
                    })
                    .collect(),
            );
            if let Some(u) = v.normalized() {
                out.push(u);
            }
        }
        out
    }

    /// Ball samples `r·u` for every radius `r` of the grid and every direction `u`.
    pub fn points(&self, dim: usize) -> Vec<CVector> {
        let dirs = self.directions(dim);
        self.radii
            .iter()
            .flat_map(|&r| dirs.iter().map(move |u| u.scale_real(r)))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.count * self.radii.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
