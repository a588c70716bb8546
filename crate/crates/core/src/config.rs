//! Strict JSON experiment configuration.

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::holomap::{
    CMatrix, GeneratorMap, HomogeneousTerm, Monomial, SphereSampler, DEFAULT_RADII,
};

/// A complex number as `[re, im]`.
pub type ComplexPair = [f64; 2];

fn complex(p: &ComplexPair) -> Complex64 {
    Complex64::new(p[0], p[1])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonomialSpec {
    pub component: usize,
    pub exponents: Vec<u32>,
    pub coeff: ComplexPair,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    pub degree: u32,
    pub monomials: Vec<MonomialSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GeneratorSpec {
    /// `f(x) = Ax + Σ P_n(x)`; `matrix` lists the `dim²` entries row by row.
    Polynomial {
        dim: usize,
        matrix: Vec<ComplexPair>,
        #[serde(default)]
        terms: Vec<TermSpec>,
    },
    /// `f(z) = num(z)/den(z)` on the unit disk, coefficients by ascending power.
    Rational {
        num: Vec<ComplexPair>,
        den: Vec<ComplexPair>,
    },
}

impl GeneratorSpec {
    pub fn build(&self) -> Result<GeneratorMap> {
        match self {
            GeneratorSpec::Polynomial { dim, matrix, terms } => {
                if *dim == 0 || matrix.len() != dim * dim {
                    return Err(Error::Config(format!(
                        "matrix needs dim^2 = {} entries, found {}",
                        dim * dim,
                        matrix.len()
                    )));
                }
                let rows = matrix
                    .chunks(*dim)
                    .map(|r| r.iter().map(complex).collect())
                    .collect();
                let linear = CMatrix::from_rows(rows)?;
                let terms = terms
                    .iter()
                    .map(|t| {
                        let monomials = t
                            .monomials
                            .iter()
                            .map(|m| {
                                Monomial::new(m.component, m.exponents.clone(), complex(&m.coeff))
                            })
                            .collect();
                        HomogeneousTerm::new(*dim, t.degree, monomials)
                    })
                    .collect::<Result<Vec<_>>>()?;
                GeneratorMap::polynomial(linear, terms)
            }
            GeneratorSpec::Rational { num, den } => GeneratorMap::rational_disk(
                num.iter().map(complex).collect(),
                den.iter().map(complex).collect(),
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LambdaRange {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    /// Geometric rather than arithmetic spacing.
    #[serde(default)]
    pub log: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LambdaSpec {
    List(Vec<f64>),
    Range(LambdaRange),
}

impl LambdaSpec {
    pub fn values(&self) -> Vec<f64> {
        match self {
            LambdaSpec::List(v) => v.clone(),
            LambdaSpec::Range(r) => {
                if r.count == 1 {
                    return vec![r.start];
                }
                let m = (r.count - 1) as f64;
                (0..r.count)
                    .map(|i| {
                        let s = i as f64 / m;
                        if r.log {
                            r.start * (r.stop / r.start).powf(s)
                        } else {
                            r.start + (r.stop - r.start) * s
                        }
                    })
                    .collect()
            }
        }
    }
}

fn default_count() -> usize {
    64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplerSpec {
    pub seed: u64,
    #[serde(default = "default_count")]
    pub count: usize,
    #[serde(default = "default_radii")]
    pub radii: Vec<f64>,
}

fn default_radii() -> Vec<f64> {
    DEFAULT_RADII.to_vec()
}

impl SamplerSpec {
    pub fn build(&self) -> Result<SphereSampler> {
        SphereSampler::new(self.seed, self.count, self.radii.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub solver: f64,
    pub integrator: f64,
    pub lambda_star: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            solver: 1e-12,
            integrator: 1e-10,
            lambda_star: 1e-10,
        }
    }
}

fn default_directions() -> Vec<ComplexPair> {
    vec![[1.0, 0.0]]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResolveOptions {
    /// Ray directions for the extension radius (one-dimensional generators).
    #[serde(default = "default_directions")]
    pub directions: Vec<ComplexPair>,
    /// Point whose continuation trace is written for every `λ`.
    #[serde(default)]
    pub trace_point: Option<Vec<ComplexPair>>,
}

impl Default for ResolveOptions {
    fn default() -> Self {
        Self {
            directions: default_directions(),
            trace_point: None,
        }
    }
}

fn default_t_end() -> f64 {
    3.0
}

fn default_n_list() -> Vec<usize> {
    vec![4, 16, 64, 256]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SemigroupOptions {
    /// Initial points; the first sample points at radius ½ when empty.
    #[serde(default)]
    pub points: Vec<Vec<ComplexPair>>,
    #[serde(default = "default_t_end")]
    pub t_end: f64,
    /// Final time of the product-formula study.
    #[serde(default = "default_product_t")]
    pub product_t: f64,
    #[serde(default = "default_n_list")]
    pub n_list: Vec<usize>,
}

fn default_product_t() -> f64 {
    1.0
}

impl Default for SemigroupOptions {
    fn default() -> Self {
        Self {
            points: Vec::new(),
            t_end: default_t_end(),
            product_t: default_product_t(),
            n_list: default_n_list(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MutationSpec {
    /// Flip the sign of `K` in `1 − λK` inside `α`.
    AlphaSign,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyOptions {
    #[serde(default)]
    pub mutation: Option<MutationSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<GeneratorSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certified_a: Option<f64>,
    /// `certified_a` is the exact infimum, so it needs no safety margin.
    #[serde(default)]
    pub analytic_a: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound_b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambdas: Option<LambdaSpec>,
    pub sampler: SamplerSpec,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub resolve: ResolveOptions,
    #[serde(default)]
    pub semigroup: SemigroupOptions,
    #[serde(default)]
    pub verify: VerifyOptions,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(l) = &self.lambdas {
            if let LambdaSpec::Range(r) = l {
                if r.count == 0 || !(r.start > 0.0) || !(r.stop >= r.start) || !r.stop.is_finite() {
                    return Err(Error::Config(
                        "lambda range needs 0 < start <= stop and count >= 1".into(),
                    ));
                }
            }
            let v = l.values();
            if v.is_empty() {
                return Err(Error::Config("lambda list is empty".into()));
            }
            if let Some(bad) = v.iter().find(|x| !(**x > 0.0 && x.is_finite())) {
                return Err(Error::Config(format!("lambda = {bad} is not positive")));
            }
        }
        if let Some(a) = self.certified_a {
            if !a.is_finite() {
                return Err(Error::Config("certified_a must be finite".into()));
            }
        }
        if let Some(b) = self.bound_b {
            if !(b >= 0.0 && b.is_finite()) {
                return Err(Error::Config("bound_b must be non-negative".into()));
            }
        }
        self.sampler
            .build()
            .map_err(|e| Error::Config(e.to_string()))?;
        let t = &self.tolerances;
        if [t.solver, t.integrator, t.lambda_star]
            .iter()
            .any(|v| !(*v > 0.0))
        {
            return Err(Error::Config("tolerances must be positive".into()));
        }
        let s = &self.semigroup;
        if !(s.t_end > 0.0) || !(s.product_t > 0.0) {
            return Err(Error::Config("semigroup times must be positive".into()));
        }
        if s.n_list.is_empty() || s.n_list[0] == 0 || s.n_list.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config(
                "n_list must be positive and increasing".into(),
            ));
        }
        if self.resolve.directions.is_empty() {
            return Err(Error::Config("resolve.directions is empty".into()));
        }
        if let Some(g) = &self.generator {
            g.build().map_err(|e| Error::Config(e.to_string()))?;
        }
        Ok(())
    }

    pub fn generator(&self) -> Result<GeneratorMap> {
        self.generator
            .as_ref()
            .ok_or_else(|| Error::Config("this command needs a generator".into()))?
            .build()
            .map_err(|e| Error::Config(e.to_string()))
    }

    pub fn certified_a(&self) -> Result<f64> {
        self.certified_a
            .ok_or_else(|| Error::Config("this command needs certified_a".into()))
    }

    pub fn lambda_values(&self) -> Result<Vec<f64>> {
        Ok(self
            .lambdas
            .as_ref()
            .ok_or_else(|| Error::Config("this command needs lambdas".into()))?
            .values())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXTREMAL: &str = r#"{
        "generator": {"kind": "rational", "num": [[0,0],[1,0],[-1,0]], "den": [[1,0],[1,0]]},
        "certified_a": 0.0,
        "analytic_a": true,
        "lambdas": [3, 4],
        "sampler": {"seed": 7}
    }"#;

    #[test]
    fn parses_and_builds() {
        let cfg = ExperimentConfig::from_json(EXTREMAL).unwrap();
        assert_eq!(cfg.sampler.count, 64);
        assert_eq!(cfg.lambda_values().unwrap(), [3.0, 4.0]);
        let f = cfg.generator().unwrap();
        assert_eq!(f.dim(), 1);
    }

    #[test]
    fn polynomial_generator() {
        let text = r#"{
            "generator": {"kind": "polynomial", "dim": 2,
                "matrix": [[1,0],[0,0],[0,0],[1,0]],
                "terms": [{"degree": 2, "monomials": [{"component": 0, "exponents": [0, 2], "coeff": [0.5, 0]}]}]},
            "sampler": {"seed": 1, "count": 8, "radii": [0.5]}
        }"#;
        let f = ExperimentConfig::from_json(text)
            .unwrap()
            .generator()
            .unwrap();
        let v = f
            .eval(&crate::holomap::CVector::from_real(&[0.0, 0.4]))
            .unwrap();
        assert!((v[0].re - 0.08).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_input() {
        let with_key = EXTREMAL.replace("\"analytic_a\"", "\"alpha_override\": 1, \"analytic_a\"");
        assert!(ExperimentConfig::from_json(&with_key).is_err());
        assert!(ExperimentConfig::from_json(&EXTREMAL.replace("[3, 4]", "[]")).is_err());
        assert!(ExperimentConfig::from_json(&EXTREMAL.replace("[3, 4]", "[3, -1]")).is_err());
        assert!(ExperimentConfig::from_json(&EXTREMAL.replace("{\"seed\": 7}", "{}")).is_err());
        let bad_gen = EXTREMAL.replace("\"num\"", "\"extra\": 1, \"num\"");
        assert!(ExperimentConfig::from_json(&bad_gen).is_err());
    }

    #[test]
    fn range_values() {
        let r = LambdaSpec::Range(LambdaRange {
            start: 1.0,
            stop: 100.0,
            count: 3,
            log: true,
        });
        let v = r.values();
        assert!((v[1] - 10.0).abs() < 1e-12 && (v[2] - 100.0).abs() < 1e-12);
    }

    #[test]
    fn round_trip() {
        let cfg = ExperimentConfig::from_json(EXTREMAL).unwrap();
        let again = ExperimentConfig::from_json(&cfg.to_json().unwrap()).unwrap();
        assert_eq!(cfg, again);
    }
}
