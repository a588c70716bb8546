//! Invariant suite run by `accretive verify`.
//!
//! Every entry is a property that must hold for a correct implementation.
//! With `verify.mutation` set, the bounds are computed by a deliberately
//! broken formula and the suite is expected to fail.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bounds::{self, BoundsProfile, LambdaStarStatus, Mutation};
use crate::cli::{self, Command};
use crate::config::{ExperimentConfig, MutationSpec};
use crate::error::{Error, Result};
use crate::fixtures::{self, Fixture};
use crate::holomap::{self, CMatrix, CVector, SphereSampler};
use crate::numrange::{self, accretivity_constant, check_assumption_a, support_function};
use crate::resolvent::{self, ContinuationPath, ResolventFamily, SolverOptions};
use crate::semigroup;
use crate::starlike::{self, MapQuantity, ResolventQuantity};

/// `λ` grid used when the configuration has none.
pub const DEFAULT_LAMBDAS: [f64; 6] = [0.5, 1.0, 2.0, 4.0, 10.0, 60.0];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Invariant {
    pub name: String,
    pub module: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifySummary {
    pub mutation: Option<MutationSpec>,
    pub passed: bool,
    pub invariants: Vec<Invariant>,
}

impl VerifySummary {
    pub fn failed_names(&self) -> Vec<String> {
        self.invariants
            .iter()
            .filter(|i| !i.passed)
            .map(|i| format!("{}::{} ({})", i.module, i.name, i.detail))
            .collect()
    }

    pub fn get(&self, name: &str) -> Option<&Invariant> {
        self.invariants.iter().find(|i| i.name == name)
    }
}

struct Suite {
    module: &'static str,
    out: Vec<Invariant>,
}

impl Suite {
    fn record(&mut self, name: &str, check: impl FnOnce() -> Result<(bool, String)>) {
        let (passed, detail) = check().unwrap_or_else(|e| (false, format!("error: {e}")));
        self.out.push(Invariant {
            name: name.to_owned(),
            module: self.module,
            passed,
            detail,
        });
    }
}

struct Ctx {
    sampler: SphereSampler,
    lambdas: Vec<f64>,
    mutation: Option<MutationSpec>,
    seed: u64,
}

impl Ctx {
    fn profile(&self, fx: &Fixture) -> Result<BoundsProfile> {
        let p = fx.profile(&self.sampler)?;
        Ok(match self.mutation {
            Some(MutationSpec::AlphaSign) => p.with_mutation(Mutation::AlphaSignError),
            None => p,
        })
    }

    fn family(&self, fx: &Fixture) -> Result<ResolventFamily> {
        ResolventFamily::new(fx.generator.clone(), fx.a)
    }
}

/// Runs every invariant.
pub fn run_suite(cfg: &ExperimentConfig) -> Result<VerifySummary> {
    let ctx = Ctx {
        sampler: cfg
            .sampler
            .build()
            .map_err(|e| Error::Config(e.to_string()))?,
        lambdas: match &cfg.lambdas {
            Some(l) => l.values(),
            None => DEFAULT_LAMBDAS.to_vec(),
        },
        mutation: cfg.verify.mutation,
        seed: cfg.sampler.seed,
    };
    let mut invariants = Vec::new();
    for (module, run) in [
        ("holomap", holomap_invariants as fn(&Ctx, &mut Suite)),
        ("numrange", numrange_invariants),
        ("resolvent", resolvent_invariants),
        ("bounds", bounds_invariants),
        ("semigroup", semigroup_invariants),
        ("starlike", starlike_invariants),
        ("cli", cli_invariants),
    ] {
        let mut s = Suite {
            module,
            out: Vec::new(),
        };
        run(&ctx, &mut s);
        invariants.extend(s.out);
    }
    Ok(VerifySummary {
        mutation: ctx.mutation,
        passed: invariants.iter().all(|i| i.passed),
        invariants,
    })
}

fn within(value: f64, tol: f64) -> (bool, String) {
    (
        value <= tol,
        format!("max deviation {value:e} (tolerance {tol:e})"),
    )
}

fn max_over<T>(items: impl IntoIterator<Item = T>, f: impl FnMut(T) -> Result<f64>) -> Result<f64> {
    items
        .into_iter()
        .map(f)
        .try_fold(0.0f64, |m, v| Ok(m.max(v?)))
}

fn random_vector(rng: &mut ChaCha8Rng, dim: usize, scale: f64) -> CVector {
    CVector::new(
        (0..dim)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * scale)
            .collect(),
    )
}

fn test_matrix() -> CMatrix {
    CMatrix::from_rows(vec![
        vec![Complex64::new(1.0, 0.5), Complex64::new(2.0, -1.0)],
        vec![Complex64::new(0.0, 0.3), Complex64::new(-0.5, 1.0)],
    ])
    .expect("square")
}

fn interior(sampler: &SphereSampler, dim: usize, max_radius: f64) -> Vec<CVector> {
    sampler
        .points(dim)
        .into_iter()
        .filter(|x| x.norm() <= max_radius)
        .collect()
}

fn holomap_invariants(ctx: &Ctx, s: &mut Suite) {
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    s.record("inner_product_hermitian", || {
        let mut worst = 0.0f64;
        for _ in 0..200 {
            let x = random_vector(&mut rng, 3, 1.0);
            let y = random_vector(&mut rng, 3, 1.0);
            let c = Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let xy = holomap::inner_product(&x, &y).expect("same dim");
            let yx = holomap::inner_product(&y, &x).expect("same dim");
            let cx = holomap::inner_product(&x.scale(c), &y).expect("same dim");
            worst = worst.max((xy - yx.conj()).norm()).max((cx - c * xy).norm());
        }
        Ok(within(worst, 1e-12))
    });

    s.record("frechet_matches_central_difference", || {
        max_over(fixtures::corpus(), |fx| {
            let pts = interior(&ctx.sampler, fx.generator.dim(), 0.9);
            let mut local = ChaCha8Rng::seed_from_u64(ctx.seed ^ 0x5eed);
            max_over(pts.iter().take(1000), |x| {
                let v = random_vector(&mut local, x.dim(), 1.0)
                    .normalized()
                    .expect("nonzero");
                let h = 1e-5;
                let fp = holomap::eval(&fx.generator, &x.axpy(Complex64::new(h, 0.0), &v))?;
                let fm = holomap::eval(&fx.generator, &x.axpy(Complex64::new(-h, 0.0), &v))?;
                let fd = fp.axpy(Complex64::new(-1.0, 0.0), &fm).scale_real(0.5 / h);
                let exact = holomap::frechet(&fx.generator, x)?.mul_vec(&v)?;
                Ok(fd.distance(&exact) / exact.norm().max(1.0))
            })
        })
        .map(|w| within(w, 1e-6))
    });

    s.record("homogeneous_terms_scale", || {
        let q = fixtures::quadratic().generator;
        let e = fixtures::extremal().generator;
        max_over([q, e], |g| {
            let terms = holomap::taylor_homogeneous(&g, 6)?;
            let mut local = ChaCha8Rng::seed_from_u64(ctx.seed + 1);
            max_over(terms.iter(), |p| {
                let x = random_vector(&mut local, p.dim(), 0.5);
                let t = Complex64::new(0.7, -0.4);
                let lhs = p.eval(&x.scale(t))?;
                let rhs = p.eval(&x)?.scale(t.powu(p.degree()));
                Ok(lhs.distance(&rhs) / rhs.norm().max(1e-300).max(1.0))
            })
        })
        .map(|w| within(w, 1e-12))
    });

    s.record("sup_norm_monotone_in_radius", || {
        let radii: Vec<f64> = (1..=9).map(|k| k as f64 / 10.0).collect();
        let mut ok = true;
        let mut detail = String::from("M_f nondecreasing on r = 0.1..0.9");
        for fx in fixtures::corpus() {
            let m: Vec<f64> = radii
                .iter()
                .map(|&r| holomap::sup_norm(&fx.generator, r, &ctx.sampler).unwrap_or(f64::NAN))
                .collect();
            if m.windows(2).any(|w| !(w[1] >= w[0] - 1e-12)) {
                ok = false;
                detail = format!("{} is not monotone: {m:?}", fx.name);
            }
        }
        Ok((ok, detail))
    });

    s.record("rational_series_resums", || {
        let g = fixtures::extremal_map();
        let c = g.rational_series(30).expect("rational");
        max_over(0..64, |k| {
            let z = Complex64::from_polar(0.5 * ((k % 8) as f64 + 1.0) / 8.0, k as f64 * 0.7);
            let series: Complex64 = c
                .iter()
                .rev()
                .fold(Complex64::new(0.0, 0.0), |acc, ck| acc * z + ck);
            let exact = g.eval(&CVector::scalar(z))?;
            Ok((series - exact[0]).norm())
        })
        .map(|w| within(w, 1e-8))
    });

    s.record("sampler_unit_and_reproducible", || {
        let d1 = ctx.sampler.directions(3);
        let d2 = ctx.sampler.directions(3);
        let worst = d1
            .iter()
            .map(|u| (u.norm() - 1.0).abs())
            .fold(0.0, f64::max);
        Ok((
            d1 == d2 && worst <= 1e-14,
            format!(
                "same seed reproduces {} directions, max |norm - 1| = {worst:e}",
                d1.len()
            ),
        ))
    });
}

fn numrange_invariants(ctx: &Ctx, s: &mut Suite) {
    let m = test_matrix();
    let angles: Vec<f64> = (0..36)
        .map(|k| k as f64 * std::f64::consts::TAU / 36.0)
        .collect();

    s.record("support_function_is_convex", || {
        let delta = std::f64::consts::TAU / 36.0;
        let mut worst = f64::NEG_INFINITY;
        for &t in &angles {
            let mid = support_function(&m, t);
            let side = support_function(&m, t - delta) + support_function(&m, t + delta);
            worst = worst.max(2.0 * delta.cos() * mid - side);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
        for _ in 0..500 {
            let x = random_vector(&mut rng, 2, 1.0)
                .normalized()
                .expect("nonzero");
            let w = m.mul_vec(&x)?.inner(&x)?;
            for &t in &angles {
                worst =
                    worst.max((Complex64::from_polar(1.0, -t) * w).re - support_function(&m, t));
            }
        }
        Ok((worst <= 1e-10, format!("worst support violation {worst:e}")))
    });

    s.record("support_function_positively_homogeneous", || {
        max_over(angles.iter(), |&t| {
            Ok((support_function(&m.scale(Complex64::new(2.5, 0.0)), t)
                - 2.5 * support_function(&m, t))
            .abs())
        })
        .map(|w| within(w, 1e-12))
    });

    s.record("pointwise_inequalities_hold", || {
        let mut fails = Vec::new();
        for fx in fixtures::corpus() {
            if !numrange::prop_ineq_diagnostics(&fx.generator, fx.a, &ctx.sampler).passed() {
                fails.push(fx.name);
            }
        }
        Ok((fails.is_empty(), format!("failing fixtures: {fails:?}")))
    });

    s.record("negative_map_rejected", || {
        let neg = fixtures::negative();
        let acc = accretivity_constant(&neg, &ctx.sampler);
        Ok((
            acc.a_star < -0.9 && !acc.certifies(0.0, true) && !check_assumption_a(&neg, 0.0),
            format!("a_star = {}", acc.a_star),
        ))
    });

    s.record("a_star_scales_linearly", || {
        max_over(fixtures::corpus(), |fx| {
            let a1 = accretivity_constant(&fx.generator, &ctx.sampler).a_star;
            let a3 = accretivity_constant(&fx.generator.scaled(3.0), &ctx.sampler).a_star;
            Ok((a3 - 3.0 * a1).abs() / a1.abs().max(1.0))
        })
        .map(|w| within(w, 1e-12))
    });

    s.record("coefficient_bounds_hold", || {
        let mut fails = Vec::new();
        for fx in fixtures::corpus() {
            if !numrange::coefficient_bound_check(&fx.generator, fx.a, 8, &ctx.sampler)?.passed() {
                fails.push(fx.name);
            }
        }
        Ok((fails.is_empty(), format!("failing fixtures: {fails:?}")))
    });

    s.record("certified_constants_consistent", || {
        let mut bad = Vec::new();
        for fx in fixtures::corpus() {
            let acc = accretivity_constant(&fx.generator, &ctx.sampler);
            let ok = acc.certifies(fx.a, fx.analytic_a)
                && fx.a <= acc.k_0 + 1e-12
                && acc.a_star <= acc.k_0 + 1e-9
                && check_assumption_a(&fx.generator, fx.a);
            if !ok {
                bad.push(fx.name);
            }
        }
        Ok((bad.is_empty(), format!("inconsistent fixtures: {bad:?}")))
    });
}

fn resolvent_invariants(ctx: &Ctx, s: &mut Suite) {
    let corpus = fixtures::corpus();

    s.record("newton_residual_small", || {
        max_over(corpus.iter(), |fx| {
            let fam = ctx.family(fx)?;
            max_over([1.0, 4.0], |lambda| {
                max_over(
                    fam.solve_many(lambda, &ctx.sampler.points(fam.dim())),
                    |r| {
                        let r = r?;
                        Ok(if r.converged {
                            r.residual
                        } else {
                            f64::INFINITY
                        })
                    },
                )
            })
        })
        .map(|w| within(w, 1e-10))
    });

    s.record("origin_fixed", || {
        max_over(corpus.iter(), |fx| {
            let fam = ctx.family(fx)?;
            max_over(ctx.lambdas.iter(), |&l| {
                Ok(fam.resolve(l, &CVector::zeros(fam.dim()))?.norm())
            })
        })
        .map(|w| within(w, 0.0))
    });

    s.record("continuation_paths_agree", || {
        max_over(corpus.iter(), |fx| {
            let fam = ctx.family(fx)?;
            let geo = SolverOptions {
                path: ContinuationPath::Geometric,
                ..fam.options().clone()
            };
            max_over(ctx.sampler.points(fam.dim()).iter().step_by(7), |x| {
                let a = fam.solve(10.0, x)?;
                let b = fam.solve_with(10.0, x, &geo)?;
                Ok(a.w.distance(&b.w))
            })
        })
        .map(|w| within(w, 1e-8))
    });

    s.record("resolvent_shrinks", || {
        max_over(corpus.iter(), |fx| {
            let fam = ctx.family(fx)?;
            max_over(ctx.lambdas.iter(), |&l| {
                max_over(ctx.sampler.points(fam.dim()).iter().step_by(3), |x| {
                    Ok(fam.resolve(l, x)?.norm() - x.norm())
                })
            })
        })
        .map(|w| within(w, 1e-12))
    });

    s.record("extremal_closed_form", || {
        let fam = ctx.family(&fixtures::extremal())?;
        max_over(ctx.sampler.points(1), |x| {
            let z = x[0];
            let exact = z / (2.0 - z);
            Ok((fam.resolve(1.0, &x)?[0] - exact).norm())
        })
        .map(|w| within(w, 1e-12))
    });

    for (name, check) in [
        ("distortion_bounds_hold", 0usize),
        ("boundary_pushout_holds", 1),
        ("composed_accretivity_holds", 2),
    ] {
        s.record(name, || {
            let mut fails = Vec::new();
            let mut err = None;
            for fx in &corpus {
                let run = || -> Result<bool> {
                    let fam = ctx.family(fx)?;
                    let p = ctx.profile(fx)?;
                    for &l in &ctx.lambdas {
                        let r = match check {
                            0 => resolvent::verify_distortion(&fam, l, &ctx.sampler, &p)?,
                            1 => resolvent::boundary_pushout_check(&fam, l, &ctx.sampler, &p)?,
                            _ => resolvent::composed_accretivity(&fam, l, &ctx.sampler, &p)?,
                        };
                        if !r.passed() {
                            return Ok(false);
                        }
                    }
                    Ok(true)
                };
                match run() {
                    Ok(true) => {}
                    Ok(false) => fails.push(fx.name),
                    Err(e) => err = Some(e),
                }
            }
            match err {
                Some(e) => Err(e),
                None => Ok((fails.is_empty(), format!("failing fixtures: {fails:?}"))),
            }
        });
    }

    s.record("extension_radius_reaches_rho", || {
        let fx = fixtures::extremal();
        let fam = ctx.family(&fx)?;
        let p = ctx.profile(&fx)?;
        let mut worst = f64::INFINITY;
        for lambda in [4.0, 10.0] {
            let rho = bounds::resolvent_radii(&p, lambda).rho;
            for dir in [
                Complex64::new(1.0, 0.0),
                Complex64::new(-1.0, 0.0),
                Complex64::new(0.0, 1.0),
            ] {
                let r = resolvent::singularity_radius_1d(&fam, lambda, dir)?;
                worst = worst.min(r.radius - rho.min(resolvent::SINGULARITY_CAP));
            }
        }
        Ok((worst >= -1e-6, format!("min radius - rho = {worst:e}")))
    });
}

fn bounds_invariants(ctx: &Ctx, s: &mut Suite) {
    let fx = fixtures::extremal();
    let profile = ctx.profile(&fx);
    let p = match profile {
        Ok(p) => p,
        Err(e) => {
            s.record("profile", || Err(e));
            return;
        }
    };
    let profiles: Vec<(Fixture, BoundsProfile)> = fixtures::corpus()
        .into_iter()
        .filter_map(|fx| ctx.profile(&fx).ok().map(|p| (fx, p)))
        .collect();
    let grid: Vec<f64> = (0..200).map(|k| 0.05 * 1.05f64.powi(k)).collect();

    s.record("alpha_in_unit_interval_and_nonincreasing", || {
        let mut ok = true;
        for (_, q) in &profiles {
            let a: Vec<f64> = grid.iter().map(|&l| bounds::alpha(q, l)).collect();
            ok &= a.iter().all(|&v| v > 0.0 && v <= 1.0);
            ok &= a.windows(2).all(|w| w[1] <= w[0] + 1e-15);
        }
        Ok((
            ok,
            format!("{} profiles on {} lambdas", profiles.len(), grid.len()),
        ))
    });

    s.record("alpha_branches_meet", || {
        max_over(profiles.iter(), |(_, q)| {
            let gap = -q.k - 3.0 * q.a;
            if gap <= 0.0 {
                return Ok(0.0);
            }
            let lc = 2.0 / gap;
            let eps = 1e-9 * lc;
            Ok(
                (bounds::alpha(q, lc - eps) - bounds::alpha(q, lc + eps)).abs()
                    + (bounds::alpha(q, lc) - 1.0 / (1.0 + lc * q.a)).abs(),
            )
        })
        .map(|w| within(w, 1e-8))
    });

    s.record("inverse_radii_cross_check", || {
        let mut n = 0;
        for c in [0.1, 0.5, 1.0, 2.0] {
            for mult in [3.5, 5.0, 10.0, 100.0] {
                bounds::inverse_radii(c, -mult * c)?;
                n += 1;
            }
        }
        Ok((true, format!("{n} closed forms agree with the optimum")))
    });

    s.record("psi_decreasing_and_majorised", || {
        let start = p.psi_domain_start();
        let lambdas: Vec<f64> = (1..=100).map(|k| start + 0.5 + k as f64 * 2.0).collect();
        let psi = lambdas
            .iter()
            .map(|&l| bounds::psi(&p, l))
            .collect::<Result<Vec<_>>>()?;
        let psi1 = lambdas
            .iter()
            .map(|&l| bounds::psi1(&p, l))
            .collect::<Result<Vec<_>>>()?;
        let decreasing = psi.windows(2).all(|w| w[1] < w[0]);
        let majorised = psi.iter().zip(&psi1).all(|(a, b)| a <= b);
        Ok((
            decreasing && majorised,
            format!("decreasing {decreasing}, below Psi_1 {majorised}"),
        ))
    });

    s.record("gamma_continuous", || {
        let t: f64 = 0.4;
        let left = 2.0 * (1.0 - 2.0 * t) / (2.0 - t);
        let right = (4.0 - 8.0 * t - t * t) / (2.0 * (4.0 - 8.0 * t + 3.0 * t * t));
        let end = bounds::gamma_domain_end();
        let ts: Vec<f64> = (1..=1000).map(|k| end * k as f64 / 1000.0).collect();
        let g = ts
            .iter()
            .map(|&t| bounds::gamma_order(t))
            .collect::<Result<Vec<_>>>()?;
        let lip = g
            .windows(2)
            .zip(ts.windows(2))
            .map(|(gw, tw)| (gw[1] - gw[0]).abs() / (tw[1] - tw[0]))
            .fold(0.0, f64::max);
        Ok((
            (left - right).abs() <= 1e-6 && lip <= 10.0 && (g[999]).abs() <= 1e-12,
            format!(
                "branch gap {:e}, max slope {lip}, gamma(end) = {:e}",
                (left - right).abs(),
                g[999]
            ),
        ))
    });

    s.record("a_lambda_two_forms_agree", || {
        max_over(profiles.iter(), |(_, q)| {
            max_over(grid.iter(), |&l| {
                Ok((bounds::a_lambda(q, l) - bounds::a_lambda_from_alpha(q, l)).abs())
            })
        })
        .map(|w| within(w, 1e-12))
    });

    s.record("beta_between_zero_and_alpha", || {
        let mut ok = true;
        for (_, q) in profiles.iter().filter(|(fx, _)| fx.sup_norm.is_some()) {
            for &l in &grid {
                let a = bounds::alpha(q, l);
                let b = bounds::beta(q, l)?.value;
                ok &= 0.0 <= b && b <= a * (1.0 + 1e-14) && a <= 1.0;
            }
        }
        Ok((ok, "0 <= beta <= alpha <= 1".to_owned()))
    });

    s.record("lambda_star_root", || {
        let star = bounds::lambda_star(&p, 1e-10)?;
        let psi = bounds::psi(&p, star.lambda)?;
        Ok((
            star.status == LambdaStarStatus::Root
                && (psi - 1.0).abs() <= 1e-8
                && (star.lambda - 51.82811431449741).abs() <= 1e-6,
            format!(
                "lambda* = {}, Psi(lambda*) - 1 = {:e}",
                star.lambda,
                psi - 1.0
            ),
        ))
    });
}

fn semigroup_invariants(ctx: &Ctx, s: &mut Suite) {
    let dirs = ctx.sampler.directions(2);
    let starts: Vec<CVector> = dirs.iter().take(3).map(|u| u.scale_real(0.5)).collect();

    s.record("error_tracks_tolerance", || {
        let id = fixtures::identity().generator;
        let x = CVector::scalar(Complex64::new(0.5, 0.0));
        let exact = 0.5 * (-3.0f64).exp();
        let study = semigroup::tolerance_study(&id, &x, 3.0, 1e-6, 12, |u| (u[0] - exact).norm())?;
        let ratio = study.errors[0] / study.errors[12];
        Ok((
            study.slope >= 1.0 && ratio >= 4096.0,
            format!(
                "log-log slope {}, error ratio over 12 halvings {ratio}",
                study.slope
            ),
        ))
    });

    s.record("norm_nonincreasing", || {
        let mut worst = f64::NEG_INFINITY;
        for fx in fixtures::corpus() {
            let pts: Vec<CVector> = if fx.generator.dim() == 2 {
                starts.clone()
            } else {
                ctx.sampler
                    .directions(1)
                    .iter()
                    .take(3)
                    .map(|u| u.scale_real(0.9))
                    .collect()
            };
            for x in &pts {
                let tr = semigroup::integrate_cauchy(&fx.generator, x, 3.0, 1e-10)?;
                for w in tr.norms.windows(2) {
                    worst = worst.max(w[1] - w[0]);
                }
            }
        }
        Ok((worst <= 1e-12, format!("largest norm increase {worst:e}")))
    });

    s.record("semigroup_property", || {
        let tol = 1e-10;
        max_over(fixtures::corpus(), |fx| {
            let x = if fx.generator.dim() == 2 {
                starts[0].clone()
            } else {
                CVector::scalar(Complex64::new(0.3, 0.4))
            };
            let whole = semigroup::integrate_cauchy(&fx.generator, &x, 1.0, tol)?;
            let first = semigroup::integrate_cauchy(&fx.generator, &x, 0.7, tol)?;
            let second = semigroup::integrate_cauchy(&fx.generator, first.final_state(), 0.3, tol)?;
            Ok(whole.final_state().distance(second.final_state()))
        })
        .map(|w| within(w, 10.0 * 1e-10))
    });

    s.record("product_formula_converges", || {
        let mut bad = Vec::new();
        for fx in [fixtures::extremal(), fixtures::quadratic()] {
            let fam = ctx.family(&fx)?;
            let x = if fx.generator.dim() == 2 {
                starts[1].clone()
            } else {
                CVector::scalar(Complex64::new(0.5, 0.2))
            };
            let table = semigroup::convergence_study(&fam, 1.0, &x, &[4, 16, 64, 256])?;
            if !table.is_strictly_decreasing() {
                bad.push(fx.name);
            }
        }
        Ok((bad.is_empty(), format!("non-decreasing errors for {bad:?}")))
    });

    s.record("squeezing_holds", || {
        let mut bad = Vec::new();
        for fx in fixtures::corpus() {
            let x = if fx.generator.dim() == 2 {
                starts[2].clone()
            } else {
                CVector::scalar(Complex64::new(-0.2, 0.6))
            };
            if !semigroup::squeezing_check(&fx.generator, fx.a, &x, 3.0)?.passed() {
                bad.push(fx.name);
            }
        }
        Ok((bad.is_empty(), format!("failing fixtures: {bad:?}")))
    });
}

fn starlike_invariants(ctx: &Ctx, s: &mut Suite) {
    let q = fixtures::quadratic();

    s.record("quantity_invariant_under_scaling", || {
        let scaled = q.generator.scaled(3.0);
        let (a, b) = (MapQuantity(&q.generator), MapQuantity(&scaled));
        max_over(ctx.sampler.points(2).iter().step_by(5), |x| {
            use starlike::QuantitySource;
            Ok((a.quantity(x)? - b.quantity(x)?).norm())
        })
        .map(|w| within(w, 1e-10))
    });

    s.record("identity_and_difference_paths_agree", || {
        max_over([fixtures::extremal(), q.clone()], |fx| {
            let fam = ctx.family(&fx)?;
            let pts = interior(&ctx.sampler, fx.generator.dim(), 0.9);
            max_over(pts.iter().step_by(4), |x| {
                let a = starlike::resolvent_starlike_quantity(&fam, 1.0, x)?;
                let b = starlike::resolvent_starlike_quantity_fd(&fam, 1.0, x)?;
                Ok((a - b).norm())
            })
        })
        .map(|w| within(w, 1e-6))
    });

    s.record("resolvents_starlike", || {
        let mut worst = f64::INFINITY;
        for fx in fixtures::corpus() {
            let fam = ctx.family(&fx)?;
            let est = starlike::order_estimate(
                &ResolventQuantity {
                    family: &fam,
                    lambda: 1.0,
                },
                &ctx.sampler,
            )?;
            worst = worst.min(est.raw_min);
        }
        Ok((worst > 0.0, format!("min Re(1/s) = {worst}")))
    });

    s.record("disk_form_equivalent", || {
        let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
        let mut mismatches = 0;
        let mut tested = 0;
        for _ in 0..10_000 {
            let gamma: f64 = rng.gen_range(0.01..1.0);
            let sv = Complex64::new(rng.gen_range(-1.0..3.0), rng.gen_range(-2.0..2.0));
            if sv.norm() < 1e-9 {
                continue;
            }
            let lhs = (1.0 / sv).re - gamma;
            let rhs = 1.0 / (2.0 * gamma) - (sv - 1.0 / (2.0 * gamma)).norm();
            if lhs.abs() < 1e-9 || rhs.abs() < 1e-9 {
                continue;
            }
            tested += 1;
            if (lhs > 0.0) != (rhs > 0.0) {
                mismatches += 1;
            }
        }
        Ok((
            mismatches == 0,
            format!("{mismatches} mismatches in {tested} samples"),
        ))
    });

    s.record("order_half_beyond_lambda_star", || {
        let mut bad = Vec::new();
        for fx in [fixtures::extremal(), fixtures::identity()] {
            let fam = ctx.family(&fx)?;
            let p = ctx.profile(&fx)?;
            let r = starlike::verify_theorem_order1(&fam, 60.0, &p, &ctx.sampler)?;
            if !r.passed() || !r.is_applicable() {
                bad.push(fx.name);
            }
        }
        Ok((bad.is_empty(), format!("failing fixtures: {bad:?}")))
    });

    s.record("order_gamma_holds", || {
        let fam = ctx.family(&q)?;
        let p = ctx.profile(&q)?;
        let r = starlike::verify_theorem_order2(&fam, 1.0, &p, &ctx.sampler)?;
        Ok((
            r.passed() && r.is_applicable(),
            format!("worst margin {:?}", r.worst_margin("order")),
        ))
    });
}

const EXTREMAL_CONFIG: &str = r#"{
    "generator": {"kind": "rational", "num": [[0,0],[1,0],[-1,0]], "den": [[1,0],[1,0]]},
    "certified_a": 0.0,
    "analytic_a": true,
    "lambdas": [1.0, 4.0, 60.0],
    "sampler": {"seed": 7, "count": 16}
}"#;

fn cli_invariants(ctx: &Ctx, s: &mut Suite) {
    s.record("config_round_trip", || {
        let cfg = ExperimentConfig::from_json(EXTREMAL_CONFIG)?;
        let back = ExperimentConfig::from_json(&cfg.to_json()?)?;
        Ok((back == cfg, "from_json(to_json(c)) == c".to_owned()))
    });

    s.record("outputs_deterministic", || {
        let mut cfg = ExperimentConfig::from_json(EXTREMAL_CONFIG)?;
        cfg.sampler.seed = ctx.seed;
        let a = cli::execute(Command::Bounds, &cfg)?;
        let b = cli::execute(Command::Bounds, &cfg)?;
        Ok((
            a.artifacts == b.artifacts,
            format!(
                "{} files compared byte for byte",
                a.artifacts.names().count()
            ),
        ))
    });

    s.record("exit_codes", || {
        let usage = cli::exit_code_for(&Error::Config("x".into()));
        let fail = cli::exit_code_for(&Error::SingularMatrix);
        let bad_key =
            ExperimentConfig::from_json(r#"{"sampler": {"seed": 1}, "alpha_override": 2}"#);
        let bad_code = bad_key.as_ref().err().map(cli::exit_code_for);
        Ok((
            usage == cli::EXIT_USAGE && fail == cli::EXIT_FAIL && bad_code == Some(cli::EXIT_USAGE),
            format!(
                "config error -> {usage}, runtime error -> {fail}, unknown key -> {bad_code:?}"
            ),
        ))
    });
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(mutation: Option<MutationSpec>) -> ExperimentConfig {
        let mut c =
            ExperimentConfig::from_json(r#"{"sampler": {"seed": 11, "count": 12}}"#).unwrap();
        c.verify.mutation = mutation;
        c
    }

    #[test]
    fn suite_passes() {
        let s = run_suite(&cfg(None)).unwrap();
        assert!(s.invariants.len() >= 25);
        assert!(s.passed, "{:#?}", s.failed_names());
    }

    #[test]
    fn mutation_is_caught() {
        let s = run_suite(&cfg(Some(MutationSpec::AlphaSign))).unwrap();
        assert!(!s.passed);
        assert!(
            !s.get("alpha_in_unit_interval_and_nonincreasing")
                .unwrap()
                .passed
        );
        assert!(!s.get("distortion_bounds_hold").unwrap().passed);
    }
}
