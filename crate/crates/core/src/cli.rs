//! `accretive <analyze|resolve|bounds|semigroup|starlike|verify> <config> [--out-dir D] [--seed N]`
//!
//! Exit codes: 0 when every applicable check passes, 1 when a check fails,
//! 2 for usage or configuration errors.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use crate::bounds::{self, BoundsProfile};
use crate::config::{ComplexPair, ExperimentConfig};
use crate::error::{Error, Result};
use crate::holomap::{CVector, GeneratorMap, SphereSampler};
use crate::numrange::{
    accretivity_constant, check_assumption_a, coefficient_bound_check, prop_ineq_diagnostics,
};
use crate::output::fmt_f64;
use crate::report::{DiagnosticsReport, ReportSummary};
use crate::resolvent::{self, ResolventFamily, SolverOptions};
use crate::semigroup;
use crate::starlike::{self, ResolventQuantity};
use crate::verify;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Highest degree of the homogeneous expansion checked by `analyze`.
pub const COEFFICIENT_MAX_DEGREE: u32 = 8;
const DEFAULT_OUT_DIR: &str = "out";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Analyze,
    Resolve,
    Bounds,
    Semigroup,
    Starlike,
    Verify,
}

#[derive(Debug, Parser)]
#[command(
    name = "accretive",
    version,
    about = "Resolvents of holomorphically accretive mappings"
)]
struct Args {
    #[arg(value_enum)]
    command: Command,
    config: PathBuf,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

/// Files produced by a command, written together once the command is done.
#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct Artifacts {
    files: BTreeMap<String, Vec<u8>>,
}

impl Artifacts {
    pub fn csv(
        &mut self,
        name: &str,
        (header, rows): (Vec<String>, Vec<Vec<String>>),
    ) -> Result<()> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&header)?;
        for r in &rows {
            w.write_record(r)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        self.files.insert(name.to_owned(), bytes);
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.files.insert(name.to_owned(), text.into_bytes());
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&[u8]> {
        self.files.get(name).map(Vec::as_slice)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.files.keys().map(String::as_str)
    }

    pub fn write_all(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        for (name, bytes) in &self.files {
            fs::write(dir.join(name), bytes)?;
        }
        Ok(())
    }
}

/// Result of one command.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub passed: bool,
    pub artifacts: Artifacts,
}

/// Parses `args` (including the program name), runs the command and
/// returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_USAGE
            } else {
                EXIT_PASS
            };
            let _ = e.print();
            return code;
        }
    };
    let mut cfg = match ExperimentConfig::load(&args.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    if let Some(seed) = args.seed {
        cfg.sampler.seed = seed;
    }
    let out_dir = args
        .out_dir
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));
    let outcome = match execute(args.command, &cfg) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code_for(&e);
        }
    };
    if let Err(e) = outcome.artifacts.write_all(&out_dir) {
        eprintln!("error: cannot write outputs to {}: {e}", out_dir.display());
        return EXIT_FAIL;
    }
    if outcome.passed {
        println!("pass: outputs in {}", out_dir.display());
        EXIT_PASS
    } else {
        println!("FAIL: see {}", out_dir.display());
        EXIT_FAIL
    }
}

/// Configuration problems are usage errors; everything else is a failed run.
pub fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::Config(_) => EXIT_USAGE,
        _ => EXIT_FAIL,
    }
}

pub fn execute(command: Command, cfg: &ExperimentConfig) -> Result<Outcome> {
    match command {
        Command::Analyze => cmd_analyze(cfg),
        Command::Resolve => cmd_resolve(cfg),
        Command::Bounds => cmd_bounds(cfg),
        Command::Semigroup => cmd_semigroup(cfg),
        Command::Starlike => cmd_starlike(cfg),
        Command::Verify => cmd_verify(cfg),
    }
}

fn config_echo(cfg: &ExperimentConfig) -> ExperimentConfig {
    ExperimentConfig {
        output_dir: None,
        ..cfg.clone()
    }
}

fn sampler(cfg: &ExperimentConfig) -> Result<SphereSampler> {
    cfg.sampler
        .build()
        .map_err(|e| Error::Config(e.to_string()))
}

fn point(coords: &[ComplexPair]) -> CVector {
    CVector::new(coords.iter().map(|p| Complex64::new(p[0], p[1])).collect())
}

fn profile(
    cfg: &ExperimentConfig,
    f: &GeneratorMap,
    a: f64,
    s: &SphereSampler,
) -> Result<BoundsProfile> {
    let p = BoundsProfile::from_generator(f, a, s)?;
    Ok(match cfg.bound_b {
        Some(b) => p.with_bound_b(b),
        None => p,
    })
}

/// Generator, certified constant and resolvent family; `Err` text explains
/// why the generator is not usable.
fn certified_family(
    cfg: &ExperimentConfig,
    s: &SphereSampler,
) -> Result<(
    GeneratorMap,
    f64,
    std::result::Result<ResolventFamily, String>,
)> {
    let f = cfg.generator()?;
    let a = cfg.certified_a()?;
    let acc = accretivity_constant(&f, s);
    let fam = if !acc.certifies(a, cfg.analytic_a) {
        Err(format!(
            "a = {a} is not certified by the sampled a_star = {}",
            acc.a_star
        ))
    } else {
        ResolventFamily::new(f.clone(), a)
            .map(|fam| {
                fam.with_options(SolverOptions {
                    tol: cfg.tolerances.solver,
                    ..SolverOptions::default()
                })
            })
            .map_err(|e| e.to_string())
    };
    Ok((f, a, fam))
}

fn rejected(command: &str, cfg: &ExperimentConfig, reason: String) -> Result<Outcome> {
    let mut artifacts = Artifacts::default();
    artifacts.json(
        "report.json",
        &json!({
            "command": command,
            "config": config_echo(cfg),
            "passed": false,
            "rejected": reason,
        }),
    )?;
    Ok(Outcome {
        passed: false,
        artifacts,
    })
}

pub fn cmd_analyze(cfg: &ExperimentConfig) -> Result<Outcome> {
    let s = sampler(cfg)?;
    let f = cfg.generator()?;
    let a = cfg.certified_a()?;
    let acc = accretivity_constant(&f, &s);
    let certified = acc.certifies(a, cfg.analytic_a);
    let assumption = check_assumption_a(&f, a);
    let prop = prop_ineq_diagnostics(&f, a, &s);
    let coeff = coefficient_bound_check(&f, a, COEFFICIENT_MAX_DEGREE, &s)?;
    let passed = certified && assumption && prop.passed() && coeff.passed();

    let mut artifacts = Artifacts::default();
    artifacts.csv("accretivity_inequalities.csv", prop.csv_rows())?;
    artifacts.csv("coefficient_bounds.csv", coeff.csv_rows())?;
    artifacts.json(
        "report.json",
        &json!({
            "command": "analyze",
            "config": config_echo(cfg),
            "accretivity": acc,
            "certified": certified,
            "assumption_a": assumption,
            "inequalities": prop.summary(),
            "coefficients": coeff.summary(),
            "passed": passed,
        }),
    )?;
    Ok(Outcome { passed, artifacts })
}

fn merged(title: &str, tol: f64, reports: &[DiagnosticsReport]) -> DiagnosticsReport {
    let mut out = DiagnosticsReport::new(title, tol);
    for r in reports {
        out.records.extend(r.records.iter().cloned());
    }
    out
}

fn summaries(reports: &[DiagnosticsReport]) -> Vec<ReportSummary> {
    reports.iter().map(DiagnosticsReport::summary).collect()
}

pub fn cmd_resolve(cfg: &ExperimentConfig) -> Result<Outcome> {
    let s = sampler(cfg)?;
    let lambdas = cfg.lambda_values()?;
    let (f, a, fam) = certified_family(cfg, &s)?;
    let fam = match fam {
        Ok(fam) => fam,
        Err(reason) => return rejected("resolve", cfg, reason),
    };
    let p = profile(cfg, &f, a, &s)?;
    let mut artifacts = Artifacts::default();
    let (mut distortion, mut pushout, mut composed) = (Vec::new(), Vec::new(), Vec::new());
    for (k, &lambda) in lambdas.iter().enumerate() {
        distortion.push(resolvent::verify_distortion(&fam, lambda, &s, &p)?);
        pushout.push(resolvent::boundary_pushout_check(&fam, lambda, &s, &p)?);
        composed.push(resolvent::composed_accretivity(&fam, lambda, &s, &p)?);
        if let Some(tp) = &cfg.resolve.trace_point {
            let opts = SolverOptions {
                record_trace: true,
                ..fam.options().clone()
            };
            let r = fam.solve_with(lambda, &point(tp), &opts)?;
            artifacts.csv(&format!("trace_lambda{k}.csv"), r.trace_csv_rows())?;
        }
    }
    let mut passed = [&distortion, &pushout, &composed]
        .iter()
        .all(|rs| rs.iter().all(DiagnosticsReport::passed));

    let mut singular = Vec::new();
    if f.dim() == 1 {
        for &lambda in &lambdas {
            let rho = bounds::resolvent_radii(&p, lambda).rho;
            for d in &cfg.resolve.directions {
                let dir = Complex64::new(d[0], d[1]);
                let dir = dir / dir.norm();
                let r = resolvent::singularity_radius_1d(&fam, lambda, dir)?;
                let margin = r.radius - rho;
                let ok = r.capped || margin >= -1e-6;
                passed &= ok;
                singular.push(vec![
                    fmt_f64(lambda),
                    fmt_f64(dir.re),
                    fmt_f64(dir.im),
                    fmt_f64(r.radius),
                    r.capped.to_string(),
                    fmt_f64(rho),
                    fmt_f64(margin),
                    ok.to_string(),
                ]);
            }
        }
        let header = [
            "lambda", "re_dir", "im_dir", "radius", "capped", "rho", "margin", "pass",
        ]
        .map(String::from)
        .to_vec();
        artifacts.csv("singularity_radius.csv", (header, singular.clone()))?;
    }

    artifacts.csv(
        "distortion.csv",
        merged("distortion", 1e-9, &distortion).csv_rows(),
    )?;
    artifacts.csv("pushout.csv", merged("push-out", 1e-9, &pushout).csv_rows())?;
    artifacts.csv(
        "composed_accretivity.csv",
        merged("composed", 1e-9, &composed).csv_rows(),
    )?;
    artifacts.json(
        "report.json",
        &json!({
            "command": "resolve",
            "config": config_echo(cfg),
            "lambdas": lambdas,
            "distortion": summaries(&distortion),
            "pushout": summaries(&pushout),
            "composed_accretivity": summaries(&composed),
            "singularity_radii": singular.len(),
            "passed": passed,
        }),
    )?;
    Ok(Outcome { passed, artifacts })
}

pub fn cmd_bounds(cfg: &ExperimentConfig) -> Result<Outcome> {
    let s = sampler(cfg)?;
    let lambdas = cfg.lambda_values()?;
    let f = cfg.generator()?;
    let a = cfg.certified_a()?;
    let p = match profile(cfg, &f, a, &s) {
        Ok(p) => p,
        Err(e) => return rejected("bounds", cfg, e.to_string()),
    };
    let table = bounds::bounds_table(&p, &lambdas, cfg.tolerances.lambda_star)?;
    let mut checks = Vec::new();
    for r in &table.rows {
        let mut check = |name: &str, ok: bool| {
            checks.push(json!({ "lambda": r.lambda, "check": name, "passed": ok }));
            ok
        };
        check("alpha_range", r.alpha > 0.0 && r.alpha <= 1.0);
        if let Some(b) = r.beta {
            check("beta_range", b >= 0.0 && b <= r.alpha * (1.0 + 1e-14));
        }
        check(
            "a_lambda_consistency",
            (r.a_lambda - bounds::a_lambda_from_alpha(&p, r.lambda)).abs() <= 1e-12,
        );
        if let (Some(psi), Some(psi1)) = (r.psi, r.psi1) {
            check("psi_majorant", psi <= psi1 * (1.0 + 1e-12));
        }
    }
    let passed = checks.iter().all(|c| c["passed"] == Value::Bool(true));
    let mut artifacts = Artifacts::default();
    artifacts.csv("bounds.csv", table.csv_rows())?;
    artifacts.json(
        "report.json",
        &json!({
            "command": "bounds",
            "config": config_echo(cfg),
            "profile": { "a": p.a, "k": p.k, "k1": p.k1, "bound_b": p.bound_b },
            "scalars": table.scalars,
            "checks": checks,
            "passed": passed,
        }),
    )?;
    Ok(Outcome { passed, artifacts })
}

pub fn cmd_semigroup(cfg: &ExperimentConfig) -> Result<Outcome> {
    let s = sampler(cfg)?;
    let (f, a, fam) = certified_family(cfg, &s)?;
    let fam = match fam {
        Ok(fam) => fam,
        Err(reason) => return rejected("semigroup", cfg, reason),
    };
    let opts = &cfg.semigroup;
    let points: Vec<CVector> = if opts.points.is_empty() {
        s.directions(f.dim())
            .iter()
            .take(4)
            .map(|u| u.scale_real(0.5))
            .collect()
    } else {
        opts.points.iter().map(|p| point(p)).collect()
    };
    let mut artifacts = Artifacts::default();
    let mut squeezes = Vec::new();
    let mut studies = Vec::new();
    let mut passed = true;
    for (i, x) in points.iter().enumerate() {
        let traj = match semigroup::integrate_cauchy(&f, x, opts.t_end, cfg.tolerances.integrator) {
            Ok(t) => t,
            Err(e) => return rejected("semigroup", cfg, format!("trajectory {i}: {e}")),
        };
        artifacts.csv(&format!("trajectory_{i}.csv"), traj.csv_rows())?;
        let sq = semigroup::squeezing_check(&f, a, x, opts.t_end)?;
        passed &= sq.passed();
        squeezes.push(sq);
        let study = semigroup::convergence_study(&fam, opts.product_t, x, &opts.n_list)?;
        passed &= study.is_strictly_decreasing();
        artifacts.csv(&format!("convergence_{i}.csv"), study.csv_rows())?;
        studies.push(json!({
            "point": i,
            "strictly_decreasing": study.is_strictly_decreasing(),
            "errors": study.rows,
            "steps": traj.steps,
            "rejected_steps": traj.rejected,
            "clamps": traj.clamps,
        }));
    }
    artifacts.csv(
        "squeezing.csv",
        merged("squeezing", semigroup::SQUEEZING_TOL, &squeezes).csv_rows(),
    )?;
    artifacts.json(
        "report.json",
        &json!({
            "command": "semigroup",
            "config": config_echo(cfg),
            "squeezing": summaries(&squeezes),
            "product_formula": studies,
            "passed": passed,
        }),
    )?;
    Ok(Outcome { passed, artifacts })
}

pub fn cmd_starlike(cfg: &ExperimentConfig) -> Result<Outcome> {
    let s = sampler(cfg)?;
    let lambdas = cfg.lambda_values()?;
    let (f, a, fam) = certified_family(cfg, &s)?;
    let fam = match fam {
        Ok(fam) => fam,
        Err(reason) => return rejected("starlike", cfg, reason),
    };
    let p = profile(cfg, &f, a, &s)?;
    let star = bounds::lambda_star(&p, cfg.tolerances.lambda_star)?;
    let mut artifacts = Artifacts::default();
    let mut per_lambda = Vec::new();
    let mut passed = true;
    for (k, &lambda) in lambdas.iter().enumerate() {
        let source = ResolventQuantity {
            family: &fam,
            lambda,
        };
        let samples = starlike::quantity_samples(&source, &s)?;
        let (header, rows) = quantity_csv(&samples);
        artifacts.csv(&format!("starlike_lambda{k}.csv"), (header, rows))?;
        let est = starlike::order_from_samples(&samples, starlike::Method::ResolventIdentity)?;
        let t1 = starlike::verify_theorem_order1(&fam, lambda, &p, &s)?;
        let t2 = starlike::verify_theorem_order2(&fam, lambda, &p, &s)?;
        passed &= t1.passed() && t2.passed();
        per_lambda.push(json!({
            "lambda": lambda,
            "estimate": est,
            "order_half": t1.summary(),
            "order_gamma": t2.summary(),
        }));
    }
    artifacts.json(
        "report.json",
        &json!({
            "command": "starlike",
            "config": config_echo(cfg),
            "lambda_star": star,
            "results": per_lambda,
            "passed": passed,
        }),
    )?;
    Ok(Outcome { passed, artifacts })
}

fn quantity_csv(samples: &[starlike::QuantitySample]) -> (Vec<String>, Vec<Vec<String>>) {
    let dim = samples.first().map_or(0, |q| q.x.dim());
    let mut header = Vec::new();
    for k in 0..dim {
        header.push(format!("re_x{k}"));
        header.push(format!("im_x{k}"));
    }
    header.extend(["re_s", "im_s", "re_inv_s"].map(String::from));
    let rows = samples
        .iter()
        .map(|q| {
            let mut row = Vec::new();
            for z in q.x.coords() {
                row.push(fmt_f64(z.re));
                row.push(fmt_f64(z.im));
            }
            row.extend([fmt_f64(q.s.re), fmt_f64(q.s.im), fmt_f64(q.re_inv_s)]);
            row
        })
        .collect();
    (header, rows)
}

pub fn cmd_verify(cfg: &ExperimentConfig) -> Result<Outcome> {
    let summary = verify::run_suite(cfg)?;
    let mut artifacts = Artifacts::default();
    artifacts.json("summary.json", &summary)?;
    for line in summary.failed_names() {
        eprintln!("invariant failed: {line}");
    }
    Ok(Outcome {
        passed: summary.passed,
        artifacts,
    })
}
