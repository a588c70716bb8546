use std::fs;
use std::path::{Path, PathBuf};

use accretive::cli::{self, Command, EXIT_FAIL, EXIT_PASS, EXIT_USAGE};
use accretive::config::ExperimentConfig;

fn config(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn run(command: &str, cfg: &Path, out: &Path, extra: &[&str]) -> i32 {
    let mut args = vec![
        "accretive".into(),
        command.into(),
        cfg.as_os_str().to_owned(),
        "--out-dir".into(),
        out.as_os_str().to_owned(),
    ];
    args.extend(extra.iter().map(|s| s.into()));
    cli::run(args)
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("config.json");
    fs::write(&p, text).unwrap();
    p
}

#[test]
fn shipped_configs_pass() {
    let out = tempfile::tempdir().unwrap();
    for (command, name) in [
        ("analyze", "extremal.json"),
        ("bounds", "extremal.json"),
        ("resolve", "identity.json"),
        ("semigroup", "diagonal.json"),
        ("starlike", "quadratic.json"),
    ] {
        let dir = out.path().join(command);
        assert_eq!(run(command, &config(name), &dir, &[]), EXIT_PASS, "{command} {name}");
        assert!(dir.join("report.json").exists());
    }
}

#[test]
fn analyze_writes_expected_files() {
    let out = tempfile::tempdir().unwrap();
    assert_eq!(run("analyze", &config("quadratic.json"), out.path(), &[]), EXIT_PASS);
    for f in ["report.json", "accretivity_inequalities.csv", "coefficient_bounds.csv"] {
        assert!(out.path().join(f).exists(), "{f}");
    }
    let report: serde_json::Value = serde_json::from_slice(&fs::read(out.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["certified"], true);
    assert!(report["config"].get("output_dir").is_none());
}

#[test]
fn non_accretive_generator_fails() {
    let out = tempfile::tempdir().unwrap();
    for command in ["analyze", "resolve", "starlike"] {
        assert_eq!(run(command, &config("negative.json"), out.path(), &[]), EXIT_FAIL, "{command}");
    }
}

#[test]
fn unknown_key_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"sampler": {"seed": 1}, "alpha_override": 0.5}"#);
    assert_eq!(run("bounds", &cfg, &dir.path().join("out"), &[]), EXIT_USAGE);
}

#[test]
fn empty_lambda_list_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"generator": {"kind": "polynomial", "dim": 1, "matrix": [[1, 0]], "terms": []},
            "certified_a": 1.0, "lambdas": [], "sampler": {"seed": 1}}"#,
    );
    assert_eq!(run("bounds", &cfg, &dir.path().join("out"), &[]), EXIT_USAGE);
}

#[test]
fn missing_fields_and_bad_arguments() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"sampler": {"seed": 1}}"#);
    assert_eq!(run("analyze", &cfg, &dir.path().join("out"), &[]), EXIT_USAGE);
    assert_eq!(run("analyze", &dir.path().join("absent.json"), dir.path(), &[]), EXIT_USAGE);
    assert_eq!(cli::run(["accretive", "explode", "x.json"]), EXIT_USAGE);
    assert_eq!(cli::run(["accretive", "--help"]), EXIT_PASS);
}

#[test]
fn seed_override_changes_samples_deterministically() {
    let cfg = ExperimentConfig::load(&config("extremal.json")).unwrap();
    let a = cli::execute(Command::Analyze, &cfg).unwrap();
    let b = cli::execute(Command::Analyze, &cfg).unwrap();
    assert_eq!(a.artifacts, b.artifacts);

    let dir = tempfile::tempdir().unwrap();
    let (d1, d2, d3) = (dir.path().join("1"), dir.path().join("2"), dir.path().join("3"));
    run("analyze", &config("extremal.json"), &d1, &["--seed", "99"]);
    run("analyze", &config("extremal.json"), &d2, &["--seed", "99"]);
    run("analyze", &config("extremal.json"), &d3, &["--seed", "100"]);
    let csv = |d: &Path| fs::read(d.join("accretivity_inequalities.csv")).unwrap();
    assert_eq!(csv(&d1), csv(&d2));
    assert_ne!(csv(&d1), csv(&d3));
}

#[test]
fn resolve_writes_traces_and_radii() {
    let out = tempfile::tempdir().unwrap();
    assert_eq!(run("resolve", &config("extremal.json"), out.path(), &[]), EXIT_PASS);
    for f in ["distortion.csv", "pushout.csv", "composed_accretivity.csv", "singularity_radius.csv", "trace_lambda0.csv"] {
        assert!(out.path().join(f).exists(), "{f}");
    }
    let trace = fs::read_to_string(out.path().join("trace_lambda0.csv")).unwrap();
    assert!(trace.lines().next().unwrap().starts_with("step,mu"));
}

#[test]
fn mutation_config_fails_verify() {
    let out = tempfile::tempdir().unwrap();
    assert_eq!(run("verify", &config("verify_mutation.json"), out.path(), &[]), EXIT_FAIL);
    let summary: serde_json::Value = serde_json::from_slice(&fs::read(out.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["passed"], false);
    assert!(summary["invariants"].as_array().unwrap().len() >= 25);
}
