//! Runs every command on a configuration and lists the files written.

use accretive::cli::{execute, Command};
use accretive::config::ExperimentConfig;

const CONFIG: &str = r#"{
    "generator": {"kind": "rational", "num": [[0, 0], [1, 0], [-1, 0]], "den": [[1, 0], [1, 0]]},
    "certified_a": 0.0,
    "analytic_a": true,
    "lambdas": [3.0, 60.0],
    "sampler": {"seed": 7, "count": 16}
}"#;

fn main() -> accretive::Result<()> {
    let cfg = ExperimentConfig::from_json(CONFIG)?;
    let out = std::env::temp_dir().join("accretive-example");
    for command in [Command::Analyze, Command::Resolve, Command::Bounds, Command::Semigroup, Command::Starlike] {
        let outcome = execute(command, &cfg)?;
        let dir = out.join(format!("{command:?}").to_lowercase());
        outcome.artifacts.write_all(&dir)?;
        let files: Vec<&str> = outcome.artifacts.names().collect();
        println!("{command:?}: passed {} -> {} {files:?}", outcome.passed, dir.display());
    }
    Ok(())
}
