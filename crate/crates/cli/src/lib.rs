//! Command-line runner for the radial wave lab.

pub mod config;
pub mod error;
pub mod ladder_cmd;
pub mod output;
pub mod scenarios;

use std::path::{Path, PathBuf};

use serde_json::json;

use config::ExperimentConfig;
use error::CliError;
use output::{resolve_out_dir, write_artifacts, Artifacts};
use scenarios::Outcome;

pub const USAGE: &str = "usage: wave-lab <scenario|build-ladder|list> [--config FILE] [--KEY VALUE ...] [--jobs K] [--out DIR]";

/// Parsed command line.
#[derive(Debug, Clone)]
pub struct Invocation {
    pub command: String,
    pub config: ExperimentConfig,
    pub jobs: Option<usize>,
    pub out: PathBuf,
}

/// Resolves scenario defaults, then `--config`, then `--key value` overrides.
pub fn parse_args(args: &[String]) -> Result<Invocation, CliError> {
    let command = args.first().ok_or_else(|| CliError::Usage(USAGE.into()))?.clone();
    if command != "build-ladder" && command != "list" && scenarios::lookup(&command).is_none() {
        return Err(CliError::Usage(format!("unknown scenario {command:?}; try `wave-lab list`")));
    }
    let mut file = None;
    let mut jobs = None;
    let mut out = None;
    let mut overrides = Vec::new();
    let mut rest = args[1..].iter();
    while let Some(flag) = rest.next() {
        let key = flag
            .strip_prefix("--")
            .ok_or_else(|| CliError::Usage(format!("unexpected argument {flag:?}")))?;
        let value = rest
            .next()
            .ok_or_else(|| CliError::Usage(format!("--{key} needs a value")))?;
        match key {
            "config" => file = Some(PathBuf::from(value)),
            "out" => out = Some(value.clone()),
            "jobs" => {
                let k: usize = value
                    .parse()
                    .ok()
                    .filter(|&k| k > 0)
                    .ok_or_else(|| CliError::Usage(format!("--jobs needs a positive integer, got {value:?}")))?;
                jobs = Some(k);
            }
            _ => overrides.push((key.to_string(), value.clone())),
        }
    }
    let mut config = ExperimentConfig::new(&command);
    for (k, v) in scenarios::scenario_defaults(&command) {
        config.set(k, v)?;
    }
    if let Some(path) = &file {
        config.apply_file(path)?;
    }
    for (k, v) in &overrides {
        config.set(k, v)?;
    }
    let out = resolve_out_dir(out.as_deref(), &command);
    Ok(Invocation {
        command,
        config,
        jobs,
        out,
    })
}

/// Runs a registered scenario and writes its artifacts into `out`.
pub fn run_scenario(cfg: &ExperimentConfig, out: &Path, jobs: Option<usize>) -> Result<Outcome, CliError> {
    let run = scenarios::lookup(&cfg.scenario)
        .ok_or_else(|| CliError::Usage(format!("unknown scenario {:?}", cfg.scenario)))?;
    let outcome = match jobs {
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .map_err(|e| CliError::Io(e.to_string()))?
            .install(|| run(cfg)),
        None => run(cfg),
    }?;
    let report = json!({
        "scenario": cfg.scenario,
        "passed": outcome.passed(),
        "checks": outcome.checks,
        "results": outcome.results,
    });
    write_artifacts(
        out,
        cfg,
        &Artifacts {
            ledger_csv: outcome.ledger.as_ref().map(|l| l.to_csv()),
            report: wave_lab_core::analysis::report_json(&cfg.scenario, &report)?,
            extra: Vec::new(),
        },
    )?;
    Ok(outcome)
}

fn dispatch(inv: &Invocation) -> Result<i32, CliError> {
    match inv.command.as_str() {
        "list" => {
            for (name, _) in scenarios::REGISTRY {
                println!("{name}");
            }
            Ok(0)
        }
        "build-ladder" => {
            let ladder = ladder_cmd::run_build_ladder(&inv.config, &inv.out)?;
            println!("built {} rungs -> {}", ladder.rung_count(), inv.out.join("ladder.json").display());
            Ok(0)
        }
        _ => {
            let outcome = run_scenario(&inv.config, &inv.out, inv.jobs)?;
            for c in &outcome.checks {
                println!("{} {}: {}", if c.passed { "ok  " } else { "FAIL" }, c.name, c.detail);
            }
            println!("artifacts in {}", inv.out.display());
            Ok(if outcome.passed() { 0 } else { 1 })
        }
    }
}

/// Full command-line behaviour; returns the process exit code.
pub fn run_cli(args: &[String]) -> i32 {
    match parse_args(args) {
        Err(e) => report_error(&e, None),
        Ok(inv) => dispatch(&inv).unwrap_or_else(|e| report_error(&e, Some(&inv.out))),
    }
}

fn report_error(e: &CliError, out: Option<&Path>) -> i32 {
    let body = e.to_json();
    println!("{body}");
    if let Some(dir) = out {
        if std::fs::create_dir_all(dir).is_ok() {
            let _ = std::fs::write(dir.join("error.json"), &body);
        }
    }
    e.exit_code()
}
