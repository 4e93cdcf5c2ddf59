//! `build-ladder`: sequential rung construction with `C_i` from a user table
//! or from measured ensemble runs.

use std::path::Path;

use serde_json::json;
use wave_lab_core::gfun::acquire_c;
use wave_lab_core::propagator::evolve;
use wave_lab_core::{GFunction, GLadder, SolverConfig, WaveError};

use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::output::{write_artifacts, Artifacts};

/// Extends `ladder` to `rungs` rungs; `C_i` (for `i ≥ 1`) is taken from
/// `table[i-1]` when present and then raised by [`acquire_c`].
pub fn extend_from_table(ladder: GLadder, rungs: usize, table: &[f64]) -> Result<GLadder, WaveError> {
    let mut ladder = ladder;
    while ladder.rung_count() < rungs {
        let i = ladder.rung_count();
        let c_prev = if i == 0 {
            0.0
        } else {
            acquire_c(i, ladder.plateau_start(i), table.get(i - 1).copied())
        };
        ladder = ladder.build_rung(c_prev)?;
    }
    Ok(ladder)
}

pub fn build_from_table(a: f64, rungs: usize, table: &[f64]) -> Result<GLadder, WaveError> {
    extend_from_table(GLadder::new(a)?, rungs, table)
}

/// Sample sup of `‖u‖_{H̃²} + ‖∂_t u‖_{H̃¹}` over short runs of `ensemble`
/// random data under rung `i`.
pub fn measured_c(ladder: &GLadder, i: usize, cfg: &ExperimentConfig) -> Result<f64, CliError> {
    let solver = cfg.solver()?;
    let g = GFunction::ladder(ladder.clone(), i)?;
    let solver = SolverConfig { g, ..solver };
    let scale = cfg.f64("scale")?;
    let seed = cfg.u64("seed")?;
    let mut sup: f64 = 0.0;
    for k in 0..cfg.usize("ensemble")? as u64 {
        let data = wave_lab_core::data::random_smooth(solver.grid, seed + k, scale);
        let run = evolve(&data, &solver)?;
        for s in &run.trajectory.states {
            sup = sup.max(s.htilde_total(solver.p)?);
        }
    }
    Ok(sup)
}

fn parse_table(raw: Option<&str>) -> Result<Vec<f64>, CliError> {
    let Some(raw) = raw else {
        return Ok(Vec::new());
    };
    raw.split(',')
        .map(|s| {
            s.trim().parse::<f64>().map_err(|_| CliError::Config {
                field: "c_table".into(),
                message: format!("not a number: {s:?}"),
            })
        })
        .collect()
}

/// Builds (or extends) a ladder per the configuration and writes
/// `ladder.json`, `report.json` and `manifest.json` into `out`.
pub fn run_build_ladder(cfg: &ExperimentConfig, out: &Path) -> Result<GLadder, CliError> {
    let rungs = cfg.usize("rungs")?;
    if rungs == 0 {
        return Err(CliError::Usage("build-ladder needs --rungs >= 1".into()));
    }
    let a = cfg.f64("ladder_A")?;
    let base = match cfg.raw("extend") {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Config {
                field: "extend".into(),
                message: format!("cannot read {path}: {e}"),
            })?;
            GLadder::from_json(&text)?
        }
        None => GLadder::new(a)?,
    };
    let mut table = parse_table(cfg.raw("c_table"))?;
    let ladder = match cfg.raw("source").unwrap_or("user") {
        "user" => extend_from_table(base, rungs, &table)?,
        "measured" => {
            let mut ladder = base;
            while ladder.rung_count() < rungs {
                let i = ladder.rung_count();
                if i >= 1 && table.len() < i {
                    table.resize(i - 1, f64::NAN);
                    table.push(measured_c(&ladder, i, cfg)?);
                }
                ladder = extend_from_table(ladder, i + 1, &table)?;
            }
            ladder
        }
        other => {
            return Err(CliError::Config {
                field: "source".into(),
                message: format!("expected user or measured, got {other:?}"),
            })
        }
    };
    ladder.verify()?;
    let ladder_json = ladder.to_json()?;
    let report = json!({
        "A": ladder.a(),
        "rungs": ladder.rung_count(),
        "C": ladder.rungs().iter().skip(1).map(|r| r.c_prev).collect::<Vec<_>>(),
        "Cp": ladder.rungs().iter().map(|r| r.cp).collect::<Vec<_>>(),
        "verified": true,
    });
    write_artifacts(
        out,
        cfg,
        &Artifacts {
            ledger_csv: None,
            report: wave_lab_core::analysis::report_json("build-ladder", &report)?,
            extra: vec![("ladder.json".to_string(), ladder_json)],
        },
    )?;
    Ok(ladder)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extend_matches_direct_build() {
        let five = build_from_table(10.0, 5, &[]).unwrap();
        let six = build_from_table(10.0, 6, &[]).unwrap();
        let reloaded = GLadder::from_json(&five.to_json().unwrap()).unwrap();
        let extended = extend_from_table(reloaded, 6, &[]).unwrap();
        assert_eq!(extended.to_json().unwrap(), six.to_json().unwrap());
    }

    #[test]
    fn table_values_below_floor_are_raised() {
        let l = build_from_table(10.0, 3, &[1.0, 2.0]).unwrap();
        assert_eq!(l.rungs()[1].c_prev, l.rungs()[0].cp);
        let big = build_from_table(10.0, 2, &[1e3]).unwrap();
        assert_eq!(big.rungs()[1].c_prev, 1e3);
    }
}
