//! The scenario registry. Each scenario runs one experiment, returns a JSON
//! report with named checks, and optionally a norm ledger.

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use wave_lab_core::analysis::{
    blowup_monitor, default_checkpoints, energy_drift, kenig_merle_monitor, perturbation_compare,
    scaling_transform, scattering_extract, BlowupVerdict,
};
use wave_lab_core::data::random_smooth;
use wave_lab_core::gfun::{rung_integral, validate_conditions, DivergenceVerdict};
use wave_lab_core::norms::{
    admissible_check, apriori_bound_check, solve_rung_count, strichartz_probe, DEFAULT_MARGIN,
};
use wave_lab_core::propagator::{
    duhamel_residual, evolve, linear_flow, picard_solve, picard_solve_from, smallness_time,
};
use wave_lab_core::{
    AdmissiblePair, GFunction, NormLedger, Nonlinearity, RadialField, RadialGrid,
    SolverConfig, WaveError, WaveState,
};

use crate::config::ExperimentConfig;
use crate::error::CliError;

/// One named pass/fail assertion inside a scenario.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.to_string(),
            passed,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub checks: Vec<Check>,
    pub results: Value,
    pub ledger: Option<NormLedger>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

type ScenarioFn = fn(&ExperimentConfig) -> Result<Outcome, CliError>;

pub const REGISTRY: &[(&str, ScenarioFn)] = &[
    ("linear-exactness", linear_exactness),
    ("energy-conservation", energy_conservation),
    ("scaling-covariance", scaling_covariance),
    ("picard-contraction", picard_contraction),
    ("prop-1-3-bound", prop_1_3_bound),
    ("gwp-criterion", gwp_criterion),
    ("scattering", scattering),
    ("strichartz-probe", strichartz_probe_scenario),
    ("ladder-validate", ladder_validate),
    ("perturbation-compare", perturbation_compare_scenario),
];

/// Keys whose default differs per scenario; applied before the config file.
pub fn scenario_defaults(name: &str) -> &'static [(&'static str, &'static str)] {
    match name {
        "linear-exactness" => &[("sign", "off")],
        "energy-conservation" => &[("N", "512"), ("dt_out", "0.05")],
        "scaling-covariance" => &[("width", "0.5"), ("center", "2")],
        "picard-contraction" => &[
            ("N", "512"),
            ("dt", "5e-4"),
            ("dt_out", "5e-3"),
            ("amplitude", "0.05"),
        ],
        "prop-1-3-bound" => &[("N", "512"), ("data", "random-smooth")],
        "gwp-criterion" => &[("N", "512"), ("T", "2"), ("dt", "5e-4"), ("amplitude", "0.1")],
        "scattering" => &[
            ("N", "512"),
            ("T", "10"),
            ("dt_out", "0.125"),
            ("amplitude", "0.3"),
        ],
        "strichartz-probe" => &[
            ("T", "5"),
            ("ensemble", "50"),
            ("scale", "1"),
            ("data", "random-smooth"),
        ],
        "perturbation-compare" => &[
            ("N", "512"),
            ("g", "ladder"),
            ("T", "0.5"),
            ("amplitude", "0.1"),
        ],
        _ => &[],
    }
}

pub fn lookup(name: &str) -> Option<ScenarioFn> {
    REGISTRY.iter().find(|(n, _)| *n == name).map(|(_, f)| *f)
}

fn max_coeff_gap(x: &WaveState, y: &WaveState) -> f64 {
    x.u.coeffs()
        .iter()
        .zip(y.u.coeffs())
        .chain(x.ut.coeffs().iter().zip(y.ut.coeffs()))
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max)
}

fn max_coeff(x: &WaveState) -> f64 {
    x.u.coeffs()
        .iter()
        .chain(x.ut.coeffs())
        .map(|a| a.norm())
        .fold(0.0, f64::max)
}

fn linear_exactness(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let grid = cfg.grid()?;
    let n = cfg.usize("n")?.max(1);
    let mode = RadialField::eigenmode(grid, n)?;
    let k = grid.wavenumber(n - 1);
    let state = WaveState::new(mode.clone(), RadialField::zeros(grid))?;
    let horizon = cfg.f64("T")?;
    let samples = (horizon / cfg.f64("dt_out")?).round().max(1.0) as usize;
    let peak = mode.values().iter().map(|v| v.norm()).fold(0.0, f64::max);
    let mut mode_error: f64 = 0.0;
    for j in 0..=samples {
        let t = horizon * j as f64 / samples as f64;
        let u = linear_flow(&state, t).u;
        for (a, b) in u.values().iter().zip(mode.values()) {
            mode_error = mode_error.max((a - b * (k * t).cos()).norm() / peak);
        }
    }
    let data = random_smooth(grid, cfg.u64("seed")?, 1.0);
    let scale = max_coeff(&data);
    let group = max_coeff_gap(&linear_flow(&linear_flow(&data, 0.37), 0.81), &linear_flow(&data, 1.18)) / scale;
    let reverse = max_coeff_gap(&linear_flow(&linear_flow(&data, 2.9), -2.9), &data) / scale;

    let solver = SolverConfig {
        nonlinearity: Nonlinearity::Off,
        ..cfg.solver()?
    };
    let run = evolve(&state, &solver)?;
    Ok(Outcome {
        checks: vec![
            Check::new("eigenmode", mode_error <= 1e-10, format!("max relative error {mode_error:e}")),
            Check::new("group-law", group <= 1e-12, format!("{group:e}")),
            Check::new("reversibility", reverse <= 1e-12, format!("{reverse:e}")),
        ],
        results: json!({
            "max_eigenmode_error": mode_error,
            "group_law_error": group,
            "reversibility_error": reverse,
        }),
        ledger: Some(run.ledger),
    })
}

fn energy_conservation(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let solver = cfg.solver()?;
    let data = cfg.data(solver.grid)?;
    let fine = SolverConfig {
        dt: solver.dt / 2.0,
        ..solver.clone()
    };
    let (coarse_run, fine_run) = rayon::join(|| evolve(&data, &solver), || evolve(&data, &fine));
    let (coarse_run, fine_run) = (coarse_run?, fine_run?);
    let d1 = energy_drift(&coarse_run.trajectory, solver.p, &solver.g)?;
    let d2 = energy_drift(&fine_run.trajectory, solver.p, &solver.g)?;
    let ratio = d1 / d2;
    let tol = cfg.f64("drift_tol")?;
    Ok(Outcome {
        checks: vec![
            Check::new("drift", d1 <= tol, format!("relative drift {d1:e} (tolerance {tol:e})")),
            Check::new(
                "order",
                (3.5..=4.5).contains(&ratio),
                format!("drift ratio under dt halving {ratio:.4}"),
            ),
        ],
        results: json!({
            "g": solver.g.describe(),
            "drift": d1,
            "drift_half_dt": d2,
            "ratio": ratio,
        }),
        ledger: Some(coarse_run.ledger),
    })
}

/// Evolves `data` and returns the final state, checking the run reached `horizon`.
fn final_state(data: &WaveState, solver: &SolverConfig) -> Result<WaveState, CliError> {
    let run = evolve(data, solver)?;
    if let Some(b) = &run.trajectory.blow_up {
        return Err(WaveError::BlowUpSuspected {
            time: b.time,
            reason: b.reason.clone(),
        }
        .into());
    }
    Ok(run.trajectory.states.last().cloned().expect("at least the initial sample"))
}

fn scaling_covariance(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let base = cfg.solver()?;
    let lambda = cfg.f64("lambda")?;
    let p = base.p;
    let sp = wave_lab_core::gfun::sp_exponent(p)?;
    let data = cfg.data(base.grid)?;
    let scaled = scaling_transform(&data, lambda, p)?;
    let a = data.u.sobolev_norm(sp)?;
    let invariance = (scaled.u.sobolev_norm(sp)? - a).abs() / a;

    let horizon = cfg.f64("T")?;
    let levels = cfg.usize("levels")?.max(2);
    let short = horizon / lambda;
    let mut discrepancies = Vec::new();
    let mut level_info = Vec::new();
    for level in 0..levels {
        let shift = levels - 1 - level;
        let modes = base.grid.len() >> shift;
        let dt = base.dt * (1 << shift) as f64;
        let steps = short / dt;
        if (steps - steps.round()).abs() > 1e-9 * steps {
            return Err(CliError::Config {
                field: "T".into(),
                message: format!("T / lambda = {short} is not a multiple of dt = {dt}"),
            });
        }
        let grid = RadialGrid::new(base.grid.radius(), modes)?;
        let mk = |horizon: f64| SolverConfig {
            dt,
            dt_out: dt,
            horizon,
            grid,
            g: GFunction::Constant(1.0),
            ..base.clone()
        };
        let data = cfg.data(grid)?;
        let scaled = scaling_transform(&data, lambda, p)?;
        let (path_a, path_b) = rayon::join(
            || final_state(&scaled, &mk(horizon)),
            || final_state(&data, &mk(short)),
        );
        let path_a = path_a?;
        let path_b = scaling_transform(&path_b?, lambda, p)?;
        let gap = path_a.sub(&path_b)?.u.sobolev_norm(sp)? / path_a.u.sobolev_norm(sp)?;
        discrepancies.push(gap);
        level_info.push(json!({ "N": modes, "dt": dt, "discrepancy": gap }));
    }
    let decreasing = discrepancies.windows(2).all(|w| w[1] < w[0]);
    Ok(Outcome {
        checks: vec![
            Check::new("invariance", invariance <= 1e-8, format!("relative deviation {invariance:e}")),
            Check::new("covariance", decreasing, format!("discrepancies {discrepancies:?}")),
        ],
        results: json!({
            "lambda": lambda,
            "invariance": invariance,
            "levels": level_info,
        }),
        ledger: None,
    })
}

fn picard_contraction(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let solver = cfg.solver()?;
    let data = cfg.data(solver.grid)?;
    let tol = cfg.f64("tol")?;
    let max_iter = cfg.usize("max_iter")?;
    let mut delta = cfg.f64("delta")?;
    let mut attempts = Vec::new();
    let (t_l, solution) = loop {
        let small = smallness_time(&data, delta, &solver)?;
        if small.below_minimum {
            return Err(WaveError::Precondition(format!(
                "S norm over one output step already exceeds delta = {delta}; shrink the data or dt_out"
            ))
            .into());
        }
        let outcome = picard_solve(&data, small.t_l, &solver, max_iter, 0.1 * tol);
        let worst = outcome
            .as_ref()
            .map(|s| s.ratios.iter().copied().fold(0.0, f64::max))
            .unwrap_or(f64::INFINITY);
        attempts.push(json!({ "delta": delta, "T_l": small.t_l, "max_ratio": worst }));
        match outcome {
            Ok(sol) if sol.converged && worst <= 0.5 => break (small.t_l, sol),
            _ if attempts.len() >= 30 => {
                return Err(WaveError::Precondition("no delta with contraction ratio <= 0.5".into()).into())
            }
            _ => delta /= 2.0,
        }
    };

    // Strang run on the Picard sample grid
    let h = solution.trajectory.times[1] - solution.trajectory.times[0];
    let substeps = (h / solver.dt).ceil().max(1.0);
    let strang_cfg = SolverConfig {
        dt: h / substeps,
        dt_out: h,
        horizon: t_l,
        ..solver.clone()
    };
    let strang = evolve(&data, &strang_cfg)?;
    let mut discrepancy: f64 = 0.0;
    for (x, y) in strang.trajectory.states.iter().zip(&solution.trajectory.states) {
        discrepancy = discrepancy.max(x.sub(y)?.htilde_total(solver.p)?);
    }

    let zeros = vec![WaveState::zeros(solver.grid); solution.trajectory.len()];
    let other = picard_solve_from(&data, t_l, &solver, Some(&zeros), 4 * max_iter, 0.1 * tol)?;
    let mut gap: f64 = 0.0;
    let mut size: f64 = 0.0;
    for (x, y) in other.trajectory.states.iter().zip(&solution.trajectory.states) {
        gap = gap.max(x.sub(y)?.htilde_total(solver.p)?);
        size = size.max(y.htilde_total(solver.p)?);
    }
    let uniqueness = gap / size.max(f64::MIN_POSITIVE);
    let residual = duhamel_residual(&solution.trajectory, solver.p, &solver.g)?;
    let worst = solution.ratios.iter().copied().fold(0.0, f64::max);
    Ok(Outcome {
        checks: vec![
            Check::new(
                "contraction",
                solution.converged && worst <= 0.5,
                format!("{} iterations, ratios {:?}", solution.iterations, solution.ratios),
            ),
            Check::new("strang-agreement", discrepancy <= 1e-4, format!("max H~ discrepancy {discrepancy:e}")),
            Check::new("uniqueness", uniqueness <= tol && other.converged, format!("relative gap {uniqueness:e}")),
        ],
        results: json!({
            "attempts": attempts,
            "T_l": t_l,
            "ratios": solution.ratios,
            "differences": solution.differences,
            "strang_discrepancy": discrepancy,
            "uniqueness_gap": uniqueness,
            "duhamel_residual": residual,
        }),
        ledger: Some(strang.ledger),
    })
}

fn prop_1_3_bound(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let solver = cfg.solver()?;
    let count = cfg.usize("ensemble")?;
    let seed = cfg.u64("seed")?;
    let scale = cfg.f64("scale")?;
    let data: Vec<WaveState> = (0..count as u64)
        .map(|k| random_smooth(solver.grid, seed + k, scale))
        .collect();
    let horizon = solver.horizon;
    let samples = (horizon / solver.dt_out).round() as usize;
    let measured = match cfg.opt_f64("C")? {
        Some(c) => c,
        None => {
            let pairs = [AdmissiblePair::w(), AdmissiblePair::s_embedding(solver.p)?];
            let mut c: f64 = 0.0;
            for pair in &pairs {
                c = c.max(strichartz_probe(&data, pair, horizon, samples)?.max_ratio);
            }
            c
        }
    };
    // the bound needs C > 1; a smaller measured constant is raised to 2
    let c = if measured > 1.0 { measured } else { 2.0 };
    let eta = cfg.f64("eta")?;
    let a_override = cfg.opt_f64("A")?;
    let reports = data
        .par_iter()
        .map(|d| -> Result<_, CliError> {
            let run = evolve(d, &solver)?;
            let a = match a_override {
                Some(a) => a,
                None => d.htilde_total(solver.p)?,
            };
            let span = run.ledger.span().expect("initial sample");
            let rep = apriori_bound_check(&run.ledger, &span, a, c, &solver.g, eta, solver.p)?;
            Ok((rep, run.ledger))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let held = reports.iter().filter(|(r, _)| r.holds).count();
    let closed_form = [
        solve_rung_count(1.0, std::f64::consts::E / 2.0, &GFunction::Constant(1.0), 1.0, 5.0, DEFAULT_MARGIN)?,
        solve_rung_count(1.0, std::f64::consts::E / 2.0, &GFunction::Constant(2.0), 1.0, 5.0, DEFAULT_MARGIN)?,
    ];
    let ledger = reports.first().map(|(_, l)| l.clone());
    Ok(Outcome {
        checks: vec![
            Check::new(
                "rung-count-closed-form",
                closed_form == [11, 41],
                format!("N = {closed_form:?}"),
            ),
            Check::new("bound-holds", held == reports.len(), format!("{held}/{} runs", reports.len())),
        ],
        results: json!({
            "C_measured": measured,
            "C_used": c,
            "eta": eta,
            "runs": reports.iter().map(|(r, _)| r).collect::<Vec<_>>(),
        }),
        ledger,
    })
}

fn gwp_criterion(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let solver = cfg.solver()?;
    let window = cfg.f64("window")?;
    let calm = cfg.data(solver.grid)?;
    let mut focus_cfg = cfg.clone();
    focus_cfg.set("amplitude", cfg.raw("focus_amplitude").unwrap_or("3"))?;
    let wild = focus_cfg.data(solver.grid)?;
    let focusing = SolverConfig {
        nonlinearity: Nonlinearity::Focusing,
        ..solver.clone()
    };
    let defocusing = SolverConfig {
        nonlinearity: Nonlinearity::Defocusing,
        ..solver.clone()
    };
    let (hot, cold) = rayon::join(|| evolve(&wild, &focusing), || evolve(&calm, &defocusing));
    let (hot, cold) = (hot?, cold?);
    let hot_rep = blowup_monitor(&hot.ledger, window)?;
    let cold_rep = blowup_monitor(&cold.ledger, window)?;
    let span = cold.ledger.span().expect("initial sample");
    let km = kenig_merle_monitor(&cold.ledger, &span)?;
    let tail: Vec<f64> = hot_rep.windows.iter().rev().take(4).rev().map(|w| w.s_norm).collect();
    Ok(Outcome {
        checks: vec![
            Check::new(
                "focusing-blow-up",
                hot_rep.verdict == BlowupVerdict::BlowUpSuspected && hot_rep.accelerating,
                format!(
                    "verdict {:?}, accelerating {}, last window S norms {tail:?}",
                    hot_rep.verdict, hot_rep.accelerating
                ),
            ),
            Check::new(
                "defocusing-quiescent",
                cold_rep.verdict == BlowupVerdict::Quiescent,
                format!("verdict {:?}, growth exponent {:e}", cold_rep.verdict, cold_rep.growth_exponent),
            ),
        ],
        results: json!({
            "focusing": hot_rep,
            "focusing_blow_up": hot.trajectory.blow_up,
            "defocusing": cold_rep,
            "kenig_merle": km,
        }),
        ledger: Some(hot.ledger),
    })
}

fn scattering(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let solver = cfg.solver()?;
    let data = cfg.data(solver.grid)?;
    let linear = SolverConfig {
        nonlinearity: Nonlinearity::Off,
        ..solver.clone()
    };
    let (nl, free) = rayon::join(|| evolve(&data, &solver), || evolve(&data, &linear));
    let (nl, free) = (nl?, free?);
    let checkpoints = default_checkpoints(solver.horizon);
    let cand = scattering_extract(&nl.trajectory, &checkpoints)?;
    let control = scattering_extract(&free.trajectory, &checkpoints)?;
    let scale = data.htilde_total(solver.p)?;
    let control_max = control.differences.iter().copied().fold(0.0, f64::max) / scale;
    Ok(Outcome {
        checks: vec![
            Check::new("cauchy-decreasing", cand.scatters, format!("d_m = {:?}", cand.differences)),
            Check::new("linear-control", control_max <= 1e-12, format!("max relative d_m {control_max:e}")),
        ],
        results: json!({
            "nonlinear": cand.report(solver.p)?,
            "linear": control.report(solver.p)?,
        }),
        ledger: Some(nl.ledger),
    })
}

fn ensemble_ratio(grid: RadialGrid, cfg: &ExperimentConfig, pair: &AdmissiblePair) -> Result<f64, CliError> {
    let seed = cfg.u64("seed")?;
    let scale = cfg.f64("scale")?;
    let horizon = cfg.f64("T")?;
    let samples = cfg.usize("samples")?;
    let ratios = (0..cfg.usize("ensemble")? as u64)
        .into_par_iter()
        .map(|k| {
            let d = random_smooth(grid, seed + k, scale);
            strichartz_probe(std::slice::from_ref(&d), pair, horizon, samples).map(|r| r.max_ratio)
        })
        .collect::<Result<Vec<f64>, _>>()?;
    Ok(ratios.into_iter().fold(0.0, f64::max))
}

fn strichartz_probe_scenario(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let p = cfg.f64("p")?;
    let eps = cfg.f64("eps")?;
    let table = [
        (4.0, 4.0, 0.5, true),
        (2.0 * (p - 1.0), 6.0 * (p - 1.0) / (2.0 * p - 3.0), 0.5, true),
        ((3.0 + eps) / eps, 3.0 + eps, 0.5, true),
        (f64::INFINITY, 2.0, 0.0, true),
        (4.0, 4.0, 1.0, false),
        (2.0, 6.0, 0.5, false),
        (4.0, 1.5, 0.5, false),
    ];
    let table_ok = table.iter().all(|&(q, r, m, want)| admissible_check(q, r, m) == want);
    let pair = AdmissiblePair::new(cfg.f64("q")?, cfg.f64("r")?, cfg.f64("m")?)?;
    let fine = cfg.grid()?;
    let coarse = RadialGrid::new(fine.radius(), fine.len() / 2)?;
    let c_fine = ensemble_ratio(fine, cfg, &pair)?;
    let c_coarse = ensemble_ratio(coarse, cfg, &pair)?;
    let spread = c_fine / c_coarse;
    Ok(Outcome {
        checks: vec![
            Check::new("admissibility-table", table_ok, format!("{} cases", table.len())),
            Check::new(
                "resolution-stability",
                c_fine.is_finite() && (0.5..=2.0).contains(&spread),
                format!("max ratio {c_coarse:.6} (N = {}) vs {c_fine:.6} (N = {})", coarse.len(), fine.len()),
            ),
        ],
        results: json!({
            "pair": pair,
            "max_ratio": { "coarse": c_coarse, "fine": c_fine },
            "N": [coarse.len(), fine.len()],
        }),
        ledger: None,
    })
}

fn ladder_validate(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let ladder = match cfg.raw("ladder_file") {
        Some(_) => cfg.ladder()?,
        None => crate::ladder_cmd::build_from_table(cfg.f64("ladder_A")?, cfg.usize("rungs")?, &[])?,
    };
    let structural = ladder.verify();
    let reloaded = wave_lab_core::GLadder::from_json(&ladder.to_json()?)?;
    let round_trip = reloaded == ladder && reloaded.to_json()? == ladder.to_json()?;
    let mut rung_rows = Vec::new();
    let mut rungs_ok = true;
    let p = cfg.f64("p")?;
    for r in ladder.rungs() {
        let i = r.i;
        let g = GFunction::ladder(ladder.clone(), i)?;
        let start = r.bridge_start(ladder.a());
        let integral = rung_integral(&g, start, r.cp)?;
        let cond = validate_conditions(&g, r.cp, 1e-12)?;
        let log_h = ladder.log_h_bound_probe(i, p, 64)?;
        let ok = integral >= i as f64 - 1e-6
            && cond.dg_nonnegative
            && cond.sup_x_dg <= 1.0
            && cond.sup_x2_d2g.is_finite()
            && log_h.is_finite();
        rungs_ok &= ok;
        rung_rows.push(json!({
            "i": i,
            "rung_integral": integral,
            "sup_x_dg": cond.sup_x_dg,
            "sup_x2_d2g": cond.sup_x2_d2g,
            "h_bound": log_h.exp(),
            "log_h_bound": log_h,
            "ok": ok,
        }));
    }
    let x_max = cfg.f64("x_max")?;
    let named = [
        ("constant", GFunction::Constant(1.0), DivergenceVerdict::Diverges),
        ("log", GFunction::Log, DivergenceVerdict::Converges),
        ("loglog", GFunction::LogLog { power: 1.0 / 30.0 }, DivergenceVerdict::Diverges),
    ];
    let mut named_rows = Vec::new();
    let mut named_ok = true;
    for (label, g, want) in named {
        let rep = validate_conditions(&g, x_max, 1e-10)?;
        named_ok &= rep.verdict == want;
        named_rows.push(json!({ "g": label, "report": rep }));
    }
    Ok(Outcome {
        checks: vec![
            Check::new(
                "structure",
                structural.is_ok(),
                structural.err().map(|e| e.to_string()).unwrap_or_else(|| "all invariants hold".into()),
            ),
            Check::new("round-trip", round_trip, "JSON reload is bit-exact"),
            Check::new("rungs", rungs_ok, format!("{} rungs checked", ladder.rung_count())),
            Check::new("named-g", named_ok, "constant/log/loglog verdicts"),
        ],
        results: json!({
            "A": ladder.a(),
            "rungs": rung_rows,
            "named": named_rows,
        }),
        ledger: None,
    })
}

fn perturbation_compare_scenario(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let solver = cfg.solver()?;
    let rung = match &solver.g {
        GFunction::Ladder { rung, .. } => *rung,
        _ => {
            return Err(CliError::Config {
                field: "g".into(),
                message: "perturbation-compare needs g = ladder".into(),
            })
        }
    };
    let data = cfg.data(solver.grid)?;
    let report = perturbation_compare(&data, rung, &solver.g, &solver)?;
    let half = SolverConfig {
        dt_out: solver.dt_out / 2.0,
        ..solver.clone()
    };
    let report_half = perturbation_compare(&data, rung, &solver.g, &half)?;
    let ratio = report.rescaled_residual / report_half.rescaled_residual;
    Ok(Outcome {
        checks: vec![
            Check::new(
                "completed",
                report.blow_up.is_none(),
                report.blow_up.clone().unwrap_or_else(|| "no blow-up".into()),
            ),
            Check::new(
                "rescaling-order",
                (3.5..=4.5).contains(&ratio),
                format!("residual ratio under dt_out halving {ratio:.4}"),
            ),
        ],
        results: json!({
            "report": report,
            "report_half_dt_out": report_half,
            "residual_ratio": ratio,
        }),
        ledger: None,
    })
}
