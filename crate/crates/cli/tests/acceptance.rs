//! Acceptance suite: one PASS/FAIL line per criterion, with the measured
//! values and wall time. Exits non-zero if any criterion fails.

use std::path::Path;
use std::time::{Duration, Instant};

use wave_lab::config::ExperimentConfig;
use wave_lab::run_scenario;
use wave_lab::scenarios::{scenario_defaults, Outcome};
use wave_lab_core::analysis::perturbation_compare;
use wave_lab_core::data::gaussian_bump;
use wave_lab_core::gfun::{validate_conditions, DivergenceVerdict};
use wave_lab_core::propagator::{duhamel_residual, evolve};
use wave_lab_core::{Complex64, GFunction, GLadder, RadialField, RadialGrid, SolverConfig, WaveState};

struct Verdict {
    passed: bool,
    detail: String,
}

fn scenario(name: &str, overrides: &[(&str, &str)], out: &Path) -> Outcome {
    let mut cfg = ExperimentConfig::new(name);
    for (k, v) in scenario_defaults(name).iter().chain(overrides) {
        cfg.set(k, v).expect("known key");
    }
    run_scenario(&cfg, out, None).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn summarize(o: &Outcome) -> Verdict {
    Verdict {
        passed: o.passed(),
        detail: o
            .checks
            .iter()
            .map(|c| format!("{}{}: {}", if c.passed { "" } else { "!" }, c.name, c.detail))
            .collect::<Vec<_>>()
            .join("; "),
    }
}

fn all(parts: Vec<Verdict>) -> Verdict {
    Verdict {
        passed: parts.iter().all(|v| v.passed),
        detail: parts.into_iter().map(|v| v.detail).collect::<Vec<_>>().join(" | "),
    }
}

fn linear_exactness(out: &Path) -> Verdict {
    summarize(&scenario("linear-exactness", &[("N", "1024")], out))
}

fn energy(out: &Path) -> Verdict {
    let flat = scenario("energy-conservation", &[("dt", "1e-3"), ("T", "1")], &out.join("constant"));
    let ladder = scenario(
        "energy-conservation",
        &[("g", "ladder"), ("rung", "1"), ("amplitude", "1.2")],
        &out.join("ladder"),
    );
    let mut a = summarize(&flat);
    a.detail = format!("g=1 {}", a.detail);
    let mut b = summarize(&ladder);
    b.detail = format!("rung 1 {}", b.detail);
    all(vec![a, b])
}

fn scaling(out: &Path) -> Verdict {
    summarize(&scenario("scaling-covariance", &[("lambda", "2")], out))
}

fn picard(out: &Path) -> Verdict {
    summarize(&scenario("picard-contraction", &[], out))
}

fn duhamel_order(_: &Path) -> Verdict {
    let grid = RadialGrid::new(20.0, 256).unwrap();
    let data = gaussian_bump(grid, 0.8, 1.0, 3.0).unwrap();
    let resid = |dt_out: f64| {
        let cfg = SolverConfig {
            dt: 1e-3,
            dt_out,
            horizon: 1.0,
            ..SolverConfig::new(5.0, GFunction::Constant(1.0), grid)
        };
        let run = evolve(&data, &cfg).unwrap();
        duhamel_residual(&run.trajectory, 5.0, &cfg.g).unwrap()
    };
    let (r1, r2) = (resid(0.04), resid(0.02));
    let ratio = r1 / r2;
    Verdict {
        passed: (3.5..=4.5).contains(&ratio),
        detail: format!("residual {r1:.3e} -> {r2:.3e}, ratio {ratio:.3}"),
    }
}

fn g_machinery(out: &Path) -> Verdict {
    let ladder = scenario("ladder-validate", &[("rungs", "5")], out);
    let one = validate_conditions(&GFunction::Constant(1.0), 1e9, 1e-10).unwrap();
    let one_ok = one.dg_nonnegative
        && one.sup_x_dg == 0.0
        && one.sup_x2_d2g == 0.0
        && one.verdict == DivergenceVerdict::Diverges;
    // log(2 + y²) ≥ 2 log y, so the integral is at most 1/ln²2 + 1/4
    let log = validate_conditions(&GFunction::Log, 1e9, 1e-10).unwrap();
    let oracle = 1.0 / std::f64::consts::LN_2.powi(2) + 0.25;
    let last = log.partial_integrals.last().map(|p| p.1).unwrap_or(f64::NAN);
    let log_ok = log.verdict == DivergenceVerdict::Converges && last <= oracle;
    let loglog = validate_conditions(&GFunction::LogLog { power: 1.0 / 30.0 }, 1e9, 1e-10).unwrap();
    all(vec![
        Verdict {
            passed: one_ok,
            detail: format!("g=1 {:?}", one.verdict),
        },
        Verdict {
            passed: log_ok,
            detail: format!("log {:?}, integral {last:.4} <= {oracle:.4}", log.verdict),
        },
        Verdict {
            passed: loglog.verdict == DivergenceVerdict::Diverges,
            detail: format!("loglog {:?}", loglog.verdict),
        },
        summarize(&ladder),
    ])
}

fn proposition_bound(out: &Path) -> Verdict {
    summarize(&scenario("prop-1-3-bound", &[("ensemble", "10"), ("p", "5")], out))
}

fn strichartz(out: &Path) -> Verdict {
    summarize(&scenario("strichartz-probe", &[("N", "1024"), ("ensemble", "50")], out))
}

fn gwp(out: &Path) -> Verdict {
    summarize(&scenario("gwp-criterion", &[], out))
}

fn scattering(out: &Path) -> Verdict {
    summarize(&scenario("scattering", &[("T", "10")], out))
}

fn perturbation(out: &Path) -> Verdict {
    // spatially uniform, phase-rotating data sitting on the plateau of rung 1
    let grid = RadialGrid::new(20.0, 64).unwrap();
    let ladder = GLadder::new(10.0).unwrap().build_rung(0.0).unwrap();
    let c: f64 = 80.0;
    let omega = (2.0 * c.powi(4)).sqrt();
    let data = WaveState::new(
        RadialField::from_values(grid, vec![Complex64::new(c, 0.0); 64]).unwrap(),
        RadialField::from_values(grid, vec![Complex64::new(0.0, omega * c); 64]).unwrap(),
    )
    .unwrap();
    let cfg = SolverConfig {
        dt: 5e-6,
        dt_out: 5e-5,
        horizon: 1e-3,
        ..SolverConfig::new(5.0, GFunction::Constant(1.0), grid)
    };
    let g1 = GFunction::ladder(ladder, 1).unwrap();
    let rep = perturbation_compare(&data, 1, &g1, &cfg).unwrap();
    let scale = data.htilde_total(5.0).unwrap();
    let plateau = Verdict {
        passed: rep.blow_up.is_none() && rep.sup_htilde2 <= 1e-12 * scale,
        detail: format!("plateau data: sup |u - v| {:.3e} (data norm {scale:.3e})", rep.sup_htilde2),
    };
    all(vec![plateau, summarize(&scenario("perturbation-compare", &[], out))])
}

fn determinism(out: &Path) -> Verdict {
    let args = [("ensemble", "4"), ("seed", "2024"), ("N", "256")];
    scenario("prop-1-3-bound", &args, &out.join("a"));
    scenario("prop-1-3-bound", &args, &out.join("b"));
    let mut same = Vec::new();
    for f in ["ledger.csv", "report.json"] {
        let x = std::fs::read(out.join("a").join(f)).unwrap();
        let y = std::fs::read(out.join("b").join(f)).unwrap();
        same.push((f, x == y, x.len()));
    }
    Verdict {
        passed: same.iter().all(|s| s.1),
        detail: same
            .iter()
            .map(|(f, eq, n)| format!("{f} ({n} bytes) {}", if *eq { "identical" } else { "differs" }))
            .collect::<Vec<_>>()
            .join(", "),
    }
}

type Criterion = (&'static str, fn(&Path) -> Verdict, Duration);

fn main() {
    let criteria: [Criterion; 12] = [
        ("linear exactness", linear_exactness, Duration::from_secs(1)),
        ("energy conservation", energy, Duration::from_secs(60)),
        ("scaling criticality", scaling, Duration::from_secs(120)),
        ("picard contraction", picard, Duration::from_secs(120)),
        ("duhamel residual order", duhamel_order, Duration::from_secs(60)),
        ("g machinery", g_machinery, Duration::from_secs(10)),
        ("a-priori bound arithmetic", proposition_bound, Duration::from_secs(600)),
        ("admissibility and strichartz", strichartz, Duration::from_secs(600)),
        ("gwp criterion", gwp, Duration::from_secs(600)),
        ("scattering", scattering, Duration::from_secs(600)),
        ("perturbation comparison", perturbation, Duration::from_secs(600)),
        ("determinism", determinism, Duration::from_secs(600)),
    ];
    let root = tempfile::tempdir().expect("temp dir");
    let mut failures = 0;
    for (k, (name, run, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let mut v = run(&root.path().join(format!("c{}", k + 1)));
        let took = start.elapsed();
        if took > *budget {
            v.passed = false;
            v.detail.push_str(&format!(" | over budget {budget:?}"));
        }
        if !v.passed {
            failures += 1;
        }
        println!(
            "{} {:>2} {name} [{:.2}s]: {}",
            if v.passed { "PASS" } else { "FAIL" },
            k + 1,
            took.as_secs_f64(),
            v.detail
        );
    }
    println!("acceptance: {}/12 passed", 12 - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
