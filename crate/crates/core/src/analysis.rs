//! Diagnostics over trajectories and ledgers: energy, scaling, blow-up,
//! scattering, the `Ḣ^{s_p} × Ḣ^{s_p - 1}` monitor, and the comparison of a
//! ladder rung with its constant plateau value.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Result, WaveError};
use crate::gfun::{sp_exponent, GFunction};
use crate::norms::{q_quantity, s_norm, sup_htilde2, x_norm, Channel, Interval, NormLedger};
use crate::propagator::{duhamel_residual, evolve, linear_flow, SolverConfig, Trajectory};
use crate::quad;
use crate::spectral::{RadialField, WaveState};
use crate::Complex64;

/// Version stamped on every JSON report.
pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    schema_version: u32,
    kind: &'a str,
    report: &'a T,
}

/// Wraps a report body as `{schema_version, kind, report}`.
pub fn report_json<T: Serialize>(kind: &str, report: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(&Envelope {
        schema_version: REPORT_SCHEMA_VERSION,
        kind,
        report,
    })?)
}

/// `F(z) = ∫_0^{|z|} s^p g(s) ds`.
pub fn potential_density(z: f64, p: f64, g: &GFunction) -> f64 {
    let z = z.abs();
    if z == 0.0 {
        return 0.0;
    }
    if let Some(c) = g.as_constant() {
        return c * z.powf(p + 1.0) / (p + 1.0);
    }
    let breaks: Vec<f64> = g.joints().into_iter().filter(|&x| x > 0.0 && x < z).collect();
    quad::integrate_with_breaks(|s| s.powf(p) * g.value(s), 0.0, z, &breaks, 1e-10, 0.0)
}

/// `½‖∂_t u‖²_{L²} + ½‖Du‖²_{L²} + 4π ∫ F(|u|) r² dr`, the last integral by
/// the trapezoid rule on the nodes.
pub fn energy(state: &WaveState, p: f64, g: &GFunction) -> Result<f64> {
    sp_exponent(p)?;
    let grid = state.grid();
    let kinetic = state.ut.sobolev_norm(0.0)?.powi(2);
    let gradient = state.u.sobolev_norm(1.0)?.powi(2);
    let h = grid.spacing();
    let potential: f64 = state
        .u
        .values()
        .iter()
        .enumerate()
        .map(|(j, u)| {
            let r = grid.node(j);
            potential_density(u.norm(), p, g) * r * r
        })
        .sum();
    Ok(0.5 * kinetic + 0.5 * gradient + 4.0 * PI * h * potential)
}

/// `max_k |E(t_k) - E(t_0)| / max(E(t_0), 1e-30)`.
pub fn energy_drift(trajectory: &Trajectory, p: f64, g: &GFunction) -> Result<f64> {
    let energies = trajectory
        .states
        .iter()
        .map(|s| energy(s, p, g))
        .collect::<Result<Vec<f64>>>()?;
    let Some(&e0) = energies.first() else {
        return Ok(0.0);
    };
    let worst = energies.iter().map(|e| (e - e0).abs()).fold(0.0, f64::max);
    Ok(worst / e0.max(1e-30))
}

/// Largest node radius where `|u|` exceeds `1e-14` of its maximum.
pub fn support_radius(field: &RadialField) -> f64 {
    let values = field.values();
    let peak = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if peak == 0.0 {
        return 0.0;
    }
    values
        .iter()
        .rposition(|v| v.norm() > 1e-14 * peak)
        .map(|j| field.grid().node(j))
        .unwrap_or(0.0)
}

/// Band-limited evaluation of `Σ a_n sin(k_n ρ)/ρ` (zero for `ρ ≥ R`).
fn evaluate_at(field: &RadialField, rho: f64) -> Complex64 {
    let grid = field.grid();
    if rho >= grid.radius() {
        return Complex64::new(0.0, 0.0);
    }
    if rho == 0.0 {
        return field
            .coeffs()
            .iter()
            .enumerate()
            .map(|(n, a)| a * grid.wavenumber(n))
            .sum();
    }
    let theta = PI * rho / grid.radius();
    let step = Complex64::from_polar(1.0, theta);
    let mut phase = step;
    let mut acc = Complex64::new(0.0, 0.0);
    for (n, a) in field.coeffs().iter().enumerate() {
        if n % 64 == 63 {
            // re-anchor the rotation to keep round-off from accumulating
            phase = Complex64::from_polar(1.0, theta * (n + 1) as f64);
        }
        acc += a * phase.im;
        phase *= step;
    }
    acc / rho
}

fn rescale_field(field: &RadialField, lambda: f64, factor: f64) -> Result<RadialField> {
    let grid = *field.grid();
    let values = grid
        .nodes()
        .into_iter()
        .map(|r| evaluate_at(field, r / lambda) * factor)
        .collect();
    RadialField::from_values(grid, values)
}

/// `(u_λ, ∂_t u_λ)(0) = (λ^{-2/(p-1)} u_0(x/λ), λ^{-2/(p-1)-1} u_1(x/λ))`,
/// resampled through the sine basis.
pub fn scaling_transform(state: &WaveState, lambda: f64, p: f64) -> Result<WaveState> {
    sp_exponent(p)?;
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(WaveError::Domain {
            name: "lambda",
            value: lambda,
            range: "(0, inf)",
        });
    }
    if lambda == 1.0 {
        return Ok(state.clone());
    }
    let support = support_radius(&state.u).max(support_radius(&state.ut));
    let radius = state.grid().radius();
    if lambda * support > radius {
        return Err(WaveError::Geometry(format!(
            "rescaled support {} exceeds ball radius {radius}",
            lambda * support
        )));
    }
    let a = lambda.powf(-2.0 / (p - 1.0));
    Ok(WaveState {
        u: rescale_field(&state.u, lambda, a)?,
        ut: rescale_field(&state.ut, lambda, a / lambda)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BlowupVerdict {
    Quiescent,
    Growing,
    BlowUpSuspected,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WindowStat {
    pub interval: Interval,
    pub s_norm: f64,
    pub q: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BlowupReport {
    pub windows: Vec<WindowStat>,
    /// Least-squares slope of `ln S(window)` against window midpoint.
    pub growth_exponent: f64,
    /// Window `S` norms strictly increasing over the last three windows.
    pub accelerating: bool,
    pub truncated: bool,
    pub verdict: BlowupVerdict,
}

/// Per-window `S` and `Q` over trailing windows of length `window`, counted
/// back from the last sample.
pub fn blowup_monitor(ledger: &NormLedger, window: f64) -> Result<BlowupReport> {
    if !(window > 0.0) {
        return Err(WaveError::Domain {
            name: "window",
            value: window,
            range: "(0, inf)",
        });
    }
    let span = ledger
        .span()
        .ok_or_else(|| WaveError::Precondition("ledger has no samples".into()))?;
    let mut windows = Vec::new();
    let mut end = span.end;
    while end > span.start + 1e-9 * window {
        let start = (end - window).max(span.start);
        let iv = Interval::new(start, end);
        windows.push(WindowStat {
            interval: iv,
            s_norm: s_norm(ledger, &iv)?,
            q: q_quantity(ledger, &iv)?,
        });
        end = start;
    }
    windows.reverse();

    let pts: Vec<(f64, f64)> = windows
        .iter()
        .filter(|w| w.s_norm > 0.0)
        .map(|w| (0.5 * (w.interval.start + w.interval.end), w.s_norm.ln()))
        .collect();
    let growth_exponent = if pts.len() >= 2 {
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        if sxx > 0.0 {
            sxy / sxx
        } else {
            0.0
        }
    } else {
        0.0
    };
    let accelerating = windows.len() >= 3
        && windows[windows.len() - 3..]
            .windows(2)
            .all(|w| w[1].s_norm > w[0].s_norm);
    let truncated = ledger.truncated();
    let verdict = if truncated {
        BlowupVerdict::BlowUpSuspected
    } else if growth_exponent * window > 1.5f64.ln() {
        BlowupVerdict::Growing
    } else {
        BlowupVerdict::Quiescent
    };
    Ok(BlowupReport {
        windows,
        growth_exponent,
        accelerating,
        truncated,
        verdict,
    })
}

/// Checkpoint times `{T/2, 3T/4, 7T/8, T}`.
pub fn default_checkpoints(horizon: f64) -> Vec<f64> {
    vec![0.5 * horizon, 0.75 * horizon, 0.875 * horizon, horizon]
}

/// Pull-back `K^{-1}(t) v(t)` of the last checkpoint and the Cauchy
/// differences between consecutive pull-backs.
#[derive(Debug, Clone)]
pub struct ScatterCandidate {
    pub state: WaveState,
    pub checkpoints: Vec<f64>,
    /// `d_m` in `H̃² × H̃¹`.
    pub differences: Vec<f64>,
    /// `d_m` strictly decreasing over the last three differences.
    pub scatters: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScatterReport {
    pub checkpoints: Vec<f64>,
    pub differences: Vec<f64>,
    pub scatters: bool,
    /// `‖u_+‖_{H̃²} + ‖u_{+,1}‖_{H̃¹}` of the candidate.
    pub candidate_norm: f64,
}

impl ScatterCandidate {
    pub fn report(&self, p: f64) -> Result<ScatterReport> {
        Ok(ScatterReport {
            checkpoints: self.checkpoints.clone(),
            differences: self.differences.clone(),
            scatters: self.scatters,
            candidate_norm: self.state.htilde_total(p)?,
        })
    }
}

pub fn scattering_extract(trajectory: &Trajectory, checkpoints: &[f64]) -> Result<ScatterCandidate> {
    if checkpoints.len() < 4 {
        return Err(WaveError::Precondition(format!(
            "need at least 4 checkpoints, got {}",
            checkpoints.len()
        )));
    }
    if checkpoints.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(WaveError::Precondition("checkpoints must be strictly increasing".into()));
    }
    let pulled = checkpoints
        .iter()
        .map(|&t| {
            trajectory
                .state_at(t)
                .map(|s| linear_flow(s, -t))
                .ok_or_else(|| WaveError::Precondition(format!("no trajectory sample at t = {t}")))
        })
        .collect::<Result<Vec<_>>>()?;
    let differences = pulled
        .windows(2)
        .map(|w| w[1].sub(&w[0])?.htilde_total(trajectory.p))
        .collect::<Result<Vec<f64>>>()?;
    let tail = &differences[differences.len().saturating_sub(3)..];
    let scatters = tail.len() == 3 && tail.windows(2).all(|w| w[1] < w[0]);
    Ok(ScatterCandidate {
        state: pulled.last().cloned().expect("at least four checkpoints"),
        checkpoints: checkpoints.to_vec(),
        differences,
        scatters,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KenigMerleReport {
    pub interval: Interval,
    /// Sample sup of `(‖u‖²_{Ḣ^{s_p}} + ‖∂_t u‖²_{Ḣ^{s_p-1}})^{1/2}`.
    pub sup: f64,
    pub initial: f64,
    pub last: f64,
    pub truncated: bool,
}

pub fn kenig_merle_monitor(ledger: &NormLedger, interval: &Interval) -> Result<KenigMerleReport> {
    let sp = sp_exponent(ledger.p())?;
    let hs = ledger.column(&Channel::Sobolev { s: sp })?;
    let hv = ledger.column(&Channel::VelocitySobolev { s: sp - 1.0 })?;
    let inside: Vec<f64> = ledger
        .times()
        .iter()
        .zip(hs.iter().zip(hv))
        .filter(|(t, _)| **t >= interval.start - 1e-12 && **t <= interval.end + 1e-12)
        .map(|(_, (a, b))| a.hypot(*b))
        .collect();
    let (Some(&initial), Some(&last)) = (inside.first(), inside.last()) else {
        return Err(WaveError::IntervalOutOfRange {
            start: interval.start,
            end: interval.end,
            first: ledger.times().first().copied().unwrap_or(f64::NAN),
            last: ledger.times().last().copied().unwrap_or(f64::NAN),
        });
    };
    Ok(KenigMerleReport {
        interval: *interval,
        sup: inside.iter().copied().fold(0.0, f64::max),
        initial,
        last,
        truncated: ledger.truncated(),
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PerturbationReport {
    pub rung: usize,
    pub plateau_value: f64,
    /// Span of the samples both runs produced.
    pub interval: Interval,
    pub x_norm: f64,
    /// Sample sup of `‖u_{[i]} - v_{[i]}‖_{H̃²}`.
    pub sup_htilde2: f64,
    /// Duhamel residual of `(i+1)^{1/(p-1)} v_{[i]}` against `g ≡ 1`.
    pub rescaled_residual: f64,
    pub blow_up: Option<String>,
}

/// Evolves the same data under `g_i` and under `g ≡ i + 1`, and measures the
/// difference and the rescaling identity.
pub fn perturbation_compare(
    data: &WaveState,
    rung: usize,
    g_rung: &GFunction,
    config: &SolverConfig,
) -> Result<PerturbationReport> {
    match g_rung {
        GFunction::Ladder { ladder, .. } if rung >= 1 && rung <= ladder.rung_count() => {}
        _ => {
            return Err(WaveError::Precondition(format!(
                "rung {rung} of a built ladder required"
            )))
        }
    }
    let plateau = (rung + 1) as f64;
    let u_cfg = SolverConfig {
        g: g_rung.clone(),
        ..config.clone()
    };
    let v_cfg = SolverConfig {
        g: GFunction::Constant(plateau),
        ..config.clone()
    };
    let u = evolve(data, &u_cfg)?.trajectory;
    let v = evolve(data, &v_cfg)?.trajectory;
    let blow_up = u
        .blow_up
        .as_ref()
        .or(v.blow_up.as_ref())
        .map(|b| format!("t = {}: {}", b.time, b.reason));

    let common = u.len().min(v.len());
    let mut diff = NormLedger::new(config.p, config.eps)?;
    for k in 0..common {
        diff.record(u.times[k], &u.states[k].sub(&v.states[k])?)?;
    }
    let interval = diff
        .span()
        .ok_or_else(|| WaveError::Precondition("no common samples".into()))?;

    let w_factor = plateau.powf(1.0 / (config.p - 1.0));
    let w = Trajectory {
        times: v.times[..common].to_vec(),
        states: v.states[..common].iter().map(|s| s.scale(w_factor)).collect(),
        ..v.clone()
    };
    let rescaled_residual = duhamel_residual(&w, config.p, &GFunction::Constant(1.0))?;

    let (x, sup) = if common > 1 {
        (
            x_norm(&diff, &interval, config.eps)?,
            sup_htilde2(&diff, &interval)?,
        )
    } else {
        (0.0, 0.0)
    };
    Ok(PerturbationReport {
        rung,
        plateau_value: plateau,
        interval,
        x_norm: x,
        sup_htilde2: sup,
        rescaled_residual,
        blow_up,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{gaussian_bump, random_smooth};
    use crate::gfun::GLadder;
    use crate::propagator::Nonlinearity;
    use crate::spectral::RadialGrid;

    fn grid() -> RadialGrid {
        RadialGrid::new(20.0, 256).unwrap()
    }

    fn config(grid: RadialGrid, dt: f64, dt_out: f64, horizon: f64) -> SolverConfig {
        SolverConfig {
            dt,
            dt_out,
            horizon,
            ..SolverConfig::new(5.0, GFunction::Constant(1.0), grid)
        }
    }

    fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, m: usize) -> f64 {
        let h = (b - a) / m as f64;
        let mut s = f(a) + f(b);
        for k in 1..m {
            s += f(a + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    }

    #[test]
    fn potential_density_examples() {
        let one = GFunction::Constant(1.0);
        assert_eq!(potential_density(0.0, 5.0, &one), 0.0);
        assert!((potential_density(1.3, 5.0, &one) - 1.3f64.powi(6) / 6.0).abs() < 1e-15);
        let g = GFunction::Log;
        let oracle = simpson(|s| s.powi(5) * (2.0 + s * s).ln(), 0.0, 1.0, 20_000);
        assert!((potential_density(1.0, 5.0, &g) - oracle).abs() <= 1e-10 * oracle);
        // the t-substituted form |z|^{p+1} ∫_0^1 t^p g(t|z|) dt
        let z: f64 = 2.7;
        let alt = z.powi(6) * simpson(|t| t.powi(5) * (2.0 + t * t * z * z).ln(), 0.0, 1.0, 20_000);
        assert!((potential_density(z, 5.0, &g) - alt).abs() <= 1e-9 * alt);
    }

    #[test]
    fn energy_of_zero_and_of_free_mode() {
        let g = grid();
        assert_eq!(energy(&WaveState::zeros(g), 5.0, &GFunction::Log).unwrap(), 0.0);
        let s = WaveState::new(RadialField::eigenmode(g, 2).unwrap(), RadialField::zeros(g)).unwrap();
        // ½‖Du‖² = ½ · 2πR k²
        let k = g.wavenumber(1);
        let want = 0.5 * 2.0 * PI * 20.0 * k * k;
        let free = energy(&s, 5.0, &GFunction::Constant(0.0)).unwrap();
        assert!((free - want).abs() < 1e-12 * want);
    }

    #[test]
    fn energy_drift_is_second_order() {
        let g = grid();
        let s = gaussian_bump(g, 0.5, 1.0, 3.0).unwrap();
        let drift = |dt: f64| {
            let ev = evolve(&s, &config(g, dt, 0.05, 1.0)).unwrap();
            energy_drift(&ev.trajectory, 5.0, &GFunction::Constant(1.0)).unwrap()
        };
        let d1 = drift(0.01);
        let d2 = drift(0.005);
        assert!(d1 / d2 > 3.5 && d1 / d2 < 4.5, "{d1} {d2}");
    }

    #[test]
    fn scaling_identity_and_invariance() {
        let g = RadialGrid::new(20.0, 1024).unwrap();
        let s = gaussian_bump(g, 1.0, 1.0, 3.0).unwrap();
        assert_eq!(scaling_transform(&s, 1.0, 5.0).unwrap(), s);
        let scaled = scaling_transform(&s, 2.0, 5.0).unwrap();
        let a = s.u.sobolev_norm(1.0).unwrap();
        let b = scaled.u.sobolev_norm(1.0).unwrap();
        assert!((a - b).abs() <= 1e-8 * a, "{a} vs {b}");
        // the ball's fractional multipliers are only approximately covariant
        let sp = sp_exponent(7.0).unwrap();
        let scaled = scaling_transform(&s, 2.0, 7.0).unwrap();
        let a = s.u.sobolev_norm(sp).unwrap();
        let b = scaled.u.sobolev_norm(sp).unwrap();
        assert!((a - b).abs() <= 1e-3 * a, "{a} vs {b}");
        assert!(matches!(
            scaling_transform(&s, 4.0, 5.0),
            Err(WaveError::Geometry(_))
        ));
        // round trip λ then 1/λ
        let there = scaling_transform(&s, 2.0, 5.0).unwrap();
        let back = scaling_transform(&there, 0.5, 5.0).unwrap();
        let err = back.u.sub(&s.u).unwrap().lebesgue_norm(f64::INFINITY).unwrap();
        assert!(err < 1e-10);
    }

    #[test]
    fn monitor_linear_run_is_quiescent_and_km_constant() {
        let g = grid();
        let s = random_smooth(g, 11, 0.2);
        let mut c = config(g, 1e-2, 0.05, 4.0);
        c.nonlinearity = Nonlinearity::Off;
        let ev = evolve(&s, &c).unwrap();
        let rep = blowup_monitor(&ev.ledger, 1.0).unwrap();
        assert_eq!(rep.verdict, BlowupVerdict::Quiescent);
        assert_eq!(rep.windows.len(), 4);
        let km = kenig_merle_monitor(&ev.ledger, &Interval::new(0.0, 4.0)).unwrap();
        assert!((km.sup - km.initial).abs() <= 1e-12 * km.initial);
    }

    #[test]
    fn scattering_checks() {
        let g = grid();
        let s = random_smooth(g, 5, 0.2);
        let mut c = config(g, 1e-2, 0.25, 4.0);
        c.nonlinearity = Nonlinearity::Off;
        let ev = evolve(&s, &c).unwrap();
        let cand = scattering_extract(&ev.trajectory, &default_checkpoints(4.0)).unwrap();
        assert!(cand.differences.iter().all(|&d| d <= 1e-12 * s.htilde_total(5.0).unwrap()));
        assert!(scattering_extract(&ev.trajectory, &[3.0, 2.0, 3.5, 4.0]).is_err());
        assert!(scattering_extract(&ev.trajectory, &[2.0, 3.0, 4.0]).is_err());
        assert!(scattering_extract(&ev.trajectory, &[2.0, 3.0, 3.3, 4.0]).is_err());
    }

    #[test]
    fn perturbation_requires_ladder_rung() {
        let g = grid();
        let s = gaussian_bump(g, 0.1, 1.0, 3.0).unwrap();
        let c = config(g, 1e-2, 0.1, 0.2);
        assert!(perturbation_compare(&s, 1, &GFunction::Constant(1.0), &c).is_err());
        let ladder = GLadder::new(10.0).unwrap().build_rung(0.0).unwrap();
        let g1 = GFunction::ladder(ladder, 1).unwrap();
        let rep = perturbation_compare(&s, 1, &g1, &c).unwrap();
        assert!(rep.blow_up.is_none());
        assert!(rep.x_norm > 0.0);
        let json = report_json("perturbation-compare", &rep).unwrap();
        assert!(json.contains("\"schema_version\": 1"));
    }

    #[test]
    fn plateau_data_sees_no_difference() {
        let g = RadialGrid::new(20.0, 64).unwrap();
        let ladder = GLadder::new(10.0).unwrap().build_rung(0.0).unwrap();
        let c: f64 = 80.0;
        let omega = (c.powi(4) * 2.0f64).sqrt();
        let u = RadialField::from_values(g, vec![Complex64::new(c, 0.0); 64]).unwrap();
        let ut = RadialField::from_values(g, vec![Complex64::new(0.0, omega * c); 64]).unwrap();
        let s = WaveState::new(u, ut).unwrap();
        let cfg = SolverConfig {
            dt: 5e-6,
            dt_out: 5e-5,
            horizon: 1e-3,
            ..SolverConfig::new(5.0, GFunction::Constant(1.0), g)
        };
        let g1 = GFunction::ladder(ladder, 1).unwrap();
        let rep = perturbation_compare(&s, 1, &g1, &cfg).unwrap();
        assert!(rep.blow_up.is_none(), "{rep:?}");
        assert_eq!(rep.sup_htilde2, 0.0, "{rep:?}");
    }
}
