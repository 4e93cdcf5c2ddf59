//! Time evolution: the exact free flow on sine coefficients, Strang-split
//! nonlinear stepping, the Picard fixed-point solver and the Duhamel residual.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Result, WaveError};
use crate::gfun::{sp_exponent, GFunction};
use crate::norms::{time_norm, Interval, NormLedger, DEFAULT_EPS};
use crate::spectral::{sine_analyze, sine_synthesize, RadialGrid, WaveState};
use crate::Complex64;

/// `‖u‖_∞` beyond which a run is flagged as blowing up.
pub const BLOWUP_THRESHOLD: f64 = 1e8;

/// Checkpoint document version.
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Nonlinearity {
    /// `∂_tt u - Δu = -|u|^{p-1} u g(|u|)`
    Defocusing,
    /// `∂_tt u - Δu = +|u|^{p-1} u g(|u|)`
    Focusing,
    /// Free wave equation.
    Off,
}

impl Nonlinearity {
    pub fn sign(self) -> f64 {
        match self {
            Self::Defocusing => -1.0,
            Self::Focusing => 1.0,
            Self::Off => 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub p: f64,
    pub g: GFunction,
    pub dt: f64,
    pub horizon: f64,
    pub dt_out: f64,
    pub grid: RadialGrid,
    pub nonlinearity: Nonlinearity,
    /// Small exponent of the ledger's `(∞-, 3+)` channels.
    pub eps: f64,
}

impl SolverConfig {
    pub fn new(p: f64, g: GFunction, grid: RadialGrid) -> Self {
        Self {
            p,
            g,
            dt: 1e-3,
            horizon: 1.0,
            dt_out: 1e-2,
            grid,
            nonlinearity: Nonlinearity::Defocusing,
            eps: DEFAULT_EPS,
        }
    }

    pub fn validate(&self) -> Result<()> {
        sp_exponent(self.p)?;
        let bad = |msg: String| Err(WaveError::Config(msg));
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        let cfl = 0.5 * self.grid.spacing();
        if self.dt > cfl {
            return bad(format!("dt = {} exceeds 0.5 h = {cfl}", self.dt));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return bad(format!("horizon must be positive, got {}", self.horizon));
        }
        let ratio = self.dt_out / self.dt;
        if !(ratio >= 1.0 - 1e-9) || (ratio - ratio.round()).abs() > 1e-9 * ratio {
            return bad(format!(
                "dt_out = {} is not an integer multiple of dt = {}",
                self.dt_out, self.dt
            ));
        }
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return bad(format!("eps must lie in (0, 1), got {}", self.eps));
        }
        Ok(())
    }

    pub fn steps_per_sample(&self) -> usize {
        (self.dt_out / self.dt).round() as usize
    }

    pub fn total_steps(&self) -> usize {
        (self.horizon / self.dt - 1e-9).ceil() as usize
    }

    /// SHA-256 over a canonical rendering of every field.
    pub fn fingerprint(&self) -> String {
        let text = format!(
            "p={:?};g={};dt={:?};T={:?};dt_out={:?};R={:?};N={};sign={:?};eps={:?};ladder={}",
            self.p,
            self.g.describe(),
            self.dt,
            self.horizon,
            self.dt_out,
            self.grid.radius(),
            self.grid.len(),
            self.nonlinearity,
            self.eps,
            match &self.g {
                GFunction::Ladder { ladder, .. } => ladder.to_json().unwrap_or_default(),
                _ => String::new(),
            }
        );
        hex::encode(Sha256::digest(text.as_bytes()))
    }
}

/// Applies the free flow for time `t` in place on coefficient arrays.
fn flow_coeffs(grid: &RadialGrid, a: &mut [Complex64], b: &mut [Complex64], t: f64) {
    for (n, (an, bn)) in a.iter_mut().zip(b.iter_mut()).enumerate() {
        let k = grid.wavenumber(n);
        let (s, c) = (k * t).sin_cos();
        let (a0, b0) = (*an, *bn);
        *an = a0 * c + b0 * (s / k);
        *bn = b0 * c - a0 * (k * s);
    }
}

/// `(u(t), ∂_t u(t))` of the free wave equation. Exact on the basis.
pub fn linear_flow(state: &WaveState, t: f64) -> WaveState {
    let grid = *state.grid();
    let mut a = state.u.coeffs().to_vec();
    let mut b = state.ut.coeffs().to_vec();
    flow_coeffs(&grid, &mut a, &mut b, t);
    WaveState::from_coeffs(grid, a, b).expect("lengths preserved")
}

/// Pointwise `sign · |u|^{p-1} u g(|u|)`.
pub fn nonlinear_term(values: &[Complex64], p: f64, g: &GFunction, sign: f64) -> Vec<Complex64> {
    values
        .iter()
        .map(|u| {
            let m = u.norm();
            if sign == 0.0 || m == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                u * (sign * m.powf(p - 1.0) * g.value(m))
            }
        })
        .collect()
}

struct Forcing<'a> {
    grid: RadialGrid,
    p: f64,
    g: &'a GFunction,
    sign: f64,
}

impl Forcing<'_> {
    /// Sine coefficients of the forcing for the field with coefficients `a`,
    /// or the reason the field is no longer trustworthy.
    fn coeffs(&self, a: &[Complex64]) -> std::result::Result<Vec<Complex64>, String> {
        let u = sine_synthesize(a, &self.grid).map_err(|e| e.to_string())?;
        let mut sup: f64 = 0.0;
        for v in &u {
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err("non-finite field value".to_string());
            }
            sup = sup.max(v.norm());
        }
        if sup > BLOWUP_THRESHOLD {
            return Err(format!("sup |u| = {sup:e} exceeds {BLOWUP_THRESHOLD:e}"));
        }
        if self.sign == 0.0 {
            return Ok(vec![Complex64::new(0.0, 0.0); a.len()]);
        }
        let f = nonlinear_term(&u, self.p, self.g, self.sign);
        let fc = sine_analyze(&f, &self.grid).map_err(|e| e.to_string())?;
        if fc.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err("non-finite nonlinear term".to_string());
        }
        Ok(fc)
    }
}

fn kick(b: &mut [Complex64], force: &[Complex64], tau: f64) {
    for (bn, fn_) in b.iter_mut().zip(force) {
        *bn += fn_ * tau;
    }
}

/// One Strang step: half kick on `∂_t u`, exact free flow, half kick.
pub fn step_strang(
    state: &WaveState,
    dt: f64,
    p: f64,
    g: &GFunction,
    nonlinearity: Nonlinearity,
) -> Result<WaveState> {
    let grid = *state.grid();
    let forcing = Forcing {
        grid,
        p,
        g,
        sign: nonlinearity.sign(),
    };
    let blow = |reason| WaveError::BlowUpSuspected { time: dt, reason };
    let mut a = state.u.coeffs().to_vec();
    let mut b = state.ut.coeffs().to_vec();
    let f0 = forcing.coeffs(&a).map_err(|r| blow(r))?;
    kick(&mut b, &f0, 0.5 * dt);
    flow_coeffs(&grid, &mut a, &mut b, dt);
    let f1 = forcing.coeffs(&a).map_err(|r| blow(r))?;
    kick(&mut b, &f1, 0.5 * dt);
    WaveState::from_coeffs(grid, a, b)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlowUp {
    pub time: f64,
    pub reason: String,
}

/// Sampled solution on one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<WaveState>,
    pub fingerprint: String,
    pub p: f64,
    pub nonlinearity: Nonlinearity,
    pub blow_up: Option<BlowUp>,
}

#[derive(Serialize, Deserialize)]
struct CheckpointState {
    a: Vec<[f64; 2]>,
    b: Vec<[f64; 2]>,
}

#[derive(Serialize, Deserialize)]
struct Checkpoint {
    version: u32,
    fingerprint: String,
    p: f64,
    nonlinearity: Nonlinearity,
    radius: f64,
    modes: usize,
    times: Vec<f64>,
    states: Vec<CheckpointState>,
    blow_up: Option<BlowUp>,
}

fn pack(c: &[Complex64]) -> Vec<[f64; 2]> {
    c.iter().map(|z| [z.re, z.im]).collect()
}

fn unpack(c: &[[f64; 2]]) -> Vec<Complex64> {
    c.iter().map(|z| Complex64::new(z[0], z[1])).collect()
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn grid(&self) -> Option<&RadialGrid> {
        self.states.first().map(WaveState::grid)
    }

    pub fn last(&self) -> Option<(f64, &WaveState)> {
        Some((*self.times.last()?, self.states.last()?))
    }

    /// The sample at time `t`, if one lies within `1e-9` of it.
    pub fn state_at(&self, t: f64) -> Option<&WaveState> {
        let scale = 1e-9 * t.abs().max(1.0);
        self.times
            .iter()
            .position(|s| (s - t).abs() <= scale)
            .map(|k| &self.states[k])
    }

    pub fn to_json(&self) -> Result<String> {
        let grid = self
            .grid()
            .copied()
            .ok_or_else(|| WaveError::Precondition("empty trajectory".into()))?;
        let doc = Checkpoint {
            version: CHECKPOINT_VERSION,
            fingerprint: self.fingerprint.clone(),
            p: self.p,
            nonlinearity: self.nonlinearity,
            radius: grid.radius(),
            modes: grid.len(),
            times: self.times.clone(),
            states: self
                .states
                .iter()
                .map(|s| CheckpointState {
                    a: pack(s.u.coeffs()),
                    b: pack(s.ut.coeffs()),
                })
                .collect(),
            blow_up: self.blow_up.clone(),
        };
        Ok(serde_json::to_string(&doc)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: Checkpoint = serde_json::from_str(text)?;
        if doc.version != CHECKPOINT_VERSION {
            return Err(WaveError::Precondition(format!(
                "unsupported checkpoint version {}",
                doc.version
            )));
        }
        let grid = RadialGrid::new(doc.radius, doc.modes)?;
        let states = doc
            .states
            .iter()
            .map(|s| WaveState::from_coeffs(grid, unpack(&s.a), unpack(&s.b)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            times: doc.times,
            states,
            fingerprint: doc.fingerprint,
            p: doc.p,
            nonlinearity: doc.nonlinearity,
            blow_up: doc.blow_up,
        })
    }
}

#[derive(Debug, Clone)]
pub struct Evolution {
    pub trajectory: Trajectory,
    pub ledger: NormLedger,
}

/// Fixed-step Strang integration to the horizon, sampling every `dt_out`.
/// A blow-up signal ends the run early: the last finite state is kept as a
/// final sample and the trajectory is flagged.
pub fn evolve(state0: &WaveState, config: &SolverConfig) -> Result<Evolution> {
    config.validate()?;
    if state0.grid() != &config.grid {
        return Err(WaveError::GridMismatch);
    }
    let grid = config.grid;
    let forcing = Forcing {
        grid,
        p: config.p,
        g: &config.g,
        sign: config.nonlinearity.sign(),
    };
    let mut ledger = NormLedger::new(config.p, config.eps)?;
    let mut trajectory = Trajectory {
        times: Vec::new(),
        states: Vec::new(),
        fingerprint: config.fingerprint(),
        p: config.p,
        nonlinearity: config.nonlinearity,
        blow_up: None,
    };
    let mut a = state0.u.coeffs().to_vec();
    let mut b = state0.ut.coeffs().to_vec();
    let mut force = match forcing.coeffs(&a) {
        Ok(f) => f,
        Err(reason) => {
            ledger.mark_truncated();
            trajectory.blow_up = Some(BlowUp { time: 0.0, reason });
            return Ok(Evolution { trajectory, ledger });
        }
    };
    ledger.record(0.0, state0)?;
    trajectory.times.push(0.0);
    trajectory.states.push(state0.clone());

    let per_sample = config.steps_per_sample();
    let total = config.total_steps();
    let dt = config.dt;
    for step in 1..=total {
        let (a_prev, b_prev) = (a.clone(), b.clone());
        kick(&mut b, &force, 0.5 * dt);
        flow_coeffs(&grid, &mut a, &mut b, dt);
        match forcing.coeffs(&a) {
            Ok(f) => force = f,
            Err(reason) => {
                let t_prev = (step - 1) as f64 * dt;
                if trajectory.times.last().is_some_and(|&t| t < t_prev) {
                    let last = WaveState::from_coeffs(grid, a_prev, b_prev)?;
                    ledger.record(t_prev, &last)?;
                    trajectory.times.push(t_prev);
                    trajectory.states.push(last);
                }
                ledger.mark_truncated();
                trajectory.blow_up = Some(BlowUp {
                    time: step as f64 * dt,
                    reason,
                });
                break;
            }
        }
        kick(&mut b, &force, 0.5 * dt);
        if step % per_sample == 0 || step == total {
            let t = step as f64 * dt;
            let state = WaveState::from_coeffs(grid, a.clone(), b.clone())?;
            if !ledger.record(t, &state)? {
                trajectory.blow_up = Some(BlowUp {
                    time: t,
                    reason: "non-finite norm".into(),
                });
                break;
            }
            trajectory.times.push(t);
            trajectory.states.push(state);
        }
    }
    Ok(Evolution { trajectory, ledger })
}

/// Result of the smallness-time search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmallnessTime {
    pub t_l: f64,
    /// `S([0, T_l])` norm of the free evolution.
    pub s_norm: f64,
    /// Set when even the minimum step exceeds `δ`; `t_l` is then that step.
    pub below_minimum: bool,
}

/// Largest `T_l ≤ horizon` (dyadic search from `dt_out`, then bisection to
/// 0.1%) with `‖free evolution‖_{S([0, T_l])} ≤ δ`.
pub fn smallness_time(state0: &WaveState, delta: f64, config: &SolverConfig) -> Result<SmallnessTime> {
    if !(delta > 0.0) {
        return Err(WaveError::Domain {
            name: "delta",
            value: delta,
            range: "(0, inf)",
        });
    }
    config.validate()?;
    let q = 2.0 * (config.p - 1.0);
    let ceiling = config.horizon;
    let step = config.dt_out.min(ceiling);
    let count = (ceiling / step - 1e-9).ceil() as usize;
    let times: Vec<f64> = (0..=count).map(|k| (k as f64 * step).min(ceiling)).collect();
    let vals = times
        .iter()
        .map(|&t| linear_flow(state0, t).u.lebesgue_norm(q))
        .collect::<Result<Vec<f64>>>()?;
    let s = |t: f64| time_norm(&times, &vals, q, &Interval::new(0.0, t));

    if s(step) > delta {
        return Ok(SmallnessTime {
            t_l: step,
            s_norm: s(step),
            below_minimum: true,
        });
    }
    let mut lo = step;
    let mut hi = loop {
        let next = (2.0 * lo).min(ceiling);
        if s(next) > delta {
            break next;
        }
        if next >= ceiling {
            return Ok(SmallnessTime {
                t_l: ceiling,
                s_norm: s(ceiling),
                below_minimum: false,
            });
        }
        lo = next;
    };
    while hi - lo > 1e-3 * lo {
        let mid = 0.5 * (lo + hi);
        if s(mid) <= delta {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(SmallnessTime {
        t_l: lo,
        s_norm: s(lo),
        below_minimum: false,
    })
}

type Samples = Vec<(Vec<Complex64>, Vec<Complex64>)>;

/// Trapezoid Duhamel integrals `∫_0^{t_k} K(t_k - s) (0, F(s)) ds` for all
/// samples, in one sweep: `I_k = K(h_k) [I_{k-1} + (h_k/2)(0, F_{k-1})] + (h_k/2)(0, F_k)`.
fn duhamel_sweep(grid: &RadialGrid, times: &[f64], forces: &[Vec<Complex64>]) -> Samples {
    let n = grid.len();
    let zero = vec![Complex64::new(0.0, 0.0); n];
    let mut out = Vec::with_capacity(times.len());
    let (mut ia, mut ib) = (zero.clone(), zero);
    out.push((ia.clone(), ib.clone()));
    for k in 1..times.len() {
        let h = times[k] - times[k - 1];
        kick(&mut ib, &forces[k - 1], 0.5 * h);
        flow_coeffs(grid, &mut ia, &mut ib, h);
        kick(&mut ib, &forces[k], 0.5 * h);
        out.push((ia.clone(), ib.clone()));
    }
    out
}

/// The converged (or last) Picard iterate.
#[derive(Debug, Clone)]
pub struct PicardSolution {
    pub trajectory: Trajectory,
    /// Monitored norm of `u^{(m+1)} - u^{(m)}`.
    pub differences: Vec<f64>,
    /// Successive ratios of `differences`.
    pub ratios: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

fn sobolev_of(grid: &RadialGrid, a: &[Complex64], s: f64) -> f64 {
    let sum: f64 = a
        .iter()
        .enumerate()
        .map(|(n, c)| grid.wavenumber(n).powf(2.0 * s) * c.norm_sqr())
        .sum();
    (2.0 * std::f64::consts::PI * grid.radius() * sum).sqrt()
}

/// `sup_k ‖u_k‖_{H̃²} + ‖u‖_S` of a sampled field.
fn monitored_norm(grid: &RadialGrid, times: &[f64], u: &Samples, p: f64) -> Result<f64> {
    let sp = sp_exponent(p)?;
    let q = 2.0 * (p - 1.0);
    let mut sup: f64 = 0.0;
    let mut lq = Vec::with_capacity(u.len());
    for (a, _) in u {
        sup = sup.max(sobolev_of(grid, a, 2.0) + sobolev_of(grid, a, sp));
        let vals = sine_synthesize(a, grid)?;
        lq.push(crate::spectral::lebesgue_norm_of(&vals, grid, q)?);
    }
    let span = Interval::new(times[0], *times.last().unwrap_or(&times[0]));
    Ok(sup + time_norm(times, &lq, q, &span))
}

/// Picard iteration for the Duhamel fixed point on `[0, T_l]`, on a uniform
/// grid with spacing at most `dt_out`.
pub fn picard_solve(
    state0: &WaveState,
    t_l: f64,
    config: &SolverConfig,
    max_iter: usize,
    tol: f64,
) -> Result<PicardSolution> {
    picard_solve_from(state0, t_l, config, None, max_iter, tol)
}

/// [`picard_solve`] started from a supplied iterate (one state per sample
/// time) instead of the free evolution.
pub fn picard_solve_from(
    state0: &WaveState,
    t_l: f64,
    config: &SolverConfig,
    initial: Option<&[WaveState]>,
    max_iter: usize,
    tol: f64,
) -> Result<PicardSolution> {
    if !(t_l > 0.0 && t_l.is_finite()) {
        return Err(WaveError::Domain {
            name: "T_l",
            value: t_l,
            range: "(0, inf)",
        });
    }
    sp_exponent(config.p)?;
    let grid = *state0.grid();
    let steps = ((t_l / config.dt_out) - 1e-9).ceil().max(1.0) as usize;
    let times: Vec<f64> = (0..=steps).map(|k| t_l * k as f64 / steps as f64).collect();
    let forcing = Forcing {
        grid,
        p: config.p,
        g: &config.g,
        sign: config.nonlinearity.sign(),
    };
    let free: Samples = times
        .iter()
        .map(|&t| {
            let s = linear_flow(state0, t);
            (s.u.coeffs().to_vec(), s.ut.coeffs().to_vec())
        })
        .collect();
    let mut current: Samples = match initial {
        Some(states) => {
            if states.len() != times.len() {
                return Err(WaveError::LengthMismatch {
                    expected: times.len(),
                    got: states.len(),
                });
            }
            states
                .iter()
                .map(|s| (s.u.coeffs().to_vec(), s.ut.coeffs().to_vec()))
                .collect()
        }
        None => free.clone(),
    };

    let mut differences = Vec::new();
    let mut ratios = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    let mut streak = 0;
    for m in 0..max_iter {
        iterations = m + 1;
        let forces = current
            .iter()
            .zip(&times)
            .map(|((a, _), &t)| {
                forcing
                    .coeffs(a)
                    .map_err(|reason| WaveError::BlowUpSuspected { time: t, reason })
            })
            .collect::<Result<Vec<_>>>()?;
        let duhamel = duhamel_sweep(&grid, &times, &forces);
        let next: Samples = free
            .iter()
            .zip(&duhamel)
            .map(|((fa, fb), (da, db))| {
                (
                    fa.iter().zip(da).map(|(x, y)| x + y).collect(),
                    fb.iter().zip(db).map(|(x, y)| x + y).collect(),
                )
            })
            .collect();
        let delta: Samples = next
            .iter()
            .zip(&current)
            .map(|((na, nb), (ca, cb))| {
                (
                    na.iter().zip(ca).map(|(x, y)| x - y).collect(),
                    nb.iter().zip(cb).map(|(x, y)| x - y).collect(),
                )
            })
            .collect();
        let diff = monitored_norm(&grid, &times, &delta, config.p)?;
        let size = monitored_norm(&grid, &times, &next, config.p)?;
        if let Some(&prev) = differences.last() {
            let ratio = if prev > 0.0 { diff / prev } else { 0.0 };
            ratios.push(ratio);
            if ratio >= 1.0 {
                streak += 1;
                if streak >= 3 {
                    return Err(WaveError::NoContraction { ratios });
                }
            } else {
                streak = 0;
            }
        }
        differences.push(diff);
        current = next;
        if diff == 0.0 || diff <= tol * size {
            converged = true;
            break;
        }
    }

    let states = current
        .into_iter()
        .map(|(a, b)| WaveState::from_coeffs(grid, a, b))
        .collect::<Result<Vec<_>>>()?;
    Ok(PicardSolution {
        trajectory: Trajectory {
            times,
            states,
            fingerprint: config.fingerprint(),
            p: config.p,
            nonlinearity: config.nonlinearity,
            blow_up: None,
        },
        differences,
        ratios,
        iterations,
        converged,
    })
}

/// `max_k ‖u(t_k) - [free term + Duhamel integral](t_k)‖_{Ḣ^{s_p}}`, the
/// integral taken by the trapezoid rule over the trajectory's samples.
pub fn duhamel_residual(trajectory: &Trajectory, p: f64, g: &GFunction) -> Result<f64> {
    let sp = sp_exponent(p)?;
    let (first, grid) = match (trajectory.states.first(), trajectory.grid()) {
        (Some(s), Some(g)) => (s, *g),
        _ => return Err(WaveError::Precondition("empty trajectory".into())),
    };
    let forcing = Forcing {
        grid,
        p,
        g,
        sign: trajectory.nonlinearity.sign(),
    };
    let t0 = trajectory.times[0];
    let forces = trajectory
        .states
        .iter()
        .zip(&trajectory.times)
        .map(|(s, &t)| {
            forcing
                .coeffs(s.u.coeffs())
                .map_err(|reason| WaveError::BlowUpSuspected { time: t, reason })
        })
        .collect::<Result<Vec<_>>>()?;
    let duhamel = duhamel_sweep(&grid, &trajectory.times, &forces);
    let mut worst: f64 = 0.0;
    for ((state, &t), (da, _)) in trajectory.states.iter().zip(&trajectory.times).zip(&duhamel) {
        let free = linear_flow(first, t - t0);
        let resid: Vec<Complex64> = state
            .u
            .coeffs()
            .iter()
            .zip(free.u.coeffs())
            .zip(da)
            .map(|((u, f), d)| u - f - d)
            .collect();
        worst = worst.max(sobolev_of(&grid, &resid, sp));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::RadialField;

    fn grid() -> RadialGrid {
        RadialGrid::new(20.0, 256).unwrap()
    }

    fn bump(grid: RadialGrid, amp: f64) -> WaveState {
        let u = RadialField::from_fn(grid, |r| {
            amp * ((-(r - 3.0) * (r - 3.0)).exp() + (-(r + 3.0) * (r + 3.0)).exp())
        });
        let ut = RadialField::from_fn(grid, |r| 0.5 * amp * (-(r * r) / 2.0).exp());
        WaveState::new(u, ut).unwrap()
    }

    fn max_coeff_diff(x: &WaveState, y: &WaveState) -> f64 {
        x.u.coeffs()
            .iter()
            .zip(y.u.coeffs())
            .chain(x.ut.coeffs().iter().zip(y.ut.coeffs()))
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    fn config(grid: RadialGrid, dt: f64, dt_out: f64, horizon: f64) -> SolverConfig {
        SolverConfig {
            dt,
            dt_out,
            horizon,
            ..SolverConfig::new(5.0, GFunction::Constant(1.0), grid)
        }
    }

    #[test]
    fn linear_flow_identity_and_group_law() {
        let s = bump(grid(), 1.0);
        assert!(max_coeff_diff(&linear_flow(&s, 0.0), &s) == 0.0);
        let ab = linear_flow(&linear_flow(&s, 0.7), 1.9);
        let direct = linear_flow(&s, 2.6);
        assert!(max_coeff_diff(&ab, &direct) < 1e-12);
        let back = linear_flow(&linear_flow(&s, 3.3), -3.3);
        assert!(max_coeff_diff(&back, &s) < 1e-12);
    }

    #[test]
    fn eigenmode_oscillates_in_place() {
        let g = grid();
        let mode = RadialField::eigenmode(g, 1).unwrap();
        let s = WaveState::new(mode.clone(), RadialField::zeros(g)).unwrap();
        let k = g.wavenumber(0);
        for t in [0.3, 1.0, 7.5] {
            let u = linear_flow(&s, t).u;
            for (x, y) in u.values().iter().zip(mode.values()) {
                assert!((x - y * (k * t).cos()).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_state_stays_zero() {
        let g = grid();
        let z = WaveState::zeros(g);
        let s = step_strang(&z, 1e-2, 5.0, &GFunction::Log, Nonlinearity::Focusing).unwrap();
        assert!(max_coeff_diff(&s, &z) == 0.0);
        let ev = evolve(&z, &config(g, 1e-2, 0.1, 1.0)).unwrap();
        assert!(ev.trajectory.states.iter().all(|s| max_coeff_diff(s, &z) == 0.0));
    }

    #[test]
    fn strang_is_second_order() {
        let g = grid();
        let s = bump(g, 0.5);
        let gf = GFunction::Constant(1.0);
        let run = |dt: f64, steps: usize| {
            let mut x = s.clone();
            for _ in 0..steps {
                x = step_strang(&x, dt, 5.0, &gf, Nonlinearity::Defocusing).unwrap();
            }
            x
        };
        let coarse = run(0.04, 10);
        let mid = run(0.02, 20);
        let fine = run(0.01, 40);
        let ratio = max_coeff_diff(&coarse, &mid) / max_coeff_diff(&mid, &fine);
        assert!((ratio - 4.0).abs() < 0.4, "ratio {ratio}");
    }

    #[test]
    fn config_validation() {
        let g = grid();
        let ok = config(g, 1e-3, 1e-2, 1.0);
        ok.validate().unwrap();
        assert!(config(g, 1.0, 1.0, 1.0).validate().is_err());
        assert!(config(g, 1e-3, 1.5e-3, 1.0).validate().is_err());
        let mut bad_p = ok.clone();
        bad_p.p = 3.0;
        assert!(bad_p.validate().is_err());
        assert_eq!(ok.fingerprint(), ok.clone().fingerprint());
        let mut other = ok.clone();
        other.dt = 5e-4;
        assert_ne!(ok.fingerprint(), other.fingerprint());
    }

    #[test]
    fn linear_regime_reproduces_free_flow() {
        let g = grid();
        let s = bump(g, 2.0);
        let mut c = config(g, 1e-2, 0.1, 2.0);
        c.nonlinearity = Nonlinearity::Off;
        let ev = evolve(&s, &c).unwrap();
        assert_eq!(ev.trajectory.len(), 21);
        for (t, state) in ev.trajectory.times.iter().zip(&ev.trajectory.states) {
            assert!(max_coeff_diff(state, &linear_flow(&s, *t)) < 1e-10);
        }
        assert!(duhamel_residual(&ev.trajectory, 5.0, &c.g).unwrap() <= 1e-10);
    }

    #[test]
    fn small_bump_keeps_htilde_bounded() {
        let g = grid();
        let s = bump(g, 0.3);
        let ev = evolve(&s, &config(g, 1e-2, 0.1, 1.0)).unwrap();
        let h0 = s.htilde_total(5.0).unwrap();
        for st in &ev.trajectory.states {
            let h = st.htilde_total(5.0).unwrap();
            assert!(h <= 2.0 * h0 && h >= 0.5 * h0);
        }
        assert!(ev.trajectory.blow_up.is_none());
    }

    #[test]
    fn focusing_large_data_flags_blow_up() {
        let g = RadialGrid::new(10.0, 128).unwrap();
        let s = bump(g, 40.0);
        let mut c = config(g, 1e-3, 1e-2, 2.0);
        c.nonlinearity = Nonlinearity::Focusing;
        let ev = evolve(&s, &c).unwrap();
        let b = ev.trajectory.blow_up.clone().expect("blow-up expected");
        assert!(b.time < 2.0);
        assert!(ev.ledger.truncated());
        assert!(ev.trajectory.states.iter().all(WaveState::is_finite));
        assert_eq!(ev.ledger.len(), ev.trajectory.len());
    }

    #[test]
    fn checkpoint_round_trip_is_exact() {
        let g = grid();
        let ev = evolve(&bump(g, 0.7), &config(g, 1e-2, 0.1, 0.5)).unwrap();
        let text = ev.trajectory.to_json().unwrap();
        let back = Trajectory::from_json(&text).unwrap();
        assert_eq!(back.times, ev.trajectory.times);
        for (x, y) in back.states.iter().zip(&ev.trajectory.states) {
            assert_eq!(x.u.coeffs(), y.u.coeffs());
            assert_eq!(x.ut.coeffs(), y.ut.coeffs());
        }
        assert_eq!(back.fingerprint, ev.trajectory.fingerprint);
    }

    #[test]
    fn smallness_time_examples() {
        let g = grid();
        let c = config(g, 1e-2, 0.02, 4.0);
        let zero = smallness_time(&WaveState::zeros(g), 0.1, &c).unwrap();
        assert_eq!(zero.t_l, 4.0);
        let s = bump(g, 0.05);
        let full = smallness_time(&s, 0.1, &c).unwrap();
        assert!(!full.below_minimum && full.t_l < 4.0, "{full:?}");
        let half = smallness_time(&s.scale(0.5), 0.1, &c).unwrap();
        assert!(half.t_l >= full.t_l);
        assert!(full.s_norm <= 0.1 + 1e-12);
        let again = smallness_time(&s, 0.1, &c).unwrap();
        assert_eq!(again, full);
        let big = smallness_time(&s.scale(100.0), 0.1, &c).unwrap();
        assert!(big.below_minimum);
        assert!(smallness_time(&s, 0.0, &c).is_err());
    }

    #[test]
    fn picard_zero_data_is_immediate() {
        let g = grid();
        let c = config(g, 1e-2, 0.02, 1.0);
        let sol = picard_solve(&WaveState::zeros(g), 0.5, &c, 10, 1e-12).unwrap();
        assert!(sol.converged);
        assert_eq!(sol.iterations, 1);
    }

    #[test]
    fn picard_contracts_and_agrees_with_strang() {
        let g = grid();
        let s = bump(g, 0.5);
        let c = config(g, 1e-3, 5e-3, 1.0);
        let tl = smallness_time(&s, 0.1, &c).unwrap().t_l;
        let sol = picard_solve(&s, tl, &c, 40, 1e-12).unwrap();
        assert!(sol.converged);
        assert!(sol.ratios.iter().all(|&r| r <= 0.5), "{:?}", sol.ratios);
        let resid = duhamel_residual(&sol.trajectory, 5.0, &c.g).unwrap();
        let scale = s.u.sobolev_norm(1.0).unwrap();
        assert!(resid <= 1e-10 * scale.max(1.0), "{resid}");

        // another starting iterate reaches the same fixed point
        let zeros = vec![WaveState::zeros(g); sol.trajectory.len()];
        let other = picard_solve_from(&s, tl, &c, Some(&zeros), 60, 1e-12).unwrap();
        for (x, y) in other.trajectory.states.iter().zip(&sol.trajectory.states) {
            assert!(max_coeff_diff(x, y) <= 1e-9);
        }
    }

    #[test]
    fn picard_reports_no_contraction() {
        let g = RadialGrid::new(10.0, 128).unwrap();
        let s = bump(g, 30.0);
        let c = config(g, 1e-3, 0.05, 4.0);
        match picard_solve(&s, 3.0, &c, 50, 1e-12) {
            Err(WaveError::NoContraction { ratios }) => assert!(ratios.len() >= 3),
            Err(WaveError::BlowUpSuspected { .. }) => {}
            other => panic!("expected failure, got {:?}", other.map(|s| s.ratios)),
        }
    }

    #[test]
    fn duhamel_residual_is_second_order_in_sampling() {
        let g = grid();
        let s = bump(g, 0.8);
        let resid = |dt_out: f64| {
            let ev = evolve(&s, &config(g, 1e-3, dt_out, 1.0)).unwrap();
            duhamel_residual(&ev.trajectory, 5.0, &GFunction::Constant(1.0)).unwrap()
        };
        let r1 = resid(0.04);
        let r2 = resid(0.02);
        let ratio = r1 / r2;
        assert!(ratio > 3.0 && ratio < 5.0, "{r1} {r2} {ratio}");
    }

    #[test]
    fn finite_speed_of_propagation() {
        let g = RadialGrid::new(20.0, 512).unwrap();
        let r0 = 4.0;
        // smooth compactly supported bump on r < r0
        let prof = |r: f64| {
            let x = r / r0;
            if x < 1.0 {
                (1.0 - x * x).powi(8)
            } else {
                0.0
            }
        };
        let s = WaveState::new(RadialField::from_fn(g, prof), RadialField::zeros(g)).unwrap();
        let t = 3.0;
        let mut c = config(g, 1e-2, 0.5, t);
        c.p = 5.0;
        let ev = evolve(&s, &c).unwrap();
        let (_, last) = ev.trajectory.last().unwrap();
        let sup = last.u.values().iter().map(|v| v.norm()).fold(0.0, f64::max);
        let cut = r0 + t + 2.0 * g.spacing();
        for (r, v) in g.nodes().iter().zip(last.u.values()) {
            if *r > cut {
                assert!(v.norm() <= 1e-8 * sup, "r = {r}: {}", v.norm());
            }
        }
    }

    mod props {
        use super::*;
        use crate::data::random_smooth;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(24))]

            #[test]
            fn free_flow_is_a_group(seed in any::<u64>(), s in -5.0f64..5.0, t in -5.0f64..5.0) {
                let state = random_smooth(grid(), seed, 1.0);
                let two = linear_flow(&linear_flow(&state, s), t);
                let one = linear_flow(&state, s + t);
                let scale = state.pair_norm(1.0).unwrap();
                prop_assert!(two.sub(&one).unwrap().pair_norm(1.0).unwrap() <= 1e-12 * scale);
            }

            #[test]
            fn free_flow_preserves_pair_norms(seed in any::<u64>(), t in -20.0f64..20.0, s in -1.0f64..2.5) {
                let state = random_smooth(grid(), seed, 1.0);
                let before = state.pair_norm(s).unwrap();
                let after = linear_flow(&state, t).pair_norm(s).unwrap();
                prop_assert!((before - after).abs() <= 1e-12 * before);
            }

            #[test]
            fn strang_without_nonlinearity_is_the_free_flow(seed in any::<u64>(), dt in 1e-4f64..2e-2) {
                let state = random_smooth(grid(), seed, 1.0);
                let stepped = step_strang(&state, dt, 5.0, &GFunction::Constant(1.0), Nonlinearity::Off).unwrap();
                let exact = linear_flow(&state, dt);
                let scale = state.pair_norm(1.0).unwrap();
                prop_assert!(stepped.sub(&exact).unwrap().pair_norm(1.0).unwrap() <= 1e-13 * scale);
            }
        }
    }
}
