//! Mixed space-time norm accounting.
//!
//! A [`NormLedger`] stores instantaneous spatial norms at sample times; every
//! `L_t^q L_x^r` quantity over a subinterval is then a one-dimensional time
//! integral of the stored column. Time integrals interpolate the integrand
//! `‖u(t)‖^q` linearly between samples (trapezoid rule), which makes the
//! q-th power exactly additive under interval splitting.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Result, WaveError};
use crate::gfun::{sp_exponent, GFunction};
use crate::propagator::linear_flow;
use crate::spectral::WaveState;

/// Default small exponent for the `(∞-, 3+)` pair `((3+ε)/ε, 3+ε)`.
pub const DEFAULT_EPS: f64 = 0.1;
/// Numeric realisation of "much greater than" in the rung-count condition.
pub const DEFAULT_MARGIN: f64 = 10.0;

const EXPONENT_TOL: f64 = 1e-12;

/// Closed time interval `[start, end]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub start: f64,
    pub end: f64,
}

impl Interval {
    pub fn new(start: f64, end: f64) -> Self {
        Self { start, end }
    }

    pub fn length(&self) -> f64 {
        self.end - self.start
    }

    pub fn contains(&self, other: &Interval) -> bool {
        self.start <= other.start && other.end <= self.end
    }
}

/// `true` iff `(q, r)` is `m`-wave admissible: `q ∈ (2, ∞]`, `r ∈ [2, ∞]`
/// and `1/q + 3/r = 3/2 - m`.
pub fn admissible_check(q: f64, r: f64, m: f64) -> bool {
    if q.is_nan() || r.is_nan() || !m.is_finite() {
        return false;
    }
    if !(q > 2.0) || !(r >= 2.0) {
        return false;
    }
    let inv = |x: f64| if x.is_infinite() { 0.0 } else { 1.0 / x };
    (inv(q) + 3.0 * inv(r) - (1.5 - m)).abs() <= EXPONENT_TOL
}

/// An admissible exponent triple.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdmissiblePair {
    pub q: f64,
    pub r: f64,
    pub m: f64,
}

impl AdmissiblePair {
    pub fn new(q: f64, r: f64, m: f64) -> Result<Self> {
        if !admissible_check(q, r, m) {
            return Err(WaveError::Inadmissible { q, r, m });
        }
        Ok(Self { q, r, m })
    }

    /// `(4, 4)` at `m = 1/2`, the `W` norm.
    pub fn w() -> Self {
        Self { q: 4.0, r: 4.0, m: 0.5 }
    }

    /// `(2(p-1), 6(p-1)/(2p-3))` at `m = 1/2`.
    pub fn s_embedding(p: f64) -> Result<Self> {
        Self::new(2.0 * (p - 1.0), 6.0 * (p - 1.0) / (2.0 * p - 3.0), 0.5)
    }

    /// `((3+ε)/ε, 3+ε)` at `m = 1/2`.
    pub fn near_endpoint(eps: f64) -> Result<Self> {
        Self::new((3.0 + eps) / eps, 3.0 + eps, 0.5)
    }
}

/// One tracked instantaneous quantity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Channel {
    /// `‖u‖_{L_x^ρ}`
    Lebesgue { rho: f64 },
    /// `‖D^α u‖_{L_x^ρ}`
    FracLebesgue { alpha: f64, rho: f64 },
    /// `‖u‖_{Ḣ^s}`
    Sobolev { s: f64 },
    /// `‖∂_t u‖_{Ḣ^s}`
    VelocitySobolev { s: f64 },
}

fn close(a: f64, b: f64) -> bool {
    if a.is_infinite() || b.is_infinite() {
        return a == b;
    }
    a == b || (a - b).abs() <= EXPONENT_TOL * a.abs().max(b.abs())
}

impl Channel {
    /// Canonical CSV column name.
    pub fn name(&self) -> String {
        match self {
            Self::Lebesgue { rho } => format!("Lx_norm_r={rho}"),
            Self::FracLebesgue { alpha, rho } => format!("DLx_norm_a={alpha:?}_r={rho}"),
            Self::Sobolev { s } => format!("Hdot_s={s:?}"),
            Self::VelocitySobolev { s } => format!("Hdot_ut_s={s:?}"),
        }
    }

    fn matches(&self, other: &Channel) -> bool {
        match (self, other) {
            (Self::Lebesgue { rho: a }, Self::Lebesgue { rho: b }) => close(*a, *b),
            (Self::FracLebesgue { alpha: a, rho: r }, Self::FracLebesgue { alpha: b, rho: s }) => {
                close(*a, *b) && close(*r, *s)
            }
            (Self::Sobolev { s: a }, Self::Sobolev { s: b }) => close(*a, *b),
            (Self::VelocitySobolev { s: a }, Self::VelocitySobolev { s: b }) => close(*a, *b),
            _ => false,
        }
    }

    fn measure(&self, state: &WaveState) -> Result<f64> {
        match *self {
            Self::Lebesgue { rho } => state.u.lebesgue_norm(rho),
            Self::FracLebesgue { alpha, rho } => {
                state.u.fractional_derivative(alpha)?.lebesgue_norm(rho)
            }
            Self::Sobolev { s } => state.u.sobolev_norm(s),
            Self::VelocitySobolev { s } => state.ut.sobolev_norm(s),
        }
    }
}

/// Time series of instantaneous norms.
#[derive(Debug, Clone, PartialEq)]
pub struct NormLedger {
    p: f64,
    eps: f64,
    channels: Vec<Channel>,
    times: Vec<f64>,
    columns: Vec<Vec<f64>>,
    truncated: bool,
}

impl NormLedger {
    /// Ledger with the standard channel set for power `p`.
    pub fn new(p: f64, eps: f64) -> Result<Self> {
        let sp = sp_exponent(p)?;
        if !(eps > 0.0 && eps < 1.0) {
            return Err(WaveError::Domain {
                name: "eps",
                value: eps,
                range: "(0, 1)",
            });
        }
        let mut channels = Vec::new();
        for rho in [2.0 * (p - 1.0), 4.0, 3.0 + eps, 2.0, f64::INFINITY] {
            let c = Channel::Lebesgue { rho };
            if !channels.iter().any(|x: &Channel| x.matches(&c)) {
                channels.push(c);
            }
        }
        channels.extend([
            Channel::FracLebesgue { alpha: sp - 0.5, rho: 4.0 },
            Channel::FracLebesgue { alpha: 1.5, rho: 4.0 },
            Channel::FracLebesgue { alpha: sp - 0.5, rho: 3.0 + eps },
            Channel::Sobolev { s: sp },
            Channel::Sobolev { s: 2.0 },
            Channel::VelocitySobolev { s: sp - 1.0 },
            Channel::VelocitySobolev { s: 1.0 },
        ]);
        Ok(Self::with_channels(p, eps, channels))
    }

    /// Empty ledger tracking exactly `channels`.
    pub fn with_channels(p: f64, eps: f64, channels: Vec<Channel>) -> Self {
        let columns = vec![Vec::new(); channels.len()];
        Self {
            p,
            eps,
            channels,
            times: Vec::new(),
            columns,
            truncated: false,
        }
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn channels(&self) -> &[Channel] {
        &self.channels
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Set when a non-finite sample cut the ledger short.
    pub fn truncated(&self) -> bool {
        self.truncated
    }

    pub fn mark_truncated(&mut self) {
        self.truncated = true;
    }

    /// Full time range covered by the samples.
    pub fn span(&self) -> Option<Interval> {
        Some(Interval::new(*self.times.first()?, *self.times.last()?))
    }

    /// Measures every channel on `state`. A non-finite value truncates the
    /// ledger instead of being stored; the return value says whether the
    /// sample was kept.
    pub fn record(&mut self, t: f64, state: &WaveState) -> Result<bool> {
        let row = self
            .channels
            .iter()
            .map(|c| c.measure(state))
            .collect::<Result<Vec<f64>>>()?;
        self.push_row(t, &row)
    }

    /// Appends a row of precomputed values (one per channel).
    pub fn push_row(&mut self, t: f64, row: &[f64]) -> Result<bool> {
        if row.len() != self.channels.len() {
            return Err(WaveError::LengthMismatch {
                expected: self.channels.len(),
                got: row.len(),
            });
        }
        if let Some(&last) = self.times.last() {
            if !(t > last) {
                return Err(WaveError::Precondition(format!(
                    "ledger times must increase: {t} after {last}"
                )));
            }
        }
        if self.truncated || row.iter().any(|v| !v.is_finite() || *v < 0.0) {
            self.truncated = true;
            return Ok(false);
        }
        self.times.push(t);
        for (col, v) in self.columns.iter_mut().zip(row) {
            col.push(*v);
        }
        Ok(true)
    }

    pub fn column(&self, channel: &Channel) -> Result<&[f64]> {
        self.channels
            .iter()
            .position(|c| c.matches(channel))
            .map(|i| self.columns[i].as_slice())
            .ok_or_else(|| WaveError::MissingChannel(channel.name()))
    }

    fn check_interval(&self, interval: &Interval) -> Result<()> {
        let span = self.span().ok_or_else(|| {
            WaveError::Precondition("ledger has no samples".to_string())
        })?;
        let slack = 1e-9 * span.length().max(1.0);
        if interval.start < span.start - slack
            || interval.end > span.end + slack
            || interval.start > interval.end
        {
            return Err(WaveError::IntervalOutOfRange {
                start: interval.start,
                end: interval.end,
                first: span.start,
                last: span.end,
            });
        }
        Ok(())
    }

    /// `‖c‖_{L_t^q(I)}` of a stored channel (`q = ∞` is the sample maximum).
    pub fn time_norm(&self, channel: &Channel, q: f64, interval: &Interval) -> Result<f64> {
        self.check_interval(interval)?;
        let col = self.column(channel)?;
        Ok(time_norm(&self.times, col, q, interval))
    }

    /// CSV export: a `t` column then one column per channel, every value
    /// written with 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t");
        for c in &self.channels {
            out.push(',');
            out.push_str(&c.name());
        }
        out.push('\n');
        for (k, t) in self.times.iter().enumerate() {
            let _ = write!(out, "{t:.16e}");
            for col in &self.columns {
                let _ = write!(out, ",{:.16e}", col[k]);
            }
            out.push('\n');
        }
        out
    }

    /// Reads back the values of a CSV export into a ledger with the given
    /// channel layout.
    pub fn from_csv(text: &str, template: &NormLedger) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines.next().unwrap_or_default();
        let expected = template.to_csv();
        if header != expected.lines().next().unwrap_or_default() {
            return Err(WaveError::Precondition("CSV header does not match ledger layout".into()));
        }
        let mut ledger = Self::with_channels(template.p, template.eps, template.channels.clone());
        for line in lines.filter(|l| !l.is_empty()) {
            let fields = line
                .split(',')
                .map(|f| {
                    f.parse::<f64>()
                        .map_err(|e| WaveError::Precondition(format!("bad CSV number {f}: {e}")))
                })
                .collect::<Result<Vec<f64>>>()?;
            ledger.push_row(fields[0], &fields[1..])?;
        }
        Ok(ledger)
    }
}

fn interp(times: &[f64], vals: &[f64], t: f64) -> f64 {
    match times.iter().position(|&s| s >= t) {
        None => *vals.last().unwrap_or(&0.0),
        Some(0) => vals[0],
        Some(k) => {
            let (t0, t1) = (times[k - 1], times[k]);
            let w = (t - t0) / (t1 - t0);
            vals[k - 1] * (1.0 - w) + vals[k] * w
        }
    }
}

/// `∫_I f(t) dt` of the piecewise-linear interpolant of samples `f`.
pub(crate) fn linear_integral(times: &[f64], f: &[f64], interval: &Interval) -> f64 {
    let (a, b) = (interval.start, interval.end);
    if times.len() < 2 || b <= a {
        return 0.0;
    }
    let mut total = 0.0;
    for k in 1..times.len() {
        let (t0, t1) = (times[k - 1], times[k]);
        let lo = t0.max(a);
        let hi = t1.min(b);
        if hi <= lo {
            continue;
        }
        let f_lo = interp(&times[k - 1..=k], &f[k - 1..=k], lo);
        let f_hi = interp(&times[k - 1..=k], &f[k - 1..=k], hi);
        total += 0.5 * (hi - lo) * (f_lo + f_hi);
    }
    total
}

/// `(∫_I v(t)^q dt)^{1/q}` from samples, `q = ∞` giving the maximum over
/// samples in `I` (and the interpolated endpoint values).
pub fn time_norm(times: &[f64], vals: &[f64], q: f64, interval: &Interval) -> f64 {
    if q.is_infinite() {
        let inner = times
            .iter()
            .zip(vals)
            .filter(|(t, _)| **t >= interval.start && **t <= interval.end)
            .map(|(_, v)| *v);
        let ends = [
            interp(times, vals, interval.start),
            interp(times, vals, interval.end),
        ];
        return inner.chain(ends).fold(0.0, f64::max);
    }
    let powered: Vec<f64> = vals.iter().map(|v| v.powf(q)).collect();
    linear_integral(times, &powered, interval).powf(1.0 / q)
}

/// `‖u‖_{L_t^q L_x^r(I)}` for `r` in the ledger's active set.
pub fn spacetime_norm(ledger: &NormLedger, q: f64, r: f64, interval: &Interval) -> Result<f64> {
    ledger.time_norm(&Channel::Lebesgue { rho: r }, q, interval)
}

/// `‖u‖_{S(I)} = ‖u‖_{L_t^{2(p-1)} L_x^{2(p-1)}(I)}`.
pub fn s_norm(ledger: &NormLedger, interval: &Interval) -> Result<f64> {
    let q = 2.0 * (ledger.p - 1.0);
    spacetime_norm(ledger, q, q, interval)
}

fn sup_of_sum(ledger: &NormLedger, a: &Channel, b: &Channel, interval: &Interval) -> Result<f64> {
    ledger.check_interval(interval)?;
    let (ca, cb) = (ledger.column(a)?, ledger.column(b)?);
    let sum: Vec<f64> = ca.iter().zip(cb).map(|(x, y)| x + y).collect();
    Ok(time_norm(&ledger.times, &sum, f64::INFINITY, interval))
}

/// `sup_{t∈I} ‖u(t)‖_{H̃²}` over samples.
pub fn sup_htilde2(ledger: &NormLedger, interval: &Interval) -> Result<f64> {
    let sp = sp_exponent(ledger.p)?;
    sup_of_sum(ledger, &Channel::Sobolev { s: 2.0 }, &Channel::Sobolev { s: sp }, interval)
}

/// `sup_{t∈I} ‖∂_t u(t)‖_{H̃¹}` over samples.
pub fn sup_htilde1_velocity(ledger: &NormLedger, interval: &Interval) -> Result<f64> {
    let sp = sp_exponent(ledger.p)?;
    sup_of_sum(
        ledger,
        &Channel::VelocitySobolev { s: 1.0 },
        &Channel::VelocitySobolev { s: sp - 1.0 },
        interval,
    )
}

/// `Q(I, u)`: the two `W` norms of `D^{s_p - 1/2} u` and `D^{3/2} u` plus the
/// sample suprema of `‖u‖_{H̃²}` and `‖∂_t u‖_{H̃¹}`.
pub fn q_quantity(ledger: &NormLedger, interval: &Interval) -> Result<f64> {
    let sp = sp_exponent(ledger.p)?;
    let w1 = ledger.time_norm(&Channel::FracLebesgue { alpha: sp - 0.5, rho: 4.0 }, 4.0, interval)?;
    let w2 = ledger.time_norm(&Channel::FracLebesgue { alpha: 1.5, rho: 4.0 }, 4.0, interval)?;
    Ok(w1 + w2 + sup_htilde2(ledger, interval)? + sup_htilde1_velocity(ledger, interval)?)
}

/// The composite `X(I)` norm with the `((3+ε)/ε, 3+ε)` pair for its first term.
pub fn x_norm(ledger: &NormLedger, interval: &Interval, eps: f64) -> Result<f64> {
    if !close(eps, ledger.eps) {
        return Err(WaveError::Precondition(format!(
            "eps {eps} does not match ledger eps {}",
            ledger.eps
        )));
    }
    let sp = sp_exponent(ledger.p)?;
    let alpha = sp - 0.5;
    let near = ledger.time_norm(
        &Channel::FracLebesgue { alpha, rho: 3.0 + eps },
        (3.0 + eps) / eps,
        interval,
    )?;
    let w = ledger.time_norm(&Channel::FracLebesgue { alpha, rho: 4.0 }, 4.0, interval)?;
    let s = s_norm(ledger, interval)?;
    let hs = ledger.time_norm(&Channel::Sobolev { s: sp }, f64::INFINITY, interval)?;
    let hv = ledger.time_norm(&Channel::VelocitySobolev { s: sp - 1.0 }, f64::INFINITY, interval)?;
    Ok(near + w + s + hs + hv)
}

/// Constants behind a threshold `η / g^{1/(p-1)}((2C)^N A)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundConstants {
    pub a: f64,
    pub c: f64,
    pub eta: f64,
    pub rung_count: usize,
    /// `(2C)^N A`
    pub bound: f64,
}

/// Decomposition of an interval into pieces of prescribed `S` norm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionReport {
    pub interval: Interval,
    pub threshold: f64,
    pub subintervals: Vec<Interval>,
    pub s_norms: Vec<f64>,
    pub constants: Option<BoundConstants>,
}

/// Greedy left-to-right chop of `I` into pieces whose `S` norm equals
/// `threshold` (the last piece may fall short).
pub fn partition_by_threshold(
    ledger: &NormLedger,
    interval: &Interval,
    threshold: f64,
) -> Result<PartitionReport> {
    if !(threshold > 0.0) {
        return Err(WaveError::Domain {
            name: "threshold",
            value: threshold,
            range: "(0, inf)",
        });
    }
    ledger.check_interval(interval)?;
    let q = 2.0 * (ledger.p - 1.0);
    let col = ledger.column(&Channel::Lebesgue { rho: q })?;
    let density: Vec<f64> = col.iter().map(|v| v.powf(q)).collect();
    let times = &ledger.times;
    let piece = threshold.powf(q);

    for k in 1..times.len() {
        let step = Interval::new(times[k - 1].max(interval.start), times[k].min(interval.end));
        if step.end > step.start && linear_integral(times, &density, &step) > piece {
            return Err(WaveError::ResolutionTooCoarse {
                start: times[k - 1],
                end: times[k],
            });
        }
    }

    let mass = |a: f64, b: f64| linear_integral(times, &density, &Interval::new(a, b));
    let mut subintervals = Vec::new();
    let mut left = interval.start;
    while mass(left, interval.end) > piece {
        // bisection for mass(left, t) = piece
        let (mut lo, mut hi) = (left, interval.end);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mass(left, mid) < piece {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-14 * interval.length().max(1.0) {
                break;
            }
        }
        subintervals.push(Interval::new(left, hi));
        left = hi;
    }
    subintervals.push(Interval::new(left, interval.end));
    let s_norms = subintervals
        .iter()
        .map(|iv| mass(iv.start, iv.end).powf(1.0 / q))
        .collect();
    Ok(PartitionReport {
        interval: *interval,
        threshold,
        subintervals,
        s_norms,
        constants: None,
    })
}

/// Largest `ln y` the rung-count search will integrate to.
const MAX_LOG_ARGUMENT: f64 = 700.0;

/// Smallest `N ≥ 1` with `∫_{2CA}^{(2C)^N A} dy/(y g²) ≥ margin · s^{2(p-1)}`.
pub fn solve_rung_count(
    a: f64,
    c: f64,
    g: &GFunction,
    s_norm: f64,
    p: f64,
    margin: f64,
) -> Result<usize> {
    if !(a > 0.0) || !(2.0 * c > 1.0) || !(margin > 1.0) || !(s_norm >= 0.0) {
        return Err(WaveError::Precondition(format!(
            "solve_rung_count needs A > 0, 2C > 1, margin > 1, s >= 0 (A = {a}, C = {c}, margin = {margin}, s = {s_norm})"
        )));
    }
    let target = margin * s_norm.powf(2.0 * (p - 1.0));
    let log_step = (2.0 * c).ln();
    if let Some(k) = g.as_constant() {
        return Ok(1 + (target * k * k / log_step).ceil() as usize);
    }
    let mut acc = 0.0;
    let mut n = 1usize;
    let mut lower = a.ln() + log_step;
    while acc < target {
        let upper = lower + log_step;
        if upper > MAX_LOG_ARGUMENT {
            return Err(WaveError::NoRungCount {
                reached: acc,
                target,
            });
        }
        acc += crate::gfun::log_integral(g, lower, upper, 1e-10);
        lower = upper;
        n += 1;
    }
    Ok(n)
}

/// Outcome of the a-priori bound check on one interval.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AprioriReport {
    pub interval: Interval,
    pub initial_norm: f64,
    pub a: f64,
    pub c: f64,
    pub eta: f64,
    pub s_norm: f64,
    pub rung_count: usize,
    /// `(2C)^N A`
    pub bound: f64,
    /// Sample supremum of `‖u‖_{H̃²} + ‖∂_t u‖_{H̃¹}`.
    pub sup_norm: f64,
    pub precondition_violated: bool,
    pub holds: bool,
    /// Sample maxima stand in for continuous-time suprema at this spacing.
    pub sample_spacing: f64,
    pub partition: Option<PartitionReport>,
}

/// Checks `‖(u, ∂_t u)‖_{L_t^∞ H̃² × L_t^∞ H̃¹} ≤ (2C)^N A` on `I`, with `N`
/// from [`solve_rung_count`] at the default margin.
pub fn apriori_bound_check(
    ledger: &NormLedger,
    interval: &Interval,
    a: f64,
    c: f64,
    g: &GFunction,
    eta: f64,
    p: f64,
) -> Result<AprioriReport> {
    if !(c > 1.0) {
        return Err(WaveError::Precondition(format!("C must exceed 1, got {c}")));
    }
    ledger.check_interval(interval)?;
    let sp = sp_exponent(p)?;
    let norm_at = |k: usize| -> Result<f64> {
        Ok(ledger.column(&Channel::Sobolev { s: 2.0 })?[k]
            + ledger.column(&Channel::Sobolev { s: sp })?[k]
            + ledger.column(&Channel::VelocitySobolev { s: 1.0 })?[k]
            + ledger.column(&Channel::VelocitySobolev { s: sp - 1.0 })?[k])
    };
    let first = ledger
        .times
        .iter()
        .position(|&t| t >= interval.start - 1e-12)
        .unwrap_or(0);
    let initial_norm = norm_at(first)?;
    let s = s_norm(ledger, interval)?;
    let rung_count = solve_rung_count(a, c, g, s, p, DEFAULT_MARGIN)?;
    let bound = (2.0 * c).powi(rung_count as i32) * a;
    let mut sup_norm: f64 = 0.0;
    for (k, t) in ledger.times.iter().enumerate() {
        if *t >= interval.start - 1e-12 && *t <= interval.end + 1e-12 {
            sup_norm = sup_norm.max(norm_at(k)?);
        }
    }
    let precondition_violated = a < initial_norm * (1.0 - 1e-12);
    let threshold = eta / g.value(bound).powf(1.0 / (p - 1.0));
    let partition = partition_by_threshold(ledger, interval, threshold)
        .ok()
        .map(|mut rep| {
            rep.constants = Some(BoundConstants {
                a,
                c,
                eta,
                rung_count,
                bound,
            });
            rep
        });
    let spacing = if ledger.times.len() > 1 {
        ledger.times[1] - ledger.times[0]
    } else {
        0.0
    };
    Ok(AprioriReport {
        interval: *interval,
        initial_norm,
        a,
        c,
        eta,
        s_norm: s,
        rung_count,
        bound,
        sup_norm,
        precondition_violated,
        holds: !precondition_violated && sup_norm <= bound,
        sample_spacing: spacing,
        partition,
    })
}

/// Empirical homogeneous Strichartz constants over an ensemble.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StrichartzReport {
    pub pair: AdmissiblePair,
    pub horizon: f64,
    pub ratios: Vec<f64>,
    pub max_ratio: f64,
}

/// For each nonzero datum, `‖u‖_{L_t^q L_x^r([0,T])} / ‖(u_0, u_1)‖_{Ḣ^m × Ḣ^{m-1}}`
/// under the free flow sampled at `samples + 1` uniform times; the data norm
/// is the Euclidean pair norm.
pub fn strichartz_probe(
    data: &[WaveState],
    pair: &AdmissiblePair,
    horizon: f64,
    samples: usize,
) -> Result<StrichartzReport> {
    if !admissible_check(pair.q, pair.r, pair.m) {
        return Err(WaveError::Inadmissible {
            q: pair.q,
            r: pair.r,
            m: pair.m,
        });
    }
    if !(horizon > 0.0) || samples == 0 {
        return Err(WaveError::Precondition("strichartz_probe needs T > 0 and samples > 0".into()));
    }
    let times: Vec<f64> = (0..=samples).map(|k| horizon * k as f64 / samples as f64).collect();
    let mut ratios = Vec::new();
    for datum in data {
        let denom = datum.pair_norm(pair.m)?;
        if denom == 0.0 {
            continue;
        }
        let vals = times
            .iter()
            .map(|&t| linear_flow(datum, t).u.lebesgue_norm(pair.r))
            .collect::<Result<Vec<f64>>>()?;
        let num = time_norm(&times, &vals, pair.q, &Interval::new(0.0, horizon));
        ratios.push(num / denom);
    }
    let max_ratio = ratios.iter().copied().fold(0.0, f64::max);
    Ok(StrichartzReport {
        pair: *pair,
        horizon,
        ratios,
        max_ratio,
    })
}
