//! Slowly growing nonlinearity factors `g` and the rung-by-rung ladder
//! `g_0 = 1, g_1, g_2, …` whose limit grows without bound.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Result, WaveError};
use crate::quad;

/// Schema version written into ladder documents.
pub const LADDER_SCHEMA_VERSION: u32 = 1;

/// Default threshold multiplier `A`.
pub const DEFAULT_LADDER_A: f64 = 10.0;

/// `s_p = 3/2 - 2/(p-1)`, the scaling-critical Sobolev exponent.
pub fn sp_exponent(p: f64) -> Result<f64> {
    if !(p > 3.0 && p.is_finite()) {
        return Err(WaveError::Domain {
            name: "p",
            value: p,
            range: "(3, inf)",
        });
    }
    Ok(1.5 - 2.0 / (p - 1.0))
}

/// The nonlinearity factor `g` in `|u|^{p-1} u g(|u|)`.
#[derive(Debug, Clone)]
pub enum GFunction {
    Constant(f64),
    /// `log(2 + x²)`
    Log,
    /// `log^c log(10 + x²)`
    LogLog { power: f64 },
    /// Rung `rung` of a ladder (`rung = 0` is `g_0 ≡ 1`).
    Ladder { ladder: Arc<GLadder>, rung: usize },
}

impl PartialEq for GFunction {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Self::Constant(a), Self::Constant(b)) => a == b,
            (Self::Log, Self::Log) => true,
            (Self::LogLog { power: a }, Self::LogLog { power: b }) => a == b,
            (Self::Ladder { ladder: a, rung: i }, Self::Ladder { ladder: b, rung: j }) => {
                i == j && (Arc::ptr_eq(a, b) || **a == **b)
            }
            _ => false,
        }
    }
}

impl GFunction {
    pub fn ladder(ladder: GLadder, rung: usize) -> Result<Self> {
        if rung > ladder.rung_count() {
            return Err(WaveError::Precondition(format!(
                "rung {rung} requested but ladder has {} rungs",
                ladder.rung_count()
            )));
        }
        Ok(Self::Ladder {
            ladder: Arc::new(ladder),
            rung,
        })
    }

    /// `(g, g', g'')` at `x ≥ 0`.
    pub fn eval_all(&self, x: f64) -> (f64, f64, f64) {
        let x = x.abs();
        match self {
            Self::Constant(c) => (*c, 0.0, 0.0),
            Self::Log => {
                let y = 2.0 + x * x;
                (y.ln(), 2.0 * x / y, (4.0 - 2.0 * x * x) / (y * y))
            }
            Self::LogLog { power: c } => {
                let y = 10.0 + x * x;
                let l = y.ln();
                let m = l.ln();
                let q = 2.0 * x / (y * l);
                let dq = (2.0 * y * l - 4.0 * x * x * l - 4.0 * x * x) / (y * y * l * l);
                let g = m.powf(*c);
                let g1 = c * m.powf(c - 1.0) * q;
                let g2 = c * (c - 1.0) * m.powf(c - 2.0) * q * q + c * m.powf(c - 1.0) * dq;
                (g, g1, g2)
            }
            Self::Ladder { ladder, rung } => ladder.rung_value(*rung, x),
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        match self {
            Self::Constant(c) => *c,
            _ => self.eval_all(x).0,
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        self.eval_all(x).1
    }

    pub fn second_derivative(&self, x: f64) -> f64 {
        self.eval_all(x).2
    }

    pub fn as_constant(&self) -> Option<f64> {
        match self {
            Self::Constant(c) => Some(*c),
            Self::Ladder { rung: 0, .. } => Some(1.0),
            _ => None,
        }
    }

    /// Points where `g` is only finitely smooth (bridge joints of a ladder).
    pub fn joints(&self) -> Vec<f64> {
        match self {
            Self::Ladder { ladder, rung } => ladder.rungs[..*rung]
                .iter()
                .flat_map(|r| [r.bridge_start(ladder.a), r.cp])
                .collect(),
            _ => Vec::new(),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Self::Constant(c) => format!("constant({c:?})"),
            Self::Log => "log(2+x^2)".to_string(),
            Self::LogLog { power } => format!("log^{power:?} log(10+x^2)"),
            Self::Ladder { ladder, rung } => format!("ladder(A={:?}, rung={rung})", ladder.a),
        }
    }
}

/// Verdict on `∫_1^∞ dy / (y g²(y))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DivergenceVerdict {
    Diverges,
    Converges,
    Inconclusive,
}

/// Ratio of partial integrals at the two largest cutoffs above which the
/// integral counts as still growing.
pub const DIVERGENCE_RATIO: f64 = 1.05;

/// Numeric evidence for the growth conditions on `g`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConditionReport {
    pub x_max: f64,
    /// `sup x g'(x)` over the probe grid.
    pub sup_x_dg: f64,
    pub dg_nonnegative: bool,
    /// `sup x² |g''(x)|` over the probe grid.
    pub sup_x2_d2g: f64,
    /// `(X, ∫_1^X dy/(y g²))` at `X = x_max^{1/3}, x_max^{2/3}, x_max`.
    pub partial_integrals: Vec<(f64, f64)>,
    pub growth_ratio: f64,
    /// Local exponent `β` in `g²(y) ~ log^β y` at `x_max`; the comparison
    /// integrand `1/(y log^β y)` converges iff `β > 1`.
    pub tail_log_exponent: f64,
    pub verdict: DivergenceVerdict,
}

/// Log-spaced probe points on `[0, x_max]`, with joints added.
fn probe_grid(x_max: f64, per_decade: usize, extra: &[f64]) -> Vec<f64> {
    let lo = -4.0f64;
    let hi = x_max.log10();
    let count = ((hi - lo) * per_decade as f64).ceil() as usize + 1;
    let mut pts: Vec<f64> = std::iter::once(0.0)
        .chain((0..=count).map(|i| 10f64.powf(lo + (hi - lo) * i as f64 / count as f64)))
        .chain(extra.iter().copied().filter(|&x| x <= x_max))
        .collect();
    pts.sort_by(|a, b| a.total_cmp(b));
    pts.dedup();
    pts
}

/// Probes conditions (slow growth via `x g'`, `g'' = O(1/x²)`, and the
/// divergence of `∫ dy/(y g²)`) on `[0, x_max]`. `tol` is the slack allowed
/// in the sign check of `g'` and the relative quadrature tolerance.
pub fn validate_conditions(g: &GFunction, x_max: f64, tol: f64) -> Result<ConditionReport> {
    if !(x_max >= 10.0 && x_max.is_finite()) {
        return Err(WaveError::Domain {
            name: "x_max",
            value: x_max,
            range: "[10, inf)",
        });
    }
    let joints = g.joints();
    let mut sup_x_dg: f64 = 0.0;
    let mut sup_x2_d2g: f64 = 0.0;
    let mut nonneg = true;
    for x in probe_grid(x_max, 64, &joints) {
        let (gv, d1, d2) = g.eval_all(x);
        if !(gv.is_finite() && d1.is_finite() && d2.is_finite()) || gv <= 0.0 {
            return Err(WaveError::Precondition(format!(
                "g evaluation failed or non-positive at x = {x}"
            )));
        }
        if d1 < -tol {
            nonneg = false;
        }
        sup_x_dg = sup_x_dg.max(x * d1);
        sup_x2_d2g = sup_x2_d2g.max(x * x * d2.abs());
    }

    let log_max = x_max.ln();
    let cutoffs = [log_max / 3.0, 2.0 * log_max / 3.0, log_max].map(f64::exp);
    let rel = tol.clamp(1e-12, 1e-8);
    let mut partial_integrals = Vec::with_capacity(3);
    let mut acc = 0.0;
    let mut lower = 1.0;
    for &x in &cutoffs {
        acc += rung_integral_unchecked(g, lower, x, rel);
        partial_integrals.push((x, acc));
        lower = x;
    }
    let growth_ratio = partial_integrals[2].1 / partial_integrals[1].1;
    let (gv, d1, _) = g.eval_all(x_max);
    let tail_log_exponent = 2.0 * log_max * x_max * d1 / gv;
    let verdict = if growth_ratio >= DIVERGENCE_RATIO && tail_log_exponent <= 1.0 {
        DivergenceVerdict::Diverges
    } else if growth_ratio < DIVERGENCE_RATIO && tail_log_exponent > 1.0 {
        DivergenceVerdict::Converges
    } else {
        DivergenceVerdict::Inconclusive
    };
    Ok(ConditionReport {
        x_max,
        sup_x_dg,
        dg_nonnegative: nonneg,
        sup_x2_d2g,
        partial_integrals,
        growth_ratio,
        tail_log_exponent,
        verdict,
    })
}

/// `∫ dt / g²(e^t)` over `[ln_a, ln_b]`, i.e. `∫_a^b dy / (y g²(y))` with no
/// restriction on `a`.
pub(crate) fn log_integral(g: &GFunction, ln_a: f64, ln_b: f64, rel_tol: f64) -> f64 {
    if let Some(c) = g.as_constant() {
        return (ln_b - ln_a) / (c * c);
    }
    let breaks: Vec<f64> = g
        .joints()
        .into_iter()
        .map(f64::ln)
        .filter(|&t| t > ln_a && t < ln_b)
        .collect();
    quad::integrate_with_breaks(
        |t| {
            let v = g.value(t.exp());
            1.0 / (v * v)
        },
        ln_a,
        ln_b,
        &breaks,
        rel_tol,
        0.0,
    )
}

fn rung_integral_unchecked(g: &GFunction, a: f64, b: f64, rel_tol: f64) -> f64 {
    // y = e^t turns dy/(y g²) into dt/g²(e^t)
    let breaks: Vec<f64> = g
        .joints()
        .into_iter()
        .filter(|&x| x > a && x < b)
        .map(f64::ln)
        .collect();
    if let Some(c) = g.as_constant() {
        return (b / a).ln() / (c * c);
    }
    quad::integrate_with_breaks(
        |t| {
            let v = g.value(t.exp());
            1.0 / (v * v)
        },
        a.ln(),
        b.ln(),
        &breaks,
        rel_tol,
        0.0,
    )
}

/// `∫_a^b dy / (y g²(y))` to relative tolerance `1e-8`.
pub fn rung_integral(g: &GFunction, a: f64, b: f64) -> Result<f64> {
    if !(a >= 1.0 && a < b && b.is_finite()) {
        return Err(WaveError::Domain {
            name: "integration bounds",
            value: b - a,
            range: "1 <= a < b",
        });
    }
    Ok(rung_integral_unchecked(g, a, b, 1e-10))
}

/// One rung of the ladder. Field names are those of the ladder document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rung {
    pub i: usize,
    /// `C_{i-1}`.
    #[serde(rename = "C_prev")]
    pub c_prev: f64,
    /// `C'_i`, where the plateau `g_i = i + 1` starts.
    #[serde(rename = "Cp_i")]
    pub cp: f64,
    /// Bridge length in `log x`.
    #[serde(rename = "L")]
    pub log_length: f64,
}

impl Rung {
    /// Where the bridge leaves `g_{i-1}`: `A C_{i-1}`, or `1` for the first rung.
    pub fn bridge_start(&self, a: f64) -> f64 {
        if self.i == 1 {
            1.0
        } else {
            a * self.c_prev
        }
    }
}

/// Quintic smoothstep `6θ⁵ - 15θ⁴ + 10θ³` and its first two derivatives.
fn smoothstep(theta: f64) -> (f64, f64, f64) {
    let t = theta.clamp(0.0, 1.0);
    let t2 = t * t;
    (
        t2 * t * (10.0 - 15.0 * t + 6.0 * t2),
        30.0 * t2 * (1.0 - t) * (1.0 - t),
        60.0 * t * (1.0 - t) * (1.0 - 2.0 * t),
    )
}

/// Bridge log-length for rung `i`: `max(4, i (i+1)²)`.
pub fn bridge_log_length(i: usize) -> f64 {
    let i = i as f64;
    (i * (i + 1.0) * (i + 1.0)).max(4.0)
}

#[derive(Serialize, Deserialize)]
struct LadderDocument {
    version: u32,
    #[serde(rename = "A")]
    a: f64,
    rungs: Vec<Rung>,
}

/// The sequence `g_0 ≡ 1, g_1, …, g_n` with thresholds `C_{i-1}`, `C'_i`.
///
/// `g_i` equals `g_{i-1}` below the bridge start, equals `i + 1` from `C'_i`
/// on, and in between rises as `i + σ(θ)` with `σ` the quintic smoothstep in
/// `θ = log(x / start) / L`, so every joint is `C²`.
#[derive(Debug, Clone, PartialEq)]
pub struct GLadder {
    a: f64,
    rungs: Vec<Rung>,
}

impl GLadder {
    pub fn new(a: f64) -> Result<Self> {
        if !(a > 1.0 && a.is_finite()) {
            return Err(WaveError::Construction(format!("A must exceed 1, got {a}")));
        }
        Ok(Self {
            a,
            rungs: Vec::new(),
        })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn rungs(&self) -> &[Rung] {
        &self.rungs
    }

    pub fn rung_count(&self) -> usize {
        self.rungs.len()
    }

    /// `C'_i` (with `C'_0 = 0`).
    pub fn plateau_start(&self, i: usize) -> f64 {
        if i == 0 {
            0.0
        } else {
            self.rungs[i - 1].cp
        }
    }

    /// Appends rung `i = rung_count() + 1` given `C_{i-1}`.
    pub fn build_rung(&self, c_prev: f64) -> Result<Self> {
        let i = self.rungs.len() + 1;
        if !c_prev.is_finite() {
            return Err(WaveError::Construction(format!("C_{} must be finite", i - 1)));
        }
        let start = if i == 1 {
            if c_prev != 0.0 {
                return Err(WaveError::Construction(format!(
                    "C_0 = 0 is fixed, got {c_prev}"
                )));
            }
            1.0
        } else {
            if c_prev < (i - 1) as f64 {
                return Err(WaveError::Construction(format!(
                    "C_{} >= {} violated: C_{} = {c_prev}",
                    i - 1,
                    i - 1,
                    i - 1
                )));
            }
            let cp_prev = self.plateau_start(i - 1);
            if cp_prev >= self.a * c_prev {
                return Err(WaveError::Construction(format!(
                    "C'_{} < A C_{} violated: {cp_prev} >= {} * {c_prev}",
                    i - 1,
                    i - 1,
                    self.a
                )));
            }
            self.a * c_prev
        };
        let log_length = bridge_log_length(i);
        let cp = start * log_length.exp();
        if !cp.is_finite() {
            return Err(WaveError::Construction(format!(
                "C'_{i} overflows double precision (start {start}, log-length {log_length})"
            )));
        }
        let mut rungs = self.rungs.clone();
        rungs.push(Rung {
            i,
            c_prev,
            cp,
            log_length,
        });
        Ok(Self { a: self.a, rungs })
    }

    /// `(g_i, g_i', g_i'')` at `x`.
    pub fn rung_value(&self, i: usize, x: f64) -> (f64, f64, f64) {
        for rung in self.rungs[..i.min(self.rungs.len())].iter().rev() {
            if x >= rung.cp {
                return ((rung.i + 1) as f64, 0.0, 0.0);
            }
            let start = rung.bridge_start(self.a);
            if x > start {
                let l = rung.log_length;
                let theta = (x / start).ln() / l;
                let (s, ds, d2s) = smoothstep(theta);
                let g = rung.i as f64 + s;
                let g1 = ds / (l * x);
                let g2 = (d2s / (l * l) - ds / l) / (x * x);
                return (g, g1, g2);
            }
        }
        (1.0, 0.0, 0.0)
    }

    /// `g̃(x) = lim g_i(x)`, evaluated with the first rung whose plateau
    /// starts beyond `x`.
    pub fn ladder_eval(&self, x: f64) -> Result<f64> {
        let x = x.abs();
        self.rungs
            .iter()
            .find(|r| r.cp > x)
            .map(|r| self.rung_value(r.i, x).0)
            .ok_or(WaveError::NeedsMoreRungs { x })
    }

    /// `sup_x |g_i(x) - (i+1)| x^{(p-1)/2 - 0.01}` over a log grid with
    /// `per_decade` points per decade on `[1e-6, C'_i]`. Overflows to infinity
    /// from rung 6 on; see [`GLadder::log_h_bound_probe`].
    pub fn h_bound_probe(&self, i: usize, p: f64, per_decade: usize) -> Result<f64> {
        Ok(self.log_h_bound_probe(i, p, per_decade)?.exp())
    }

    /// Natural log of [`GLadder::h_bound_probe`], finite for every buildable rung.
    pub fn log_h_bound_probe(&self, i: usize, p: f64, per_decade: usize) -> Result<f64> {
        if i == 0 || i > self.rungs.len() {
            return Err(WaveError::Precondition(format!("rung {i} not built")));
        }
        let expo = (p - 1.0) / 2.0 - 0.01;
        let cp = self.plateau_start(i);
        let lo = -6.0f64;
        let hi = cp.log10();
        let count = ((hi - lo) * per_decade as f64).ceil() as usize;
        let target = (i + 1) as f64;
        Ok((0..=count)
            .map(|k| 10f64.powf(lo + (hi - lo) * k as f64 / count as f64))
            .map(|x| {
                let h = (self.rung_value(i, x).0 - target).abs();
                if h == 0.0 {
                    f64::NEG_INFINITY
                } else {
                    h.ln() + expo * x.ln()
                }
            })
            .fold(f64::NEG_INFINITY, f64::max))
    }

    /// Checks the structural invariants of every built rung.
    pub fn verify(&self) -> Result<()> {
        let fail = |msg: String| Err(WaveError::Construction(msg));
        for (idx, r) in self.rungs.iter().enumerate() {
            let i = idx + 1;
            if r.i != i {
                return fail(format!("rung {idx} carries index {}", r.i));
            }
            if i == 1 && r.c_prev != 0.0 {
                return fail("C_0 must be 0".into());
            }
            if i > 1 && r.c_prev < (i - 1) as f64 {
                return fail(format!("C_{} >= {} violated", i - 1, i - 1));
            }
            if !(self.a * r.c_prev < r.cp) {
                return fail(format!("A C_{} < C'_{i} violated", i - 1));
            }
            if let Some(next) = self.rungs.get(idx + 1) {
                if !(r.cp < self.a * next.c_prev) {
                    return fail(format!("C'_{i} < A C_{i} violated"));
                }
            }
            let start = r.bridge_start(self.a);
            let expected = start * r.log_length.exp();
            if r.cp != expected || r.log_length != bridge_log_length(i) {
                return fail(format!("rung {i} bridge parameters inconsistent"));
            }
            let (g_start, _, _) = self.rung_value(i, start);
            let (g_end, _, _) = self.rung_value(i, r.cp);
            if g_start != i as f64 || g_end != (i + 1) as f64 {
                return fail(format!("rung {i} bridge endpoints {g_start}, {g_end}"));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = LadderDocument {
            version: LADDER_SCHEMA_VERSION,
            a: self.a,
            rungs: self.rungs.clone(),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: LadderDocument = serde_json::from_str(text)?;
        if doc.version != LADDER_SCHEMA_VERSION {
            return Err(WaveError::Construction(format!(
                "unsupported ladder document version {}",
                doc.version
            )));
        }
        let ladder = Self {
            a: doc.a,
            rungs: doc.rungs,
        };
        GLadder::new(ladder.a)?;
        ladder.verify()?;
        Ok(ladder)
    }
}

/// `C_i` per the acquisition rule: `max(i, C'_i, supplied)`, where
/// `supplied` is a user value or a measured sup of `Q`.
pub fn acquire_c(i: usize, cp_i: f64, supplied: Option<f64>) -> f64 {
    let floor = (i as f64).max(cp_i);
    match supplied {
        Some(c) if c > floor => c,
        _ => {
            // strict C'_i < A C_i with A > 1 holds for C_i = C'_i
            floor
        }
    }
}
