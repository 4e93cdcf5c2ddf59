use thiserror::Error;

/// Errors raised by the laboratory's numerical operations.
#[derive(Debug, Error)]
pub enum WaveError {
    #[error("length mismatch: grid has {expected} nodes, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("{name} = {value} outside supported range {range}")]
    Domain {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("ratio undefined for a zero field")]
    ZeroField,

    #[error("ladder construction failed: {0}")]
    Construction(String),

    #[error("ladder has no rung whose plateau starts beyond x = {x}; build more rungs")]
    NeedsMoreRungs { x: f64 },

    #[error("ledger does not track channel {0}")]
    MissingChannel(String),

    #[error("interval [{start}, {end}] is not inside ledger range [{first}, {last}]")]
    IntervalOutOfRange {
        start: f64,
        end: f64,
        first: f64,
        last: f64,
    },

    #[error("resolution too coarse: ledger step [{start}, {end}] alone exceeds the threshold")]
    ResolutionTooCoarse { start: f64, end: f64 },

    #[error("no rung count: integral reaches only {reached} (target {target}) before the tail plateaus")]
    NoRungCount { reached: f64, target: f64 },

    #[error("Picard map is not contracting: ratios {ratios:?}")]
    NoContraction { ratios: Vec<f64> },

    #[error("blow-up suspected at t = {time}: {reason}")]
    BlowUpSuspected { time: f64, reason: String },

    #[error("geometry: {0}")]
    Geometry(String),

    #[error("pair (q = {q}, r = {r}) is not {m}-wave admissible")]
    Inadmissible { q: f64, r: f64, m: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("serialization: {0}")]
    Serialization(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, WaveError>;
