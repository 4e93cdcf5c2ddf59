//! Numerical laboratory for the radially symmetric semilinear wave equation
//! `∂_tt u - Δu = -|u|^{p-1} u g(|u|)` on a ball in ℝ³.
//!
//! * [`spectral`]: sine-basis transforms of `r u(r)`, fractional derivatives, norms.
//! * [`gfun`]: nonlinearity factors `g`, condition checks, and the rung ladder.
//! * [`propagator`]: exact linear flow, Strang stepping, Picard fixed point.
//! * [`norms`]: space-time norm ledger, admissibility, partitions, Strichartz probe.
//! * [`analysis`]: energy, scaling, blow-up, scattering and perturbation diagnostics.
//! * [`data`]: named initial-data profiles.

pub mod analysis;
pub mod data;
pub mod error;
pub mod gfun;
pub mod norms;
pub mod propagator;
pub mod quad;
pub mod spectral;

pub use error::{Result, WaveError};
pub use gfun::{GFunction, GLadder};
pub use norms::{AdmissiblePair, Interval, NormLedger};
pub use propagator::{Nonlinearity, SolverConfig, Trajectory};
pub use rustfft::num_complex::Complex64;
pub use spectral::{RadialField, RadialGrid, WaveState};
