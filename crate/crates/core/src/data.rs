//! Named initial-data profiles.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, WaveError};
use crate::spectral::{RadialField, RadialGrid, WaveState};

/// A reproducible recipe for `(u_0, u_1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "profile", rename_all = "kebab-case")]
pub enum DataSpec {
    GaussianBump { amplitude: f64, width: f64, center: f64 },
    Eigenmode { n: usize },
    RandomSmooth { seed: u64, scale: f64 },
}

impl DataSpec {
    pub fn build(&self, grid: RadialGrid) -> Result<WaveState> {
        match *self {
            Self::GaussianBump {
                amplitude,
                width,
                center,
            } => gaussian_bump(grid, amplitude, width, center),
            Self::Eigenmode { n } => eigenmode(grid, n),
            Self::RandomSmooth { seed, scale } => Ok(random_smooth(grid, seed, scale)),
        }
    }
}

/// Even extension of a Gaussian shell, smooth at the origin.
fn shell(r: f64, width: f64, center: f64) -> f64 {
    let a = (r - center) / width;
    let b = (r + center) / width;
    (-a * a).exp() + (-b * b).exp()
}

/// `u_0 = A [e^{-(r-c)²/w²} + e^{-(r+c)²/w²}]`, `u_1 = 0`.
pub fn gaussian_bump(grid: RadialGrid, amplitude: f64, width: f64, center: f64) -> Result<WaveState> {
    if !(width > 0.0) || !amplitude.is_finite() || !(center >= 0.0) {
        return Err(WaveError::Config(format!(
            "gaussian-bump needs width > 0, center >= 0 (width = {width}, center = {center})"
        )));
    }
    let u = RadialField::from_fn(grid, |r| amplitude * shell(r, width, center));
    Ok(WaveState {
        u,
        ut: RadialField::zeros(grid),
    })
}

/// `u_0 = sin(k_n r)/r`, `u_1 = 0`.
pub fn eigenmode(grid: RadialGrid, n: usize) -> Result<WaveState> {
    Ok(WaveState {
        u: RadialField::eigenmode(grid, n)?,
        ut: RadialField::zeros(grid),
    })
}

/// Each component a sum of three shells with amplitudes in `[-scale, scale]`,
/// centres in `[0, R/4]` and widths in `[0.5, 2]`, drawn from ChaCha8 seeded
/// with `seed`.
pub fn random_smooth(grid: RadialGrid, seed: u64, scale: f64) -> WaveState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let component = |rng: &mut ChaCha8Rng| {
        let terms: Vec<(f64, f64, f64)> = (0..3)
            .map(|_| {
                (
                    scale * rng.gen_range(-1.0..=1.0),
                    rng.gen_range(0.5..=2.0),
                    rng.gen_range(0.0..=0.25 * grid.radius()),
                )
            })
            .collect();
        RadialField::from_fn(grid, |r| {
            terms.iter().map(|&(a, w, c)| a * shell(r, w, c)).sum()
        })
    };
    let u = component(&mut rng);
    let ut = component(&mut rng);
    WaveState { u, ut }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_smooth_is_reproducible() {
        let g = RadialGrid::new(20.0, 256).unwrap();
        let a = random_smooth(g, 7, 0.3);
        let b = random_smooth(g, 7, 0.3);
        let c = random_smooth(g, 8, 0.3);
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn bump_is_flat_at_origin() {
        let g = RadialGrid::new(20.0, 1024).unwrap();
        let s = gaussian_bump(g, 1.0, 1.0, 3.0).unwrap();
        let v = s.u.values();
        let slope = (v[1].re - v[0].re) / g.spacing();
        assert!(slope.abs() < 1e-3);
        assert!(gaussian_bump(g, 1.0, 0.0, 3.0).is_err());
    }

    #[test]
    fn spec_serializes_with_profile_tag() {
        let spec = DataSpec::RandomSmooth { seed: 3, scale: 0.1 };
        let text = serde_json::to_string(&spec).unwrap();
        assert!(text.contains("\"profile\":\"random-smooth\""));
        assert_eq!(serde_json::from_str::<DataSpec>(&text).unwrap(), spec);
    }
}
