//! Benchmark fixtures.

use wave_lab_core::data::random_smooth;
use wave_lab_core::{RadialGrid, WaveState};

pub const SIZES: [usize; 3] = [256, 1024, 4096];

pub fn fixture(modes: usize) -> (RadialGrid, WaveState) {
    let grid = RadialGrid::new(20.0, modes).expect("valid grid");
    let state = random_smooth(grid, 11, 0.5);
    (grid, state)
}
