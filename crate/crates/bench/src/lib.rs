//! Fixtures shared by the benchmarks.

use msqg_wn::{sample_draw, NoiseField, Vec2};

pub const SEED: u64 = 7;

/// White-noise draw on the torus of side 8.
pub fn white_noise(cutoff: usize) -> NoiseField {
    sample_draw(8.0, cutoff, SEED, 0).expect("valid draw")
}

/// `count` points spread over the cell of side `side` by a Weyl sequence.
pub fn cell_points(side: f64, count: usize) -> Vec<Vec2> {
    let (a, b) = (0.754_877_666_246_692_7, 0.569_840_290_998_053_3);
    (1..=count)
        .map(|i| {
            let i = i as f64;
            Vec2::new(((a * i).fract() - 0.5) * side, ((b * i).fract() - 0.5) * side)
        })
        .collect()
}
