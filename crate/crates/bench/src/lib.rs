//! Synthetic-image helpers shared by the benchmarks.

use cxrkit_core::ImageBuffer;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Reproducible pseudo-radiograph: a radial falloff with additive noise,
/// so histograms are neither flat nor degenerate.
pub fn synthetic_plane(seed: u64, size: u32) -> ImageBuffer {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = size as usize;
    let center = (n as f64 - 1.0) / 2.0;
    let mut data = Vec::with_capacity(n * n);
    for y in 0..n {
        for x in 0..n {
            let dx = (x as f64 - center) / center;
            let dy = (y as f64 - center) / center;
            let falloff = 200.0 * (1.0 - (dx * dx + dy * dy).sqrt()).max(0.0);
            let noise: f64 = rng.gen_range(-20.0..20.0);
            data.push((falloff + noise + 30.0).clamp(0.0, 255.0) as u8);
        }
    }
    ImageBuffer::new(size, size, 1, data).expect("valid geometry")
}

/// RGB variant of [`synthetic_plane`].
pub fn synthetic_rgb(seed: u64, size: u32) -> ImageBuffer {
    let planes = [
        synthetic_plane(seed, size),
        synthetic_plane(seed.wrapping_add(1), size),
        synthetic_plane(seed.wrapping_add(2), size),
    ];
    ImageBuffer::from_planes(&planes).expect("matching planes")
}
