//! Fixtures shared by the criterion benchmarks.

use amorph_core::imgproc::{BinaryImage, GrayImage};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn noise_image(side: usize, seed: u64) -> GrayImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let px = (0..side * side).map(|_| rng.gen::<f64>()).collect();
    GrayImage::new(side, side, px).expect("uniform samples are in [0, 1)")
}

pub fn random_view(density: f64, seed: u64) -> BinaryImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bits = (0..625).map(|_| u8::from(rng.gen_bool(density))).collect();
    BinaryImage::new(25, 25, bits).expect("bits are 0 or 1")
}
