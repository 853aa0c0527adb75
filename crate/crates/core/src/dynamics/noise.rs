//! Counter-based Gaussian noise.
//!
//! The four standard normals consumed by step `n` of trajectory `i` are a pure function of
//! `(seed, i, n)`: ChaCha8 keyed by the seed, stream number `i`, and stream position
//! `8 n` 32-bit words. Trajectories can therefore be scheduled on any number of threads
//! without changing a single bit of the result.

use rand_chacha::ChaCha8Rng;
use rand_core::{Rng, SeedableRng};

/// 32-bit words consumed per step (four `u64` draws).
const WORDS_PER_STEP: u128 = 8;

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Uniform on the open interval (0, 1) from the top 53 bits.
#[inline]
fn open_unit(x: u64) -> f64 {
    ((x >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

/// Box-Muller pair from two uniform words.
#[inline]
fn gaussian_pair(u: u64, v: u64) -> (f64, f64) {
    let r = (-2.0 * open_unit(u).ln()).sqrt();
    let (s, c) = (TWO_PI * open_unit(v)).sin_cos();
    (r * c, r * s)
}

#[inline]
fn four_normals(rng: &mut ChaCha8Rng) -> [f64; 4] {
    let w = [rng.next_u64(), rng.next_u64(), rng.next_u64(), rng.next_u64()];
    let (n0, n1) = gaussian_pair(w[0], w[1]);
    let (n2, n3) = gaussian_pair(w[2], w[3]);
    [n0, n1, n2, n3]
}

fn keyed(seed: u64, trajectory: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trajectory);
    rng
}

/// Random-access form: the noise of step `step` of trajectory `trajectory`.
pub fn noise_at(seed: u64, trajectory: u64, step: u64) -> [f64; 4] {
    let mut rng = keyed(seed, trajectory);
    rng.set_word_pos(u128::from(step) * WORDS_PER_STEP);
    four_normals(&mut rng)
}

/// Sequential reader over one trajectory's noise, identical to [`noise_at`] step by step.
#[derive(Clone)]
pub struct NoiseStream {
    rng: ChaCha8Rng,
}

impl NoiseStream {
    pub fn new(seed: u64, trajectory: u64) -> Self {
        Self {
            rng: keyed(seed, trajectory),
        }
    }

    #[inline]
    pub fn next_step(&mut self) -> [f64; 4] {
        four_normals(&mut self.rng)
    }
}
