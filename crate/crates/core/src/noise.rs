//! Counter-addressed Gaussian noise.
//!
//! Every particle owns one ChaCha8 stream selected by `(seed, particle)`;
//! step `k` always consumes the four 64-bit words at block position `k`, so
//! the deviates for `(seed, particle, step)` do not depend on how particles
//! are scheduled across threads.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use std::f64::consts::TAU;

/// 32-bit words consumed per step: four `u64` draws.
const WORDS_PER_STEP: u128 = 8;

/// Stream ids at or above this value are reserved for auxiliary samplers.
pub const AUX_STREAM_BASE: u64 = 1 << 63;

#[derive(Clone, Debug)]
pub struct NoiseStream {
    rng: ChaCha8Rng,
    next_step: u64,
}

impl NoiseStream {
    pub fn new(seed: u64, particle: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(particle);
        NoiseStream { rng, next_step: 0 }
    }

    /// Three independent standard normal deviates for `step`.
    pub fn deviates(&mut self, step: u64) -> [f64; 3] {
        if step != self.next_step {
            self.rng.set_word_pos(step as u128 * WORDS_PER_STEP);
        }
        self.next_step = step + 1;
        let w = [self.rng.next_u64(), self.rng.next_u64(), self.rng.next_u64(), self.rng.next_u64()];
        let (a, b) = box_muller(w[0], w[1]);
        let (c, _) = box_muller(w[2], w[3]);
        [a, b, c]
    }

    /// Four uniforms in `[0, 1)` for `step`, from the same counter layout.
    pub fn uniforms(&mut self, step: u64) -> [f64; 4] {
        if step != self.next_step {
            self.rng.set_word_pos(step as u128 * WORDS_PER_STEP);
        }
        self.next_step = step + 1;
        std::array::from_fn(|_| unit_open_right(self.rng.next_u64()))
    }
}

#[inline]
fn unit_open_right(w: u64) -> f64 {
    (w >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

#[inline]
fn box_muller(w1: u64, w2: u64) -> (f64, f64) {
    // (0, 1] so the logarithm stays finite
    let u1 = ((w1 >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64);
    let u2 = unit_open_right(w2);
    let r = (-2.0 * u1.ln()).sqrt();
    let (s, c) = (TAU * u2).sin_cos();
    (r * c, r * s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_access_matches_sequential() {
        let mut seq = NoiseStream::new(7, 3);
        let draws: Vec<[f64; 3]> = (0..50).map(|k| seq.deviates(k)).collect();
        let mut jump = NoiseStream::new(7, 3);
        assert_eq!(jump.deviates(37), draws[37]);
        assert_eq!(jump.deviates(5), draws[5]);
        assert_eq!(jump.deviates(6), draws[6]);
    }

    #[test]
    fn streams_differ_across_particles_and_seeds() {
        let a = NoiseStream::new(1, 0).deviates(0);
        let b = NoiseStream::new(1, 1).deviates(0);
        let c = NoiseStream::new(2, 0).deviates(0);
        assert_ne!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn deviates_have_unit_moments() {
        let n = 200_000u64;
        let (mut s1, mut s2, mut cross) = (0.0, 0.0, 0.0);
        let mut stream = NoiseStream::new(42, 0);
        for k in 0..n {
            let d = stream.deviates(k);
            s1 += d.iter().sum::<f64>();
            s2 += d.iter().map(|x| x * x).sum::<f64>();
            cross += d[0] * d[2];
        }
        let m = 3.0 * n as f64;
        assert!((s1 / m).abs() < 5.0 / m.sqrt());
        assert!((s2 / m - 1.0).abs() < 5.0 * (2.0 / m).sqrt());
        assert!((cross / n as f64).abs() < 5.0 / (n as f64).sqrt());
    }

    #[test]
    fn uniforms_in_unit_interval() {
        let mut s = NoiseStream::new(9, AUX_STREAM_BASE);
        for k in 0..1000 {
            assert!(s.uniforms(k).iter().all(|u| (0.0..1.0).contains(u)));
        }
    }
}
