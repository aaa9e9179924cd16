//! Seeded sampling of spectral parameters.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::C64;
use crate::reflection::ETA;

/// Minimum modulus of `sinh(2u+η)` and `sinh(u)` for an accepted sample.
pub const POLE_GUARD: f64 = 1e-3;

/// Draws `u` uniformly from `[0.2, 1.2] × [−0.4, 0.4]i`, rejecting points
/// near the poles of the transfer eigenvalue and the zeros of `sinh u`.
#[derive(Clone, Debug)]
pub struct SpectralSampler {
    rng: ChaCha8Rng,
}

impl SpectralSampler {
    pub fn new(seed: u64) -> Self {
        SpectralSampler { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    /// Independent stream for a labelled sub-task, stable across thread schedules.
    pub fn for_stream(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        SpectralSampler { rng }
    }

    pub fn sample(&mut self) -> C64 {
        loop {
            let u = C64::new(self.rng.random_range(0.2..1.2), self.rng.random_range(-0.4..0.4));
            if (2.0 * u + ETA).sinh().norm() >= POLE_GUARD && u.sinh().norm() >= POLE_GUARD {
                return u;
            }
        }
    }

    pub fn take(&mut self, count: usize) -> Vec<C64> {
        (0..count).map(|_| self.sample()).collect()
    }

    /// Uniform point in `[re_lo, re_hi] × [im_lo, im_hi]i`.
    pub fn uniform_box(&mut self, re: (f64, f64), im: (f64, f64)) -> C64 {
        C64::new(self.rng.random_range(re.0..re.1), self.rng.random_range(im.0..im.1))
    }
}
