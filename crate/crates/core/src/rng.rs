//! Seeded, splittable randomness.
//!
//! All stochastic code in the crate draws from an [`RngStream`]. A stream is
//! identified by `(seed, stream index)`; Monte-Carlo trial `i` runs on
//! `RngStream::new(seed).substream(i)`, which makes every estimate bitwise
//! reproducible independently of how trials are scheduled.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use crate::scalar::Scalar;

/// Deterministic random stream (ChaCha12 keyed by `(seed, stream)`).
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    rng: ChaCha12Rng,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            rng: ChaCha12Rng::seed_from_u64(seed),
        }
    }

    /// Independent stream derived from the same seed. Substreams with
    /// different indices never overlap.
    pub fn substream(&self, index: u64) -> Self {
        let mut rng = ChaCha12Rng::seed_from_u64(self.seed);
        // Stream 0 is the root stream itself; shift derived streams away.
        rng.set_stream(index.wrapping_add(1));
        Self {
            seed: self.seed,
            rng,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Standard normal draw. Sampling happens in `f64` so the underlying
    /// stream advances identically for every scalar type.
    pub fn standard_normal<T: Scalar>(&mut self) -> T {
        T::from_f64(self.rng.sample::<f64, _>(StandardNormal))
    }

    /// Uniform draw in `[0, 1)`.
    pub fn uniform<T: Scalar>(&mut self) -> T {
        T::from_f64(self.rng.gen::<f64>())
    }

    /// Uniform integer in `0..n`.
    pub fn below(&mut self, n: usize) -> usize {
        self.rng.gen_range(0..n)
    }

    pub fn bit(&mut self) -> u8 {
        self.rng.gen_range(0..2u8)
    }

    /// Complex draw with independent standard normal parts.
    pub fn complex_normal<T: Scalar>(&mut self) -> Complex<T> {
        let re = self.standard_normal::<T>();
        let im = self.standard_normal::<T>();
        Complex::new(re, im)
    }

    /// Samples an index from a probability vector (entries may carry small
    /// negative numerical noise; they are clamped to zero). If accumulated
    /// rounding leaves the draw past the last bin, the last positive entry
    /// wins.
    pub fn sample_index<T: Scalar>(&mut self, probs: &[T]) -> usize {
        let u: T = self.uniform();
        let total: T = probs.iter().map(|p| p.max(T::zero())).sum();
        let mut acc = T::zero();
        let mut last_positive = 0;
        for (i, p) in probs.iter().enumerate() {
            if *p > T::zero() {
                last_positive = i;
            }
            acc += p.max(T::zero()) / total;
            if u < acc {
                return i;
            }
        }
        last_positive
    }
}
