use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::schemes::params::{CholeskyFactor, NoiseCovariance};
use crate::Scalar;

/// Reproducible Gaussian source.
///
/// A ChaCha8 generator keyed by `seed` and positioned on stream `counter`.
/// Chain `k` of a run uses `NoiseStream::new(seed, k)`, so any chain can be
/// replayed in isolation. Coupled chains draw from one stream and share
/// every draw.
#[derive(Debug, Clone)]
pub struct NoiseStream {
    seed: u64,
    counter: u64,
    rng: ChaCha8Rng,
}

impl NoiseStream {
    pub fn new(seed: u64, counter: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(counter);
        Self { seed, counter, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn counter(&self) -> u64 {
        self.counter
    }

    #[inline]
    pub fn normal<T: Scalar>(&mut self) -> T {
        T::standard_normal(&mut self.rng)
    }

    #[inline]
    pub fn uniform<T: Scalar>(&mut self) -> T {
        T::unit_uniform(&mut self.rng)
    }

    pub fn fill_normal<T: Scalar>(&mut self, out: &mut [T]) {
        for o in out {
            *o = self.normal();
        }
    }

    /// Per coordinate: `(Ξ, Ξ′) = (l₁₁g₁, l₂₁g₁ + l₂₂g₂)` with `g₁, g₂` drawn in that order.
    pub(crate) fn fill_pair<T: Scalar>(&mut self, f: &CholeskyFactor<T>, xi: &mut [T], xi_prime: &mut [T]) {
        for (a, b) in xi.iter_mut().zip(xi_prime.iter_mut()) {
            let g1: T = self.normal();
            let g2: T = self.normal();
            *a = f.l11 * g1;
            *b = f.l21 * g1 + f.l22 * g2;
        }
    }

    pub fn rng_mut(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }
}

/// Draws `d` independent centered pairs with per-coordinate covariance `cov`.
pub fn sample_noise_pair<T: Scalar>(
    stream: &mut NoiseStream,
    cov: &NoiseCovariance<T>,
    dim: usize,
) -> Result<(Vec<T>, Vec<T>)> {
    let f = cov.cholesky()?;
    let mut xi = vec![T::zero(); dim];
    let mut xi_prime = vec![T::zero(); dim];
    stream.fill_pair(&f, &mut xi, &mut xi_prime);
    Ok((xi, xi_prime))
}
