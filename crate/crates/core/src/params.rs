//! Geometric parameters: explicit or drawn from a seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::combinatorics::LensSpec;
use crate::geometry::GeomParams;

/// Seeded draws reject `α` unless every volume sine factor exceeds this.
pub const SAMPLING_FLOOR: f64 = 0.05;

/// The `k`-independent part of [`GeomParams`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapeParams {
    pub alpha: f64,
    pub rho: f64,
    pub sigma: f64,
    pub s: f64,
}

impl ShapeParams {
    pub fn with_k(&self, k: usize) -> GeomParams {
        GeomParams { alpha: self.alpha, rho: self.rho, sigma: self.sigma, s: self.s, k }
    }

    /// `α ~ U(0, π)` with rejection, `ρ, σ, s` log-uniform on `[0.5, 2]`.
    ///
    /// `ks` are the representation indices that will be realized; `α` is
    /// redrawn until it is generic for all of them.
    pub fn sample(spec: &LensSpec, ks: &[usize], seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (lo, hi) = (libm::log(0.5), libm::log(2.0));
        let rho = libm::exp(rng.gen_range(lo..=hi));
        let sigma = libm::exp(rng.gen_range(lo..=hi));
        let s = libm::exp(rng.gen_range(lo..=hi));
        loop {
            let alpha = rng.gen_range(0.0..core::f64::consts::PI);
            let shape = ShapeParams { alpha, rho, sigma, s };
            if alpha > 0.0 && ks.iter().all(|&k| shape.with_k(k).volume_sine_floor(spec) > SAMPLING_FLOOR) {
                return shape;
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ParamSource {
    Explicit(ShapeParams),
    Seed(u64),
}

impl Default for ParamSource {
    fn default() -> Self {
        ParamSource::Seed(0)
    }
}

impl ParamSource {
    pub fn resolve(&self, spec: &LensSpec, ks: &[usize]) -> ShapeParams {
        match *self {
            ParamSource::Explicit(shape) => shape,
            ParamSource::Seed(seed) => ShapeParams::sample(spec, ks, seed),
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match *self {
            ParamSource::Seed(s) => Some(s),
            ParamSource::Explicit(_) => None,
        }
    }
}
