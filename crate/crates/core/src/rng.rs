//! Seeded random streams and Poisson sampling.
//!
//! All randomness comes from ChaCha12 seeded with the user's 64-bit seed.
//! Independent tasks use distinct ChaCha stream ids, so task `i` sees the same
//! numbers no matter which thread runs it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use statrs::function::gamma::ln_gamma;

/// Recorded in every run record; bump when any sampler changes its output.
pub const GENERATOR_VERSION: &str = "chacha12/rand_chacha-0.3;streams=task-index;sampler-v1";

pub type StreamRng = ChaCha12Rng;

/// Stream-id namespaces, so different experiment phases never share a stream.
pub mod domain {
    pub const GRAPH: u64 = 0;
    pub const W_BATCH: u64 = 1;
    pub const W_BASELINE: u64 = 2;
    pub const OPTIMIZER: u64 = 3;
    pub const MISC: u64 = 4;
}

/// Generator for task `index` within `domain` under `seed`.
pub fn stream(seed: u64, domain: u64, index: u64) -> StreamRng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    // 8 bits of domain, 56 bits of task index.
    rng.set_stream((domain << 56) | (index & ((1u64 << 56) - 1)));
    rng
}

/// Mean below which [`poisson`] samples by sequential inversion.
pub const POISSON_INVERSION_LIMIT: f64 = 10.0;

/// Draws a Poisson(`lambda`) variate.
///
/// Below [`POISSON_INVERSION_LIMIT`] this is exact inversion of the CDF. Above,
/// it is Hörmann's PTRS transformed rejection with squeeze, which is also exact
/// up to floating-point evaluation of the acceptance test.
pub fn poisson<R: Rng + ?Sized>(rng: &mut R, lambda: f64) -> u64 {
    if lambda <= 0.0 {
        return 0;
    }
    if lambda < POISSON_INVERSION_LIMIT {
        let u: f64 = rng.gen();
        let mut p = (-lambda).exp();
        let mut cdf = p;
        let mut x = 0u64;
        while u > cdf {
            x += 1;
            p *= lambda / x as f64;
            cdf += p;
            // Guard against cdf stalling just below u in the far tail.
            if p < f64::MIN_POSITIVE {
                break;
            }
        }
        return x;
    }
    ptrs(rng, lambda)
}

fn ptrs<R: Rng + ?Sized>(rng: &mut R, lambda: f64) -> u64 {
    let slam = lambda.sqrt();
    let loglam = lambda.ln();
    let b = 0.931 + 2.53 * slam;
    let a = -0.059 + 0.02483 * b;
    let inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    let vr = 0.9277 - 3.6224 / (b - 2.0);
    loop {
        let u: f64 = rng.gen::<f64>() - 0.5;
        let v: f64 = rng.gen();
        let us = 0.5 - u.abs();
        let k = ((2.0 * a / us + b) * u + lambda + 0.43).floor();
        if us >= 0.07 && v <= vr {
            return k as u64;
        }
        if k < 0.0 || (us < 0.013 && v > us) {
            continue;
        }
        let lhs = v.ln() + inv_alpha.ln() - (a / (us * us) + b).ln();
        let rhs = -lambda + k * loglam - ln_gamma(k + 1.0);
        if lhs <= rhs {
            return k as u64;
        }
    }
}
