use rand::Rng;

use super::{Multigraph, ModelParams};
use crate::error::{Error, Result};
use crate::rng::{self, domain, StreamRng};

/// Whole-sample attempts allowed when rejecting non-simple multigraphs.
pub const SIMPLE_REJECTION_LIMIT: u64 = 1_000_000;

/// Draws from `Ĝ(n, m)`: `m` independent uniform pairs of distinct vertices.
pub fn sample_gnm_multi(params: &ModelParams, seed: u64) -> Result<Multigraph> {
    GnmSampler::new(params)?.multi(&mut rng::stream(seed, domain::GRAPH, 0))
}

/// Draws a uniform simple graph with exactly `m` edges.
pub fn sample_gnm_simple(params: &ModelParams, seed: u64) -> Result<Multigraph> {
    GnmSampler::new(params)?.simple(&mut rng::stream(seed, domain::GRAPH, 0))
}

/// Validated sampler for one parameter set, usable with any RNG stream.
#[derive(Clone, Debug)]
pub struct GnmSampler {
    n: usize,
    m: usize,
}

impl GnmSampler {
    pub fn new(params: &ModelParams) -> Result<Self> {
        if params.n < 2 {
            return Err(Error::invalid("sampling needs n >= 2"));
        }
        if params.n > u32::MAX as usize {
            return Err(Error::invalid("n exceeds u32 range"));
        }
        Ok(GnmSampler {
            n: params.n,
            m: params.m,
        })
    }

    pub fn multi(&self, rng: &mut StreamRng) -> Result<Multigraph> {
        let mut g = Multigraph::empty(self.n);
        for _ in 0..self.m {
            let u = rng.gen_range(0..self.n);
            let mut v = rng.gen_range(0..self.n - 1);
            if v >= u {
                v += 1;
            }
            g.push_edge(u, v)?;
        }
        Ok(g)
    }

    /// Rejection sampling: whole multigraph samples are redrawn until simple.
    pub fn simple(&self, rng: &mut StreamRng) -> Result<Multigraph> {
        let pairs = self.n as u64 * (self.n as u64 - 1) / 2;
        if self.m as u64 > pairs {
            return Err(Error::invalid(format!(
                "m = {} exceeds the {pairs} available pairs",
                self.m
            )));
        }
        for _ in 0..SIMPLE_REJECTION_LIMIT {
            let g = self.multi(rng)?;
            if g.is_simple() {
                return Ok(g);
            }
        }
        Err(Error::guard(
            "simple_rejection_attempts",
            SIMPLE_REJECTION_LIMIT,
            SIMPLE_REJECTION_LIMIT + 1,
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_pair() {
        let p = ModelParams::with_edges(2, 2, 1).unwrap();
        for seed in 0..20 {
            let g = sample_gnm_multi(&p, seed).unwrap();
            assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 1)]);
        }
    }

    #[test]
    fn triangle_is_the_only_simple_graph() {
        let p = ModelParams::with_edges(3, 3, 3).unwrap();
        for seed in 0..20 {
            let g = sample_gnm_simple(&p, seed).unwrap();
            assert_eq!(g.pair_multiplicities().len(), 3);
        }
    }

    #[test]
    fn rejects_bad_sizes() {
        let p = ModelParams::with_edges(3, 1, 0).unwrap();
        assert!(sample_gnm_multi(&p, 0).is_err());
        let p = ModelParams::with_edges(3, 3, 4).unwrap();
        assert!(sample_gnm_simple(&p, 0).is_err());
    }

    #[test]
    fn deterministic() {
        let p = ModelParams::new(3, 50, 2.0).unwrap();
        assert_eq!(sample_gnm_multi(&p, 9).unwrap(), sample_gnm_multi(&p, 9).unwrap());
        assert_ne!(sample_gnm_multi(&p, 9).unwrap(), sample_gnm_multi(&p, 10).unwrap());
    }
}
