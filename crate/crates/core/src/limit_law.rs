//! The limiting variable
//! `W = sum_{l>=3} [X_l ln(1 + delta_l) - lambda_l delta_l] - lambda_2 delta_2`
//! with independent `X_l ~ Poisson(lambda_l)`: truncation, sampling, moment
//! identities and empirical-CDF comparison.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::asymptotics::{check_convergent, delta_l, lambda_delta_sq_sum, lambda_l, w_constant};
use crate::error::{Error, Result};
use crate::par;
use crate::rng::{self, domain, StreamRng, GENERATOR_VERSION};

/// Draws per RNG substream when sampling a batch.
pub const W_CHUNK: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Truncation {
    /// Include cycle lengths `3..=L`.
    Fixed(usize),
    /// Choose `L` by [`choose_truncation`] with this tolerance.
    Adaptive(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WConfig {
    pub d: f64,
    pub k: usize,
    pub truncation: Truncation,
}

impl WConfig {
    pub fn new(d: f64, k: usize, truncation: Truncation) -> Result<Self> {
        let c = WConfig { d, k, truncation };
        c.max_len()?;
        Ok(c)
    }

    /// The resolved truncation `L`.
    pub fn max_len(&self) -> Result<usize> {
        if self.k < 3 {
            return Err(Error::invalid("W needs k >= 3"));
        }
        check_convergent(self.d, self.k)?;
        match self.truncation {
            Truncation::Fixed(l) if l >= 3 => Ok(l),
            Truncation::Fixed(l) => Err(Error::invalid(format!("truncation L = {l} < 3"))),
            Truncation::Adaptive(tol) => choose_truncation(self.d, self.k, tol),
        }
    }
}

/// Geometric bound on `sum_{l > big_l} (|delta_l| sqrt(lambda_l) + delta_l^2 lambda_l)`.
///
/// With `a = sqrt(d)/(k-1)` and `r = a^2` the terms are
/// `(k-1) a^l / sqrt(2l)` and `(k-1)^2 r^l / (2l)`.
pub fn truncation_tail_bound(d: f64, k: usize, big_l: usize) -> f64 {
    let km1 = (k - 1) as f64;
    let a = d.sqrt() / km1;
    let r = a * a;
    let l1 = (big_l + 1) as f64;
    km1 * a.powf(l1) / ((2.0 * l1).sqrt() * (1.0 - a)) + km1 * km1 * r.powf(l1) / (2.0 * l1 * (1.0 - r))
}

/// Smallest `L >= 3` whose tail bound is below `tol`.
pub fn choose_truncation(d: f64, k: usize, tol: f64) -> Result<usize> {
    check_convergent(d, k)?;
    if !(tol > 0.0) {
        return Err(Error::invalid(format!("tolerance must be positive, got {tol}")));
    }
    let mut l = 3;
    while truncation_tail_bound(d, k, l) >= tol {
        l += 1;
        if l > 1_000_000 {
            return Err(Error::Domain("truncation does not converge".into()));
        }
    }
    Ok(l)
}

/// Precomputed per-length coefficients for fast sampling.
#[derive(Clone, Debug)]
pub struct WSampler {
    lambdas: Vec<f64>,
    log_factors: Vec<f64>,
    /// `sum_l lambda_l (ln(1+delta_l) - delta_l) - lambda_2 delta_2`.
    offset: f64,
}

impl WSampler {
    pub fn new(config: &WConfig) -> Result<Self> {
        let big_l = config.max_len()?;
        let (d, k) = (config.d, config.k);
        let mut lambdas = Vec::new();
        let mut log_factors = Vec::new();
        let mut offset = -w_constant(d, k);
        for l in 3..=big_l {
            let lam = lambda_l(d, l);
            let del = delta_l(k, l);
            let lf = del.ln_1p();
            lambdas.push(lam);
            log_factors.push(lf);
            offset += lam * (lf - del);
        }
        Ok(WSampler {
            lambdas,
            log_factors,
            offset,
        })
    }

    /// One draw. Centred form `(X - lambda) ln(1+delta)` avoids cancellation
    /// for large `lambda`.
    pub fn sample(&self, rng: &mut StreamRng) -> f64 {
        let mut w = self.offset;
        for (&lam, &lf) in self.lambdas.iter().zip(&self.log_factors) {
            let x = rng::poisson(rng, lam) as f64;
            w += (x - lam) * lf;
        }
        w
    }

    /// `E[W_L]`.
    pub fn mean(&self) -> f64 {
        self.offset
    }
}

/// One draw of `W` (truncated at the configured `L`).
pub fn sample_w(config: &WConfig, rng: &mut StreamRng) -> Result<f64> {
    Ok(WSampler::new(config)?.sample(rng))
}

/// Exact `E[W_L]`.
pub fn w_mean(config: &WConfig) -> Result<f64> {
    Ok(WSampler::new(config)?.mean())
}

/// Draws with their provenance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleBatch {
    pub values: Vec<f64>,
    pub seed: u64,
    pub config: WConfig,
    pub generator: String,
}

#[derive(Serialize, Deserialize)]
struct BatchHeader {
    config: WConfig,
    seed: u64,
    generator: String,
    count: usize,
}

impl SampleBatch {
    /// Writes a JSON header line followed by one value per line.
    pub fn write_text<W: Write>(&self, mut out: W) -> Result<()> {
        let header = BatchHeader {
            config: self.config,
            seed: self.seed,
            generator: self.generator.clone(),
            count: self.values.len(),
        };
        serde_json::to_writer(&mut out, &header)?;
        out.write_all(b"\n")?;
        for v in &self.values {
            writeln!(out, "{v:?}")?;
        }
        Ok(())
    }

    pub fn read_text<R: BufRead>(reader: R) -> Result<Self> {
        let mut lines = reader.lines();
        let first = lines.next().ok_or_else(|| Error::Parse {
            line: 1,
            msg: "missing header".into(),
        })??;
        let header: BatchHeader = serde_json::from_str(&first)?;
        let mut values = Vec::with_capacity(header.count);
        for (i, line) in lines.enumerate() {
            let line = line?;
            let v = line.trim().parse::<f64>().map_err(|e| Error::Parse {
                line: i + 2,
                msg: e.to_string(),
            })?;
            values.push(v);
        }
        if values.len() != header.count {
            return Err(Error::Parse {
                line: 0,
                msg: format!("header declares {} values, found {}", header.count, values.len()),
            });
        }
        Ok(SampleBatch {
            values,
            seed: header.seed,
            config: header.config,
            generator: header.generator,
        })
    }
}

/// `draws` values of `W`, split into [`W_CHUNK`]-sized chunks on substreams
/// `(seed, stream_domain, chunk index)`.
pub fn sample_w_batch_in(config: &WConfig, draws: usize, seed: u64, stream_domain: u64) -> Result<SampleBatch> {
    let sampler = WSampler::new(config)?;
    let chunks = draws.div_ceil(W_CHUNK);
    let parts = par::map_indexed(chunks, |c| {
        let mut rng = rng::stream(seed, stream_domain, c as u64);
        let len = W_CHUNK.min(draws - c * W_CHUNK);
        (0..len).map(|_| sampler.sample(&mut rng)).collect::<Vec<f64>>()
    });
    Ok(SampleBatch {
        values: parts.into_iter().flatten().collect(),
        seed,
        config: *config,
        generator: GENERATOR_VERSION.to_string(),
    })
}

pub fn sample_w_batch(config: &WConfig, draws: usize, seed: u64) -> Result<SampleBatch> {
    sample_w_batch_in(config, draws, seed, domain::W_BATCH)
}

/// `E[exp(t (W + lambda_2 delta_2))]` for `t = 1` (exactly 1) or `t = 2`
/// (`exp(sum_{l>=3} lambda_l delta_l^2)`, the full series).
pub fn w_exp_moments(d: f64, k: usize, order: u32) -> Result<f64> {
    match order {
        1 => {
            check_convergent(d, k)?;
            Ok(1.0)
        }
        2 => Ok(lambda_delta_sq_sum(d, k, 3)?.value.exp()),
        _ => Err(Error::invalid(format!("order must be 1 or 2, got {order}"))),
    }
}

/// The same moment for the truncated `W_L` actually sampled.
pub fn w_exp_moments_truncated(config: &WConfig, order: u32) -> Result<f64> {
    let big_l = config.max_len()?;
    match order {
        1 => Ok(1.0),
        2 => Ok((3..=big_l)
            .map(|l| lambda_l(config.d, l) * delta_l(config.k, l).powi(2))
            .sum::<f64>()
            .exp()),
        _ => Err(Error::invalid(format!("order must be 1 or 2, got {order}"))),
    }
}

/// Two-sample Kolmogorov-Smirnov statistic `sup_x |F_a(x) - F_b(x)|`.
pub fn ecdf_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::invalid("ecdf distance needs non-empty samples"));
    }
    if a.iter().chain(b).any(|x| x.is_nan()) {
        return Err(Error::invalid("ecdf distance: NaN in sample"));
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut best: f64 = 0.0;
    while i < a.len() || j < b.len() {
        // Advance past every copy of the next smallest value in both samples.
        let x = match (a.get(i), b.get(j)) {
            (Some(&x), Some(&y)) => x.min(y),
            (Some(&x), None) => x,
            (None, Some(&y)) => y,
            (None, None) => unreachable!(),
        };
        while i < a.len() && a[i] == x {
            i += 1;
        }
        while j < b.len() && b[j] == x {
            j += 1;
        }
        best = best.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(best)
}

/// Mean distance between `reps` fresh batches of `size` draws and `reference`:
/// the distance expected from sampling noise alone at that sample size.
pub fn self_distance_baseline(config: &WConfig, size: usize, reps: usize, seed: u64, reference: &[f64]) -> Result<f64> {
    if reps == 0 {
        return Err(Error::invalid("baseline needs at least one repetition"));
    }
    let sampler = WSampler::new(config)?;
    let dists = par::try_map_indexed(reps, |r| {
        let mut rng = rng::stream(seed, domain::W_BASELINE, r as u64);
        let batch: Vec<f64> = (0..size).map(|_| sampler.sample(&mut rng)).collect();
        ecdf_distance(&batch, reference)
    })?;
    Ok(dists.iter().sum::<f64>() / reps as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn truncation_monotone_in_tol() {
        let mut prev = usize::MAX;
        for e in 1..12 {
            let l = choose_truncation(2.0, 3, 10f64.powi(-e)).unwrap();
            assert!(l >= 3);
            assert!(prev == usize::MAX || l >= prev);
            prev = l;
        }
        assert_eq!(choose_truncation(1e-12, 3, 1e-6).unwrap(), 3);
        assert!(choose_truncation(4.0, 3, 1e-6).is_err());
    }

    #[test]
    fn tail_bound_dominates_explicit_tail() {
        let (d, k, tol) = (2.0, 3, 1e-6);
        let l = choose_truncation(d, k, tol).unwrap();
        let explicit: f64 = (l + 1..l + 201)
            .map(|j| delta_l(k, j).abs() * lambda_l(d, j).sqrt() + delta_l(k, j).powi(2) * lambda_l(d, j))
            .sum();
        assert!(explicit < tol);
    }

    #[test]
    fn ecdf_basics() {
        assert_eq!(ecdf_distance(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(ecdf_distance(&[1.0, 2.0], &[3.0, 4.0]).unwrap(), 1.0);
        assert_eq!(ecdf_distance(&[1.0, 1.0, 2.0], &[1.0, 2.0, 2.0]).unwrap(), 1.0 / 3.0);
        let a = [0.3, 0.1, 0.9];
        let b = [0.5, 0.2];
        assert_eq!(ecdf_distance(&a, &b).unwrap(), ecdf_distance(&b, &a).unwrap());
        assert!(ecdf_distance(&[], &b).is_err());
    }

    #[test]
    fn degenerate_at_zero_density() {
        let c = WConfig::new(0.0, 3, Truncation::Fixed(5)).unwrap();
        let b = sample_w_batch(&c, 100, 1).unwrap();
        assert!(b.values.iter().all(|&w| w == 0.0));
    }

    #[test]
    fn batch_text_round_trip() {
        let c = WConfig::new(2.0, 3, Truncation::Adaptive(1e-6)).unwrap();
        let b = sample_w_batch(&c, 10, 4).unwrap();
        let mut buf = Vec::new();
        b.write_text(&mut buf).unwrap();
        assert_eq!(SampleBatch::read_text(&buf[..]).unwrap(), b);
    }

    #[test]
    fn moment_identities_closed_form() {
        assert_eq!(w_exp_moments(2.0, 3, 1).unwrap(), 1.0);
        let full = crate::asymptotics::second_moment_ratio_limit(2.0, 3).unwrap();
        let want = full / (lambda_l(2.0, 2) * delta_l(3, 2).powi(2)).exp();
        assert!((w_exp_moments(2.0, 3, 2).unwrap() - want).abs() < 1e-14);
    }
}
