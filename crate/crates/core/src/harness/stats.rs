use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_factorial;

/// Sample mean with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanSe {
    pub mean: f64,
    pub stderr: f64,
    pub count: usize,
}

impl MeanSe {
    /// Mean and standard error, summing in slice order.
    pub fn of(xs: &[f64]) -> MeanSe {
        let count = xs.len();
        if count == 0 {
            return MeanSe {
                mean: f64::NAN,
                stderr: f64::NAN,
                count,
            };
        }
        let mean = xs.iter().sum::<f64>() / count as f64;
        let stderr = if count > 1 {
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (count - 1) as f64;
            (var / count as f64).sqrt()
        } else {
            f64::NAN
        };
        MeanSe { mean, stderr, count }
    }

    /// `|mean - target|` in standard errors.
    pub fn z_score(&self, target: f64) -> f64 {
        (self.mean - target).abs() / self.stderr
    }
}

fn ln_poisson_pmf(x: u64, lambda: f64) -> f64 {
    if lambda == 0.0 {
        return if x == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    x as f64 * lambda.ln() - lambda - ln_factorial(x)
}

/// Total variation distance between the empirical law of `samples` and the
/// product of Poisson laws with means `lambdas`.
///
/// Unobserved outcomes contribute their full model mass, so this is
/// `(sum_obs |p_hat - p| + 1 - sum_obs p) / 2`.
pub fn product_poisson_tv(samples: &[Vec<u64>], lambdas: &[f64]) -> f64 {
    let total = samples.len() as f64;
    let mut freq: BTreeMap<&[u64], usize> = BTreeMap::new();
    for s in samples {
        *freq.entry(s.as_slice()).or_default() += 1;
    }
    let mut diff = 0.0;
    let mut covered = 0.0;
    for (x, c) in freq {
        let p: f64 = x
            .iter()
            .zip(lambdas)
            .map(|(&xi, &l)| ln_poisson_pmf(xi, l))
            .sum::<f64>()
            .exp();
        diff += (c as f64 / total - p).abs();
        covered += p;
    }
    0.5 * (diff + (1.0 - covered).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_and_se() {
        let m = MeanSe::of(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m.mean, 2.5);
        assert!((m.stderr - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn tv_of_point_mass() {
        // All samples at 0 with lambda 0: distance 0.
        assert_eq!(product_poisson_tv(&[vec![0], vec![0]], &[0.0]), 0.0);
        // All samples at 0 with lambda 1: distance 1 - e^-1.
        let tv = product_poisson_tv(&vec![vec![0]; 5], &[1.0]);
        assert!((tv - (1.0 - (-1.0f64).exp())).abs() < 1e-15);
    }
}
