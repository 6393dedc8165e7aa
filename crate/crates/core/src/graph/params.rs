use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Size and density of a random graph instance.
///
/// `m = ceil(d' n / 2)` is computed exactly from the shortest decimal form of
/// `dprime`, so `dprime = 0.1` means one tenth, not its binary neighbour.
/// The realized average degree `d = 2m/n` is available as an exact rational.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub k: usize,
    pub n: usize,
    pub dprime: f64,
    pub m: usize,
}

impl ModelParams {
    pub fn new(k: usize, n: usize, dprime: f64) -> Result<Self> {
        check_k_n(k, n)?;
        if !dprime.is_finite() || dprime < 0.0 {
            return Err(Error::invalid(format!("dprime must be finite and >= 0, got {dprime}")));
        }
        let exact = decimal_ratio(dprime)?;
        let m = (exact * BigInt::from(n) / BigInt::from(2)).ceil();
        let m = m
            .to_integer()
            .to_usize()
            .ok_or_else(|| Error::invalid("edge count overflows usize"))?;
        Ok(ModelParams { k, n, dprime, m })
    }

    /// Parameters with an explicit edge count; `dprime` is set to `2m/n`.
    pub fn with_edges(k: usize, n: usize, m: usize) -> Result<Self> {
        check_k_n(k, n)?;
        Ok(ModelParams {
            k,
            n,
            dprime: 2.0 * m as f64 / n as f64,
            m,
        })
    }

    /// The realized density `d = 2m/n`, reduced.
    pub fn d(&self) -> Ratio<u64> {
        Ratio::new(2 * self.m as u64, self.n as u64)
    }

    pub fn d_f64(&self) -> f64 {
        2.0 * self.m as f64 / self.n as f64
    }

    /// Number of unordered vertex pairs `N = n(n-1)/2`.
    pub fn pairs(&self) -> u64 {
        let n = self.n as u64;
        n * n.saturating_sub(1) / 2
    }

    /// Copy with a different vertex count and the same target density.
    pub fn at_n(&self, n: usize) -> Result<Self> {
        ModelParams::new(self.k, n, self.dprime)
    }
}

fn check_k_n(k: usize, n: usize) -> Result<()> {
    if k < 2 {
        return Err(Error::invalid(format!("k must be >= 2, got {k}")));
    }
    if k > u8::MAX as usize {
        return Err(Error::invalid(format!("k must be <= 255, got {k}")));
    }
    if n == 0 {
        return Err(Error::invalid("n must be positive"));
    }
    Ok(())
}

/// Exact rational value of the shortest decimal string that round-trips `x`.
fn decimal_ratio(x: f64) -> Result<BigRational> {
    let s = format!("{x}");
    let (int, frac) = s.split_once('.').unwrap_or((&s, ""));
    let digits: BigInt = format!("{int}{frac}")
        .parse()
        .map_err(|_| Error::invalid(format!("cannot read {x} as a decimal")))?;
    let denom = num_traits::pow(BigInt::from(10), frac.len());
    debug_assert!(!denom.is_zero());
    Ok(BigRational::new(digits, denom))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edge_count_is_exact_ceiling() {
        assert_eq!(ModelParams::new(3, 4, 1.5).unwrap().m, 3);
        assert_eq!(ModelParams::new(3, 12, 2.0).unwrap().m, 12);
        assert_eq!(ModelParams::new(3, 5, 1.5).unwrap().m, 4);
        // 0.1 * 20 / 2 is exactly 1; a binary reading would round up to 2.
        assert_eq!(ModelParams::new(3, 20, 0.1).unwrap().m, 1);
        assert_eq!(ModelParams::new(3, 7, 0.0).unwrap().m, 0);
    }

    #[test]
    fn realized_density_is_rational() {
        let p = ModelParams::new(3, 5, 1.5).unwrap();
        assert_eq!(p.d(), Ratio::new(8, 5));
        assert_eq!(p.pairs(), 10);
    }

    #[test]
    fn validation() {
        assert!(ModelParams::new(1, 4, 1.0).is_err());
        assert!(ModelParams::new(3, 0, 1.0).is_err());
        assert!(ModelParams::new(3, 4, -1.0).is_err());
        assert!(ModelParams::new(3, 4, f64::NAN).is_err());
    }
}
