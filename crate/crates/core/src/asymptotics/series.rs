use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use super::{check_convergent, check_dk};
use crate::error::{Error, Result};
use crate::graph::CycleCensus;

/// Relative accuracy targeted by the summed series.
pub const SERIES_REL_TOL: f64 = 1e-16;

/// Poisson mean of the number of `l`-cycles, `d^l / (2l)`.
pub fn lambda_l(d: f64, l: usize) -> f64 {
    d.powi(l as i32) / (2 * l) as f64
}

/// `(-1)^l / (k-1)^(l-1)`.
pub fn delta_l(k: usize, l: usize) -> f64 {
    let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
    sign / ((k - 1) as f64).powi(l as i32 - 1)
}

/// Planted-model cycle mean `lambda_l (1 + delta_l)`.
pub fn mu_l(d: f64, k: usize, l: usize) -> f64 {
    lambda_l(d, l) * (1.0 + delta_l(k, l))
}

/// Number of proper colour sequences around an `l`-cycle,
/// `(k-1)^l + (-1)^l (k-1)`.
pub fn type_count(k: usize, l: usize) -> BigInt {
    let km1 = BigInt::from(k as i64 - 1);
    let sign = if l % 2 == 0 { 1 } else { -1 };
    num_traits::pow(km1.clone(), l) + km1 * sign
}

/// The constant `lambda_2 delta_2 = d^2 / (4(k-1))` subtracted in `W`.
pub fn w_constant(d: f64, k: usize) -> f64 {
    lambda_l(d, 2) * delta_l(k, 2)
}

/// A series value with a bound on the omitted tail.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesSum {
    pub value: f64,
    pub tail_bound: f64,
    /// Last index included.
    pub last: usize,
}

/// `sum_{l >= from} lambda_l delta_l^2`, summed until the geometric tail
/// bound falls below [`SERIES_REL_TOL`] relative to the partial sum.
///
/// With `r = d/(k-1)^2` the terms are `(k-1)^2 r^l / (2l)`, so the tail after
/// `L` is at most `(k-1)^2 r^(L+1) / (2(L+1)(1-r))`.
pub fn lambda_delta_sq_sum(d: f64, k: usize, from: usize) -> Result<SeriesSum> {
    check_convergent(d, k)?;
    let km1sq = ((k - 1) * (k - 1)) as f64;
    let r = d / km1sq;
    let mut value = 0.0;
    let mut l = from.max(1);
    loop {
        value += km1sq * r.powi(l as i32) / (2 * l) as f64;
        let tail = km1sq * r.powi(l as i32 + 1) / (2.0 * (l + 1) as f64 * (1.0 - r));
        if tail <= SERIES_REL_TOL * value.abs() || tail == 0.0 || l > 100_000 {
            return Ok(SeriesSum {
                value,
                tail_bound: tail,
                last: l,
            });
        }
        l += 1;
    }
}

/// `(1 - d/(k-1)^2)^(-(k-1)^2/2) e^(-d/2)`, the limit of `E[Z^2]/E[Z]^2`.
pub fn second_moment_ratio_limit(d: f64, k: usize) -> Result<f64> {
    check_convergent(d, k)?;
    let km1sq = ((k - 1) * (k - 1)) as f64;
    Ok((-km1sq / 2.0 * (-d / km1sq).ln_1p() - d / 2.0).exp())
}

/// `prod_{l=2}^{L} (1 + delta_l)^{c_l} exp(-delta_l lambda_l)` for the census.
pub fn conditional_ratio(census: &CycleCensus, d: f64, k: usize) -> Result<f64> {
    check_dk(d, k)?;
    let mut ln = 0.0;
    for l in 2..=census.max_len() {
        let c = census.get(l);
        let delta = delta_l(k, l);
        ln -= delta * lambda_l(d, l);
        if c > 0 {
            if 1.0 + delta <= 0.0 {
                return Ok(0.0);
            }
            ln += c as f64 * delta.ln_1p();
        }
    }
    if !ln.is_finite() {
        return Err(Error::Domain(format!("conditional ratio not finite (ln = {ln})")));
    }
    Ok(ln.exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_values() {
        assert_eq!(lambda_l(2.0, 2), 1.0);
        assert_eq!(delta_l(3, 2), 0.5);
        assert!((mu_l(2.0, 3, 3) - 1.0).abs() < 1e-15);
        assert_eq!(type_count(3, 2), BigInt::from(6));
        assert_eq!(type_count(3, 3), BigInt::from(6));
        assert_eq!(type_count(3, 1), BigInt::from(0));
        assert_eq!(w_constant(2.0, 3), 0.5);
    }

    #[test]
    fn four_over_e() {
        let v = second_moment_ratio_limit(2.0, 3).unwrap();
        assert!((v - 4.0 / std::f64::consts::E).abs() < 1e-15);
        assert!((second_moment_ratio_limit(1e-12, 3).unwrap() - 1.0).abs() < 1e-12);
        assert!(second_moment_ratio_limit(4.0, 3).is_err());
    }

    #[test]
    fn empty_census_ratio() {
        let c = CycleCensus::new(vec![0, 0]).unwrap();
        let r = conditional_ratio(&c, 2.0, 3).unwrap();
        assert!((r - (-1.0f64 / 6.0).exp()).abs() < 1e-15);
    }

    #[test]
    fn one_more_triangle_multiplies_by_one_plus_delta3() {
        let a = conditional_ratio(&CycleCensus::new(vec![1, 2]).unwrap(), 2.0, 3).unwrap();
        let b = conditional_ratio(&CycleCensus::new(vec![1, 3]).unwrap(), 2.0, 3).unwrap();
        assert!((b / a - 0.75).abs() < 1e-14);
    }

    #[test]
    fn series_matches_closed_form() {
        let s = lambda_delta_sq_sum(2.0, 3, 2).unwrap();
        let c = second_moment_ratio_limit(2.0, 3).unwrap().ln();
        assert!((s.value - c).abs() < 1e-14);
    }
}
