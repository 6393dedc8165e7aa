use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::ColourDensity;
use crate::error::{Error, Result};

/// Balance window `omega` and bucket resolution `nu`, both odd.
///
/// A density is balanced when every class size `c` satisfies
/// `-omega*sqrt(n) <= c - n/k < omega*sqrt(n)`. Buckets are indexed by even
/// integer vectors `s` with `|s_i| <= omega*nu - 1`; bucket `s` holds the
/// densities with `rho_i` in `[1/k + (s_i-1)/(nu sqrt n), 1/k + (s_i+1)/(nu sqrt n))`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BalanceSpec {
    pub omega: u32,
    pub nu: u32,
}

impl BalanceSpec {
    pub fn new(omega: u32, nu: u32) -> Result<Self> {
        if omega % 2 == 0 || nu % 2 == 0 {
            return Err(Error::invalid(format!(
                "omega and nu must be odd positive integers, got {omega} and {nu}"
            )));
        }
        Ok(BalanceSpec { omega, nu })
    }

    /// Largest admissible `|s_i|`.
    pub fn max_coordinate(&self) -> i64 {
        self.omega as i64 * self.nu as i64 - 1
    }

    /// All lattice indices for `k` colours, in lexicographic order.
    pub fn lattice(&self, k: usize) -> Vec<Vec<i64>> {
        let r = self.max_coordinate();
        let values: Vec<i64> = (-r..=r).step_by(2).collect();
        let mut out = vec![Vec::with_capacity(k)];
        for _ in 0..k {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    values.iter().map(move |&v| {
                        let mut p = prefix.clone();
                        p.push(v);
                        p
                    })
                })
                .collect();
        }
        out
    }

    pub fn contains(&self, s: &[i64]) -> bool {
        let r = self.max_coordinate();
        s.iter().all(|&x| x % 2 == 0 && x.abs() <= r)
    }
}

/// Compares `a` with `b * sqrt(n)` exactly.
fn cmp_scaled_sqrt(a: i128, b: i128, n: u64) -> Ordering {
    let rhs_sign = if n == 0 { 0 } else { b.signum() };
    match (a.signum(), rhs_sign) {
        (x, y) if x != y => x.cmp(&y),
        (0, _) => Ordering::Equal,
        (s, _) => {
            let lhs = a * a;
            let rhs = b * b * n as i128;
            if s > 0 {
                lhs.cmp(&rhs)
            } else {
                rhs.cmp(&lhs)
            }
        }
    }
}

/// `nu * (k c - n)` compared against `t * k * sqrt(n)`, i.e. the scaled
/// deviation `x = nu sqrt(n) (c/n - 1/k)` against the threshold `t`.
fn cmp_deviation(c: u32, n: u64, k: usize, nu: u32, t: i64) -> Ordering {
    let a = nu as i128 * (k as i128 * c as i128 - n as i128);
    cmp_scaled_sqrt(a, t as i128 * k as i128, n)
}

/// True when `rho` is (omega, n)-balanced.
pub fn is_balanced(rho: &ColourDensity, spec: &BalanceSpec) -> bool {
    let n = rho.n() as u64;
    let k = rho.k();
    let w = spec.omega as i64;
    rho.counts().iter().all(|&c| {
        // -omega <= (c - n/k)/sqrt(n) < omega, scaled with nu = 1.
        cmp_deviation(c, n, k, 1, -w) != Ordering::Less
            && cmp_deviation(c, n, k, 1, w) == Ordering::Less
    })
}

/// The bucket containing `rho`, or `None` when `rho` is not balanced.
pub fn bucket_index(rho: &ColourDensity, spec: &BalanceSpec) -> Option<Vec<i64>> {
    if !is_balanced(rho, spec) {
        return None;
    }
    let n = rho.n() as u64;
    let k = rho.k();
    let nu = spec.nu;
    let r = spec.max_coordinate();
    let mut s = Vec::with_capacity(k);
    for &c in rho.counts() {
        let x = nu as f64 * (c as f64 / n as f64 - 1.0 / k as f64) * (n as f64).sqrt();
        let mut si = 2 * ((x + 1.0) / 2.0).floor() as i64;
        // Correct floating-point misplacement at bucket edges.
        while cmp_deviation(c, n, k, nu, si - 1) == Ordering::Less {
            si -= 2;
        }
        while cmp_deviation(c, n, k, nu, si + 1) != Ordering::Less {
            si += 2;
        }
        debug_assert!(si.abs() <= r);
        s.push(si);
    }
    Some(s)
}
