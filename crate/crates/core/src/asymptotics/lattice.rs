use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma_ur, ln_gamma};

use crate::error::{Error, Result};
use crate::par;

/// Cap on the estimated number of lattice points an exact sum may visit.
pub const LATTICE_MAX_POINTS: f64 = 2e9;

/// Relative Gaussian tail mass dropped by the exact lattice sum.
const TAIL_MASS: f64 = 1e-13;

/// Free coordinates of a zero line-sum `k x k` matrix are its top-left
/// `(k-1) x (k-1)` block; this builds the full matrix (row-major) from them.
pub fn zero_sum_from_free(free: &[f64], k: usize) -> Vec<f64> {
    let f = k - 1;
    assert_eq!(free.len(), f * f, "expected (k-1)^2 free coordinates");
    let mut e = vec![0.0; k * k];
    for i in 0..f {
        for j in 0..f {
            let x = free[i * f + j];
            e[i * k + j] = x;
            e[i * k + f] -= x;
            e[f * k + j] -= x;
            e[f * k + f] += x;
        }
    }
    e
}

/// Integer Gram matrix `H` with `x^T H x = |eps(x)|^2`, where `eps(x)` is the
/// zero line-sum matrix with free block `x`. Indexing is row-major over the
/// free block: `H[(a,b),(c,d)] = [a=c][b=d] + [a=c] + [b=d] + 1`.
pub fn hessian_matrix_exact(k: usize) -> Vec<Vec<i64>> {
    let f = k - 1;
    let p = f * f;
    let mut h = vec![vec![0i64; p]; p];
    for a in 0..f {
        for b in 0..f {
            for c in 0..f {
                for d in 0..f {
                    let ac = (a == c) as i64;
                    let bd = (b == d) as i64;
                    h[a * f + b][c * f + d] = ac * bd + ac + bd + 1;
                }
            }
        }
    }
    h
}

pub fn hessian_matrix(k: usize) -> DMatrix<f64> {
    let h = hessian_matrix_exact(k);
    let p = h.len();
    DMatrix::from_fn(p, p, |i, j| h[i][j] as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LatticeMode {
    Exact,
    Closed,
}

/// `sum over eps in E_n of exp(-n D |eps|^2 / 2)`, where `E_n` is the set of
/// zero line-sum `k x k` matrices with entries in `Z/n`.
///
/// `Closed` evaluates `(2 pi n)^((k-1)^2/2) D^(-(k-1)^2/2) k^(-(k-1))`.
/// `Exact` enumerates lattice points inside the ellipsoid holding all but
/// a `1e-13` fraction of the Gaussian mass.
pub fn gaussian_lattice_sum(dconst: f64, k: usize, n: usize, mode: LatticeMode) -> Result<f64> {
    if !(dconst > 0.0) || !dconst.is_finite() {
        return Err(Error::Domain(format!("D must be positive, got {dconst}")));
    }
    if k < 2 || n == 0 {
        return Err(Error::invalid("need k >= 2 and n >= 1"));
    }
    let p = (k - 1) * (k - 1);
    let pf = p as f64;
    match mode {
        LatticeMode::Closed => Ok((pf / 2.0 * (2.0 * PI * n as f64 / dconst).ln() - (k - 1) as f64 * (k as f64).ln()).exp()),
        LatticeMode::Exact => exact_sum(dconst, k, n, p),
    }
}

/// Smallest `t` with `P[chi^2_p > t] <= TAIL_MASS`.
fn chi_square_radius(p: usize) -> f64 {
    let a = p as f64 / 2.0;
    let (mut lo, mut hi) = (0.0, 10.0);
    while gamma_ur(a, hi / 2.0) > TAIL_MASS {
        hi *= 2.0;
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if gamma_ur(a, mid / 2.0) > TAIL_MASS {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

fn exact_sum(dconst: f64, k: usize, n: usize, p: usize) -> Result<f64> {
    let gamma = dconst / (2.0 * n as f64);
    // Under exp(-gamma z^T H z), z^T H z is distributed as chi^2_p n / D.
    let radius = chi_square_radius(p) * n as f64 / dconst;
    let det = (k as f64).powi(2 * (k as i32 - 1));
    let pf = p as f64;
    let ln_ball = pf / 2.0 * PI.ln() - ln_gamma(pf / 2.0 + 1.0);
    let points = (ln_ball + pf / 2.0 * radius.ln() - 0.5 * det.ln()).exp();
    if points > LATTICE_MAX_POINTS {
        return Err(Error::guard("lattice_points", LATTICE_MAX_POINTS as u64, points as u64));
    }

    // z^T H z = sum_i q_ii (z_i + sum_{j>i} q_ij z_j)^2 from H = R^T R.
    let h = hessian_matrix(k);
    let chol = h.cholesky().ok_or_else(|| Error::Domain("Hessian not positive definite".into()))?;
    let r = chol.l().transpose();
    let diag: Vec<f64> = (0..p).map(|i| r[(i, i)] * r[(i, i)]).collect();
    let mut q = vec![vec![0.0; p]; p];
    for i in 0..p {
        for j in i + 1..p {
            q[i][j] = r[(i, j)] / r[(i, i)];
        }
    }
    let enumerator = Enumerator {
        diag,
        q,
        gamma,
        radius,
    };

    let last = p - 1;
    let half = (radius / enumerator.diag[last]).sqrt().floor() as i64;
    let outer: Vec<i64> = (-half..=half).collect();
    let parts = par::map_slice(&outer, |&z| {
        let mut zs = vec![0i64; p];
        zs[last] = z;
        let used = enumerator.diag[last] * (z * z) as f64;
        if p == 1 {
            (-gamma * used).exp()
        } else {
            enumerator.level(last - 1, &mut zs, used)
        }
    });
    Ok(parts.iter().sum())
}

struct Enumerator {
    diag: Vec<f64>,
    q: Vec<Vec<f64>>,
    gamma: f64,
    radius: f64,
}

impl Enumerator {
    /// Sum over `z_0..=z_i` given `z_{i+1}..`, where `used` is the part of
    /// the quadratic form already fixed.
    fn level(&self, i: usize, z: &mut [i64], used: f64) -> f64 {
        let centre = -(i + 1..z.len()).map(|j| self.q[i][j] * z[j] as f64).sum::<f64>();
        let room = self.radius - used;
        if room < 0.0 {
            return 0.0;
        }
        let half = (room / self.diag[i]).sqrt();
        let lo = (centre - half).ceil() as i64;
        let hi = (centre + half).floor() as i64;
        if i == 0 {
            return self.innermost(lo, hi, centre, used);
        }
        let mut total = 0.0;
        for zi in lo..=hi {
            z[i] = zi;
            let t = zi as f64 - centre;
            total += self.level(i - 1, z, used + self.diag[i] * t * t);
        }
        total
    }

    /// `sum_{z=lo}^{hi} exp(-gamma (used + q_00 (z - c)^2))` by a
    /// multiplicative recurrence in `z`.
    fn innermost(&self, lo: i64, hi: i64, c: f64, used: f64) -> f64 {
        if lo > hi {
            return 0.0;
        }
        let a = self.gamma * self.diag[0];
        let base = (-self.gamma * used).exp();
        // Walk outwards from the integer nearest the centre so the
        // recurrence factors stay below one.
        let mid = c.round().clamp(lo as f64, hi as f64) as i64;
        let t0 = mid as f64 - c;
        let first = (-a * t0 * t0).exp();
        let step2 = (-2.0 * a).exp();
        let mut total = first;
        // Upward: ratio from z to z+1 is exp(-a(2t+1)).
        let mut term = first;
        let mut ratio = (-a * (2.0 * t0 + 1.0)).exp();
        for _ in mid + 1..=hi {
            term *= ratio;
            ratio *= step2;
            total += term;
        }
        let mut term = first;
        let mut ratio = (-a * (1.0 - 2.0 * t0)).exp();
        for _ in lo..mid {
            term *= ratio;
            ratio *= step2;
            total += term;
        }
        base * total
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k2_hessian() {
        assert_eq!(hessian_matrix_exact(2), vec![vec![4]]);
    }

    #[test]
    fn determinant() {
        for k in 3..=6 {
            let det = hessian_matrix(k).determinant();
            let want = (k as f64).powi(2 * (k as i32 - 1));
            assert!((det / want - 1.0).abs() < 1e-9, "k={k}");
        }
    }

    #[test]
    fn quadratic_form_is_squared_norm() {
        let k = 4;
        let free: Vec<f64> = (0..9).map(|i| (i as f64 * 0.7).sin()).collect();
        let e = zero_sum_from_free(&free, k);
        let x = nalgebra::DVector::from_vec(free);
        let qf = (x.transpose() * hessian_matrix(k) * &x)[(0, 0)];
        let norm: f64 = e.iter().map(|v| v * v).sum();
        assert!((qf - norm).abs() < 1e-12 * norm);
    }

    #[test]
    fn one_dimensional_sum() {
        let exact = gaussian_lattice_sum(1.0, 2, 400, LatticeMode::Exact).unwrap();
        let closed = gaussian_lattice_sum(1.0, 2, 400, LatticeMode::Closed).unwrap();
        let direct: f64 = (-2000i64..=2000).map(|z| (-(4 * z * z) as f64 / 800.0).exp()).sum();
        assert!((exact / direct - 1.0).abs() < 1e-12);
        assert!((exact / closed - 1.0).abs() < 0.02);
    }

    #[test]
    fn four_dimensional_sum_small_n() {
        // Direct box sum as an independent check.
        let (k, n, dc) = (3, 30, 4.5);
        let h = hessian_matrix_exact(k);
        let mut direct = 0.0;
        let r = 40i64;
        for a in -r..=r {
            for b in -r..=r {
                for c in -r..=r {
                    for d in -r..=r {
                        let z = [a, b, c, d];
                        let mut qf = 0i64;
                        for i in 0..4 {
                            for j in 0..4 {
                                qf += z[i] * h[i][j] * z[j];
                            }
                        }
                        direct += (-dc * qf as f64 / (2.0 * n as f64)).exp();
                    }
                }
            }
        }
        let exact = gaussian_lattice_sum(dc, k, n, LatticeMode::Exact).unwrap();
        assert!((exact / direct - 1.0).abs() < 1e-11, "{exact} vs {direct}");
    }
}
