use serde::{Deserialize, Serialize};

use super::check_dk;
use crate::error::{Error, Result};

/// Value of an exponent function at a point, with its gradient where the
/// point is interior.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentReport {
    pub value: f64,
    pub gradient: Option<Vec<f64>>,
    /// The evaluation point (a density, or a row-major `k x k` matrix).
    pub location: Vec<f64>,
}

fn check_probability(p: &[f64]) -> Result<()> {
    if p.is_empty() || p.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
        return Err(Error::invalid("probability vector must be non-empty, finite and >= 0"));
    }
    let s: f64 = p.iter().sum();
    if (s - 1.0).abs() > 1e-9 {
        return Err(Error::invalid(format!("probability vector sums to {s}, not 1")));
    }
    Ok(())
}

/// Shannon entropy in nats with `0 ln 0 = 0`.
pub fn entropy(p: &[f64]) -> Result<f64> {
    check_probability(p)?;
    Ok(entropy_unchecked(p))
}

pub(crate) fn entropy_unchecked(p: &[f64]) -> f64 {
    -p.iter().filter(|&&x| x > 0.0).map(|&x| x * x.ln()).sum::<f64>()
}

fn sq_norm(p: &[f64]) -> f64 {
    p.iter().map(|x| x * x).sum()
}

fn log_arg(arg: f64, d: f64, name: &str) -> Result<f64> {
    if d == 0.0 {
        return Ok(0.0);
    }
    if arg <= 0.0 {
        return Err(Error::Domain(format!("{name}: log argument {arg} <= 0")));
    }
    Ok(arg.ln())
}

/// Entropy gradient `-ln p - 1`, or `None` on the boundary.
fn entropy_gradient(p: &[f64]) -> Option<Vec<f64>> {
    p.iter()
        .all(|&x| x > 0.0)
        .then(|| p.iter().map(|&x| -x.ln() - 1.0).collect())
}

/// `f_1(rho) = H(rho) + (d/2) ln(1 - sum rho_i^2)`.
pub fn f1(rho: &[f64], d: f64, k: usize) -> Result<ExponentReport> {
    check_dk(d, k)?;
    check_probability(rho)?;
    if rho.len() != k {
        return Err(Error::invalid(format!("density has {} entries, k = {k}", rho.len())));
    }
    let q = 1.0 - sq_norm(rho);
    let value = entropy_unchecked(rho) + d / 2.0 * log_arg(q, d, "f1")?;
    let gradient = entropy_gradient(rho).map(|mut g| {
        if d > 0.0 {
            for (gi, &r) in g.iter_mut().zip(rho) {
                *gi -= d * r / q;
            }
        }
        g
    });
    Ok(ExponentReport {
        value,
        gradient,
        location: rho.to_vec(),
    })
}

fn check_matrix(rho: &[f64], k: usize) -> Result<()> {
    if rho.len() != k * k {
        return Err(Error::invalid(format!("matrix has {} entries, expected k*k = {}", rho.len(), k * k)));
    }
    check_probability(rho)
}

fn margins(rho: &[f64], k: usize) -> (Vec<f64>, Vec<f64>) {
    let rows = (0..k).map(|i| rho[i * k..(i + 1) * k].iter().sum()).collect();
    let cols = (0..k).map(|j| (0..k).map(|i| rho[i * k + j]).sum()).collect();
    (rows, cols)
}

/// `f_2(rho) = H(rho) + (d/2) ln(1 - |rows|^2 - |cols|^2 + |rho|^2)`.
pub fn f2(rho: &[f64], d: f64, k: usize) -> Result<ExponentReport> {
    check_dk(d, k)?;
    check_matrix(rho, k)?;
    let (rows, cols) = margins(rho, k);
    let q = 1.0 - sq_norm(&rows) - sq_norm(&cols) + sq_norm(rho);
    let value = entropy_unchecked(rho) + d / 2.0 * log_arg(q, d, "f2")?;
    let gradient = entropy_gradient(rho).map(|mut g| {
        if d > 0.0 {
            for i in 0..k {
                for j in 0..k {
                    g[i * k + j] += d / 2.0 * (2.0 * rho[i * k + j] - 2.0 * rows[i] - 2.0 * cols[j]) / q;
                }
            }
        }
        g
    });
    Ok(ExponentReport {
        value,
        gradient,
        location: rho.to_vec(),
    })
}

/// `f_2` with both margins set to uniform:
/// `H(rho) + (d/2) ln(1 - 2/k + |rho|^2)`.
pub fn f2_bar(rho: &[f64], d: f64, k: usize) -> Result<ExponentReport> {
    check_dk(d, k)?;
    check_matrix(rho, k)?;
    f2_with_centre_norm(rho, d, 1.0 / k as f64, "f2_bar")
}

/// `f_2` with both margins set to `centre`:
/// `H(rho) + (d/2) ln(1 - 2|centre|^2 + |rho|^2)`.
pub fn f2_s(rho: &[f64], centre: &[f64], d: f64, k: usize) -> Result<ExponentReport> {
    check_dk(d, k)?;
    check_matrix(rho, k)?;
    if centre.len() != k {
        return Err(Error::invalid("centre must have k entries"));
    }
    f2_with_centre_norm(rho, d, sq_norm(centre), "f2_s")
}

fn f2_with_centre_norm(rho: &[f64], d: f64, centre_sq: f64, name: &str) -> Result<ExponentReport> {
    let q = 1.0 - 2.0 * centre_sq + sq_norm(rho);
    let value = entropy_unchecked(rho) + d / 2.0 * log_arg(q, d, name)?;
    let gradient = entropy_gradient(rho).map(|mut g| {
        if d > 0.0 {
            for (gi, &r) in g.iter_mut().zip(rho) {
                *gi += d * r / q;
            }
        }
        g
    });
    Ok(ExponentReport {
        value,
        gradient,
        location: rho.to_vec(),
    })
}

/// `(2(k-1) ln(k-1) - d) / (4(k-1)^2)`.
pub fn gap_constant(d: f64, k: usize) -> f64 {
    let km1 = (k - 1) as f64;
    (2.0 * km1 * km1.ln() - d) / (4.0 * km1 * km1)
}

/// Slack of the quadratic upper bound on `f_2_bar` around the barycentre:
/// `f2_bar(bar) - gap_constant (k^2 |rho|^2 - 1) - f2_bar(rho)`.
///
/// Non-negative when the bound holds; finite-n corrections are ignored.
pub fn achlioptas_naor_gap(rho: &[f64], d: f64, k: usize) -> Result<f64> {
    let bar = vec![1.0 / (k * k) as f64; k * k];
    let at_bar = f2_bar(&bar, d, k)?.value;
    let at_rho = f2_bar(rho, d, k)?.value;
    let kk = (k * k) as f64;
    Ok(at_bar - gap_constant(d, k) * (kk * sq_norm(rho) - 1.0) - at_rho)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f1_at_uniform() {
        let r = f1(&[1.0 / 3.0; 3], 2.0, 3).unwrap();
        assert!((r.value - 2f64.ln()).abs() < 1e-15);
        let g = r.gradient.unwrap();
        assert!((g[0] - g[1]).abs() < 1e-15 && (g[1] - g[2]).abs() < 1e-15);
    }

    #[test]
    fn f2_at_barycentre_doubles_f1() {
        for &(d, k) in &[(2.0, 3), (0.7, 4), (5.0, 5)] {
            let bar = vec![1.0 / (k * k) as f64; k * k];
            let a = f2(&bar, d, k).unwrap().value;
            let b = f1(&vec![1.0 / k as f64; k], d, k).unwrap().value;
            assert!((a - 2.0 * b).abs() < 1e-13);
        }
    }

    #[test]
    fn f2_equals_f2bar_on_uniform_margins() {
        let k = 3;
        let rho = [0.2, 0.1, 1.0 / 3.0 - 0.3, 0.1, 0.2, 1.0 / 3.0 - 0.3, 1.0 / 3.0 - 0.3, 1.0 / 3.0 - 0.3, 0.6 - 1.0 / 3.0];
        let a = f2(&rho, 2.0, k).unwrap().value;
        let b = f2_bar(&rho, 2.0, k).unwrap().value;
        assert!((a - b).abs() < 1e-14);
    }

    #[test]
    fn gradient_matches_finite_difference() {
        let k = 3;
        let rho = [0.05, 0.1, 0.15, 0.2, 0.1, 0.05, 0.1, 0.15, 0.1];
        let r = f2(&rho, 1.5, k).unwrap();
        let g = r.gradient.unwrap();
        let h = 1e-6;
        for idx in 0..9 {
            // Move mass between idx and idx+1 (cyclically) to stay on the simplex.
            let jdx = (idx + 1) % 9;
            let mut p = rho;
            p[idx] += h;
            p[jdx] -= h;
            let mut m = rho;
            m[idx] -= h;
            m[jdx] += h;
            let fd = (f2(&p, 1.5, k).unwrap().value - f2(&m, 1.5, k).unwrap().value) / (2.0 * h);
            assert!((fd - (g[idx] - g[jdx])).abs() < 1e-6);
        }
    }

    #[test]
    fn domain_errors() {
        assert!(f1(&[1.0, 0.0], 1.0, 2).is_err());
        assert!(f1(&[1.0, 0.0], 0.0, 2).is_ok());
        assert!(entropy(&[0.5, 0.6]).is_err());
        assert_eq!(entropy(&[1.0, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn gap_zero_at_barycentre() {
        let bar = vec![1.0 / 9.0; 9];
        assert!(achlioptas_naor_gap(&bar, 2.0, 3).unwrap().abs() < 1e-15);
        let mut diag = vec![0.0; 9];
        for i in 0..3 {
            diag[i * 4] = 1.0 / 3.0;
        }
        assert!(achlioptas_naor_gap(&diag, 2.0, 3).unwrap() > 0.0);
    }
}
