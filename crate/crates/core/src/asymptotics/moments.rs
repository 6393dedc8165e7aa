use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{check_dk, exponents::entropy_unchecked};
use crate::error::{Error, Result};
use crate::exact::LogValue;
use crate::graph::{ColourDensity, ModelParams};

/// Leading-order `E[Z_k]`:
/// `exp(d/2 + n f_1(uniform)) (1 + d/(k-1))^(-(k-1)/2)` with `d = 2m/n`.
pub fn first_moment_asympt(params: &ModelParams) -> LogValue {
    let (n, k, m) = (params.n as f64, params.k as f64, params.m as f64);
    let d = params.d_f64();
    // n f_1(uniform) = n ln k + m ln(1 - 1/k), using n d / 2 = m exactly.
    let nf1 = n * k.ln() + m * (-1.0 / k).ln_1p();
    LogValue::from_ln(d / 2.0 + nf1 - (k - 1.0) / 2.0 * (d / (k - 1.0)).ln_1p())
}

/// Leading-order `E[Z_rho]` near the uniform density:
/// `(2 pi n)^((1-k)/2) k^(k/2) exp(d/2 + n f_1(rho))`.
pub fn first_moment_density_asympt(params: &ModelParams, rho: &ColourDensity) -> Result<LogValue> {
    if rho.k() != params.k || rho.n() != params.n {
        return Err(Error::invalid("density does not match parameters"));
    }
    let (n, k, m) = (params.n as f64, params.k as f64, params.m as f64);
    let r = rho.to_f64();
    let q = 1.0 - r.iter().map(|x| x * x).sum::<f64>();
    if q <= 0.0 {
        return Ok(LogValue::ZERO);
    }
    let nf1 = n * entropy_unchecked(&r) + m * q.ln();
    Ok(LogValue::from_ln(
        (1.0 - k) / 2.0 * (2.0 * PI * n).ln() + k / 2.0 * k.ln() + params.d_f64() / 2.0 + nf1,
    ))
}

/// Saddle-point constants of the first and second moment.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SaddleConstants {
    /// `B = k (1 + d/(k-1))`.
    pub b: f64,
    /// `ln C_n` with `C_n = e^(d/2) k^(k^2) (2 pi n)^((1-k^2)/2)`.
    pub ln_c_n: f64,
    /// `D = k^2 (1 - d/(k-1)^2)`; positive only for `d < (k-1)^2`.
    pub d: f64,
}

impl SaddleConstants {
    pub fn c_n(&self) -> f64 {
        self.ln_c_n.exp()
    }
}

pub fn saddle_constants(d: f64, k: usize, n: usize) -> Result<SaddleConstants> {
    check_dk(d, k)?;
    if n == 0 {
        return Err(Error::invalid("n must be positive"));
    }
    let kf = k as f64;
    let km1 = kf - 1.0;
    Ok(SaddleConstants {
        b: kf * (1.0 + d / km1),
        ln_c_n: d / 2.0 + kf * kf * kf.ln() + (1.0 - kf * kf) / 2.0 * (2.0 * PI * n as f64).ln(),
        d: kf * kf * (1.0 - d / (km1 * km1)),
    })
}
