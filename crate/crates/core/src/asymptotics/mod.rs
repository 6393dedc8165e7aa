//! Closed-form limits: cycle Poisson parameters, exponent functions,
//! moment asymptotics, saddle-point constants and Gaussian lattice sums.

mod exponents;
mod lattice;
mod moments;
mod series;

pub use exponents::{achlioptas_naor_gap, entropy, f1, f2, f2_bar, f2_s, gap_constant, ExponentReport};
pub use lattice::{
    gaussian_lattice_sum, hessian_matrix, hessian_matrix_exact, zero_sum_from_free, LatticeMode, LATTICE_MAX_POINTS,
};
pub use moments::{first_moment_asympt, first_moment_density_asympt, saddle_constants, SaddleConstants};
pub use series::{
    conditional_ratio, delta_l, lambda_delta_sq_sum, lambda_l, mu_l, second_moment_ratio_limit, type_count,
    w_constant, SeriesSum, SERIES_REL_TOL,
};

use crate::error::{Error, Result};

pub(crate) fn check_dk(d: f64, k: usize) -> Result<()> {
    if k < 2 {
        return Err(Error::invalid(format!("k must be >= 2, got {k}")));
    }
    if !d.is_finite() || d < 0.0 {
        return Err(Error::invalid(format!("d must be finite and >= 0, got {d}")));
    }
    Ok(())
}

/// Requires `d < (k-1)^2`, where the cycle series converge.
pub(crate) fn check_convergent(d: f64, k: usize) -> Result<()> {
    check_dk(d, k)?;
    let km1 = (k - 1) as f64;
    if d >= km1 * km1 {
        return Err(Error::Domain(format!("d = {d} >= (k-1)^2 = {}", km1 * km1)));
    }
    Ok(())
}
