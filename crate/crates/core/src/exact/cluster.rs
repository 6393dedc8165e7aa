use num_bigint::BigUint;

use super::brute::{check_brute, for_each_proper, BRUTE_MAX_N};
use crate::error::{Error, Result};
use crate::graph::{ColourAssignment, Multigraph};

/// Default separability margin `kappa = ln(k)^20 / k`.
pub fn default_kappa(k: usize) -> f64 {
    (k as f64).ln().powi(20) / k as f64
}

/// Number of overlap entries above `0.51/k`, from integer cell counts over `n`.
pub(crate) fn stable_entries(cells: &[u32], n: usize, k: usize) -> usize {
    // c/n > 0.51/k  <=>  100 k c > 51 n
    cells
        .iter()
        .filter(|&&c| 100 * k as u64 * c as u64 > 51 * n as u64)
        .count()
}

/// True when `k x` lies in the open band `(0.51, 1 - kappa)` for some entry `x`.
pub(crate) fn in_forbidden_band(entries: impl IntoIterator<Item = f64>, k: usize, kappa: f64) -> bool {
    entries.into_iter().any(|x| {
        let kx = k as f64 * x;
        kx > 0.51 && kx < 1.0 - kappa
    })
}

fn overlap_cells(sigma: &[u8], tau: &[u8], k: usize, cells: &mut [u32]) {
    cells.iter_mut().for_each(|c| *c = 0);
    for (&a, &b) in sigma.iter().zip(tau) {
        cells[a as usize * k + b as usize] += 1;
    }
}

fn check_sigma(g: &Multigraph, sigma: &ColourAssignment, k: usize) -> Result<()> {
    check_brute(g, k, BRUTE_MAX_N)?;
    if sigma.k() != k || sigma.n() != g.n() {
        return Err(Error::invalid("assignment does not match graph size or k"));
    }
    if !sigma.is_proper(g) {
        return Err(Error::invalid("assignment is not a proper colouring"));
    }
    if g.n() == 0 {
        return Err(Error::invalid("cluster of an empty graph"));
    }
    Ok(())
}

/// Size of the cluster of `sigma`: proper colourings `tau` whose overlap with
/// `sigma` has exactly `k` entries above `0.51/k`. All proper `tau` are
/// scanned, balanced or not.
pub fn cluster_size(g: &Multigraph, sigma: &ColourAssignment, k: usize) -> Result<BigUint> {
    check_sigma(g, sigma, k)?;
    let n = g.n();
    let mut cells = vec![0u32; k * k];
    let mut count = 0u64;
    for_each_proper(g, k, |tau| {
        overlap_cells(sigma.values(), tau, k, &mut cells);
        if stable_entries(&cells, n, k) == k {
            count += 1;
        }
    });
    Ok(BigUint::from(count))
}

/// True when every proper colouring `tau` has an overlap with `sigma` that
/// avoids the band `k rho_ij in (0.51, 1 - kappa)`.
pub fn is_separable_colouring(g: &Multigraph, sigma: &ColourAssignment, k: usize, kappa: f64) -> Result<bool> {
    check_sigma(g, sigma, k)?;
    let n = g.n() as f64;
    let mut cells = vec![0u32; k * k];
    let mut separable = true;
    for_each_proper(g, k, |tau| {
        if separable {
            overlap_cells(sigma.values(), tau, k, &mut cells);
            if in_forbidden_band(cells.iter().map(|&c| c as f64 / n), k, kappa) {
                separable = false;
            }
        }
    });
    Ok(separable)
}
