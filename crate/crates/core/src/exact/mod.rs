//! Exact colouring counts and exact finite-n expectations.
//!
//! Everything here is an oracle: results are exact integers, or exact
//! formulas evaluated in log space. Work guards are explicit and refuse
//! loudly instead of truncating.

mod brute;
mod cluster;
mod dp;
mod expectation;
mod logvalue;
mod tables;

pub use brute::{
    bucket_counts, count_balanced, count_bruteforce, count_bruteforce_with, count_bucket, count_by_density,
    count_by_density_with, count_pairs_by_overlap, count_pairs_by_overlap_with, BRUTE_MAX_N, PAIR_MAX_N,
};
pub use cluster::{cluster_size, default_kappa, is_separable_colouring};
pub(crate) use cluster::in_forbidden_band;
pub use dp::{count_dp, count_dp_with, DpLimits, DP_MAX_TABLE_ENTRIES, DP_MAX_WIDTH};
pub use expectation::{
    composition_count, expected_pair_overlap, expected_z, expected_z2, expected_zrho, expected_zrho_multi,
    expected_zrho_simple, Ensemble, Z2Restriction, EXPECTATION_MAX_TERMS,
};
pub use logvalue::{LogSum, LogValue};
pub use tables::{DensityCountTable, OverlapCountTable};

/// Natural log of a positive big integer; `None` for zero.
pub fn ln_big(x: &num_bigint::BigUint) -> Option<f64> {
    use num_traits::{ToPrimitive, Zero};
    if x.is_zero() {
        return None;
    }
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().map(f64::ln);
    }
    let shift = bits - 64;
    let top = (x >> shift).to_f64().unwrap();
    Some(top.ln() + shift as f64 * std::f64::consts::LN_2)
}
