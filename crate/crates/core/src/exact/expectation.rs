use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_factorial;

use super::{LogSum, LogValue};
use crate::error::{Error, Result};
use crate::graph::{bucket_index, BalanceSpec, ColourDensity, ModelParams, OverlapMatrix};
use crate::par;

/// Cap on the number of lattice terms an exact expectation may sum.
pub const EXPECTATION_MAX_TERMS: u64 = 500_000_000;

/// Random graph ensemble.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Ensemble {
    /// `m` independent uniform pairs, repetitions allowed.
    Multi,
    /// Uniform simple graph with `m` edges.
    Simple,
}

struct LnFact(Vec<f64>);

impl LnFact {
    fn new(n: usize) -> Self {
        LnFact((0..=n as u64).map(ln_factorial).collect())
    }

    fn multinomial(&self, n: usize, parts: &[u32]) -> f64 {
        self.0[n] - parts.iter().map(|&c| self.0[c as usize]).sum::<f64>()
    }
}

fn choose2(c: u32) -> u64 {
    let c = c as u64;
    c * c.saturating_sub(1) / 2
}

/// `ln P[no forbidden pair is an edge]` given `f` forbidden pairs out of `pairs`.
fn ln_avoid(ensemble: Ensemble, pairs: u64, f: u64, m: usize) -> Option<f64> {
    if m == 0 {
        return Some(0.0);
    }
    match ensemble {
        Ensemble::Multi => {
            if f >= pairs {
                None
            } else {
                Some(m as f64 * (-(f as f64) / pairs as f64).ln_1p())
            }
        }
        Ensemble::Simple => {
            if pairs - f < m as u64 {
                return None;
            }
            let mut acc = 0.0;
            for i in 0..m as u64 {
                acc += (-(f as f64) / (pairs - i) as f64).ln_1p();
            }
            Some(acc)
        }
    }
}

fn check_simple(params: &ModelParams, ensemble: Ensemble) -> Result<()> {
    if ensemble == Ensemble::Simple && params.m as u64 > params.pairs() {
        return Err(Error::invalid(format!(
            "m = {} exceeds the {} vertex pairs",
            params.m,
            params.pairs()
        )));
    }
    Ok(())
}

fn check_density(params: &ModelParams, rho: &ColourDensity) -> Result<()> {
    if rho.n() != params.n || rho.k() != params.k {
        return Err(Error::invalid(format!(
            "density over n = {}, k = {} does not match parameters n = {}, k = {}",
            rho.n(),
            rho.k(),
            params.n,
            params.k
        )));
    }
    Ok(())
}

fn density_term(lf: &LnFact, params: &ModelParams, ensemble: Ensemble, counts: &[u32]) -> LogValue {
    let f: u64 = counts.iter().map(|&c| choose2(c)).sum();
    match ln_avoid(ensemble, params.pairs(), f, params.m) {
        Some(a) => LogValue::from_ln(lf.multinomial(params.n, counts) + a),
        None => LogValue::ZERO,
    }
}

/// Exact `E[Z_rho]` on the multigraph ensemble:
/// `multinomial(n; rho n) (1 - F/N)^m` with `F = sum_i C(rho_i n, 2)`.
pub fn expected_zrho_multi(params: &ModelParams, rho: &ColourDensity) -> Result<LogValue> {
    expected_zrho(params, rho, Ensemble::Multi)
}

/// Exact `E[Z_rho]` on the simple ensemble:
/// `multinomial(n; rho n) C(N - F, m) / C(N, m)`.
pub fn expected_zrho_simple(params: &ModelParams, rho: &ColourDensity) -> Result<LogValue> {
    expected_zrho(params, rho, Ensemble::Simple)
}

pub fn expected_zrho(params: &ModelParams, rho: &ColourDensity, ensemble: Ensemble) -> Result<LogValue> {
    check_density(params, rho)?;
    check_simple(params, ensemble)?;
    Ok(density_term(&LnFact::new(params.n), params, ensemble, rho.counts()))
}

/// Number of compositions of `n` into `parts` non-negative parts.
pub fn composition_count(n: usize, parts: usize) -> u64 {
    // C(n + parts - 1, parts - 1), saturating.
    let mut c: u128 = 1;
    for i in 1..parts as u128 {
        c = c * (n as u128 + i) / i;
        if c > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    c as u64
}

fn check_terms(n: usize, parts: usize) -> Result<()> {
    let terms = composition_count(n, parts);
    if terms > EXPECTATION_MAX_TERMS {
        return Err(Error::guard("expectation_terms", EXPECTATION_MAX_TERMS, terms));
    }
    Ok(())
}

/// Calls `f` on every composition of `total` into `buf.len() - start` parts
/// filling `buf[start..]`, in lexicographic order (or its reverse).
fn for_each_composition(buf: &mut [u32], start: usize, total: u32, reverse: bool, f: &mut dyn FnMut(&[u32])) {
    let last = buf.len() - 1;
    if start == last {
        buf[last] = total;
        f(buf);
        return;
    }
    for i in 0..=total {
        let c = if reverse { total - i } else { i };
        buf[start] = c;
        for_each_composition(buf, start + 1, total - c, reverse, f);
    }
}

/// Exact `E[Z_k]`: the sum of `E[Z_rho]` over all densities.
pub fn expected_z(params: &ModelParams, ensemble: Ensemble) -> Result<LogValue> {
    expected_z_ordered(params, ensemble, false)
}

pub(crate) fn expected_z_ordered(params: &ModelParams, ensemble: Ensemble, reverse: bool) -> Result<LogValue> {
    check_simple(params, ensemble)?;
    let (n, k) = (params.n, params.k);
    check_terms(n, k)?;
    let lf = LnFact::new(n);
    let partial = par::map_indexed(n + 1, |i| {
        let first = if reverse { n - i } else { i } as u32;
        let mut sum = LogSum::new();
        let mut buf = vec![0u32; k];
        buf[0] = first;
        for_each_composition(&mut buf, 1, n as u32 - first, reverse, &mut |c| {
            sum.add(density_term(&lf, params, ensemble, c));
        });
        sum
    });
    let mut total = LogSum::new();
    for s in &partial {
        total.merge(s);
    }
    Ok(total.value())
}

fn check_overlap(params: &ModelParams, rho: &OverlapMatrix) -> Result<()> {
    if rho.n() != params.n || rho.k() != params.k {
        return Err(Error::invalid(format!(
            "overlap over n = {}, k = {} does not match parameters n = {}, k = {}",
            rho.n(),
            rho.k(),
            params.n,
            params.k
        )));
    }
    Ok(())
}

fn pair_term(lf: &LnFact, params: &ModelParams, k: usize, cells: &[u32], rows: &mut [u32], cols: &mut [u32]) -> LogValue {
    rows.iter_mut().for_each(|x| *x = 0);
    cols.iter_mut().for_each(|x| *x = 0);
    let mut diag = 0u64;
    for (idx, &c) in cells.iter().enumerate() {
        rows[idx / k] += c;
        cols[idx % k] += c;
        diag += choose2(c);
    }
    let f = rows.iter().map(|&c| choose2(c)).sum::<u64>() + cols.iter().map(|&c| choose2(c)).sum::<u64>() - diag;
    match ln_avoid(Ensemble::Multi, params.pairs(), f, params.m) {
        Some(a) => LogValue::from_ln(lf.multinomial(params.n, cells) + a),
        None => LogValue::ZERO,
    }
}

/// Exact expected number of pairs of colourings with overlap `rho` on the
/// multigraph ensemble.
pub fn expected_pair_overlap(params: &ModelParams, rho: &OverlapMatrix) -> Result<LogValue> {
    check_overlap(params, rho)?;
    let k = params.k;
    let mut rows = vec![0; k];
    let mut cols = vec![0; k];
    Ok(pair_term(&LnFact::new(params.n), params, k, rho.counts(), &mut rows, &mut cols))
}

/// Which overlap matrices an [`expected_z2`] sum includes.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Z2Restriction {
    /// Both margins must lie in this bucket.
    pub bucket: Option<(BalanceSpec, Vec<i64>)>,
    /// Euclidean distance to the barycentre at most this.
    pub ball: Option<f64>,
}

impl Z2Restriction {
    pub fn all() -> Self {
        Self::default()
    }

    fn admits(&self, n: usize, k: usize, cells: &[u32], rows: &[u32], cols: &[u32]) -> bool {
        if let Some(eta) = self.ball {
            let bar = 1.0 / (k * k) as f64;
            let d2: f64 = cells
                .iter()
                .map(|&c| (c as f64 / n as f64 - bar).powi(2))
                .sum();
            if d2.sqrt() > eta {
                return false;
            }
        }
        if let Some((spec, s)) = &self.bucket {
            for margin in [rows, cols] {
                let rho = ColourDensity::from_counts(margin.to_vec()).expect("non-empty margin");
                if bucket_index(&rho, spec).as_deref() != Some(s.as_slice()) {
                    return false;
                }
            }
        }
        true
    }
}

/// Exact `E[Z_k^2]` on the multigraph ensemble, summed over all overlap
/// matrices admitted by `restriction`.
pub fn expected_z2(params: &ModelParams, restriction: &Z2Restriction) -> Result<LogValue> {
    let (n, k) = (params.n, params.k);
    if let Some((spec, s)) = &restriction.bucket {
        if s.len() != k || !spec.contains(s) {
            return Err(Error::invalid(format!("{s:?} is not a lattice index for k = {k}")));
        }
    }
    let parts = k * k;
    check_terms(n, parts)?;
    let lf = LnFact::new(n);
    // Tasks are the first two cells, in lexicographic order.
    let prefixes: Vec<(u32, u32)> = (0..=n as u32)
        .flat_map(|a| (0..=n as u32 - a).map(move |b| (a, b)))
        .collect();
    let partial = par::map_slice(&prefixes, |&(a, b)| {
        let mut sum = LogSum::new();
        let mut buf = vec![0u32; parts];
        let mut rows = vec![0u32; k];
        let mut cols = vec![0u32; k];
        buf[0] = a;
        buf[1] = b;
        let mut visit = |cells: &[u32]| {
            let term = pair_term(&lf, params, k, cells, &mut rows, &mut cols);
            if !term.is_zero() && restriction.admits(n, k, cells, &rows, &cols) {
                sum.add(term);
            }
        };
        if parts == 2 {
            if a + b == n as u32 {
                visit(&buf);
            }
        } else {
            for_each_composition(&mut buf, 2, n as u32 - a - b, false, &mut visit);
        }
        sum
    });
    let mut total = LogSum::new();
    for s in &partial {
        total.merge(s);
    }
    Ok(total.value())
}
