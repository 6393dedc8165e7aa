//! Maximisation of `f2_bar` over matrices with uniform margins, overlap
//! classification, and a numerical second-moment threshold diagnostic.
//!
//! The threshold proxy is the largest `d` at which the barycentre is the
//! global maximiser of `f2_bar` as found by multi-start ascent. It is a
//! diagnostic for the second moment method, not the condensation threshold.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::asymptotics::f2_bar;
use crate::error::{Error, Result};
use crate::exact::in_forbidden_band;
use crate::par;
use crate::rng::{self, domain};

/// Entries are floored here before multiplicative updates.
pub const ENTRY_FLOOR: f64 = 1e-12;
/// Margin accuracy of [`project_uniform_margins`].
pub const MARGIN_TOL: f64 = 1e-13;
/// Sweep cap of [`project_uniform_margins`].
pub const SINKHORN_MAX_SWEEPS: usize = 10_000;

/// Non-negative `k x k` matrix (row-major) with every line summing to `1/k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniformMarginMatrix {
    k: usize,
    entries: Vec<f64>,
}

impl UniformMarginMatrix {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn barycentre(k: usize) -> Self {
        UniformMarginMatrix {
            k,
            entries: vec![1.0 / (k * k) as f64; k * k],
        }
    }

    /// Largest deviation of a row or column sum from `1/k`.
    pub fn margin_residual(&self) -> f64 {
        margin_residual(&self.entries, self.k)
    }

    /// Euclidean distance to the barycentre.
    pub fn distance_to_barycentre(&self) -> f64 {
        let bar = 1.0 / (self.k * self.k) as f64;
        self.entries.iter().map(|x| (x - bar).powi(2)).sum::<f64>().sqrt()
    }
}

fn margin_residual(m: &[f64], k: usize) -> f64 {
    let target = 1.0 / k as f64;
    let mut worst: f64 = 0.0;
    for i in 0..k {
        let row: f64 = m[i * k..(i + 1) * k].iter().sum();
        let col: f64 = (0..k).map(|r| m[r * k + i]).sum();
        worst = worst.max((row - target).abs()).max((col - target).abs());
    }
    worst
}

/// Alternating row and column rescaling to margins `1/k`.
///
/// Entries below [`ENTRY_FLOOR`] are raised to it first.
pub fn project_uniform_margins(m: &[f64], k: usize) -> Result<UniformMarginMatrix> {
    if k == 0 || m.len() != k * k {
        return Err(Error::invalid("matrix must be k x k"));
    }
    if m.iter().any(|x| !x.is_finite() || *x < 0.0) {
        return Err(Error::invalid("matrix entries must be finite and >= 0"));
    }
    let target = 1.0 / k as f64;
    let mut x: Vec<f64> = m.iter().map(|&v| v.max(ENTRY_FLOOR)).collect();
    for _ in 0..SINKHORN_MAX_SWEEPS {
        if margin_residual(&x, k) <= MARGIN_TOL {
            return Ok(UniformMarginMatrix { k, entries: x });
        }
        for i in 0..k {
            let s: f64 = x[i * k..(i + 1) * k].iter().sum();
            let f = target / s;
            x[i * k..(i + 1) * k].iter_mut().for_each(|v| *v *= f);
        }
        for j in 0..k {
            let s: f64 = (0..k).map(|i| x[i * k + j]).sum();
            let f = target / s;
            (0..k).for_each(|i| x[i * k + j] *= f);
        }
    }
    let residual = margin_residual(&x, k);
    if residual <= MARGIN_TOL {
        Ok(UniformMarginMatrix { k, entries: x })
    } else {
        Err(Error::NoConvergence {
            iterations: SINKHORN_MAX_SWEEPS,
            residual,
        })
    }
}

/// Number of entries above `0.51/k`.
pub fn classify_stability(rho: &[f64], k: usize) -> usize {
    rho.iter().filter(|&&x| x > 0.51 / k as f64).count()
}

/// True when no entry has `k rho_ij` in `(0.51, 1 - kappa)`.
pub fn is_separable_matrix(rho: &[f64], k: usize, kappa: f64) -> bool {
    !in_forbidden_band(rho.iter().copied(), k, kappa)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AscentOptions {
    pub initial_step: f64,
    pub max_iterations: usize,
    /// Stop when the step size falls below this.
    pub min_step: f64,
    /// Stop when an accepted step moves no entry by more than this.
    pub move_tol: f64,
}

impl Default for AscentOptions {
    fn default() -> Self {
        AscentOptions {
            initial_step: 0.05,
            max_iterations: 200_000,
            min_step: 1e-14,
            move_tol: 1e-15,
        }
    }
}

/// Endpoint of one ascent run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AscentResult {
    pub end: UniformMarginMatrix,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Mirror ascent on `f2_bar`: `x <- project(x * exp(step * grad))`. Accepted
/// steps grow the step size by 1.5, rejected ones halve it. `observe` sees
/// every accepted iterate (including the start) with its objective value.
pub fn mirror_ascent(
    start: &UniformMarginMatrix,
    d: f64,
    opts: &AscentOptions,
    mut observe: impl FnMut(&UniformMarginMatrix, f64),
) -> Result<AscentResult> {
    let k = start.k;
    let mut x = start.clone();
    let mut value = f2_bar(&x.entries, d, k)?.value;
    observe(&x, value);
    let mut step = opts.initial_step;
    for it in 0..opts.max_iterations {
        let floored: Vec<f64> = x.entries.iter().map(|&v| v.max(ENTRY_FLOOR)).collect();
        let grad = f2_bar(&floored, d, k)?.gradient.expect("floored point is interior");
        let gmax = grad.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let proposal: Vec<f64> = floored
            .iter()
            .zip(&grad)
            .map(|(&v, &g)| v * (step * (g - gmax)).exp())
            .collect();
        let y = project_uniform_margins(&proposal, k)?;
        let yv = f2_bar(&y.entries, d, k)?.value;
        if yv >= value {
            let moved = x
                .entries
                .iter()
                .zip(&y.entries)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            x = y;
            value = yv;
            observe(&x, value);
            step *= 1.5;
            if moved <= opts.move_tol {
                return Ok(AscentResult {
                    end: x,
                    value,
                    iterations: it + 1,
                    converged: true,
                });
            }
        } else {
            step *= 0.5;
            if step < opts.min_step {
                return Ok(AscentResult {
                    end: x,
                    value,
                    iterations: it + 1,
                    converged: true,
                });
            }
        }
    }
    Ok(AscentResult {
        end: x,
        value,
        iterations: opts.max_iterations,
        converged: false,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StartKind {
    Barycentre,
    Permutation,
    Random,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StartSummary {
    pub kind: StartKind,
    pub value: f64,
    pub converged: bool,
    pub iterations: usize,
    pub distance_to_barycentre: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizerReport {
    pub d: f64,
    pub k: usize,
    pub argmax: UniformMarginMatrix,
    pub value: f64,
    pub barycentre_value: f64,
    pub starts: Vec<StartSummary>,
    /// Number of entries of the argmax above `0.51/k`.
    pub stability: usize,
    pub separable: bool,
    /// True when some start ends strictly above the barycentre value
    /// (by more than `1e-8`).
    pub non_barycentric: bool,
}

/// Tolerance by which a start must beat the barycentre to count as a
/// non-barycentric maximiser.
pub const BARYCENTRE_VALUE_TOL: f64 = 1e-8;

/// Permutation matrices of size `k` in lexicographic order (at most `limit`).
fn permutations(k: usize, limit: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut perm: Vec<usize> = (0..k).collect();
    loop {
        if out.len() >= limit {
            break;
        }
        out.push(perm.clone());
        // Next lexicographic permutation.
        let Some(i) = (0..k.saturating_sub(1)).rev().find(|&i| perm[i] < perm[i + 1]) else {
            break;
        };
        let j = (i + 1..k).rev().find(|&j| perm[j] > perm[i]).unwrap();
        perm.swap(i, j);
        perm[i + 1..].reverse();
    }
    out
}

/// Starting points: the barycentre, smoothed permutation matrices, then
/// random matrices with exponential entries, `count` in total.
pub fn starting_points(k: usize, count: usize, seed: u64) -> Result<Vec<(StartKind, UniformMarginMatrix)>> {
    let mut out = Vec::with_capacity(count);
    if count == 0 {
        return Ok(out);
    }
    out.push((StartKind::Barycentre, UniformMarginMatrix::barycentre(k)));
    let bar = 1.0 / (k * k) as f64;
    const SMOOTHING: f64 = 0.1;
    for perm in permutations(k, count - 1) {
        let mut m = vec![SMOOTHING * bar; k * k];
        for (i, &j) in perm.iter().enumerate() {
            m[i * k + j] += (1.0 - SMOOTHING) / k as f64;
        }
        out.push((StartKind::Permutation, project_uniform_margins(&m, k)?));
    }
    let mut idx = 0u64;
    while out.len() < count {
        let mut rng = rng::stream(seed, domain::OPTIMIZER, idx);
        idx += 1;
        let m: Vec<f64> = (0..k * k).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
        out.push((StartKind::Random, project_uniform_margins(&m, k)?));
    }
    Ok(out)
}

/// Multi-start ascent of `f2_bar` at density `d`.
pub fn maximize_f2bar(d: f64, k: usize, starts: usize, seed: u64) -> Result<OptimizerReport> {
    maximize_f2bar_with(d, k, starts, seed, &AscentOptions::default(), crate::exact::default_kappa(k))
}

pub fn maximize_f2bar_with(
    d: f64,
    k: usize,
    starts: usize,
    seed: u64,
    opts: &AscentOptions,
    kappa: f64,
) -> Result<OptimizerReport> {
    if k < 2 {
        return Err(Error::invalid("k must be >= 2"));
    }
    if starts == 0 {
        return Err(Error::invalid("need at least one start"));
    }
    let points = starting_points(k, starts, seed)?;
    let results = par::try_map_indexed(points.len(), |i| mirror_ascent(&points[i].1, d, opts, |_, _| {}))?;
    let barycentre_value = f2_bar(UniformMarginMatrix::barycentre(k).entries(), d, k)?.value;
    let summaries: Vec<StartSummary> = points
        .iter()
        .zip(&results)
        .map(|((kind, _), r)| StartSummary {
            kind: *kind,
            value: r.value,
            converged: r.converged,
            iterations: r.iterations,
            distance_to_barycentre: r.end.distance_to_barycentre(),
        })
        .collect();
    // First start attaining the maximum, so ties resolve by start index.
    let best = results
        .iter()
        .enumerate()
        .fold(0, |b, (i, r)| if r.value > results[b].value { i } else { b });
    let argmax = results[best].end.clone();
    Ok(OptimizerReport {
        d,
        k,
        value: results[best].value,
        barycentre_value,
        stability: classify_stability(argmax.entries(), k),
        separable: is_separable_matrix(argmax.entries(), k, kappa),
        non_barycentric: results[best].value > barycentre_value + BARYCENTRE_VALUE_TOL,
        argmax,
        starts: summaries,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdProxy {
    pub k: usize,
    /// Largest `d` found at which the barycentre is still the global maximiser.
    pub estimate: f64,
    pub bracket: (f64, f64),
    /// True when the upper bracket end still passed, so the estimate is capped.
    pub capped: bool,
    pub evaluations: usize,
}

/// Bisection for the second-moment proxy over `[2(k-1)ln(k-1), 2k ln k]`.
pub fn threshold_proxy(k: usize, tol: f64, starts: usize, seed: u64) -> Result<ThresholdProxy> {
    if k < 3 {
        return Err(Error::invalid("threshold proxy needs k >= 3"));
    }
    if !(tol > 0.0) {
        return Err(Error::invalid("tolerance must be positive"));
    }
    let km1 = (k - 1) as f64;
    let (lo0, hi0) = (2.0 * km1 * km1.ln(), 2.0 * k as f64 * (k as f64).ln());
    let passes = |d: f64| -> Result<bool> { Ok(!maximize_f2bar(d, k, starts, seed)?.non_barycentric) };
    let mut evaluations = 1;
    if !passes(lo0)? {
        return Err(Error::Domain(format!(
            "bracket failure: barycentre is not the maximiser at the lower end d = {lo0}"
        )));
    }
    evaluations += 1;
    if passes(hi0)? {
        return Ok(ThresholdProxy {
            k,
            estimate: hi0,
            bracket: (lo0, hi0),
            capped: true,
            evaluations,
        });
    }
    let (mut lo, mut hi) = (lo0, hi0);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        evaluations += 1;
        if passes(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(ThresholdProxy {
        k,
        estimate: lo,
        bracket: (lo0, hi0),
        capped: false,
        evaluations,
    })
}
