use rand::Rng;

use super::{ColourAssignment, Multigraph};
use crate::error::{Error, Result};
use crate::rng::{self, domain, StreamRng};

/// Edge probability `p' = d k / (n (k - 1))` of the planted model.
pub fn planted_edge_probability(d: f64, k: usize, n: usize) -> f64 {
    d * k as f64 / (n as f64 * (k as f64 - 1.0))
}

fn check_probability(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid(format!("edge probability {p} outside [0, 1]")));
    }
    Ok(())
}

/// Planted model: a uniform assignment `sigma`, then every bichromatic pair
/// independently with probability `pprime`.
pub fn sample_planted(
    n: usize,
    k: usize,
    pprime: f64,
    seed: u64,
) -> Result<(ColourAssignment, Multigraph)> {
    sample_planted_with(n, k, pprime, &mut rng::stream(seed, domain::GRAPH, 0))
}

pub fn sample_planted_with(
    n: usize,
    k: usize,
    pprime: f64,
    rng: &mut StreamRng,
) -> Result<(ColourAssignment, Multigraph)> {
    check_probability(pprime)?;
    if k < 2 || k > u8::MAX as usize {
        return Err(Error::invalid(format!("k = {k} out of range 2..=255")));
    }
    let values: Vec<u8> = (0..n).map(|_| rng.gen_range(0..k) as u8).collect();
    let sigma = ColourAssignment::new(k, values)?;
    let mut g = Multigraph::empty(n);
    for u in 0..n {
        for v in u + 1..n {
            if sigma.get(u) != sigma.get(v) && rng.gen_bool(pprime) {
                g.push_edge(u, v)?;
            }
        }
    }
    Ok((sigma, g))
}

/// Pads `sigma` to a perfectly balanced assignment by adding vertices.
///
/// With `alpha = max_i |c_i - n/k|` every class is filled up to
/// `T = ceil(n/k) + ceil(alpha)`, so `n' = k T`, which is `n + k ceil(alpha)`
/// whenever `k | n`. New vertices are coloured class by class in colour
/// order. Every bichromatic pair involving a new vertex becomes an edge with
/// probability `pprime`; the edges on the original vertices are kept as they are.
pub fn balance_augment(
    g: &Multigraph,
    sigma: &ColourAssignment,
    pprime: f64,
    seed: u64,
) -> Result<(Multigraph, ColourAssignment)> {
    balance_augment_with(g, sigma, pprime, &mut rng::stream(seed, domain::GRAPH, 1))
}

pub fn balance_augment_with(
    g: &Multigraph,
    sigma: &ColourAssignment,
    pprime: f64,
    rng: &mut StreamRng,
) -> Result<(Multigraph, ColourAssignment)> {
    check_probability(pprime)?;
    if sigma.n() != g.n() {
        return Err(Error::invalid("assignment and graph sizes differ"));
    }
    if !sigma.is_proper(g) {
        return Err(Error::invalid("assignment is not a proper colouring of the graph"));
    }
    let n = g.n();
    let k = sigma.k();
    let sizes = sigma.class_sizes();
    // alpha = max |k c_i - n| / k, so ceil(alpha) is an integer ceiling division.
    let max_dev = sizes
        .iter()
        .map(|&c| (k as i64 * c as i64 - n as i64).unsigned_abs())
        .max()
        .unwrap_or(0);
    let ceil_alpha = max_dev.div_ceil(k as u64) as usize;
    let target = n.div_ceil(k) + ceil_alpha;
    if sizes.iter().all(|&c| c as usize * k == n) {
        return Ok((g.clone(), sigma.clone()));
    }
    let n_new = k * target;
    let mut values = sigma.values().to_vec();
    for (colour, &c) in sizes.iter().enumerate() {
        values.extend(std::iter::repeat(colour as u8).take(target - c as usize));
    }
    debug_assert_eq!(values.len(), n_new);
    let sigma_new = ColourAssignment::new(k, values)?;
    let mut out = Multigraph::from_edges(n_new, g.edges())?;
    for u in 0..n_new {
        for v in (u + 1).max(n)..n_new {
            if sigma_new.get(u) != sigma_new.get(v) && rng.gen_bool(pprime) {
                out.push_edge(u, v)?;
            }
        }
    }
    Ok((out, sigma_new))
}

/// Induced multigraph on the first `n` vertices, edge order preserved.
pub fn strip_augment(g: &Multigraph, n: usize) -> Result<Multigraph> {
    if n > g.n() {
        return Err(Error::invalid(format!(
            "cannot strip to {n} vertices from a graph on {}",
            g.n()
        )));
    }
    Multigraph::from_edges(n, g.edges().filter(|&(u, v)| u < n && v < n))
}
