use std::collections::{BTreeMap, HashMap};

use num_bigint::BigUint;

use super::tables::{DensityCountTable, OverlapCountTable};
use crate::error::{Error, Result};
use crate::graph::{bucket_index, is_balanced, BalanceSpec, ColourDensity, Multigraph, OverlapMatrix};
use crate::par;

/// Default vertex limit for enumerating all `k^n` assignments.
pub const BRUTE_MAX_N: usize = 20;
/// Default vertex limit for enumerating pairs of colourings.
pub const PAIR_MAX_N: usize = 10;

pub(crate) fn check_brute(g: &Multigraph, k: usize, max_n: usize) -> Result<()> {
    if k < 1 || k > u8::MAX as usize {
        return Err(Error::invalid(format!("k = {k} out of range 1..=255")));
    }
    if g.n() > max_n {
        return Err(Error::guard("brute_force_max_n", max_n as u64, g.n() as u64));
    }
    Ok(())
}

/// Neighbours of each vertex that precede it in vertex order.
fn earlier_neighbours(g: &Multigraph) -> Vec<Vec<usize>> {
    g.simple_adjacency()
        .into_iter()
        .enumerate()
        .map(|(v, adj)| adj.into_iter().filter(|&u| u < v).collect())
        .collect()
}

/// Calls `visit` on every proper colouring, in lexicographic order.
pub(crate) fn for_each_proper(g: &Multigraph, k: usize, mut visit: impl FnMut(&[u8])) {
    let back = earlier_neighbours(g);
    let mut sigma = vec![0u8; g.n()];
    fn rec(v: usize, k: usize, back: &[Vec<usize>], sigma: &mut [u8], visit: &mut dyn FnMut(&[u8])) {
        if v == sigma.len() {
            visit(sigma);
            return;
        }
        for c in 0..k as u8 {
            if back[v].iter().all(|&u| sigma[u] != c) {
                sigma[v] = c;
                rec(v + 1, k, back, sigma, visit);
            }
        }
    }
    rec(0, k, &back, &mut sigma, &mut visit);
}

/// Number of proper `k`-colourings, by exhaustive backtracking.
///
/// Parallel edges impose one constraint. Refuses graphs with more than
/// [`BRUTE_MAX_N`] vertices.
pub fn count_bruteforce(g: &Multigraph, k: usize) -> Result<BigUint> {
    count_bruteforce_with(g, k, BRUTE_MAX_N)
}

pub fn count_bruteforce_with(g: &Multigraph, k: usize, max_n: usize) -> Result<BigUint> {
    check_brute(g, k, max_n)?;
    let n = g.n();
    if n == 0 {
        return Ok(BigUint::from(1u32));
    }
    let back = earlier_neighbours(g);
    // Split on the colour of vertex 0 and count the last vertex's options
    // instead of enumerating them.
    fn rec(v: usize, k: usize, back: &[Vec<usize>], sigma: &mut [u8]) -> u128 {
        let last = v + 1 == sigma.len();
        let mut total = 0u128;
        for c in 0..k as u8 {
            if back[v].iter().all(|&u| sigma[u] != c) {
                if last {
                    total += 1;
                } else {
                    sigma[v] = c;
                    total += rec(v + 1, k, back, sigma);
                }
            }
        }
        total
    }
    let per_colour = par::map_indexed(k, |c| {
        let mut sigma = vec![0u8; n];
        sigma[0] = c as u8;
        if n == 1 {
            1
        } else {
            rec(1, k, &back, &mut sigma)
        }
    });
    Ok(BigUint::from(per_colour.into_iter().sum::<u128>()))
}

/// Colouring counts grouped by colour density.
pub fn count_by_density(g: &Multigraph, k: usize) -> Result<DensityCountTable> {
    count_by_density_with(g, k, BRUTE_MAX_N)
}

pub fn count_by_density_with(g: &Multigraph, k: usize, max_n: usize) -> Result<DensityCountTable> {
    check_brute(g, k, max_n)?;
    if g.n() == 0 {
        return Err(Error::invalid("densities need n >= 1"));
    }
    let mut counts: HashMap<Vec<u32>, u128> = HashMap::new();
    let mut sizes = vec![0u32; k];
    for_each_proper(g, k, |sigma| {
        sizes.iter_mut().for_each(|s| *s = 0);
        for &c in sigma {
            sizes[c as usize] += 1;
        }
        *counts.entry(sizes.clone()).or_default() += 1;
    });
    let mut table = BTreeMap::new();
    for (sizes, c) in counts {
        table.insert(ColourDensity::from_counts(sizes)?, BigUint::from(c));
    }
    Ok(DensityCountTable::new(k, table))
}

/// Number of colourings whose density is (omega, n)-balanced.
pub fn count_balanced(g: &Multigraph, k: usize, spec: &BalanceSpec) -> Result<BigUint> {
    let table = count_by_density(g, k)?;
    Ok(table
        .iter()
        .filter(|(rho, _)| is_balanced(rho, spec))
        .map(|(_, c)| c.clone())
        .sum())
}

/// Number of colourings whose density lies in bucket `s`.
pub fn count_bucket(g: &Multigraph, k: usize, spec: &BalanceSpec, s: &[i64]) -> Result<BigUint> {
    if s.len() != k || !spec.contains(s) {
        return Err(Error::invalid(format!("{s:?} is not a lattice index for k = {k}")));
    }
    let table = count_by_density(g, k)?;
    Ok(table
        .iter()
        .filter(|(rho, _)| bucket_index(rho, spec).as_deref() == Some(s))
        .map(|(_, c)| c.clone())
        .sum())
}

/// Counts per occupied bucket; buckets with no colouring are omitted.
pub fn bucket_counts(g: &Multigraph, k: usize, spec: &BalanceSpec) -> Result<BTreeMap<Vec<i64>, BigUint>> {
    let table = count_by_density(g, k)?;
    let mut out: BTreeMap<Vec<i64>, BigUint> = BTreeMap::new();
    for (rho, c) in table.iter() {
        if let Some(s) = bucket_index(rho, spec) {
            *out.entry(s).or_default() += c;
        }
    }
    Ok(out)
}

/// All proper colourings, lexicographically ordered.
pub(crate) fn proper_colourings(g: &Multigraph, k: usize) -> Vec<Vec<u8>> {
    let mut out = Vec::new();
    for_each_proper(g, k, |s| out.push(s.to_vec()));
    out
}

/// Pairs of colourings grouped by overlap matrix.
pub fn count_pairs_by_overlap(g: &Multigraph, k: usize) -> Result<OverlapCountTable> {
    count_pairs_by_overlap_with(g, k, PAIR_MAX_N)
}

pub fn count_pairs_by_overlap_with(g: &Multigraph, k: usize, max_n: usize) -> Result<OverlapCountTable> {
    check_brute(g, k, max_n)?;
    if g.n() == 0 {
        return Err(Error::invalid("overlaps need n >= 1"));
    }
    let all = proper_colourings(g, k);
    let partial = par::map_slice(&all, |sigma| {
        let mut local: HashMap<Vec<u32>, u64> = HashMap::new();
        let mut cell = vec![0u32; k * k];
        for tau in &all {
            cell.iter_mut().for_each(|x| *x = 0);
            for (&a, &b) in sigma.iter().zip(tau) {
                cell[a as usize * k + b as usize] += 1;
            }
            *local.entry(cell.clone()).or_default() += 1;
        }
        local
    });
    let mut merged: HashMap<Vec<u32>, u128> = HashMap::new();
    for local in partial {
        for (cell, c) in local {
            *merged.entry(cell).or_default() += c as u128;
        }
    }
    let mut table = BTreeMap::new();
    for (cell, c) in merged {
        table.insert(OverlapMatrix::from_counts(k, cell)?, BigUint::from(c));
    }
    Ok(OverlapCountTable::new(k, table))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::ToPrimitive;

    fn cycle(l: usize) -> Multigraph {
        Multigraph::from_edges(l, (0..l).map(|i| (i, (i + 1) % l))).unwrap()
    }

    fn count(g: &Multigraph, k: usize) -> u64 {
        count_bruteforce(g, k).unwrap().to_u64().unwrap()
    }

    #[test]
    fn small_counts() {
        assert_eq!(count(&Multigraph::empty(3), 2), 8);
        assert_eq!(count(&cycle(3), 3), 6);
        assert_eq!(count(&cycle(4), 3), 18);
        assert_eq!(count(&Multigraph::empty(0), 3), 1);
        assert_eq!(count(&Multigraph::empty(1), 3), 3);
    }

    #[test]
    fn guard_refuses() {
        let err = count_bruteforce(&Multigraph::empty(21), 2).unwrap_err();
        assert!(err.is_guard());
        assert!(count_pairs_by_overlap(&Multigraph::empty(11), 2).unwrap_err().is_guard());
    }

    #[test]
    fn path_densities() {
        let g = Multigraph::from_edges(3, [(0, 1), (1, 2)]).unwrap();
        let t = count_by_density(&g, 2).unwrap();
        let got: Vec<(Vec<u32>, u32)> = t
            .iter()
            .map(|(r, c)| (r.counts().to_vec(), c.to_u32().unwrap()))
            .collect();
        assert_eq!(got, vec![(vec![1, 2], 1), (vec![2, 1], 1)]);
    }

    #[test]
    fn empty_pair_densities() {
        let t = count_by_density(&Multigraph::empty(2), 2).unwrap();
        let got: Vec<(Vec<u32>, u32)> = t
            .iter()
            .map(|(r, c)| (r.counts().to_vec(), c.to_u32().unwrap()))
            .collect();
        assert_eq!(got, vec![(vec![0, 2], 1), (vec![1, 1], 2), (vec![2, 0], 1)]);
    }

    #[test]
    fn single_edge_pairs() {
        let g = Multigraph::from_edges(2, [(0, 1)]).unwrap();
        let t = count_pairs_by_overlap(&g, 2).unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t.total(), BigUint::from(4u32));
    }

    #[test]
    fn triangle_balanced() {
        let spec = BalanceSpec::new(1, 1).unwrap();
        assert_eq!(count_balanced(&cycle(3), 3, &spec).unwrap(), BigUint::from(6u32));
    }
}
