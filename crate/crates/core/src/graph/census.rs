use serde::{Deserialize, Serialize};

use super::Multigraph;
use crate::error::{Error, Result};
use crate::par;

/// Short-cycle counts `(C_2, ..., C_L)`.
///
/// `C_2` counts unordered pairs of parallel edges. For `l >= 3`, `C_l` counts
/// cycles through `l` distinct vertices, with each choice among parallel
/// edges counted separately.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CycleCensus {
    counts: Vec<u64>,
}

impl CycleCensus {
    /// Census from `(C_2, ..., C_L)`.
    pub fn new(counts: Vec<u64>) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::invalid("census needs L >= 2"));
        }
        Ok(CycleCensus { counts })
    }

    pub fn max_len(&self) -> usize {
        self.counts.len() + 1
    }

    /// Count of cycles of length `l`, `2 <= l <= L`.
    pub fn get(&self, l: usize) -> u64 {
        self.counts[l - 2]
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Census truncated to lengths `2..=l`.
    pub fn truncated(&self, l: usize) -> CycleCensus {
        CycleCensus {
            counts: self.counts[..l.min(self.max_len()) - 1].to_vec(),
        }
    }
}

/// Counts cycles of length `2..=max_len`.
///
/// Each cycle is found once from its smallest vertex, traversed in the
/// direction whose second vertex is smaller than its last.
pub fn cycle_census(g: &Multigraph, max_len: usize) -> Result<CycleCensus> {
    if max_len < 2 {
        return Err(Error::invalid(format!("cycle census needs L >= 2, got {max_len}")));
    }
    let pairs = g.pair_multiplicities();
    let c2: u64 = pairs.iter().map(|&(_, c)| c * (c - 1) / 2).sum();
    let mut adj: Vec<Vec<(usize, u64)>> = vec![Vec::new(); g.n()];
    for &((u, v), c) in &pairs {
        adj[u].push((v, c));
        adj[v].push((u, c));
    }
    let mut counts = vec![0u64; max_len - 1];
    counts[0] = c2;
    if max_len >= 3 {
        let per_root = par::map_indexed(g.n(), |s| cycles_from(&adj, s, max_len));
        for row in per_root {
            for (acc, x) in counts[1..].iter_mut().zip(row) {
                *acc = acc.checked_add(x).expect("cycle count overflows u64");
            }
        }
    }
    CycleCensus::new(counts)
}

/// Weighted counts of cycles of lengths `3..=max_len` whose minimum vertex is `s`.
fn cycles_from(adj: &[Vec<(usize, u64)>], s: usize, max_len: usize) -> Vec<u64> {
    let mut out = vec![0u64; max_len - 2];
    let mut on_path = vec![false; adj.len()];
    let mut path = vec![s];
    on_path[s] = true;
    for &(v, c) in &adj[s] {
        if v > s {
            on_path[v] = true;
            path.push(v);
            extend(adj, s, max_len, &mut path, &mut on_path, c, &mut out);
            path.pop();
            on_path[v] = false;
        }
    }
    out
}

fn extend(
    adj: &[Vec<(usize, u64)>],
    s: usize,
    max_len: usize,
    path: &mut Vec<usize>,
    on_path: &mut [bool],
    weight: u64,
    out: &mut [u64],
) {
    let u = *path.last().unwrap();
    let len = path.len();
    for &(w, c) in &adj[u] {
        if w == s {
            if len >= 3 && path[1] < u {
                let add = weight.checked_mul(c).expect("cycle weight overflows u64");
                out[len - 3] = out[len - 3].checked_add(add).expect("cycle count overflows u64");
            }
        } else if w > s && !on_path[w] && len < max_len {
            on_path[w] = true;
            path.push(w);
            let wt = weight.checked_mul(c).expect("cycle weight overflows u64");
            extend(adj, s, max_len, path, on_path, wt, out);
            path.pop();
            on_path[w] = false;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn complete(n: usize) -> Multigraph {
        let mut e = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                e.push((u, v));
            }
        }
        Multigraph::from_edges(n, e).unwrap()
    }

    #[test]
    fn triangle() {
        let g = Multigraph::from_edges(3, [(0, 1), (1, 2), (2, 0)]).unwrap();
        assert_eq!(cycle_census(&g, 3).unwrap().counts(), &[0, 1]);
    }

    #[test]
    fn parallel_pair() {
        let g = Multigraph::from_edges(2, [(0, 1), (1, 0)]).unwrap();
        assert_eq!(cycle_census(&g, 2).unwrap().counts(), &[1]);
        let g = Multigraph::from_edges(2, [(0, 1), (1, 0), (0, 1)]).unwrap();
        assert_eq!(cycle_census(&g, 4).unwrap().counts(), &[3, 0, 0]);
    }

    #[test]
    fn complete_graphs() {
        assert_eq!(cycle_census(&complete(4), 4).unwrap().counts(), &[0, 4, 3]);
        // K_5: C(5,3) triangles, 5*3 four-cycles, 4!/2 five-cycles.
        assert_eq!(cycle_census(&complete(5), 5).unwrap().counts(), &[0, 10, 15, 12]);
    }

    #[test]
    fn doubled_triangle_edge_counts_twice() {
        let g = Multigraph::from_edges(3, [(0, 1), (1, 2), (2, 0), (0, 1)]).unwrap();
        assert_eq!(cycle_census(&g, 3).unwrap().counts(), &[1, 2]);
    }

    #[test]
    fn rejects_short_l() {
        assert!(cycle_census(&complete(3), 1).is_err());
    }
}
