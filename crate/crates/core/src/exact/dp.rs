use std::collections::BTreeSet;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::graph::Multigraph;
use crate::par;

/// Default cap on the number of variables in one intermediate table.
pub const DP_MAX_WIDTH: usize = 12;
/// Default cap on the number of entries in one intermediate table.
pub const DP_MAX_TABLE_ENTRIES: u64 = 1 << 24;

/// Limits for [`count_dp_with`].
#[derive(Clone, Copy, Debug)]
pub struct DpLimits {
    pub max_width: usize,
    pub max_table_entries: u64,
}

impl Default for DpLimits {
    fn default() -> Self {
        DpLimits {
            max_width: DP_MAX_WIDTH,
            max_table_entries: DP_MAX_TABLE_ENTRIES,
        }
    }
}

/// Number of proper `k`-colourings by variable elimination.
///
/// Parallel edges are collapsed. Isolated and pendant vertices are peeled off
/// first (factors `k` and `k - 1`), then each connected component of the
/// remaining 2-core is eliminated in min-degree order with exact counts.
pub fn count_dp(g: &Multigraph, k: usize) -> Result<BigUint> {
    count_dp_with(g, k, DpLimits::default())
}

pub fn count_dp_with(g: &Multigraph, k: usize, limits: DpLimits) -> Result<BigUint> {
    if k == 0 || k > u8::MAX as usize {
        return Err(Error::invalid(format!("k = {k} out of range 1..=255")));
    }
    let n = g.n();
    let mut adj: Vec<BTreeSet<usize>> = g
        .simple_adjacency()
        .into_iter()
        .map(|a| a.into_iter().collect())
        .collect();

    // Peel vertices of degree <= 1.
    let mut removed = vec![false; n];
    let mut isolated = 0u32;
    let mut pendant = 0u32;
    let mut queue: Vec<usize> = (0..n).filter(|&v| adj[v].len() <= 1).collect();
    while let Some(v) = queue.pop() {
        if removed[v] {
            continue;
        }
        removed[v] = true;
        match adj[v].iter().next().copied() {
            None => isolated += 1,
            Some(u) => {
                pendant += 1;
                adj[u].remove(&v);
                adj[v].clear();
                if adj[u].len() <= 1 {
                    queue.push(u);
                }
            }
        }
    }
    let mut total = num_traits::pow(BigUint::from(k), isolated as usize)
        * num_traits::pow(BigUint::from(k - 1), pendant as usize);
    if total.is_zero() {
        return Ok(total);
    }

    for comp in components(&adj, &removed) {
        let local = relabel(&adj, &comp);
        let bits = comp.len() as f64 * (k as f64).log2();
        let c = if bits < 126.0 {
            BigUint::from(eliminate::<u128>(&local, k, limits)?)
        } else {
            eliminate::<BigUint>(&local, k, limits)?
        };
        total *= c;
        if total.is_zero() {
            break;
        }
    }
    Ok(total)
}

fn components(adj: &[BTreeSet<usize>], removed: &[bool]) -> Vec<Vec<usize>> {
    let mut seen = removed.to_vec();
    let mut out = Vec::new();
    for s in 0..adj.len() {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut comp = vec![s];
        let mut i = 0;
        while i < comp.len() {
            for &u in &adj[comp[i]] {
                if !seen[u] {
                    seen[u] = true;
                    comp.push(u);
                }
            }
            i += 1;
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

fn relabel(adj: &[BTreeSet<usize>], comp: &[usize]) -> Vec<BTreeSet<usize>> {
    comp.iter()
        .map(|&v| {
            adj[v]
                .iter()
                .map(|u| comp.binary_search(u).expect("neighbour outside component"))
                .collect()
        })
        .collect()
}

/// Arithmetic needed by the elimination tables.
trait CountNum: Clone + Send + Sync + Zero + One {
    fn add_to(&mut self, x: &Self);
    fn times(&self, x: &Self) -> Self;
}

impl CountNum for u128 {
    fn add_to(&mut self, x: &Self) {
        *self += *x;
    }
    fn times(&self, x: &Self) -> Self {
        self * x
    }
}

impl CountNum for BigUint {
    fn add_to(&mut self, x: &Self) {
        *self += x;
    }
    fn times(&self, x: &Self) -> Self {
        self * x
    }
}

/// Table over `scope` (sorted local vertex ids); the last scope variable
/// varies fastest.
struct Table<T> {
    scope: Vec<usize>,
    data: Vec<T>,
}

fn eliminate<T: CountNum>(edges: &[BTreeSet<usize>], k: usize, limits: DpLimits) -> Result<T> {
    let c = edges.len();
    let mut edges = edges.to_vec();
    let mut inter = edges.clone();
    let mut alive = vec![true; c];
    let mut tables: Vec<Option<Table<T>>> = Vec::new();
    let mut tables_of: Vec<Vec<usize>> = vec![Vec::new(); c];
    let mut result = T::one();

    for _ in 0..c {
        let v = (0..c)
            .filter(|&v| alive[v])
            .min_by_key(|&v| (inter[v].len(), v))
            .expect("vertex left to eliminate");
        let scope: Vec<usize> = inter[v].iter().copied().collect();
        let width = scope.len();
        if width > limits.max_width {
            return Err(Error::guard("elimination_width", limits.max_width as u64, width as u64));
        }
        let entries = (k as u64)
            .checked_pow(width as u32)
            .filter(|&e| e <= limits.max_table_entries)
            .ok_or_else(|| {
                Error::guard(
                    "elimination_table_entries",
                    limits.max_table_entries,
                    (k as f64).powi(width as i32).min(u64::MAX as f64) as u64,
                )
            })?;

        let used: Vec<Table<T>> = tables_of[v]
            .iter()
            .filter_map(|&t| tables[t].take())
            .collect();
        let edge_pos: Vec<usize> = edges[v]
            .iter()
            .map(|u| scope.binary_search(u).unwrap())
            .collect();
        let table = build_table(&scope, v, &used, &edge_pos, k, entries as usize);

        alive[v] = false;
        for &u in &scope {
            inter[u].remove(&v);
            edges[u].remove(&v);
            for &w in &scope {
                if w != u {
                    inter[u].insert(w);
                }
            }
        }
        inter[v].clear();
        edges[v].clear();

        if scope.is_empty() {
            result = result.times(&table.data[0]);
            if result.is_zero() {
                return Ok(result);
            }
        } else {
            let id = tables.len();
            for &u in &scope {
                tables_of[u].push(id);
            }
            tables.push(Some(table));
        }
    }
    Ok(result)
}

fn build_table<T: CountNum>(
    scope: &[usize],
    v: usize,
    used: &[Table<T>],
    edge_pos: &[usize],
    k: usize,
    entries: usize,
) -> Table<T> {
    let width = scope.len();
    // For each input table: stride of v, and (position in new scope, stride).
    let layouts: Vec<(usize, Vec<(usize, usize)>)> = used
        .iter()
        .map(|t| {
            let tw = t.scope.len();
            let mut v_stride = 0;
            let mut map = Vec::with_capacity(tw);
            for (i, &u) in t.scope.iter().enumerate() {
                let stride = k.pow((tw - 1 - i) as u32);
                if u == v {
                    v_stride = stride;
                } else {
                    map.push((scope.binary_search(&u).unwrap(), stride));
                }
            }
            (v_stride, map)
        })
        .collect();

    let eval = |idx: usize| -> T {
        let mut digits = [0usize; 64];
        let mut rest = idx;
        for p in (0..width).rev() {
            digits[p] = rest % k;
            rest /= k;
        }
        let bases: Vec<usize> = layouts
            .iter()
            .map(|(_, map)| map.iter().map(|&(p, s)| digits[p] * s).sum())
            .collect();
        let mut sum = T::zero();
        for colour in 0..k {
            if edge_pos.iter().any(|&p| digits[p] == colour) {
                continue;
            }
            let mut prod = T::one();
            for (t, ((v_stride, _), base)) in used.iter().zip(layouts.iter().zip(&bases)) {
                prod = prod.times(&t.data[base + colour * v_stride]);
                if prod.is_zero() {
                    break;
                }
            }
            sum.add_to(&prod);
        }
        sum
    };

    const CHUNK: usize = 4096;
    let data: Vec<T> = if entries <= CHUNK {
        (0..entries).map(eval).collect()
    } else {
        let chunks = entries.div_ceil(CHUNK);
        par::map_indexed(chunks, |c| {
            (c * CHUNK..((c + 1) * CHUNK).min(entries))
                .map(eval)
                .collect::<Vec<T>>()
        })
        .into_iter()
        .flatten()
        .collect()
    };
    Table {
        scope: scope.to_vec(),
        data,
    }
}
