use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use super::Multigraph;
use crate::error::{Error, Result};

/// A map from vertices to colours.
///
/// Colours are stored 0-based (`0..k`); user-facing text uses `1..=k`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ColourAssignment {
    k: usize,
    values: Vec<u8>,
}

impl ColourAssignment {
    pub fn new(k: usize, values: Vec<u8>) -> Result<Self> {
        if k == 0 || k > u8::MAX as usize {
            return Err(Error::invalid(format!("k = {k} out of range 1..=255")));
        }
        if let Some(pos) = values.iter().position(|&c| c as usize >= k) {
            return Err(Error::invalid(format!(
                "vertex {} has colour {} outside 1..={k}",
                pos + 1,
                values[pos] as usize + 1
            )));
        }
        Ok(ColourAssignment { k, values })
    }

    /// From 1-based colours as written in files and on the command line.
    pub fn from_one_based(k: usize, values: &[usize]) -> Result<Self> {
        let zero: Option<Vec<u8>> = values
            .iter()
            .map(|&c| c.checked_sub(1).and_then(|c| u8::try_from(c).ok()))
            .collect();
        let zero = zero.ok_or_else(|| Error::invalid("colours are 1-based"))?;
        Self::new(k, zero)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[u8] {
        &self.values
    }

    pub fn get(&self, v: usize) -> usize {
        self.values[v] as usize
    }

    pub fn class_sizes(&self) -> Vec<u32> {
        let mut sizes = vec![0u32; self.k];
        for &c in &self.values {
            sizes[c as usize] += 1;
        }
        sizes
    }

    /// True when no edge of `g` is monochromatic.
    pub fn is_proper(&self, g: &Multigraph) -> bool {
        g.n() == self.n() && g.edges().all(|(u, v)| self.values[u] != self.values[v])
    }
}

/// Colour class sizes divided by `n`, held as integer counts.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ColourDensity {
    counts: Vec<u32>,
    n: u32,
}

impl ColourDensity {
    pub fn from_counts(counts: Vec<u32>) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::invalid("density needs at least one colour"));
        }
        let n: u64 = counts.iter().map(|&c| c as u64).sum();
        let n = u32::try_from(n).map_err(|_| Error::invalid("n exceeds u32"))?;
        if n == 0 {
            return Err(Error::invalid("density of an empty vertex set"));
        }
        Ok(ColourDensity { counts, n })
    }

    /// The uniform density `(1/k, ..., 1/k)`; requires `k | n`.
    pub fn uniform(k: usize, n: usize) -> Result<Self> {
        if k == 0 || n % k != 0 {
            return Err(Error::invalid(format!("uniform density needs k | n (k={k}, n={n})")));
        }
        Self::from_counts(vec![(n / k) as u32; k])
    }

    pub fn k(&self) -> usize {
        self.counts.len()
    }

    pub fn n(&self) -> usize {
        self.n as usize
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn entries(&self) -> Vec<Ratio<u64>> {
        self.counts
            .iter()
            .map(|&c| Ratio::new(c as u64, self.n as u64))
            .collect()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.counts
            .iter()
            .map(|&c| c as f64 / self.n as f64)
            .collect()
    }
}

/// Joint class-size matrix of two assignments divided by `n`, row-major.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OverlapMatrix {
    k: usize,
    counts: Vec<u32>,
    n: u32,
}

impl OverlapMatrix {
    pub fn from_counts(k: usize, counts: Vec<u32>) -> Result<Self> {
        if k == 0 || counts.len() != k * k {
            return Err(Error::invalid(format!(
                "overlap needs k*k = {} entries, got {}",
                k * k,
                counts.len()
            )));
        }
        let n: u64 = counts.iter().map(|&c| c as u64).sum();
        let n = u32::try_from(n).map_err(|_| Error::invalid("n exceeds u32"))?;
        if n == 0 {
            return Err(Error::invalid("overlap of an empty vertex set"));
        }
        Ok(OverlapMatrix { k, counts, n })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n as usize
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn count(&self, i: usize, j: usize) -> u32 {
        self.counts[i * self.k + j]
    }

    pub fn row_counts(&self) -> Vec<u32> {
        (0..self.k)
            .map(|i| (0..self.k).map(|j| self.count(i, j)).sum())
            .collect()
    }

    pub fn col_counts(&self) -> Vec<u32> {
        (0..self.k)
            .map(|j| (0..self.k).map(|i| self.count(i, j)).sum())
            .collect()
    }

    pub fn row_density(&self) -> ColourDensity {
        ColourDensity {
            counts: self.row_counts(),
            n: self.n,
        }
    }

    pub fn col_density(&self) -> ColourDensity {
        ColourDensity {
            counts: self.col_counts(),
            n: self.n,
        }
    }

    pub fn entries(&self) -> Vec<Ratio<u64>> {
        self.counts
            .iter()
            .map(|&c| Ratio::new(c as u64, self.n as u64))
            .collect()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.counts
            .iter()
            .map(|&c| c as f64 / self.n as f64)
            .collect()
    }

    /// True when only diagonal entries are non-zero.
    pub fn is_diagonal(&self) -> bool {
        (0..self.k).all(|i| (0..self.k).all(|j| i == j || self.count(i, j) == 0))
    }
}

pub fn colour_density(sigma: &ColourAssignment) -> Result<ColourDensity> {
    ColourDensity::from_counts(sigma.class_sizes())
}

pub fn overlap(sigma: &ColourAssignment, tau: &ColourAssignment) -> Result<OverlapMatrix> {
    if sigma.n() != tau.n() {
        return Err(Error::invalid(format!(
            "assignments have lengths {} and {}",
            sigma.n(),
            tau.n()
        )));
    }
    if sigma.k() != tau.k() {
        return Err(Error::invalid(format!(
            "assignments use k = {} and k = {}",
            sigma.k(),
            tau.k()
        )));
    }
    let k = sigma.k();
    let mut counts = vec![0u32; k * k];
    for (&a, &b) in sigma.values().iter().zip(tau.values()) {
        counts[a as usize * k + b as usize] += 1;
    }
    OverlapMatrix::from_counts(k, counts)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ca(k: usize, v: &[usize]) -> ColourAssignment {
        ColourAssignment::from_one_based(k, v).unwrap()
    }

    #[test]
    fn self_overlap_is_diagonal() {
        let s = ca(3, &[1, 2, 2, 3, 1, 1]);
        let o = overlap(&s, &s).unwrap();
        assert!(o.is_diagonal());
        assert_eq!(o.row_counts(), s.class_sizes());
    }

    #[test]
    fn quarter_overlap() {
        let o = overlap(&ca(2, &[1, 1, 2, 2]), &ca(2, &[1, 2, 1, 2])).unwrap();
        assert!(o.entries().iter().all(|&e| e == Ratio::new(1, 4)));
    }

    #[test]
    fn constant_assignment() {
        let d = colour_density(&ca(4, &[1, 1, 1])).unwrap();
        assert_eq!(d.entries(), vec![Ratio::from(1), Ratio::from(0), Ratio::from(0), Ratio::from(0)]);
    }

    #[test]
    fn mismatches_rejected() {
        assert!(overlap(&ca(2, &[1, 2]), &ca(2, &[1])).is_err());
        assert!(overlap(&ca(2, &[1, 2]), &ca(3, &[1, 2])).is_err());
        assert!(ColourAssignment::from_one_based(2, &[3]).is_err());
        assert!(ColourAssignment::from_one_based(2, &[0]).is_err());
    }
}
