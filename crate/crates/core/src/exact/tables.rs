use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_bigint::BigUint;
use num_rational::Ratio;

use crate::graph::{ColourDensity, OverlapMatrix};

fn ratio_text(r: &Ratio<u64>) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Colouring counts keyed by colour density.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DensityCountTable {
    k: usize,
    rows: BTreeMap<ColourDensity, BigUint>,
}

impl DensityCountTable {
    pub(crate) fn new(k: usize, rows: BTreeMap<ColourDensity, BigUint>) -> Self {
        DensityCountTable { k, rows }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&ColourDensity, &BigUint)> {
        self.rows.iter()
    }

    pub fn get(&self, rho: &ColourDensity) -> Option<&BigUint> {
        self.rows.get(rho)
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn total(&self) -> BigUint {
        self.rows.values().sum()
    }

    /// CSV with columns `rho_1..rho_k,count`; entries as reduced `p/q`.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for i in 1..=self.k {
            write!(s, "rho_{i},").unwrap();
        }
        s.push_str("count\n");
        for (rho, c) in &self.rows {
            for e in rho.entries() {
                write!(s, "{},", ratio_text(&e)).unwrap();
            }
            writeln!(s, "{c}").unwrap();
        }
        s
    }
}

/// Counts of colouring pairs keyed by overlap matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OverlapCountTable {
    k: usize,
    rows: BTreeMap<OverlapMatrix, BigUint>,
}

impl OverlapCountTable {
    pub(crate) fn new(k: usize, rows: BTreeMap<OverlapMatrix, BigUint>) -> Self {
        OverlapCountTable { k, rows }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&OverlapMatrix, &BigUint)> {
        self.rows.iter()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn total(&self) -> BigUint {
        self.rows.values().sum()
    }

    /// CSV with columns `rho_1_1..rho_k_k,count` (row-major).
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for i in 1..=self.k {
            for j in 1..=self.k {
                write!(s, "rho_{i}_{j},").unwrap();
            }
        }
        s.push_str("count\n");
        for (rho, c) in &self.rows {
            for e in rho.entries() {
                write!(s, "{},", ratio_text(&e)).unwrap();
            }
            writeln!(s, "{c}").unwrap();
        }
        s
    }
}
