//! Exact counters against each other and against structural identities.

use kcolour::exact::{
    bucket_counts, count_balanced, count_bruteforce, count_by_density, count_dp, count_pairs_by_overlap,
    expected_z, expected_z2, expected_zrho, Ensemble, Z2Restriction,
};
use kcolour::graph::{BalanceSpec, ColourDensity, ModelParams, Multigraph};
use num_bigint::BigUint;
use proptest::prelude::*;

fn multigraph(max_n: usize) -> impl Strategy<Value = Multigraph> {
    (2..=max_n).prop_flat_map(|n| {
        let pair = (0..n, 0..n).prop_filter("no loops", |(u, v)| u != v);
        proptest::collection::vec(pair, 0..=2 * n).prop_map(move |edges| Multigraph::from_edges(n, edges).unwrap())
    })
}

fn relabel(g: &Multigraph, perm: &[usize]) -> Multigraph {
    let edges = g.edges().map(|(u, v)| (perm[u], perm[v]));
    Multigraph::from_edges(g.n(), edges).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn dp_matches_brute(g in multigraph(8), k in 2usize..=4) {
        prop_assert_eq!(count_dp(&g, k).unwrap(), count_bruteforce(&g, k).unwrap());
    }

    #[test]
    fn density_table_sums_to_count(g in multigraph(7), k in 2usize..=3) {
        let table = count_by_density(&g, k).unwrap();
        prop_assert_eq!(table.total(), count_bruteforce(&g, k).unwrap());
        for (rho, _) in table.iter() {
            prop_assert_eq!(rho.counts().iter().sum::<u32>() as usize, g.n());
        }
    }

    #[test]
    fn relabelling_preserves_count(g in multigraph(8), k in 2usize..=4, shift in 0usize..8) {
        let n = g.n();
        let perm: Vec<usize> = (0..n).map(|v| (v * (2 * n - 1) + shift) % n).collect();
        let mut seen = perm.clone();
        seen.sort();
        prop_assume!(seen == (0..n).collect::<Vec<_>>());
        prop_assert_eq!(count_dp(&relabel(&g, &perm), k).unwrap(), count_dp(&g, k).unwrap());
    }

    #[test]
    fn more_colours_never_fewer_colourings(g in multigraph(8), k in 2usize..=4) {
        prop_assert!(count_dp(&g, k + 1).unwrap() >= count_dp(&g, k).unwrap());
    }

    #[test]
    fn adding_an_edge_never_adds_colourings(g in multigraph(7), k in 2usize..=4) {
        let mut edges: Vec<(usize, usize)> = g.edges().collect();
        edges.push((0, 1));
        let h = Multigraph::from_edges(g.n(), edges).unwrap();
        prop_assert!(count_dp(&h, k).unwrap() <= count_dp(&g, k).unwrap());
    }

    #[test]
    fn overlap_table_margins(g in multigraph(6)) {
        let k = 3;
        let z = count_bruteforce(&g, k).unwrap();
        let pairs = count_pairs_by_overlap(&g, k).unwrap();
        prop_assert_eq!(pairs.total(), &z * &z);
        let densities = count_by_density(&g, k).unwrap();
        // Row margins of the pair table reproduce Z times the density table.
        let mut by_row: std::collections::BTreeMap<Vec<u32>, BigUint> = Default::default();
        for (m, c) in pairs.iter() {
            *by_row.entry(m.row_counts()).or_default() += c;
        }
        for (rho, c) in densities.iter() {
            prop_assert_eq!(by_row.get(rho.counts()).cloned().unwrap_or_default(), c * &z);
        }
    }

    #[test]
    fn buckets_partition_balanced(g in multigraph(9), omega in prop::sample::select(vec![1u32, 3]), nu in prop::sample::select(vec![1u32, 3, 5])) {
        let spec = BalanceSpec::new(omega, nu).unwrap();
        let k = 3;
        let total: BigUint = bucket_counts(&g, k, &spec).unwrap().values().sum();
        prop_assert_eq!(total, count_balanced(&g, k, &spec).unwrap());
        prop_assert!(count_balanced(&g, k, &spec).unwrap() <= count_bruteforce(&g, k).unwrap());
    }
}

#[test]
fn expectation_is_sum_over_densities() {
    let params = ModelParams::new(3, 9, 2.0).unwrap();
    for ens in [Ensemble::Multi, Ensemble::Simple] {
        let mut sum = 0.0;
        for a in 0..=9u32 {
            for b in 0..=9 - a {
                let rho = ColourDensity::from_counts(vec![a, b, 9 - a - b]).unwrap();
                sum += expected_zrho(&params, &rho, ens).unwrap().to_f64();
            }
        }
        let z = expected_z(&params, ens).unwrap().to_f64();
        assert!((sum / z - 1.0).abs() < 1e-12);
    }
}

#[test]
fn empty_graph_expectations() {
    let params = ModelParams::with_edges(3, 7, 0).unwrap();
    let z = expected_z(&params, Ensemble::Multi).unwrap();
    assert!((z.ln().unwrap() - 7.0 * 3f64.ln()).abs() < 1e-12);
    let z2 = expected_z2(&params, &Z2Restriction::all()).unwrap();
    assert!((z2.ln().unwrap() - 14.0 * 3f64.ln()).abs() < 1e-12);
}

#[test]
fn second_moment_dominates_square_of_first() {
    for n in [4usize, 6, 9] {
        let params = ModelParams::new(3, n, 2.0).unwrap();
        let z = expected_z(&params, Ensemble::Multi).unwrap().ln().unwrap();
        let z2 = expected_z2(&params, &Z2Restriction::all()).unwrap().ln().unwrap();
        assert!(z2 >= 2.0 * z);
    }
}

#[test]
fn brute_expectation_on_tiny_ensemble() {
    // Average Z over all 3^... ordered edge draws of the multigraph ensemble
    // at n = 4, m = 2 equals the exact expectation.
    let (n, m, k) = (4usize, 2usize, 3usize);
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
    let mut total = 0u64;
    let mut draws = 0u64;
    for &a in &pairs {
        for &b in &pairs {
            let g = Multigraph::from_edges(n, [a, b]).unwrap();
            total += u64::try_from(count_bruteforce(&g, k).unwrap()).unwrap();
            draws += 1;
        }
    }
    let params = ModelParams::with_edges(k, n, m).unwrap();
    let exact = expected_z(&params, Ensemble::Multi).unwrap().to_f64();
    assert!((total as f64 / draws as f64 - exact).abs() < 1e-9);
}
