//! Acceptance checks, one line per criterion.
//!
//! Runs as a plain binary: `cargo test --test acceptance [-- 3 7 ...]` limits
//! the run to the listed criteria.

use std::time::Instant;

use kcolour::asymptotics::{
    achlioptas_naor_gap, gaussian_lattice_sum, hessian_matrix, lambda_delta_sq_sum, lambda_l, delta_l,
    second_moment_ratio_limit, zero_sum_from_free, LatticeMode,
};
use kcolour::exact::{count_bruteforce, count_dp};
use kcolour::graph::{GnmSampler, ModelParams, Multigraph};
use kcolour::harness::{run, ExperimentConfig, ExperimentKind, Report};
use kcolour::limit_law::{sample_w_batch, Truncation, WConfig};
use kcolour::par;
use kcolour::rng::{self, domain};
use kcolour::second_moment::{maximize_f2bar, project_uniform_margins};
use num_bigint::BigUint;
use rand::Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn flag(r: &Report, label: &str, key: &str) -> bool {
    r.rows(label).next().and_then(|row| row.extra_bool(key)).unwrap_or(false)
}

fn c1() -> Outcome {
    let mut checked = 0;
    let mut bad = Vec::new();
    for i in 0..240u64 {
        let mut rng = rng::stream(1, domain::MISC, i);
        let n = rng.gen_range(2..=8);
        let k = [2, 3, 4][(i % 3) as usize];
        let m = rng.gen_range(0..=2 * n);
        let params = ModelParams::with_edges(k, n, m).unwrap();
        let g = GnmSampler::new(&params).unwrap().multi(&mut rng).unwrap();
        if count_dp(&g, k).unwrap() != count_bruteforce(&g, k).unwrap() {
            bad.push(i);
        }
        checked += 1;
    }
    for k in 2..=4usize {
        for n in 1..=9usize {
            // Path and star trees.
            let path = Multigraph::from_edges(n, (1..n).map(|v| (v - 1, v))).unwrap();
            let star = Multigraph::from_edges(n, (1..n).map(|v| (0, v))).unwrap();
            let want = BigUint::from(k) * BigUint::from(k - 1).pow(n as u32 - 1);
            for g in [path, star] {
                if count_dp(&g, k).unwrap() != want {
                    bad.push(1000 + n as u64);
                }
                checked += 1;
            }
        }
        for l in 3..=12usize {
            let cycle = Multigraph::from_edges(l, (0..l).map(|v| (v, (v + 1) % l))).unwrap();
            let t = (k as i64 - 1).pow(l as u32) + if l % 2 == 0 { 1 } else { -1 } * (k as i64 - 1);
            if count_dp(&cycle, k).unwrap() != BigUint::from(t as u64) {
                bad.push(2000 + l as u64);
            }
            checked += 1;
        }
    }
    outcome(bad.is_empty(), format!("{checked} graphs, {} mismatches", bad.len()))
}

fn c2() -> Outcome {
    let r = run(&ExperimentConfig::preset(ExperimentKind::ExpectationCheck)).unwrap();
    let row = r.rows("z_over_expected_z").next().unwrap();
    let z = row.extra_f64("z_score").unwrap();
    outcome(
        z <= 3.0,
        format!("mean Z/E[Z] = {:.5} +- {:.5} over {} seeds, {z:.2} SE", row.statistic, row.stderr.unwrap(), row.samples),
    )
}

fn c3() -> Outcome {
    let r = run(&ExperimentConfig::preset(ExperimentKind::Moments)).unwrap();
    let errs: Vec<String> = r
        .rows("first_moment_ratio")
        .map(|row| format!("n={}: {:.2e}", row.n, (row.statistic - 1.0).abs()))
        .collect();
    let last = r.rows("trend").next().unwrap().statistic;
    let pass = flag(&r, "trend", "abs_error_strictly_decreasing") && last < 0.05;
    outcome(pass, format!("|ratio-1| {}", errs.join(", ")))
}

fn c4() -> Outcome {
    let r = run(&ExperimentConfig::preset(ExperimentKind::PoissonFit)).unwrap();
    let tv = r.rows("tv").next().unwrap();
    let c2 = r.rows("mean_c2").next().unwrap();
    let z = c2.extra_f64("z_score").unwrap();
    let pass = tv.statistic < 0.05 && z <= 3.0;
    outcome(
        pass,
        format!(
            "TV = {:.4} (exact-Poisson null at this sample size {:.4}), E[C_2] = {:.4} vs {:.4} ({z:.2} SE)",
            tv.statistic,
            tv.extra_f64("null_baseline").unwrap(),
            c2.statistic,
            c2.prediction.unwrap()
        ),
    )
}

fn c5() -> Outcome {
    let r = run(&ExperimentConfig::preset(ExperimentKind::CondRatio)).unwrap();
    let mut worst = 0.0f64;
    let mut strata = 0;
    let mut zero_ok = false;
    for row in r.rows("stratum") {
        strata += 1;
        worst = worst.max(row.extra_f64("z_score").unwrap());
        let census = row.extra["census"].as_array().unwrap();
        if census.iter().all(|c| c.as_u64() == Some(0)) {
            zero_ok = (row.prediction.unwrap() - (-1.0f64 / 6.0).exp()).abs() < 1e-12;
        }
    }
    let gap = r.rows("coverage").next().unwrap().extra_f64("mean_relative_gap").unwrap();
    outcome(
        strata > 0 && worst <= 3.0 && zero_ok,
        format!(
            "{strata} strata with >= 100 samples, worst {worst:.2} SE, mean relative gap {gap:.3}, all-zero prediction e^(-1/6) {}",
            if zero_ok { "ok" } else { "wrong" }
        ),
    )
}

fn c6() -> Outcome {
    let mut worst = 0.0f64;
    for i in 0..100u64 {
        let mut rng = rng::stream(6, domain::MISC, i);
        let k = rng.gen_range(3..=8usize);
        let d = rng.gen_range(0.01..0.9) * ((k - 1) * (k - 1)) as f64;
        let closed = second_moment_ratio_limit(d, k).unwrap();
        let series = lambda_delta_sq_sum(d, k, 2).unwrap().value.exp();
        worst = worst.max((closed / series - 1.0).abs());
    }
    let r = run(&ExperimentConfig::preset(ExperimentKind::Secondmoment)).unwrap();
    let ratios: Vec<String> = r
        .rows("second_moment_ratio")
        .map(|row| format!("n={}: {:.4}", row.n, row.statistic))
        .collect();
    let toward = flag(&r, "trend", "distance_to_limit_strictly_decreasing");
    outcome(
        worst < 1e-10 && toward,
        format!("closed vs series worst rel {worst:.1e}; ratios {} -> 4/e = {:.4}", ratios.join(", "), 4.0 / 1f64.exp()),
    )
}

fn c7() -> Outcome {
    let mut det_err = 0.0f64;
    for k in 3..=6usize {
        let det = hessian_matrix(k).determinant();
        let want = (k as f64).powi(2 * (k as i32 - 1));
        det_err = det_err.max((det / want - 1.0).abs());
    }
    let mut quad_err = 0.0f64;
    for i in 0..100u64 {
        let mut rng = rng::stream(7, domain::MISC, i);
        let k = rng.gen_range(2..=6usize);
        let free: Vec<f64> = (0..(k - 1) * (k - 1)).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let h = hessian_matrix(k);
        let x = nalgebra::DVector::from_vec(free.clone());
        let quad = x.dot(&(&h * &x));
        let norm: f64 = zero_sum_from_free(&free, k).iter().map(|e| e * e).sum();
        quad_err = quad_err.max((quad - norm).abs());
    }
    let mut lat_err = 0.0f64;
    for k in [2usize, 3] {
        for dconst in [1.0, 4.5] {
            let exact = gaussian_lattice_sum(dconst, k, 400, LatticeMode::Exact).unwrap();
            let closed = gaussian_lattice_sum(dconst, k, 400, LatticeMode::Closed).unwrap();
            lat_err = lat_err.max((exact / closed - 1.0).abs());
        }
    }
    outcome(
        det_err < 1e-9 && quad_err < 1e-12 && lat_err < 0.02,
        format!("det rel err {det_err:.1e}, quadratic form err {quad_err:.1e}, lattice/closed err {lat_err:.1e}"),
    )
}

fn c8() -> Outcome {
    let r = run(&ExperimentConfig::preset(ExperimentKind::LimitCheck)).unwrap();
    let dists: Vec<String> = r
        .rows("distance")
        .map(|row| {
            format!(
                "n={}: {:.4} ({} zero, {:.4} with simple-graph centring)",
                row.n,
                row.statistic,
                row.extra["zero_z"],
                row.extra_f64("distance_simple_centring").unwrap()
            )
        })
        .collect();
    let trend = r.rows("trend").next().unwrap();
    let ratio = trend.extra_f64("ratio_to_baseline").unwrap();
    let pass = flag(&r, "trend", "non_increasing") && ratio < 3.0;
    outcome(
        pass,
        format!("{}; baseline {:.4}, final/baseline {ratio:.2}", dists.join(", "), trend.prediction.unwrap()),
    )
}

fn c9() -> Outcome {
    let (d, k) = (2.0, 3);
    let config = WConfig::new(d, k, Truncation::Adaptive(1e-9)).unwrap();
    let batch = sample_w_batch(&config, 1_000_000, 9).unwrap();
    let shift = lambda_l(d, 2) * delta_l(k, 2);
    let mean_se = |f: &dyn Fn(f64) -> f64| {
        let xs: Vec<f64> = batch.values.iter().map(|&w| f(w)).collect();
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (mean, (var / n).sqrt())
    };
    let (m1, s1) = mean_se(&|w| (w + shift).exp());
    let (m2, s2) = mean_se(&|w| (2.0 * (w + shift)).exp());
    let want2 = lambda_delta_sq_sum(d, k, 3).unwrap().value.exp();
    let (z1, z2) = ((m1 - 1.0).abs() / s1, (m2 - want2).abs() / s2);
    outcome(
        z1 <= 3.0 && z2 <= 3.0,
        format!("E[e^(W+c)] = {m1:.5} ({z1:.2} SE), E[e^(2(W+c))] = {m2:.5} vs {want2:.5} ({z2:.2} SE)"),
    )
}

fn c10() -> Outcome {
    let report = maximize_f2bar(2.0, 3, 100, 10).unwrap();
    let far = report.starts.iter().map(|s| s.distance_to_barycentre).fold(0.0, f64::max);
    let over = report
        .starts
        .iter()
        .map(|s| s.value - report.barycentre_value)
        .fold(f64::NEG_INFINITY, f64::max);
    let gaps = par::map_indexed(10_000, |i| {
        let mut rng = rng::stream(10, domain::MISC, i as u64);
        let k = rng.gen_range(3..=6usize);
        let raw: Vec<f64> = (0..k * k).map(|_| -rng.gen::<f64>().ln() + 1e-3).collect();
        let rho = project_uniform_margins(&raw, k).unwrap();
        let d = rng.gen_range(0.0..2.0 * ((k - 1) as f64) * ((k - 1) as f64).ln());
        achlioptas_naor_gap(rho.entries(), d, k).unwrap()
    });
    let min_gap = gaps.iter().copied().fold(f64::INFINITY, f64::min);
    outcome(
        report.starts.len() == 100 && far <= 1e-6 && over <= 1e-12 && min_gap >= -1e-9,
        format!("{} starts, max distance {far:.1e}, max excess {over:.1e}; min gap {min_gap:.2e}", report.starts.len()),
    )
}

fn small_configs() -> Vec<ExperimentConfig> {
    ExperimentKind::ALL
        .into_iter()
        .map(|kind| {
            let mut c = ExperimentConfig::preset(kind);
            c.seed = 11;
            match kind {
                ExperimentKind::LimitCheck => {
                    c.n = vec![10, 14];
                    c.samples = 200;
                    c.w_draws = 20_000;
                    c.baseline_reps = 3;
                }
                ExperimentKind::CondRatio => {
                    c.n = vec![12];
                    c.samples = 2000;
                }
                ExperimentKind::Moments => c.n = vec![20, 40],
                ExperimentKind::PoissonFit => {
                    c.n = vec![200];
                    c.samples = 1000;
                }
                ExperimentKind::Secondmoment => c.n = vec![8, 10],
                ExperimentKind::ExpectationCheck => c.samples = 1000,
            }
            c
        })
        .collect()
}

fn c11() -> Outcome {
    let mut differing = Vec::new();
    for c in small_configs() {
        let one = par::with_threads(1, || run(&c).unwrap().to_jsonl());
        let four = par::with_threads(4, || run(&c).unwrap().to_jsonl());
        let again = par::with_threads(4, || run(&c).unwrap().to_jsonl());
        if one != four || four != again {
            differing.push(c.kind.name());
        }
    }
    outcome(
        differing.is_empty(),
        format!("6 experiments at 1 and 4 threads, differing: {:?}", differing),
    )
}

fn main() {
    let criteria: [(usize, &str, fn() -> Outcome); 11] = [
        (1, "oracle equivalence", c1),
        (2, "exact expectation", c2),
        (3, "first-moment asymptotics", c3),
        (4, "Poisson census", c4),
        (5, "conditional ratio", c5),
        (6, "second-moment constant", c6),
        (7, "Hessian and lattice sums", c7),
        (8, "limit law", c8),
        (9, "W moment identities", c9),
        (10, "optimizer", c10),
        (11, "reproducibility", c11),
    ];
    let selected: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = Vec::new();
    for (id, name, check) in criteria {
        if !selected.is_empty() && !selected.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let o = check();
        let status = if o.pass { "PASS" } else { "FAIL" };
        println!("{status} criterion {id} ({name}): {} [{:.1}s]", o.detail, start.elapsed().as_secs_f64());
        if !o.pass {
            failed.push(id);
        }
    }
    if !failed.is_empty() {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
