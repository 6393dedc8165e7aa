use std::collections::BTreeMap;

use serde_json::json;

use super::config::{ExperimentConfig, ExperimentKind};
use super::record::{Report, SampleRecord, SummaryRow};
use super::stats::{product_poisson_tv, MeanSe};
use crate::asymptotics::{conditional_ratio, first_moment_asympt, lambda_l, second_moment_ratio_limit};
use crate::error::{Error, Result};
use crate::exact::{count_dp, expected_z, expected_z2, ln_big, Ensemble, Z2Restriction};
use crate::graph::{cycle_census, CycleCensus, GnmSampler, ModelParams, Multigraph};
use crate::limit_law::{ecdf_distance, sample_w_batch, self_distance_baseline, Truncation, WConfig};
use crate::par;
use crate::rng::{self, domain};

/// Runs whichever experiment `config.kind` names.
pub fn run(config: &ExperimentConfig) -> Result<Report> {
    match config.kind {
        ExperimentKind::LimitCheck => run_limit_check(config),
        ExperimentKind::CondRatio => run_conditional_ratio(config),
        ExperimentKind::Moments => run_moment_suite(config),
        ExperimentKind::PoissonFit => run_poisson_fit(config),
        ExperimentKind::Secondmoment => run_secondmoment_scan(config),
        ExperimentKind::ExpectationCheck => run_expectation_check(config),
    }
}

fn prepare(config: &ExperimentConfig, kind: ExperimentKind) -> Result<()> {
    if config.kind != kind {
        return Err(Error::invalid(format!("config is for {}, not {kind}", config.kind)));
    }
    config.validate()
}

/// Stream index of sample `i` at ladder position `pos`.
fn sample_stream(pos: usize, i: usize) -> u64 {
    ((pos as u64) << 32) | i as u64
}

fn draw(sampler: &GnmSampler, ensemble: Ensemble, seed: u64, index: u64) -> Result<Multigraph> {
    let mut rng = rng::stream(seed, domain::GRAPH, index);
    match ensemble {
        Ensemble::Multi => sampler.multi(&mut rng),
        Ensemble::Simple => sampler.simple(&mut rng),
    }
}

struct Counted {
    record: SampleRecord,
    census: Option<CycleCensus>,
}

/// Draws and counts every sample at one ladder point, in index order.
fn count_samples(
    config: &ExperimentConfig,
    pos: usize,
    params: &ModelParams,
    census_len: Option<usize>,
) -> Result<Vec<Counted>> {
    let sampler = GnmSampler::new(params)?;
    par::try_map_indexed(config.samples, |i| {
        let g = draw(&sampler, config.ensemble, config.seed, sample_stream(pos, i))?;
        let z = count_dp(&g, params.k)?;
        let census = census_len.map(|l| cycle_census(&g, l)).transpose()?;
        Ok(Counted {
            record: SampleRecord {
                n: params.n,
                index: i as u64,
                edges: g.m(),
                ln_z: ln_big(&z),
                z: Some(z.to_string()),
                census: census.as_ref().map(|c| c.counts().to_vec()),
            },
            census,
        })
    })
}

fn strictly_decreasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[1] < w[0])
}

/// Monte Carlo mean of `Z / E[Z]` against 1, with `E[Z]` exact.
pub fn run_expectation_check(config: &ExperimentConfig) -> Result<Report> {
    prepare(config, ExperimentKind::ExpectationCheck)?;
    let mut report = Report::new(config);
    for (pos, &n) in config.n.iter().enumerate() {
        let params = ModelParams::new(config.k, n, config.dprime)?;
        let ln_ez = expected_z(&params, config.ensemble)?.ln_or_neg_inf();
        let counted = count_samples(config, pos, &params, None)?;
        let ratios: Vec<f64> = counted
            .iter()
            .map(|c| c.record.ln_z.map_or(0.0, |l| (l - ln_ez).exp()))
            .collect();
        let m = MeanSe::of(&ratios);
        report.samples.extend(counted.into_iter().map(|c| c.record));
        report.summary.push(
            SummaryRow::new("z_over_expected_z", n, m.mean)
                .prediction(1.0)
                .stderr(m.stderr)
                .samples(m.count)
                .with("ln_expected_z", ln_ez)
                .with("z_score", m.z_score(1.0)),
        );
    }
    Ok(report)
}

/// Exact first moment against its asymptotic formula over the n-ladder.
pub fn run_moment_suite(config: &ExperimentConfig) -> Result<Report> {
    prepare(config, ExperimentKind::Moments)?;
    let mut report = Report::new(config);
    let mut errors = Vec::new();
    for &n in &config.n {
        let params = ModelParams::new(config.k, n, config.dprime)?;
        let exact = expected_z(&params, config.ensemble)?.ln_or_neg_inf();
        let asympt = first_moment_asympt(&params).ln_or_neg_inf();
        let ratio = (exact - asympt).exp();
        errors.push((ratio - 1.0).abs());
        report.summary.push(
            SummaryRow::new("first_moment_ratio", n, ratio)
                .prediction(1.0)
                .with("ln_exact", exact)
                .with("ln_asymptotic", asympt)
                .with("ln_difference", exact - asympt),
        );
    }
    let last = *config.n.last().expect("validated");
    report.summary.push(
        SummaryRow::new("trend", last, *errors.last().expect("validated"))
            .with("abs_error_strictly_decreasing", strictly_decreasing(&errors)),
    );
    Ok(report)
}

/// Total variation distance of the census law from product Poisson.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PoissonTv {
    /// Observed census against product Poisson.
    pub tv: f64,
    /// Exact product-Poisson draws of the same size against the same law:
    /// the part of `tv` owed to finite sample size alone.
    pub null_baseline: f64,
}

impl PoissonTv {
    pub fn compute(samples: &[Vec<u64>], lambdas: &[f64], seed: u64) -> PoissonTv {
        let null: Vec<Vec<u64>> = par::map_indexed(samples.len(), |i| {
            let mut rng = rng::stream(seed, domain::MISC, i as u64);
            lambdas.iter().map(|&l| rng::poisson(&mut rng, l)).collect()
        });
        PoissonTv {
            tv: product_poisson_tv(samples, lambdas),
            null_baseline: product_poisson_tv(&null, lambdas),
        }
    }
}

/// Short-cycle census of the multigraph against independent Poisson laws.
pub fn run_poisson_fit(config: &ExperimentConfig) -> Result<Report> {
    prepare(config, ExperimentKind::PoissonFit)?;
    let mut report = Report::new(config);
    for (pos, &n) in config.n.iter().enumerate() {
        let params = ModelParams::new(config.k, n, config.dprime)?;
        let sampler = GnmSampler::new(&params)?;
        let censuses = par::try_map_indexed(config.samples, |i| {
            let g = draw(&sampler, config.ensemble, config.seed, sample_stream(pos, i))?;
            Ok::<_, Error>((g.m(), cycle_census(&g, config.max_len)?.counts().to_vec()))
        })?;
        let d = params.d_f64();
        let lambdas: Vec<f64> = (2..=config.max_len).map(|l| lambda_l(d, l)).collect();
        let counts: Vec<Vec<u64>> = censuses.iter().map(|(_, c)| c.clone()).collect();
        let tv = PoissonTv::compute(&counts, &lambdas, config.seed ^ pos as u64);
        report.summary.push(
            SummaryRow::new("tv", n, tv.tv)
                .samples(counts.len())
                .with("null_baseline", tv.null_baseline)
                .with("lengths", json!([2, config.max_len])),
        );
        for (j, &lam) in lambdas.iter().enumerate() {
            let xs: Vec<f64> = counts.iter().map(|c| c[j] as f64).collect();
            let m = MeanSe::of(&xs);
            report.summary.push(
                SummaryRow::new(format!("mean_c{}", j + 2), n, m.mean)
                    .prediction(lam)
                    .stderr(m.stderr)
                    .samples(m.count)
                    .with("z_score", m.z_score(lam)),
            );
        }
        report.samples.extend(censuses.into_iter().enumerate().map(|(i, (edges, c))| SampleRecord {
            n,
            index: i as u64,
            edges,
            ln_z: None,
            z: None,
            census: Some(c),
        }));
    }
    Ok(report)
}

/// `E[Z | census] / E[Z]` per census stratum against the small subgraph
/// conditioning prediction.
pub fn run_conditional_ratio(config: &ExperimentConfig) -> Result<Report> {
    prepare(config, ExperimentKind::CondRatio)?;
    let mut report = Report::new(config);
    for (pos, &n) in config.n.iter().enumerate() {
        let params = ModelParams::new(config.k, n, config.dprime)?;
        let d = params.d_f64();
        let ln_ez = expected_z(&params, config.ensemble)?.ln_or_neg_inf();
        let counted = count_samples(config, pos, &params, Some(config.max_len))?;
        let mut strata: BTreeMap<CycleCensus, Vec<f64>> = BTreeMap::new();
        let mut zero = 0usize;
        for c in &counted {
            let r = c.record.ln_z.map_or(0.0, |l| (l - ln_ez).exp());
            if c.record.ln_z.is_none() {
                zero += 1;
            }
            strata.entry(c.census.clone().expect("census requested")).or_default().push(r);
        }
        let mut small = 0usize;
        let mut worst = 0.0f64;
        let mut rel_gaps = Vec::new();
        for (census, ratios) in &strata {
            if ratios.len() < config.min_stratum {
                small += ratios.len();
                continue;
            }
            let m = MeanSe::of(ratios);
            let pred = conditional_ratio(census, d, config.k)?;
            let z = m.z_score(pred);
            worst = worst.max(z);
            rel_gaps.push((m.mean / pred - 1.0).abs());
            report.summary.push(
                SummaryRow::new("stratum", n, m.mean)
                    .prediction(pred)
                    .stderr(m.stderr)
                    .samples(m.count)
                    .with("census", census.counts().to_vec())
                    .with("z_score", z),
            );
        }
        report.summary.push(
            SummaryRow::new("coverage", n, worst)
                .samples(counted.len())
                .with("samples_in_small_strata", small)
                .with("zero_z", zero)
                .with("mean_relative_gap", MeanSe::of(&rel_gaps).mean)
                .with("ln_expected_z", ln_ez),
        );
        report.samples.extend(counted.into_iter().map(|c| c.record));
    }
    Ok(report)
}

/// Exact `E[Z^2] / E[Z]^2` over the n-ladder against its limit.
pub fn run_secondmoment_scan(config: &ExperimentConfig) -> Result<Report> {
    prepare(config, ExperimentKind::Secondmoment)?;
    let mut report = Report::new(config);
    let mut gaps = Vec::new();
    let mut last_limit = f64::NAN;
    for &n in &config.n {
        let params = ModelParams::new(config.k, n, config.dprime)?;
        let limit = second_moment_ratio_limit(params.d_f64(), config.k)?;
        last_limit = limit;
        let ln_z = expected_z(&params, Ensemble::Multi)?.ln_or_neg_inf();
        let ln_z2 = expected_z2(&params, &Z2Restriction::all())?.ln_or_neg_inf();
        let ratio = (ln_z2 - 2.0 * ln_z).exp();
        gaps.push((ratio - limit).abs());
        report.summary.push(
            SummaryRow::new("second_moment_ratio", n, ratio)
                .prediction(limit)
                .with("ln_expected_z", ln_z)
                .with("ln_expected_z2", ln_z2),
        );
        if let Some(spec) = config.balance() {
            let restriction = Z2Restriction {
                bucket: Some((spec, vec![0; config.k])),
                ball: None,
            };
            let ln_b = expected_z2(&params, &restriction)?.ln_or_neg_inf();
            report.summary.push(
                SummaryRow::new("second_moment_ratio_central_bucket", n, (ln_b - 2.0 * ln_z).exp())
                    .with("omega", spec.omega)
                    .with("nu", spec.nu),
            );
        }
    }
    let last = *config.n.last().expect("validated");
    report.summary.push(
        SummaryRow::new("trend", last, *gaps.last().expect("validated"))
            .prediction(last_limit)
            .with("distance_to_limit_strictly_decreasing", strictly_decreasing(&gaps)),
    );
    Ok(report)
}

/// Centred `ln Z` on the simple ensemble against draws of the limit law.
///
/// The centring is `ln E[Z]` on the multigraph ensemble: the simple-graph
/// expectation is smaller by the factor `exp(-lambda_2 delta_2)`, which `W`
/// already carries as its constant term. The distance with simple-graph
/// centring is reported alongside. Graphs without a proper colouring are
/// counted and left out of the comparison.
pub fn run_limit_check(config: &ExperimentConfig) -> Result<Report> {
    prepare(config, ExperimentKind::LimitCheck)?;
    let mut report = Report::new(config);
    let wconfig = WConfig::new(config.dprime, config.k, Truncation::Adaptive(config.tol))?;
    let batch = sample_w_batch(&wconfig, config.w_draws, config.seed)?;
    let mut reference = batch.values.clone();
    reference.sort_by(f64::total_cmp);
    let baseline = self_distance_baseline(&wconfig, config.samples, config.baseline_reps, config.seed, &reference)?;
    let mut distances = Vec::new();
    for (pos, &n) in config.n.iter().enumerate() {
        let params = ModelParams::new(config.k, n, config.dprime)?;
        let ln_multi = expected_z(&params, Ensemble::Multi)?.ln_or_neg_inf();
        let ln_simple = expected_z(&params, Ensemble::Simple)?.ln_or_neg_inf();
        let counted = count_samples(config, pos, &params, None)?;
        let ln_z: Vec<f64> = counted.iter().filter_map(|c| c.record.ln_z).collect();
        let zero = counted.len() - ln_z.len();
        let distance_to = |centre: f64| -> Result<f64> {
            if ln_z.is_empty() {
                return Ok(f64::NAN);
            }
            let centred: Vec<f64> = ln_z.iter().map(|l| l - centre).collect();
            ecdf_distance(&centred, &reference)
        };
        let dist = distance_to(ln_multi)?;
        distances.push(dist);
        let centred: Vec<f64> = ln_z.iter().map(|l| l - ln_multi).collect();
        report.summary.push(
            SummaryRow::new("distance", n, dist)
                .prediction(baseline)
                .samples(ln_z.len())
                .with("zero_z", zero)
                .with("ln_expected_z_multi", ln_multi)
                .with("ln_expected_z_simple", ln_simple)
                .with("distance_simple_centring", distance_to(ln_simple)?)
                .with("centred_mean", MeanSe::of(&centred).mean),
        );
        report.samples.extend(counted.into_iter().map(|c| c.record));
    }
    let last = *distances.last().expect("validated");
    let non_increasing = distances.windows(2).all(|w| w[1] <= w[0]);
    report.summary.push(
        SummaryRow::new("trend", *config.n.last().expect("validated"), last)
            .prediction(baseline)
            .samples(config.w_draws)
            .with("non_increasing", non_increasing)
            .with("ratio_to_baseline", last / baseline)
            .with("w_max_len", wconfig.max_len()?),
    );
    Ok(report)
}
