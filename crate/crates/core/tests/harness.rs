use kcolour::harness::{read_jsonl, run, ExperimentConfig, ExperimentKind};
use kcolour::par;

fn small(kind: ExperimentKind) -> ExperimentConfig {
    let mut c = ExperimentConfig::preset(kind);
    c.seed = 99;
    match kind {
        ExperimentKind::LimitCheck => {
            c.n = vec![8, 10];
            c.samples = 100;
            c.w_draws = 5000;
            c.baseline_reps = 2;
        }
        ExperimentKind::CondRatio => {
            c.n = vec![10];
            c.samples = 500;
            c.min_stratum = 20;
        }
        ExperimentKind::Moments => c.n = vec![10, 20],
        ExperimentKind::PoissonFit => {
            c.n = vec![100];
            c.samples = 200;
        }
        ExperimentKind::Secondmoment => c.n = vec![6, 8],
        ExperimentKind::ExpectationCheck => {
            c.n = vec![8];
            c.samples = 300;
        }
    }
    c
}

#[test]
fn replaying_a_record_reproduces_it() {
    for kind in ExperimentKind::ALL {
        let text = run(&small(kind)).unwrap().to_jsonl();
        let record = read_jsonl(text.as_bytes()).unwrap();
        assert_eq!(record.header.config_hash, record.header.config.hash());
        let replay = par::with_threads(2, || run(&record.header.config).unwrap().to_jsonl());
        assert_eq!(replay, text, "{kind}");
    }
}

#[test]
fn zero_colouring_samples_are_reported() {
    // Dense enough at n = 8 that some graphs contain a K_4.
    let mut c = small(ExperimentKind::LimitCheck);
    c.dprime = 3.5;
    let r = run(&c).unwrap();
    let zero: u64 = r.rows("distance").map(|row| row.extra["zero_z"].as_u64().unwrap()).sum();
    let missing = r.samples.iter().filter(|s| s.ln_z.is_none()).count() as u64;
    assert_eq!(zero, missing);
    assert!(zero > 0);
    for row in r.rows("distance") {
        assert_eq!(row.samples as u64 + row.extra["zero_z"].as_u64().unwrap(), c.samples as u64);
    }
}

#[test]
fn summary_rows_carry_predictions() {
    let r = run(&small(ExperimentKind::Secondmoment)).unwrap();
    let limit = (4.0f64 / 1f64.exp()).ln();
    for row in r.rows("second_moment_ratio") {
        assert!((row.prediction.unwrap().ln() - limit).abs() < 1e-12);
    }
    let r = run(&small(ExperimentKind::PoissonFit)).unwrap();
    assert_eq!(r.rows("tv").count(), 1);
    assert_eq!(r.samples.len(), 200);
    assert!(r.samples.iter().all(|s| s.census.as_ref().unwrap().len() == 4));
}
