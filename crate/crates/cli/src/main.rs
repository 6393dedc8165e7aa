//! `kcolour` command-line front end.

use std::fs;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use kcolour::exact::{count_bruteforce, count_dp, Ensemble};
use kcolour::graph::{cycle_census, sample_gnm_multi, sample_gnm_simple, ModelParams, Multigraph};
use kcolour::harness::{read_jsonl, run, ExperimentConfig, ExperimentKind, Report};
use kcolour::second_moment::{maximize_f2bar, threshold_proxy};
use kcolour::{par, Error, Result};
use serde_json::json;

#[derive(Parser)]
#[command(name = "kcolour", version, about = "Colourings of sparse random graphs: exact counts, asymptotics and Monte Carlo checks")]
struct Cli {
    /// Master seed; overrides the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Flat TOML experiment config.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for output files instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum EnsembleArg {
    Multi,
    Simple,
}

impl From<EnsembleArg> for Ensemble {
    fn from(e: EnsembleArg) -> Self {
        match e {
            EnsembleArg::Multi => Ensemble::Multi,
            EnsembleArg::Simple => Ensemble::Simple,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Dp,
    Brute,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a random graph and print it in the text graph format.
    Sample {
        #[arg(long, default_value_t = 3)]
        k: usize,
        #[arg(long, default_value_t = 2.0)]
        dprime: f64,
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value_t = EnsembleArg::Multi)]
        ensemble: EnsembleArg,
    },
    /// Count proper k-colourings of a graph file.
    Count {
        #[arg(long)]
        graph: PathBuf,
        /// Number of colours; defaults to the one in the file header.
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, value_enum, default_value_t = Method::Dp)]
        method: Method,
    },
    /// Count short cycles of a graph file.
    Census {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, default_value_t = 5)]
        max_len: usize,
    },
    /// Exact first moment against its asymptotic formula.
    Moments(ExperimentArgs),
    /// Centred ln Z against the limit law.
    LimitCheck(ExperimentArgs),
    /// Conditional first moment given the cycle census.
    CondRatio(ExperimentArgs),
    /// Cycle census against independent Poisson laws.
    PoissonFit(ExperimentArgs),
    /// Exact second-moment ratio ladder.
    Secondmoment(ExperimentArgs),
    /// Monte Carlo mean of Z against its exact expectation.
    ExpectationCheck(ExperimentArgs),
    /// Maximize the uniform-margin pair exponent by mirror ascent.
    Optimize {
        #[arg(long, default_value_t = 3)]
        k: usize,
        #[arg(long)]
        d: f64,
        #[arg(long, default_value_t = 100)]
        starts: usize,
    },
    /// Largest d at which the barycentre stays the optimizer's maximum.
    ThresholdProxy {
        #[arg(long, default_value_t = 3)]
        k: usize,
        #[arg(long, default_value_t = 1e-3)]
        tol: f64,
        #[arg(long, default_value_t = 30)]
        starts: usize,
    },
    /// Re-emit a JSONL run record as JSONL or as a CSV summary.
    Report {
        #[arg(long)]
        input: PathBuf,
    },
}

/// Overrides applied on top of the preset or `--config`.
#[derive(Args, Default)]
struct ExperimentArgs {
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    dprime: Option<f64>,
    /// Vertex count or comma-separated ladder.
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long, value_enum)]
    ensemble: Option<EnsembleArg>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_len: Option<usize>,
    #[arg(long)]
    omega: Option<u32>,
    #[arg(long)]
    nu: Option<u32>,
    #[arg(long)]
    w_draws: Option<usize>,
    #[arg(long)]
    baseline_reps: Option<usize>,
    #[arg(long)]
    min_stratum: Option<usize>,
    /// Validate the config and guards, then stop.
    #[arg(long)]
    dry_run: bool,
}

impl ExperimentArgs {
    fn apply(&self, c: &mut ExperimentConfig) {
        macro_rules! set {
            ($($f:ident),*) => { $( if let Some(v) = self.$f.clone() { c.$f = v; } )* };
        }
        set!(k, dprime, n, samples, tol, max_len, w_draws, baseline_reps, min_stratum);
        if let Some(e) = self.ensemble {
            c.ensemble = e.into();
        }
        if self.omega.is_some() {
            c.omega = self.omega;
        }
        if self.nu.is_some() {
            c.nu = self.nu;
        }
    }
}

fn read_graph(path: &Path) -> Result<(Multigraph, Option<usize>)> {
    Multigraph::read_text(BufReader::new(fs::File::open(path)?))
}

/// Writes `body` to `<out>/<name>` or stdout.
fn emit(out: Option<&Path>, name: &str, body: &str) -> Result<()> {
    match out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            fs::write(dir.join(name), body)?;
        }
        None => io::stdout().write_all(body.as_bytes())?,
    }
    Ok(())
}

fn unix_seconds(t: SystemTime) -> f64 {
    t.duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0)
}

fn load_config(cli: &Cli, kind: ExperimentKind, args: &ExperimentArgs) -> Result<ExperimentConfig> {
    let mut config = match &cli.config {
        Some(path) => {
            let c = ExperimentConfig::from_toml(&fs::read_to_string(path)?)?;
            if c.kind != kind {
                return Err(Error::Config(vec![format!(
                    "config file is for `{}` but the subcommand is `{kind}`",
                    c.kind
                )]));
            }
            c
        }
        None => ExperimentConfig::preset(kind),
    };
    args.apply(&mut config);
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    config.validate()?;
    Ok(config)
}

fn experiment(cli: &Cli, kind: ExperimentKind, args: &ExperimentArgs) -> Result<()> {
    let config = load_config(cli, kind, args)?;
    if args.dry_run {
        println!("{}", json!({"valid": true, "config_hash": config.hash(), "config": config}));
        return Ok(());
    }
    let started = SystemTime::now();
    let clock = Instant::now();
    let report = run(&config)?;
    let out = cli.out.as_deref().or(config.output.as_deref().map(Path::new));
    write_report(&report, cli.format, out, kind.name())?;
    if let Some(dir) = out {
        let timing = json!({
            "config_hash": config.hash(),
            "started_unix": unix_seconds(started),
            "finished_unix": unix_seconds(SystemTime::now()),
            "elapsed_seconds": clock.elapsed().as_secs_f64(),
            "threads": par::current_threads(),
        });
        emit(Some(dir), &format!("{}.timing.json", kind.name()), &format!("{timing}\n"))?;
    }
    Ok(())
}

fn write_report(report: &Report, format: Format, out: Option<&Path>, stem: &str) -> Result<()> {
    match format {
        Format::Json => emit(out, &format!("{stem}.jsonl"), &report.to_jsonl()),
        Format::Csv => emit(out, &format!("{stem}.csv"), &report.to_csv()),
    }
}

fn execute(cli: &Cli) -> Result<()> {
    let out = cli.out.as_deref();
    let seed = cli.seed.unwrap_or(1);
    match &cli.command {
        Command::Sample { k, dprime, n, ensemble } => {
            let params = ModelParams::new(*k, *n, *dprime)?;
            let g = match ensemble {
                EnsembleArg::Multi => sample_gnm_multi(&params, seed)?,
                EnsembleArg::Simple => sample_gnm_simple(&params, seed)?,
            };
            emit(out, "graph.txt", &g.to_text(Some(*k)))
        }
        Command::Count { graph, k, method } => {
            let (g, file_k) = read_graph(graph)?;
            let k = k.or(file_k).ok_or_else(|| Error::InvalidParams("no --k and no k in the graph header".into()))?;
            let z = match method {
                Method::Dp => count_dp(&g, k)?,
                Method::Brute => count_bruteforce(&g, k)?,
            };
            emit(out, "count.txt", &format!("{z}\n"))
        }
        Command::Census { graph, max_len } => {
            let (g, _) = read_graph(graph)?;
            let c = cycle_census(&g, *max_len)?;
            match cli.format {
                Format::Json => emit(out, "census.json", &format!("{}\n", json!({"lengths": [2, max_len], "counts": c.counts()}))),
                Format::Csv => {
                    let mut s = String::from("l,count\n");
                    for (i, x) in c.counts().iter().enumerate() {
                        s.push_str(&format!("{},{x}\n", i + 2));
                    }
                    emit(out, "census.csv", &s)
                }
            }
        }
        Command::Moments(a) => experiment(cli, ExperimentKind::Moments, a),
        Command::LimitCheck(a) => experiment(cli, ExperimentKind::LimitCheck, a),
        Command::CondRatio(a) => experiment(cli, ExperimentKind::CondRatio, a),
        Command::PoissonFit(a) => experiment(cli, ExperimentKind::PoissonFit, a),
        Command::Secondmoment(a) => experiment(cli, ExperimentKind::Secondmoment, a),
        Command::ExpectationCheck(a) => experiment(cli, ExperimentKind::ExpectationCheck, a),
        Command::Optimize { k, d, starts } => {
            let r = maximize_f2bar(*d, *k, *starts, seed)?;
            match cli.format {
                Format::Json => emit(out, "optimize.json", &format!("{}\n", serde_json::to_string(&r)?)),
                Format::Csv => {
                    let mut s = String::from("start,kind,value,converged,iterations,distance_to_barycentre\n");
                    for (i, st) in r.starts.iter().enumerate() {
                        let kind = serde_json::to_value(st.kind)?;
                        s.push_str(&format!(
                            "{i},{},{:?},{},{},{:?}\n",
                            kind.as_str().unwrap_or_default(),
                            st.value,
                            st.converged,
                            st.iterations,
                            st.distance_to_barycentre
                        ));
                    }
                    emit(out, "optimize.csv", &s)
                }
            }
        }
        Command::ThresholdProxy { k, tol, starts } => {
            let r = threshold_proxy(*k, *tol, *starts, seed)?;
            match cli.format {
                Format::Json => emit(out, "threshold_proxy.json", &format!("{}\n", serde_json::to_string(&r)?)),
                Format::Csv => emit(
                    out,
                    "threshold_proxy.csv",
                    &format!(
                        "k,estimate,lower,upper,capped,evaluations\n{},{:?},{:?},{:?},{},{}\n",
                        r.k, r.estimate, r.bracket.0, r.bracket.1, r.capped, r.evaluations
                    ),
                ),
            }
        }
        Command::Report { input } => {
            let report = read_jsonl(BufReader::new(fs::File::open(input)?))?;
            let stem = report.header.experiment.clone();
            write_report(&report, cli.format, out, &stem)
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::GuardExceeded { .. } => 3,
        Error::Io(_) | Error::Json(_) | Error::NoConvergence { .. } => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.threads {
        Some(0) => Err(Error::InvalidParams("--threads must be at least 1".into())),
        Some(t) => par::with_threads(t, || execute(&cli)),
        None => execute(&cli),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if let Error::Config(list) = &e {
                eprintln!("error: invalid configuration");
                for m in list {
                    eprintln!("  - {m}");
                }
            } else {
                eprintln!("error: {e}");
            }
            ExitCode::from(exit_code(&e))
        }
    }
}
