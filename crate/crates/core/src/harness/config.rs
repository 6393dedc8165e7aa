use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::exact::{composition_count, Ensemble, EXPECTATION_MAX_TERMS};
use crate::graph::{BalanceSpec, ModelParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    /// Centred `ln Z` against the limit law `W`, over an n-ladder.
    LimitCheck,
    /// `E[Z | census] / E[Z]` per census stratum.
    CondRatio,
    /// Exact first moment against its asymptotic formula.
    Moments,
    /// Short-cycle census against product Poisson.
    PoissonFit,
    /// Exact second-moment ratio against its limit.
    Secondmoment,
    /// Monte Carlo mean of `Z` against the exact expectation.
    ExpectationCheck,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 6] = [
        ExperimentKind::LimitCheck,
        ExperimentKind::CondRatio,
        ExperimentKind::Moments,
        ExperimentKind::PoissonFit,
        ExperimentKind::Secondmoment,
        ExperimentKind::ExpectationCheck,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::LimitCheck => "limit-check",
            ExperimentKind::CondRatio => "cond-ratio",
            ExperimentKind::Moments => "moments",
            ExperimentKind::PoissonFit => "poisson-fit",
            ExperimentKind::Secondmoment => "secondmoment",
            ExperimentKind::ExpectationCheck => "expectation-check",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        ExperimentKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown experiment kind `{s}`")))
    }
}

/// Everything needed to rerun an experiment bit for bit.
///
/// The TOML form is flat: one key per field, unknown keys rejected.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub k: usize,
    pub dprime: f64,
    /// Vertex counts; a ladder for trend experiments.
    pub n: Vec<usize>,
    pub ensemble: Ensemble,
    /// Graph samples per ladder point.
    pub samples: usize,
    pub seed: u64,
    /// Truncation tolerance for the limit law.
    pub tol: f64,
    /// Longest cycle length in the census.
    pub max_len: usize,
    pub omega: Option<u32>,
    pub nu: Option<u32>,
    /// Size of the reference `W` batch.
    pub w_draws: usize,
    /// Independent batches in the self-distance baseline.
    pub baseline_reps: usize,
    /// Smallest stratum size compared against its prediction.
    pub min_stratum: usize,
    pub output: Option<String>,
}

const KEYS: [&str; 15] = [
    "kind",
    "k",
    "dprime",
    "n",
    "ensemble",
    "samples",
    "seed",
    "tol",
    "max_len",
    "omega",
    "nu",
    "w_draws",
    "baseline_reps",
    "min_stratum",
    "output",
];

impl ExperimentConfig {
    /// Desk-scale defaults (`k = 3`, `d' = 2`) for each experiment.
    pub fn preset(kind: ExperimentKind) -> Self {
        let (n, samples, max_len, ensemble) = match kind {
            ExperimentKind::LimitCheck => (vec![16, 24, 32, 40], 2000, 3, Ensemble::Simple),
            ExperimentKind::CondRatio => (vec![24], 20_000, 3, Ensemble::Multi),
            ExperimentKind::Moments => (vec![20, 40, 80, 160], 0, 3, Ensemble::Multi),
            ExperimentKind::PoissonFit => (vec![2000], 10_000, 5, Ensemble::Multi),
            ExperimentKind::Secondmoment => (vec![12, 16, 20], 0, 3, Ensemble::Multi),
            ExperimentKind::ExpectationCheck => (vec![12], 10_000, 3, Ensemble::Multi),
        };
        ExperimentConfig {
            kind,
            k: 3,
            dprime: 2.0,
            n,
            ensemble,
            samples,
            seed: 1,
            tol: 1e-6,
            max_len,
            omega: None,
            nu: None,
            w_draws: 1_000_000,
            baseline_reps: 20,
            min_stratum: 100,
            output: None,
        }
    }

    /// Parses flat TOML. All problems are reported together.
    pub fn from_toml(text: &str) -> Result<Self> {
        let table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::Config(vec![e.to_string()]))?;
        let mut errors = Vec::new();
        for key in table.keys() {
            if !KEYS.contains(&key.as_str()) {
                errors.push(format!("unknown key `{key}`"));
            }
        }
        let kind = match table.get("kind") {
            None => {
                errors.push("missing key `kind`".to_string());
                None
            }
            Some(v) => match v.as_str().map(str::parse::<ExperimentKind>) {
                Some(Ok(k)) => Some(k),
                _ => {
                    errors.push(format!(
                        "`kind` must be one of {}",
                        ExperimentKind::ALL.map(|k| k.name()).join(", ")
                    ));
                    None
                }
            },
        };
        let mut cfg = ExperimentConfig::preset(kind.unwrap_or(ExperimentKind::Moments));
        for (key, value) in &table {
            let r = cfg.set(key, value);
            if let Err(msg) = r {
                errors.push(msg);
            }
        }
        if kind.is_some() {
            errors.extend(cfg.problems());
        }
        if errors.is_empty() {
            Ok(cfg)
        } else {
            Err(Error::Config(errors))
        }
    }

    fn set(&mut self, key: &str, value: &toml::Value) -> std::result::Result<(), String> {
        let uint = |v: &toml::Value| -> std::result::Result<u64, String> {
            v.as_integer()
                .and_then(|i| u64::try_from(i).ok())
                .ok_or_else(|| format!("`{key}` must be a non-negative integer"))
        };
        let float = |v: &toml::Value| -> std::result::Result<f64, String> {
            v.as_float()
                .or_else(|| v.as_integer().map(|i| i as f64))
                .ok_or_else(|| format!("`{key}` must be a number"))
        };
        match key {
            "kind" => {}
            "k" => self.k = uint(value)? as usize,
            "dprime" => self.dprime = float(value)?,
            "n" => {
                self.n = match value {
                    toml::Value::Array(a) => a.iter().map(|v| uint(v).map(|x| x as usize)).collect::<std::result::Result<_, _>>()?,
                    v => vec![uint(v)? as usize],
                }
            }
            "ensemble" => {
                self.ensemble = match value.as_str() {
                    Some("multi") => Ensemble::Multi,
                    Some("simple") => Ensemble::Simple,
                    _ => return Err("`ensemble` must be \"multi\" or \"simple\"".into()),
                }
            }
            "samples" => self.samples = uint(value)? as usize,
            "seed" => self.seed = uint(value)?,
            "tol" => self.tol = float(value)?,
            "max_len" => self.max_len = uint(value)? as usize,
            "omega" => self.omega = Some(uint(value)? as u32),
            "nu" => self.nu = Some(uint(value)? as u32),
            "w_draws" => self.w_draws = uint(value)? as usize,
            "baseline_reps" => self.baseline_reps = uint(value)? as usize,
            "min_stratum" => self.min_stratum = uint(value)? as usize,
            "output" => {
                self.output = Some(value.as_str().ok_or("`output` must be a string")?.to_string());
            }
            _ => {}
        }
        Ok(())
    }

    /// Validation problems other than work guards.
    pub fn problems(&self) -> Vec<String> {
        let mut e = Vec::new();
        if self.k < 2 || self.k > 255 {
            e.push(format!("k = {} outside 2..=255", self.k));
        }
        if !self.dprime.is_finite() || self.dprime < 0.0 {
            e.push(format!("dprime = {} must be finite and >= 0", self.dprime));
        }
        if self.n.is_empty() {
            e.push("n must list at least one vertex count".into());
        }
        if self.n.iter().any(|&n| n < 2) {
            e.push("every n must be >= 2".into());
        }
        if !(self.tol > 0.0) {
            e.push(format!("tol = {} must be positive", self.tol));
        }
        if self.max_len < 2 {
            e.push(format!("max_len = {} must be >= 2", self.max_len));
        }
        match (self.omega, self.nu) {
            (None, None) => {}
            (Some(w), Some(v)) => {
                if let Err(err) = BalanceSpec::new(w, v) {
                    e.push(err.to_string());
                }
            }
            _ => e.push("omega and nu must be given together".into()),
        }
        let needs_samples = matches!(
            self.kind,
            ExperimentKind::LimitCheck
                | ExperimentKind::CondRatio
                | ExperimentKind::PoissonFit
                | ExperimentKind::ExpectationCheck
        );
        if needs_samples && self.samples < 2 {
            e.push(format!("{} needs samples >= 2", self.kind));
        }
        let km1sq = ((self.k.max(1) - 1) * (self.k.max(1) - 1)) as f64;
        match self.kind {
            ExperimentKind::LimitCheck => {
                if self.k < 3 {
                    e.push("limit-check needs k >= 3".into());
                }
                if self.dprime >= km1sq {
                    e.push(format!("limit-check needs dprime < (k-1)^2 = {km1sq}"));
                }
                if self.w_draws < 1 || self.baseline_reps < 1 {
                    e.push("limit-check needs w_draws >= 1 and baseline_reps >= 1".into());
                }
                if self.ensemble != Ensemble::Simple {
                    e.push("limit-check samples the simple ensemble; set ensemble = \"simple\"".into());
                }
            }
            ExperimentKind::Secondmoment if self.dprime >= km1sq => {
                e.push(format!("secondmoment needs dprime < (k-1)^2 = {km1sq}"));
            }
            ExperimentKind::CondRatio if self.ensemble != Ensemble::Multi => {
                e.push("cond-ratio samples the multigraph ensemble; set ensemble = \"multi\"".into());
            }
            _ => {}
        }
        for &n in &self.n {
            if n >= 2 && self.k >= 2 {
                if let Ok(p) = ModelParams::new(self.k, n, self.dprime) {
                    if self.ensemble == Ensemble::Simple && p.m as u64 > p.pairs() {
                        e.push(format!("n = {n}: m = {} exceeds the number of vertex pairs", p.m));
                    }
                }
            }
        }
        e
    }

    /// Refuses configurations whose exact sums exceed the work guards.
    pub fn check_guards(&self) -> Result<()> {
        let parts = match self.kind {
            ExperimentKind::Secondmoment => self.k * self.k,
            ExperimentKind::PoissonFit => return Ok(()),
            _ => self.k,
        };
        for &n in &self.n {
            let terms = composition_count(n, parts);
            if terms > EXPECTATION_MAX_TERMS {
                return Err(Error::guard("expectation_terms", EXPECTATION_MAX_TERMS, terms));
            }
        }
        Ok(())
    }

    /// Full pre-launch validation: problems first, then guards.
    pub fn validate(&self) -> Result<()> {
        let p = self.problems();
        if !p.is_empty() {
            return Err(Error::Config(p));
        }
        self.check_guards()
    }

    pub fn balance(&self) -> Option<BalanceSpec> {
        match (self.omega, self.nu) {
            (Some(w), Some(v)) => BalanceSpec::new(w, v).ok(),
            _ => None,
        }
    }

    /// Hex SHA-256 of the canonical JSON form, ignoring `output`.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.output = None;
        let json = serde_json::to_string(&c).expect("config serializes");
        Sha256::digest(json.as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}
