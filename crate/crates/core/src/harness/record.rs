use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::rng::GENERATOR_VERSION;

/// Run-record schema. Readers accept any minor version of the same major.
pub const SCHEMA_VERSION: &str = "1.0";

/// First line of every run record.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Header {
    pub schema: String,
    pub experiment: String,
    pub config: ExperimentConfig,
    pub config_hash: String,
    pub seed: u64,
    pub generator: String,
}

impl Header {
    pub fn for_config(config: &ExperimentConfig) -> Header {
        Header {
            schema: SCHEMA_VERSION.to_string(),
            experiment: config.kind.name().to_string(),
            config: config.clone(),
            config_hash: config.hash(),
            seed: config.seed,
            generator: GENERATOR_VERSION.to_string(),
        }
    }
}

/// Observables of one sampled graph.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub n: usize,
    pub index: u64,
    pub edges: usize,
    /// `ln Z_k`, absent when the graph has no proper colouring or was not counted.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub ln_z: Option<f64>,
    /// Exact `Z_k` in decimal.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub z: Option<String>,
    /// `(C_2, ..., C_L)`.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub census: Option<Vec<u64>>,
}

/// One ladder point or stratum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub label: String,
    pub n: usize,
    pub statistic: f64,
    pub prediction: Option<f64>,
    pub stderr: Option<f64>,
    pub samples: usize,
    #[serde(skip_serializing_if = "Map::is_empty", default)]
    pub extra: Map<String, Value>,
}

impl SummaryRow {
    pub fn new(label: impl Into<String>, n: usize, statistic: f64) -> Self {
        SummaryRow {
            label: label.into(),
            n,
            statistic,
            prediction: None,
            stderr: None,
            samples: 0,
            extra: Map::new(),
        }
    }

    pub fn prediction(mut self, p: f64) -> Self {
        self.prediction = Some(p);
        self
    }

    pub fn stderr(mut self, se: f64) -> Self {
        self.stderr = se.is_finite().then_some(se);
        self
    }

    pub fn samples(mut self, s: usize) -> Self {
        self.samples = s;
        self
    }

    pub fn with(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.extra.insert(key.to_string(), value.into());
        self
    }

    pub fn extra_f64(&self, key: &str) -> Option<f64> {
        self.extra.get(key).and_then(Value::as_f64)
    }

    pub fn extra_bool(&self, key: &str) -> Option<bool> {
        self.extra.get(key).and_then(Value::as_bool)
    }
}

/// A single JSONL line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Record {
    Header(Header),
    Sample(SampleRecord),
    Summary(SummaryRow),
}

/// A finished experiment: header, per-sample observables in index order,
/// then summary rows.
#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub header: Header,
    pub samples: Vec<SampleRecord>,
    pub summary: Vec<SummaryRow>,
}

impl Report {
    pub fn new(config: &ExperimentConfig) -> Self {
        Report {
            header: Header::for_config(config),
            samples: Vec::new(),
            summary: Vec::new(),
        }
    }

    pub fn records(&self) -> impl Iterator<Item = Record> + '_ {
        std::iter::once(Record::Header(self.header.clone()))
            .chain(self.samples.iter().cloned().map(Record::Sample))
            .chain(self.summary.iter().cloned().map(Record::Summary))
    }

    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<()> {
        for r in self.records() {
            serde_json::to_writer(&mut out, &r)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn to_jsonl(&self) -> String {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("JSON is UTF-8")
    }

    /// One row per summary entry.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("label,n,statistic,prediction,stderr,samples\n");
        let opt = |x: Option<f64>| x.map(|v| format!("{v:?}")).unwrap_or_default();
        for r in &self.summary {
            s.push_str(&format!(
                "{},{},{:?},{},{},{}\n",
                r.label,
                r.n,
                r.statistic,
                opt(r.prediction),
                opt(r.stderr),
                r.samples
            ));
        }
        s
    }

    /// Summary rows with the given label.
    pub fn rows<'a>(&'a self, label: &'a str) -> impl Iterator<Item = &'a SummaryRow> + 'a {
        self.summary.iter().filter(move |r| r.label == label)
    }
}

fn check_schema(version: &str) -> Result<()> {
    let major = |v: &str| v.split('.').next().map(str::to_string);
    if major(version) != major(SCHEMA_VERSION) {
        return Err(Error::Schema(format!(
            "run record schema {version} is not readable by {SCHEMA_VERSION}"
        )));
    }
    Ok(())
}

/// Reads a run record written by [`Report::write_jsonl`].
pub fn read_jsonl<R: BufRead>(reader: R) -> Result<Report> {
    let mut header = None;
    let mut samples = Vec::new();
    let mut summary = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        // Look at the version before committing to this schema's shape.
        let raw: Value = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: i + 1,
            msg: e.to_string(),
        })?;
        if i == 0 || header.is_none() {
            let version = raw
                .get("schema")
                .and_then(Value::as_str)
                .ok_or_else(|| Error::Schema("first record is not a header".into()))?;
            check_schema(version)?;
        }
        let record: Record = serde_json::from_value(raw).map_err(|e| Error::Parse {
            line: i + 1,
            msg: e.to_string(),
        })?;
        match record {
            Record::Header(h) if header.is_none() => header = Some(h),
            Record::Header(_) => {
                return Err(Error::Parse {
                    line: i + 1,
                    msg: "second header".into(),
                })
            }
            Record::Sample(s) => samples.push(s),
            Record::Summary(s) => summary.push(s),
        }
    }
    let header = header.ok_or_else(|| Error::Schema("empty run record".into()))?;
    Ok(Report {
        header,
        samples,
        summary,
    })
}
