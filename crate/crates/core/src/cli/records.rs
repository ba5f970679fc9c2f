//! Output records: one JSON object per line, plus CSV summaries.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::config::{ResolvedModel, RunConfig};
use crate::error::{Error, Result};
use crate::resonance::{DiophantineReport, SampleReport};
use crate::solver::{SolverParams, TorusResult};
use crate::verify::{InvarianceReport, PeriodicReport};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResonanceRecord {
    pub seed: u64,
    pub config: RunConfig,
    pub model: ResolvedModel,
    /// Check of the unperturbed frequencies (`eps = 0`).
    pub unperturbed: DiophantineReport,
    pub sample: SampleReport,
    pub radius: f64,
    pub gamma: f64,
    pub tau: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorusRecord {
    pub seed: u64,
    pub index: usize,
    /// `amplitude`, `eps-over-mu` or `sampled`.
    pub source: String,
    pub model: ResolvedModel,
    pub solver: SolverParams,
    pub eps: Vec<f64>,
    pub ok: bool,
    pub error: Option<String>,
    pub result: Option<TorusResult>,
}

/// One budgeted comparison.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub budget: f64,
    pub pass: bool,
}

impl Check {
    pub fn at_most(name: &str, value: f64, budget: f64) -> Self {
        Self { name: name.into(), value, budget, pass: value <= budget }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrequencyCheck {
    pub flow: Vec<f64>,
    pub measured: Vec<f64>,
    pub predicted: Vec<f64>,
    pub relative_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyRecord {
    pub seed: u64,
    pub index: usize,
    pub mu: f64,
    pub eps: Vec<f64>,
    pub periodic: Option<PeriodicReport>,
    pub invariance: Option<InvarianceReport>,
    pub frequencies: Option<FrequencyCheck>,
    pub checks: Vec<Check>,
    pub pass: bool,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub seed: u64,
    pub config: RunConfig,
    pub target: usize,
    pub mu: Vec<f64>,
    pub distance: Vec<f64>,
    pub w_over_mu: Vec<f64>,
    pub distance_slope: Option<f64>,
    pub w_norm_slope: Option<f64>,
    pub ratio_spread: Option<f64>,
    pub checks: Vec<Check>,
    pub pass: bool,
}

/// Serialized writer of line-delimited JSON.
pub struct JsonLines {
    out: BufWriter<File>,
}

impl JsonLines {
    pub fn create(path: &Path) -> Result<Self> {
        Ok(Self { out: BufWriter::new(File::create(path)?) })
    }

    pub fn write<T: Serialize>(&mut self, value: &T) -> Result<()> {
        serde_json::to_writer(&mut self.out, value).map_err(|e| Error::Parse(e.to_string()))?;
        self.out.write_all(b"\n")?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.out.flush()?;
        Ok(())
    }
}

pub fn read_json_lines<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let file = File::open(path)?;
    let mut out = Vec::new();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(
            serde_json::from_str(&line)
                .map_err(|e| Error::Parse(format!("{}:{}: {e}", path.display(), n + 1)))?,
        );
    }
    Ok(out)
}

/// Seventeen significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_csv(path: &Path, header: &[String], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Parse(e.to_string()))?;
    w.write_record(header).map_err(|e| Error::Parse(e.to_string()))?;
    for row in rows {
        w.write_record(row).map_err(|e| Error::Parse(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}
