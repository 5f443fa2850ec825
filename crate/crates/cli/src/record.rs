//! Persisted run artefacts.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use bosonet::train::{SweepResult, TrainResult};
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::CliError;

/// `(axis, value)` series for one method.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub method: String,
    pub columns: (String, String),
    pub points: Vec<(f64, f64)>,
}

impl Curve {
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{},{}", self.columns.0, self.columns.1)?;
        for (x, y) in &self.points {
            writeln!(out, "{x},{y:e}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdPoint {
    pub method: String,
    pub n_s: f64,
    pub epsilon_th: Option<f64>,
    pub bracket: Option<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPayload {
    pub axis: String,
    pub curves: Vec<Curve>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub thresholds: Vec<ThresholdPoint>,
    /// Full trained sweeps, including bisection points and parameters.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sweeps: Vec<SweepResult>,
    /// Noiseless training behind a noise sweep.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<TrainResult>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Payload {
    Train(TrainResult),
    Sweep(SweepPayload),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub tool_version: String,
    pub config_hash: String,
    pub config: ExperimentConfig,
    pub seed: u64,
    pub started_unix: f64,
    pub finished_unix: f64,
    pub wall_time: f64,
    /// Largest cutoff any reported number was evaluated at.
    pub cutoff: usize,
    /// Largest truncation leakage among the reported trained results.
    pub leakage: f64,
    pub payload: Payload,
}

pub fn unix_now() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0)
}

impl ExperimentRecord {
    pub fn new(config: &ExperimentConfig, started: f64, cutoff: usize, leakage: f64, payload: Payload) -> Self {
        let finished = unix_now();
        ExperimentRecord {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            config_hash: config.hash(),
            config: config.clone(),
            seed: config.train.seed,
            started_unix: started,
            finished_unix: finished,
            wall_time: finished - started,
            cutoff,
            leakage,
            payload,
        }
    }

    /// Writes `record.json` and the timing-free `payload.json`.
    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("record.json"), serde_json::to_string_pretty(self).expect("record serializes"))?;
        fs::write(
            dir.join("payload.json"),
            serde_json::to_string_pretty(&self.payload).expect("payload serializes"),
        )?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let path: PathBuf = if path.is_dir() { path.join("record.json") } else { path.to_path_buf() };
        let text = fs::read_to_string(&path)
            .map_err(|e| CliError::MissingInput(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::MissingInput(format!("{} is not a record: {e}", path.display())))
    }

    pub fn train_result(&self) -> Result<&TrainResult, CliError> {
        match &self.payload {
            Payload::Train(r) => Ok(r),
            Payload::Sweep(SweepPayload { reference: Some(r), .. }) => Ok(r),
            Payload::Sweep(_) => Err(CliError::MissingInput("record holds no trained circuit".into())),
        }
    }
}

pub fn write_csv(dir: &Path, name: &str, f: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> Result<(), CliError> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    fs::write(dir.join(name), buf)?;
    Ok(())
}
