//! Experiment configuration: schema, environment overrides and hashing.

use std::path::Path;

use bosonet::circuit::Architecture;
use bosonet::train::TrainConfig;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;
pub const ENV_PREFIX: &str = "BOSONET_";

/// Baseline or trained curve written as one CSV per method.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Vqc,
    EaVqc,
    GaussianHomodyne,
    HelstromSqueezed,
    NumberInterferometry,
    OnState,
    Theorem2Bound,
    ThresholdAsymptotic,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Vqc => "vqc",
            Method::EaVqc => "ea-vqc",
            Method::GaussianHomodyne => "gaussian-homodyne",
            Method::HelstromSqueezed => "helstrom-squeezed",
            Method::NumberInterferometry => "number-interferometry",
            Method::OnState => "on-state",
            Method::Theorem2Bound => "theorem2-bound",
            Method::ThresholdAsymptotic => "threshold-asymptotic",
        }
    }
}

/// Swept quantity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", deny_unknown_fields)]
pub enum SweepAxis {
    /// Signal amplitude; the task family comes from `train.task`.
    Epsilon { values: Vec<f64> },
    /// Amplitude-noise standard deviation at the task's own `ε`.
    Delta { values: Vec<f64> },
    /// Photon budgets, each swept over `epsilon_grid` for its threshold.
    #[serde(rename = "n-s")]
    NS { values: Vec<f64>, epsilon_grid: Vec<f64> },
}

impl SweepAxis {
    pub fn values(&self) -> &[f64] {
        match self {
            SweepAxis::Epsilon { values } | SweepAxis::Delta { values } | SweepAxis::NS { values, .. } => values,
        }
    }

    pub fn column(&self) -> &'static str {
        match self {
            SweepAxis::Epsilon { .. } => "epsilon",
            SweepAxis::Delta { .. } => "delta",
            SweepAxis::NS { .. } => "n_s_photons",
        }
    }
}

fn default_tolerance() -> f64 {
    1e-8
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub methods: Vec<Method>,
    /// Zero-error tolerance for threshold detection.
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    /// Architecture for `ea-vqc`; defaults to the training one plus one
    /// ancilla qumode.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ea_architecture: Option<Architecture>,
    /// Fock level of the interferometer probe; defaults to `N_S`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interferometry_fock: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub train: TrainConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(CliError::Config(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        self.train.validate()?;
        if let Some(sweep) = &self.sweep {
            let values = sweep.axis.values();
            if values.is_empty() {
                return Err(CliError::Config("sweep.axis.values is empty".into()));
            }
            if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                return Err(CliError::Config("sweep.axis.values must be finite and non-negative".into()));
            }
            if let SweepAxis::NS { epsilon_grid, .. } = &sweep.axis {
                if epsilon_grid.is_empty() {
                    return Err(CliError::Config("sweep.axis.epsilon_grid is empty".into()));
                }
            }
            if sweep.methods.is_empty() {
                return Err(CliError::Config("sweep.methods is empty".into()));
            }
            if !(sweep.tolerance > 0.0) {
                return Err(CliError::Config("sweep.tolerance must be positive".into()));
            }
            if let Some(ea) = &sweep.ea_architecture {
                ea.validate()?;
            }
        }
        Ok(())
    }

    /// Hex SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }

    pub fn run_dir(&self, out: &Path) -> std::path::PathBuf {
        out.join(&self.hash()[..16])
    }
}

/// Built-in figure configurations.
pub fn preset(name: &str) -> Option<&'static str> {
    Some(match name {
        "fig3a" => include_str!("../presets/fig3a.json"),
        "fig4a" => include_str!("../presets/fig4a.json"),
        "fig5b" => include_str!("../presets/fig5b.json"),
        "fig6a" => include_str!("../presets/fig6a.json"),
        "fig7" => include_str!("../presets/fig7.json"),
        _ => return None,
    })
}

pub const PRESETS: [&str; 5] = ["fig3a", "fig4a", "fig5b", "fig6a", "fig7"];

/// Writes `BOSONET_A__B=v` as `{"a": {"b": v}}` into `doc`. Values are
/// parsed as JSON when possible and kept as strings otherwise.
pub fn apply_overrides<I, K, V>(doc: &mut Value, vars: I) -> Result<(), CliError>
where
    I: IntoIterator<Item = (K, V)>,
    K: AsRef<str>,
    V: AsRef<str>,
{
    let mut vars: Vec<(String, String)> = vars
        .into_iter()
        .filter_map(|(k, v)| {
            k.as_ref()
                .strip_prefix(ENV_PREFIX)
                .map(|rest| (rest.to_lowercase(), v.as_ref().to_string()))
        })
        .collect();
    vars.sort();
    for (key, raw) in vars {
        let path: Vec<&str> = key.split("__").collect();
        if path.iter().any(|p| p.is_empty()) {
            return Err(CliError::Config(format!("malformed override key {ENV_PREFIX}{}", key.to_uppercase())));
        }
        let value = serde_json::from_str(&raw).unwrap_or(Value::String(raw));
        let (last, parents) = path.split_last().expect("split yields at least one segment");
        let mut node = &mut *doc;
        for seg in parents {
            let obj = node
                .as_object_mut()
                .ok_or_else(|| CliError::Config(format!("override {key}: `{seg}` is not inside an object")))?;
            node = obj.entry((*seg).to_string()).or_insert_with(|| Value::Object(Default::default()));
        }
        node.as_object_mut()
            .ok_or_else(|| CliError::Config(format!("override {key}: `{last}` is not inside an object")))?
            .insert((*last).to_string(), value);
    }
    Ok(())
}

/// Parses `text`, applies overrides and the seed flag, then validates.
pub fn resolve<I, K, V>(text: &str, vars: I, seed: Option<u64>) -> Result<ExperimentConfig, CliError>
where
    I: IntoIterator<Item = (K, V)>,
    K: AsRef<str>,
    V: AsRef<str>,
{
    let mut doc: Value = serde_json::from_str(text).map_err(|e| CliError::Config(format!("invalid JSON: {e}")))?;
    apply_overrides(&mut doc, vars)?;
    let mut config: ExperimentConfig =
        serde_json::from_value(doc).map_err(|e| CliError::Config(format!("schema violation: {e}")))?;
    if let Some(seed) = seed {
        config.train.seed = seed;
    }
    config.validate()?;
    Ok(config)
}
