//! Experiment configuration: a TOML file with the model source, the
//! algorithm list, horizon, budget, confidence level, seeds and an optional
//! cost sweep. Unknown keys are rejected; parse errors carry line context.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

use crate::model::{load_model, synthetic_medical, GenerativeModel, ModelError, ModelFile, SyntheticSpec};
use crate::trace::AlgorithmKind;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("failed to parse {path}:\n{message}")]
    Parse { path: PathBuf, message: String },
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Where the ground-truth model comes from: a JSON model file, a synthetic
/// recipe, or tables inlined in the config. Exactly one must be given.
#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub file: Option<PathBuf>,
    pub synthetic: Option<SyntheticSpec>,
    pub inline: Option<ModelFile>,
}

/// Base observation costs, overriding whatever the model carries.
#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct CostsSection {
    pub uniform: Option<f64>,
    pub per: Option<Vec<f64>>,
}

/// A sweep of uniform per-observation costs; each point is a full experiment.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub costs: Vec<f64>,
}

fn default_curve_points() -> usize {
    1000
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    /// Emit per-run regret curves at log-spaced checkpoints.
    #[serde(default)]
    pub curves: bool,
    /// Maximum number of checkpoints per run.
    #[serde(default = "default_curve_points")]
    pub curve_points: usize,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            curves: false,
            curve_points: default_curve_points(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub horizon: u64,
    /// Observation budget per step.
    pub m: usize,
    /// Gain parameter weighting rewards against costs.
    pub beta: f64,
    /// Confidence level of the planners.
    pub delta: f64,
    pub seeds: Vec<u64>,
    pub algorithms: Vec<AlgorithmKind>,
    pub model: ModelSection,
    #[serde(default)]
    pub costs: Option<CostsSection>,
    #[serde(default)]
    pub sweep: Option<SweepSection>,
    #[serde(default)]
    pub output: OutputSection,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml(&text).map_err(|e| match e {
            ConfigError::Parse { message, .. } => ConfigError::Parse {
                path: path.to_path_buf(),
                message,
            },
            other => other,
        })
    }

    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let config: ExperimentConfig =
            toml::from_str(text).map_err(|e| ConfigError::Parse {
                path: PathBuf::from("<inline>"),
                message: e.to_string(),
            })?;
        config.validate_shape()?;
        Ok(config)
    }

    /// Structural checks that do not need the model.
    fn validate_shape(&self) -> Result<(), ConfigError> {
        if self.horizon < 1 {
            return Err(ConfigError::Invalid("horizon must be at least 1".into()));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(ConfigError::Invalid(format!(
                "delta must be in (0, 1), got {}",
                self.delta
            )));
        }
        if !self.beta.is_finite() || self.beta < 1.0 {
            return Err(ConfigError::Invalid(format!(
                "beta must be a finite value >= 1, got {}",
                self.beta
            )));
        }
        if self.seeds.is_empty() {
            return Err(ConfigError::Invalid("seeds must be non-empty".into()));
        }
        if self.algorithms.is_empty() {
            return Err(ConfigError::Invalid("algorithms must be non-empty".into()));
        }
        let given = [
            self.model.file.is_some(),
            self.model.synthetic.is_some(),
            self.model.inline.is_some(),
        ]
        .iter()
        .filter(|&&b| b)
        .count();
        if given != 1 {
            return Err(ConfigError::Invalid(
                "model must give exactly one of: file, synthetic, inline".into(),
            ));
        }
        if self.sweep.is_some() && self.costs.is_some() {
            return Err(ConfigError::Invalid(
                "sweep and costs are mutually exclusive".into(),
            ));
        }
        if let Some(costs) = &self.costs {
            match (&costs.uniform, &costs.per) {
                (Some(_), None) | (None, Some(_)) => {}
                _ => {
                    return Err(ConfigError::Invalid(
                        "costs must give exactly one of: uniform, per".into(),
                    ))
                }
            }
            if let Some(u) = costs.uniform {
                if !u.is_finite() || u < 0.0 {
                    return Err(ConfigError::Invalid(format!(
                        "costs.uniform must be finite and non-negative, got {u}"
                    )));
                }
            }
            if let Some(per) = &costs.per {
                if per.iter().any(|c| !c.is_finite() || *c < 0.0) {
                    return Err(ConfigError::Invalid(
                        "costs.per entries must be finite and non-negative".into(),
                    ));
                }
            }
        }
        if let Some(sweep) = &self.sweep {
            if sweep.costs.is_empty() {
                return Err(ConfigError::Invalid("sweep.costs must be non-empty".into()));
            }
            if sweep.costs.iter().any(|c| !c.is_finite() || *c < 0.0) {
                return Err(ConfigError::Invalid(
                    "sweep.costs entries must be finite and non-negative".into(),
                ));
            }
        }
        if self.output.curves && self.output.curve_points < 2 {
            return Err(ConfigError::Invalid(
                "output.curve_points must be at least 2".into(),
            ));
        }
        Ok(())
    }

    /// Builds the base model (before any cost override) and runs the checks
    /// that need it.
    pub fn resolve_model(&self) -> Result<GenerativeModel, ConfigError> {
        let model = if let Some(path) = &self.model.file {
            load_model(path)?
        } else if let Some(spec) = &self.model.synthetic {
            synthetic_medical(spec)?
        } else if let Some(inline) = &self.model.inline {
            inline.clone().into_model()?
        } else {
            return Err(ConfigError::Invalid("model section is empty".into()));
        };
        let d = model.space().d();
        if self.m > d {
            return Err(ConfigError::Invalid(format!(
                "m = {} exceeds the model's {} observations",
                self.m, d
            )));
        }
        if let Some(costs) = &self.costs {
            if let Some(per) = &costs.per {
                if per.len() != d {
                    return Err(ConfigError::Invalid(format!(
                        "costs.per has {} entries, model has {} observations",
                        per.len(),
                        d
                    )));
                }
            }
        }
        Ok(model)
    }

    /// The cost points this experiment runs: `(label, per-observation costs)`.
    /// A sweep gives one point per swept uniform cost; otherwise the single
    /// point comes from the costs section or the model itself, labelled with
    /// the mean per-observation cost.
    pub fn cost_points(&self, model: &GenerativeModel) -> Vec<(f64, Vec<f64>)> {
        let d = model.space().d();
        if let Some(sweep) = &self.sweep {
            return sweep.costs.iter().map(|&c| (c, vec![c; d])).collect();
        }
        if let Some(costs) = &self.costs {
            if let Some(u) = costs.uniform {
                return vec![(u, vec![u; d])];
            }
            if let Some(per) = &costs.per {
                let label = per.iter().sum::<f64>() / d as f64;
                return vec![(label, per.clone())];
            }
        }
        let label = model.costs().iter().sum::<f64>() / d as f64;
        vec![(label, model.costs().to_vec())]
    }
}
