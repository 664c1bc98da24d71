use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use relupoly::model::{DictionaryKind, LatentMode, ModelParams};

use crate::CliError;

/// One experiment, read from a `.toml` or `.json` file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_name")]
    pub name: String,
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub out: Option<PathBuf>,
    pub model: Option<ModelBlock>,
    pub dictionary: Option<DictionaryBlock>,
    #[serde(default)]
    pub estimators: Vec<EstimatorConfig>,
    pub lowerbound: Option<LowerBoundBlock>,
    pub approx: Option<ApproxBlock>,
}

fn default_name() -> String {
    "experiment".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelBlock {
    pub n: usize,
    /// Defaults to `n`.
    pub m: Option<usize>,
    pub k: usize,
    pub sigma: f64,
    pub gamma: f64,
    /// l1 cap `M`; defaults to `3 gamma (k + sqrt(k log m))`.
    pub l1_cap: Option<f64>,
    #[serde(default = "default_latent")]
    pub latent_mode: LatentMode,
    /// Label vector; defaults to all ones.
    pub w: Option<Vec<f64>>,
}

fn default_latent() -> LatentMode {
    LatentMode::SpikeGaussian
}

impl ModelBlock {
    pub fn params(&self) -> ModelParams {
        let m = self.m.unwrap_or(self.n);
        ModelParams {
            n: self.n,
            m,
            k: self.k,
            sigma: self.sigma,
            gamma: self.gamma,
            l1_cap: self.l1_cap,
            w: self.w.clone().unwrap_or_else(|| vec![1.0; m]),
            latent_mode: self.latent_mode,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DictionaryBlock {
    pub kind: DictionaryKind,
    #[serde(default)]
    pub seed: u64,
}

/// Estimator entry of a race.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EstimatorConfig {
    Zero,
    Linear,
    Bayes,
    /// Soft-threshold network. `tau` overrides the default threshold with constant `c`.
    Nn {
        c: Option<f64>,
        tau: Option<f64>,
    },
    /// Polynomial soft threshold; `degree` defaults to the calibrated schedule.
    Poly {
        c: Option<f64>,
        tau: Option<f64>,
        eps: Option<f64>,
        degree: Option<usize>,
    },
    /// Best degree-`degree` coordinatewise polynomial.
    Oracle {
        degree: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LowerBoundBlock {
    #[serde(default = "default_dmax")]
    pub dmax: usize,
}

fn default_dmax() -> usize {
    8
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ApproxBlock {
    pub degrees: Vec<usize>,
    pub tau: f64,
    #[serde(default = "default_r")]
    pub r: f64,
    #[serde(default = "default_grid")]
    pub grid: usize,
}

fn default_r() -> f64 {
    1.0
}

pub fn default_grid() -> usize {
    relupoly::relu_approx::CERTIFICATION_GRID
}

impl ExperimentConfig {
    /// Parses by extension: `.toml` or `.json`.
    pub fn from_str_with_extension(text: &str, extension: &str) -> Result<Self, CliError> {
        match extension {
            "toml" => {
                toml::from_str(text).map_err(|e| CliError::Config(format!("invalid TOML: {e}")))
            }
            "json" => serde_json::from_str(text)
                .map_err(|e| CliError::Config(format!("invalid JSON: {e}"))),
            other => Err(CliError::Config(format!(
                "unsupported config extension {other:?}; use .toml or .json"
            ))),
        }
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
        Self::from_str_with_extension(&text, &ext.to_ascii_lowercase())
    }

    pub fn model(&self) -> Result<&ModelBlock, CliError> {
        self.model
            .as_ref()
            .ok_or_else(|| CliError::Config("config has no [model] block".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOML: &str = r#"
name = "demo"
seed = 7
trials = 500

[model]
n = 64
k = 2
sigma = 1.0
gamma = 5.0

[dictionary]
kind = "identity"

[[estimators]]
kind = "nn"
c = 2.0

[[estimators]]
kind = "oracle"
degree = 3

[lowerbound]
dmax = 4
"#;

    #[test]
    fn toml_and_json_agree() {
        let a = ExperimentConfig::from_str_with_extension(TOML, "toml").unwrap();
        let json = serde_json::to_string(&a).unwrap();
        let b = ExperimentConfig::from_str_with_extension(&json, "json").unwrap();
        assert_eq!(a, b);
        assert_eq!(a.estimators.len(), 2);
        assert_eq!(a.estimators[1], EstimatorConfig::Oracle { degree: 3 });
        let p = a.model().unwrap().params();
        assert_eq!((p.n, p.m, p.w.len()), (64, 64, 64));
        assert_eq!(p.latent_mode, LatentMode::SpikeGaussian);
    }

    #[test]
    fn unknown_extension_and_fields_rejected() {
        assert!(ExperimentConfig::from_str_with_extension(TOML, "yaml").is_err());
        let bad = "name = \"x\"\nbogus = 1\n";
        assert!(ExperimentConfig::from_str_with_extension(bad, "toml").is_err());
    }
}
