//! TOML run configuration. Every field is optional; command-line flags
//! override file values, which override built-in defaults.
//!
//! ```toml
//! seed = 7
//!
//! [classifier]
//! kind = "softmax"
//! epochs = 200
//!
//! [cp]
//! preset = "traditional"   # or "deep"
//! theta = 0.7
//!
//! [eval]
//! outer_k = 5
//! grid = [0.5, 0.6, 0.7]
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::classifiers::{ClassifierSpec, LogitOptions};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub classifier: Option<ClassifierSpec>,
    pub cp: CpSection,
    pub eval: EvalSection,
    pub synthetic: SyntheticSection,
    pub features: FeatureSection,
}

/// `(k, e, n)` settings for the two feature families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    /// k = 5, e = 40, n = 50
    Traditional,
    /// k = 150, e = 2, n = 50
    Deep,
}

impl Preset {
    pub fn kens(self) -> (usize, usize, usize) {
        match self {
            Preset::Traditional => (5, 40, 50),
            Preset::Deep => (150, 2, 50),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CpSection {
    pub preset: Option<Preset>,
    pub k: Option<usize>,
    pub e: Option<usize>,
    pub n: Option<usize>,
    pub theta: Option<f64>,
    pub logit: Option<LogitOptions>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalSection {
    pub outer_k: Option<usize>,
    pub grid: Option<Vec<f64>>,
    /// Select θ on a validation holdout even when `cp.theta` is set.
    pub auto_theta: Option<bool>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticSection {
    pub class_count: Option<usize>,
    pub dim: Option<usize>,
    pub samples: Option<usize>,
    pub priors: Option<Vec<f64>>,
    pub cluster_separation: Option<f64>,
    pub contamination_fraction: Option<f64>,
    pub contamination_noise_scale: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeatureSection {
    pub points: Option<usize>,
    pub radius: Option<f64>,
    pub grid: Option<usize>,
    pub pca_dim: Option<usize>,
}

impl RunConfig {
    pub fn parse(text: &str, source: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| {
            let message = e.message().to_string();
            let line = e
                .span()
                .map(|s| text[..s.start.min(text.len())].matches('\n').count() as u64 + 1)
                .unwrap_or(0);
            Error::Parse {
                path: source.to_string(),
                line,
                message,
            }
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, &path.display().to_string())
    }
}
