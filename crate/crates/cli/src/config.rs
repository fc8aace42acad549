//! `--config` files: a flat JSON object whose keys mirror the long flags with
//! dashes replaced by underscores. Flags given on the command line win.

use std::fs;
use std::path::Path;

use serde::Deserialize;

use crate::error::CliError;

#[derive(Debug, Default, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub omega: Option<f64>,
    pub omega0: Option<f64>,
    pub lambda: Option<f64>,
    pub kappa: Option<f64>,
    pub chi: Option<f64>,
    pub xi1: Option<f64>,
    pub xi2: Option<f64>,
    pub omega_q_prime: Option<f64>,

    pub delta: Option<f64>,
    pub method: Option<String>,
    pub seeds: Option<usize>,

    pub delta_min: Option<f64>,
    pub delta_max: Option<f64>,
    pub delta_count: Option<usize>,
    pub lambda_min: Option<f64>,
    pub lambda_max: Option<f64>,
    pub lambda_count: Option<usize>,

    pub wrt: Option<String>,
    pub from: Option<f64>,
    pub to: Option<f64>,
    pub step: Option<f64>,

    pub n: Option<Vec<usize>>,
    pub cutoff: Option<usize>,
    pub full_qubit: Option<bool>,
    pub include_chi: Option<bool>,
    pub max_dim: Option<usize>,

    pub z: Option<f64>,
    pub theta: Option<f64>,
    pub sign: Option<String>,
    pub target: Option<f64>,

    pub output: Option<String>,
    pub format: Option<String>,
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = fs::read_to_string(path).map_err(|e| {
            CliError::invalid("--config", format!("cannot read {}: {e}", path.display()))
        })?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::invalid("--config", format!("{}: {e}", path.display())))
    }
}

/// Command-line value if present, else the config value.
pub fn pick<T: Clone>(flag: Option<T>, config: &Option<T>) -> Option<T> {
    flag.or_else(|| config.clone())
}
