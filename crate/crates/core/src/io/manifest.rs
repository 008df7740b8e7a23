//! Record of what a command-line run consumed and produced.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    /// Cell parameter file, or the name of a bundled cell.
    pub cell: String,
    pub filter_config: Option<String>,
    /// Cycle file or `synthetic:` input string.
    pub input: String,
    pub out: String,
    pub seed: u64,
    pub filter: Option<String>,
    pub resample: Option<f64>,
    /// True initial SOC given on the command line.
    pub soc0: Option<f64>,
    /// Initial SOC the filters started from.
    pub initial_soc: Option<f64>,
    pub exclude_convergence: Option<f64>,
    /// Files written to `out`, in order.
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Domain(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::data(Some(e.line()), None, e.to_string()))
    }
}
