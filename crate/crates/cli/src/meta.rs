use std::fs;
use std::path::Path;

use randiter::Regime;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const META_FILE: &str = "meta.toml";

/// Problem metadata written next to the data files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub regime: String,
    pub n: usize,
    pub p: usize,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise_scale: Option<f64>,
    /// `‖z‖` of the stored residual component, inconsistent problems only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z_norm: Option<f64>,
}

impl Meta {
    pub fn regime(&self) -> Regime {
        match self.regime.as_str() {
            "consistent" => Regime::ConsistentUnique,
            "inconsistent" => Regime::Inconsistent,
            "underdetermined" => Regime::Underdetermined,
            _ => Regime::Unknown,
        }
    }

    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        let path = dir.join(META_FILE);
        let text = toml::to_string(self).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        fs::write(&path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
    }

    /// Reads `meta.toml` from `dir`; `None` when the file is absent.
    pub fn read(dir: &Path) -> Result<Option<Meta>, CliError> {
        let path = dir.join(META_FILE);
        if !path.exists() {
            return Ok(None);
        }
        let text = fs::read_to_string(&path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        toml::from_str(&text)
            .map(Some)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
    }
}
