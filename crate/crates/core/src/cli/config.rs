//! Experiment config files.
//!
//! The format is TOML: top-level scalar keys followed by one `[[node]]`
//! table per node, in node order.
//!
//! ```toml
//! lambda = 100.0                          # arrival rate, requests/s (> 0)
//! negative_cycle_policy = "repeat-backoff" # or "error"; optional
//! max_cycles = 10000                      # optional, > 0
//!
//! [[node]]
//! alpha = 5.0   # growth rate, requests/s² (> 0)
//! beta = 0.5    # backoff factor, in (0, 1)
//! u0 = 0.0      # initial admission rate, optional, default 0
//! w0 = 7.5      # initial node queue, optional, default 0
//! ```
//!
//! Unknown keys are rejected.

use std::fs;
use std::path::Path;

use sha2::{Digest, Sha256};

use super::CliError;
use crate::error::ConfigError;
use crate::model::{SystemConfig, ValidatedConfig};

pub fn parse_config(text: &str) -> Result<SystemConfig, ConfigError> {
    toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
}

pub fn load_config(path: &Path) -> Result<ValidatedConfig, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|source| CliError::ReadConfig { path: path.to_path_buf(), source })?;
    Ok(parse_config(&text)?.validate()?)
}

pub fn to_config_text(cfg: &SystemConfig) -> String {
    toml::to_string(cfg).expect("config is always representable as TOML")
}

/// SHA-256 of the canonical JSON form, so formatting and comments in the
/// source file do not change it.
pub fn config_hash(cfg: &SystemConfig) -> String {
    let canonical = serde_json::to_vec(cfg).expect("config serializes");
    Sha256::digest(&canonical).iter().map(|b| format!("{b:02x}")).collect()
}
