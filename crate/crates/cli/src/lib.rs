//! Command-line front end: layered `key = value` configuration with unit
//! suffixes, figure presets, sweeps, and the subcommand bodies behind the
//! `zalm` binary.

pub mod commands;
pub mod config;
pub mod output;
pub mod presets;
pub mod sweep;
pub mod units;

use std::path::Path;

use config::{ConfigBuilder, ConfigError, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error("computation error: {0}")]
    Compute(zalm_core::Error),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

impl From<zalm_core::Error> for CliError {
    fn from(e: zalm_core::Error) -> Self {
        match e {
            zalm_core::Error::InvalidParameter { name, reason } => {
                CliError::Config(ConfigError::new(name, reason))
            }
            other => CliError::Compute(other),
        }
    }
}

impl CliError {
    /// 2 for configuration problems, 3 for everything downstream.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Compute(_) | CliError::Io { .. } => 3,
        }
    }
}

/// Layers defaults, an optional preset, an optional file, and `key=value`
/// overrides, in that order.
pub fn load_config(
    preset: Option<&str>,
    file: Option<&Path>,
    overrides: &[String],
) -> Result<RunConfig, CliError> {
    let mut b = ConfigBuilder::default();
    if let Some(name) = preset {
        let p = presets::preset(name).ok_or_else(|| {
            let names: Vec<&str> = presets::PRESETS.iter().map(|p| p.name).collect();
            ConfigError::new(
                "--preset",
                format!(
                    "unknown preset `{name}`; expected one of {}",
                    names.join(", ")
                ),
            )
        })?;
        b.add_text(&presets::preset_text(p), p.name)?;
    }
    if let Some(path) = file {
        let text = std::fs::read_to_string(path).map_err(|e| {
            ConfigError::new(path.display().to_string(), format!("cannot read: {e}"))
        })?;
        b.add_text(&text, &path.display().to_string())?;
    }
    for o in overrides {
        b.add_override(o)?;
    }
    Ok(b.build()?)
}
