//! TOML loading with key-path and line reporting.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::properties::{FluidPropertyTable, PropertyError, NOMINAL_PRESSURE};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("config key `{key}`{}: {message}", line.map(|l| format!(" (line {l})")).unwrap_or_default())]
    Schema { key: String, line: Option<usize>, message: String },
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error(transparent)]
    Property(#[from] PropertyError),
}

/// Parses a TOML document, reporting the offending key path and line.
pub fn parse_toml<T: DeserializeOwned>(text: &str) -> Result<T, ConfigError> {
    let line_of = |span: Option<std::ops::Range<usize>>| {
        span.map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1)
    };
    let de = toml::Deserializer::parse(text).map_err(|e| ConfigError::Schema {
        key: String::new(),
        line: line_of(e.span()),
        message: e.message().to_string(),
    })?;
    serde_path_to_error::deserialize(de).map_err(|e| {
        let key = e.path().to_string();
        let inner = e.into_inner();
        ConfigError::Schema { key, line: line_of(inner.span()), message: inner.message().to_string() }
    })
}

pub fn load_toml<T: DeserializeOwned>(path: &Path) -> Result<T, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
    parse_toml(&text)
}

/// Where helium properties come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FluidSource {
    /// A `T,rho,mu,lambda,cp,h` table; the bundled ideal-gas model when absent.
    pub table_csv: Option<PathBuf>,
    pub pressure: f64,
    pub t_min: f64,
    pub t_max: f64,
    pub spacing: f64,
}

impl Default for FluidSource {
    fn default() -> Self {
        Self { table_csv: None, pressure: NOMINAL_PRESSURE, t_min: 500.0, t_max: 2100.0, spacing: 1.0 }
    }
}

impl FluidSource {
    pub fn build(&self) -> Result<FluidPropertyTable, ConfigError> {
        Ok(match &self.table_csv {
            Some(path) => FluidPropertyTable::from_csv_path(self.pressure, path)?,
            None => FluidPropertyTable::helium(self.pressure, self.t_min, self.t_max, self.spacing)?,
        })
    }
}
