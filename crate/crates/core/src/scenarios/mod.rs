//! Case builders, runners and their CSV outputs.

mod buoyancy_point;
mod config;
mod lofa;
mod output;
mod pipe;
mod ramp;

use thiserror::Error;

use crate::buoyancy::BuoyancyError;
use crate::correlations::CorrelationError;
use crate::solver::SolverError;

pub use buoyancy_point::{flow_conditions, scale_point, BuoyancyPoint};
pub use config::{load_toml, parse_toml, ConfigError, FluidSource};
pub use lofa::{
    build_lofa_case, run_lofa, run_steady, run_transient, steady_log_table, CoreFlow, LineSnapshot, LineSpec,
    LofaCase, LofaCaseId, LofaChannel, LofaConfig, PowerSettings, ProbeMedium, ProbeSample, ProbeSpec, ResolvedProbe,
    SteadyLogRow, SteadyOutcome, SteadySettings, TransientRecord, TransientSettings,
};
pub use output::{format_float, write_text, CsvTable, OutputError};
pub use pipe::{build_pipe_case, profile_table, run_pipe, summary_table, PipeCase, PipeRun, PipeSettings};
pub use ramp::{build_ramp_case, mid_ramp, ramp_table, run_ramp, RampCase, RampDirection, RampSample, RampSettings, RampSpec};

pub const BUNDLED_RAMP: &str = include_str!("../../configs/ramp.toml");
pub const BUNDLED_PIPE: &str = include_str!("../../configs/pipe.toml");
pub const BUNDLED_LOFA: &str = include_str!("../../configs/lofa.toml");

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Output(#[from] OutputError),
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error("steady phase not converged by t = {time} s (change {change:e} > {tolerance:e})")]
    NotConverged { time: f64, change: f64, tolerance: f64 },
}

impl From<CorrelationError> for ScenarioError {
    fn from(e: CorrelationError) -> Self {
        Self::Solver(e.into())
    }
}

impl From<BuoyancyError> for ScenarioError {
    fn from(e: BuoyancyError) -> Self {
        Self::Solver(e.into())
    }
}

/// One declaratively built case.
#[derive(Debug, Clone, PartialEq)]
pub enum ScenarioSpec {
    Ramp(RampCase),
    Pipe(PipeCase),
    BuoyancyPoint(BuoyancyPoint),
    Lofa(Box<LofaCase>),
}

impl ScenarioSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::Ramp(_) => "ramp",
            Self::Pipe(_) => "pipe",
            Self::BuoyancyPoint(_) => "buoyancy_point",
            Self::Lofa(_) => "lofa",
        }
    }
}

/// Ramp config file layout.
#[derive(Debug, Clone, PartialEq, Default, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RampFile {
    pub fluid: FluidSource,
    pub ramp: RampSettings,
}

#[derive(Debug, Clone, PartialEq, Default, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipeFile {
    pub fluid: FluidSource,
    pub pipe: PipeSettings,
}

#[derive(Debug, Clone, PartialEq, Default, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LofaFile {
    pub fluid: FluidSource,
    pub lofa: LofaConfig,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_configs_match_defaults() {
        assert_eq!(parse_toml::<RampFile>(BUNDLED_RAMP).unwrap(), RampFile::default());
        assert_eq!(parse_toml::<PipeFile>(BUNDLED_PIPE).unwrap(), PipeFile::default());
        assert_eq!(parse_toml::<LofaFile>(BUNDLED_LOFA).unwrap(), LofaFile::default());
    }
}
