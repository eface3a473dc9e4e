//! Transient network solver and the steady heated-tube march.

mod decay;
mod geometry;
mod linalg;
mod network;
mod pipe;
mod wall;

use thiserror::Error;

use crate::buoyancy::BuoyancyError;
use crate::correlations::CorrelationError;
use crate::properties::PropertyError;

pub use decay::{decay_power_fraction, DecayHeatSchedule, DecayLaw, DEFAULT_TAU, NOMINAL_POWER_DENSITY};
pub use geometry::{AxialCell, ChannelGeometry, Segment};
pub use linalg::SymmetricSystem;
pub use network::{
    Audit, BoundaryLink, ChannelHeating, ChannelState, FlowMode, FluidNode, FormLoss, InletCondition, LateralLink,
    Network, NetworkSpec, NetworkState, PlenumSpec, PlenumState, SolidLayout, SolidNode, SolidRole, StepControl,
    StepReport, CHECKPOINT_VERSION, MASS_FLOW_FLOOR, REFERENCE_TEMPERATURE,
};
pub use pipe::{march_heated_pipe, PipeNode, PipeSolution, PipeSpec};
pub use wall::{
    evaluate_closure, wall_temperature_iteration, wall_temperature_iteration_from, ClosureValues, WallClosure, WallSolution, WALL_MAX_ITERATIONS,
    WALL_RELAXATION, WALL_TOLERANCE,
};

#[derive(Debug, Error)]
pub enum SolverError {
    #[error(transparent)]
    Property(#[from] PropertyError),
    #[error(transparent)]
    Correlation(#[from] CorrelationError),
    #[error(transparent)]
    Buoyancy(#[from] BuoyancyError),
    #[error("wall temperature loop did not converge in {iterations} iterations (last change {residual} K)")]
    WallIteration { iterations: usize, residual: f64 },
    #[error("flow split root not bracketed: f({lo}) = {f_lo}, f({hi}) = {f_hi}")]
    Bracket { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },
    #[error("step violates CFL bound: {cfl} > {target}")]
    Cfl { cfl: f64, target: f64 },
    #[error("time step {dt} s fell below the minimum {dt_min} s")]
    StepTooSmall { dt: f64, dt_min: f64 },
    #[error("conduction solve did not converge after {iterations} iterations (relative residual {residual})")]
    LinearSolve { iterations: usize, residual: f64 },
    #[error("network is already sealed")]
    AlreadySealed,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("checkpoint error: {0}")]
    Checkpoint(String),
}
