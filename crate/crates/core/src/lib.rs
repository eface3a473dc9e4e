//! Transient subchannel thermal hydraulics for gas-cooled reactor channel
//! networks.
//!
//! The crate is organised bottom-up:
//!
//! - [`properties`]: helium property tables and solid material polynomials
//! - [`correlations`]: friction and heat-transfer closures
//! - [`buoyancy`]: mixed-convection Nusselt ratio and its lookup tables
//! - [`solver`]: the N-channel network with plena, solid conduction and
//!   the wall-temperature fixed-point loop
//! - [`scenarios`]: ramp, heated-pipe and loss-of-flow case builders and
//!   their outputs
//! - [`cli`]: the `subchan` command-line front end

pub mod buoyancy;
pub mod cli;
pub mod correlations;
pub mod properties;
pub mod scenarios;
pub mod solver;
pub mod verify;


pub use buoyancy::{NuRatioTable, NuRatioTables, Orientation};
pub use correlations::{BulkState, CorrelationConfig, WallState};
pub use properties::{FluidPropertyTable, FluidStateSample, SolidMaterialModel};
