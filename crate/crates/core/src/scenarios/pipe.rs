//! Uniformly heated tube with and without property corrections.

use serde::{Deserialize, Serialize};

use crate::buoyancy::NuRatioTables;
use crate::correlations::{CorrelationConfig, FrictionLaw};
use crate::properties::{FluidPropertyTable, NOMINAL_PRESSURE};
use crate::solver::{march_heated_pipe, ChannelGeometry, PipeSolution, PipeSpec, REFERENCE_TEMPERATURE};

use super::output::{format_float, CsvTable};
use super::ScenarioError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipeSettings {
    pub diameter: f64,
    pub length: f64,
    pub divisions: usize,
    /// W/m²
    pub heat_flux: f64,
    pub inlet_velocity: f64,
    pub inlet_temperature: f64,
    pub outlet_pressure: f64,
    /// Zero keeps the tube horizontal.
    pub gravity: f64,
    /// Closure for the corrected run; the uncorrected run only clears
    /// `property_corrections`.
    pub correlations: CorrelationConfig,
}

impl Default for PipeSettings {
    fn default() -> Self {
        Self {
            diameter: 0.01588,
            length: 7.93,
            divisions: 1895,
            heat_flux: 1.46e5,
            inlet_velocity: 28.0,
            inlet_temperature: REFERENCE_TEMPERATURE,
            outlet_pressure: NOMINAL_PRESSURE,
            gravity: 0.0,
            correlations: CorrelationConfig {
                friction_law: FrictionLaw::Petukhov,
                buoyancy_correction: false,
                ..CorrelationConfig::default().with_alternative_exponents()
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipeCase {
    pub corrected: PipeSpec,
    pub uncorrected: PipeSpec,
}

pub fn build_pipe_case(settings: &PipeSettings) -> Result<PipeCase, ScenarioError> {
    let corrected = PipeSpec {
        geometry: ChannelGeometry::heated_tube(settings.diameter, settings.length, settings.divisions),
        heat_flux: settings.heat_flux,
        inlet_velocity: settings.inlet_velocity,
        inlet_temperature: settings.inlet_temperature,
        outlet_pressure: settings.outlet_pressure,
        correlations: CorrelationConfig { property_corrections: true, ..settings.correlations },
        gravity: settings.gravity,
    };
    corrected.geometry.validate()?;
    corrected.correlations.validate()?;
    let mut uncorrected = corrected.clone();
    uncorrected.correlations.property_corrections = false;
    Ok(PipeCase { corrected, uncorrected })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipeRun {
    pub corrected: PipeSolution,
    pub uncorrected: PipeSolution,
}

pub fn run_pipe(case: &PipeCase, fluid: &FluidPropertyTable, tables: Option<&NuRatioTables>) -> Result<PipeRun, ScenarioError> {
    Ok(PipeRun {
        corrected: march_heated_pipe(&case.corrected, fluid, tables)?,
        uncorrected: march_heated_pipe(&case.uncorrected, fluid, tables)?,
    })
}

pub fn profile_table(sol: &PipeSolution) -> CsvTable {
    let mut t = CsvTable::new(["x", "T_bulk", "T_wall", "U", "Re", "Pr", "c_f", "Nu", "h", "iterations", "dp_friction"]);
    for n in &sol.nodes {
        t.push(vec![
            format_float(n.position),
            format_float(n.bulk_temperature),
            format_float(n.wall_temperature),
            format_float(n.velocity),
            format_float(n.reynolds),
            format_float(n.prandtl),
            format_float(n.friction_factor),
            format_float(n.nusselt),
            format_float(n.heat_transfer_coefficient),
            n.iterations.to_string(),
            format_float(n.friction_dp),
        ]);
    }
    t
}

pub fn summary_table(run: &PipeRun) -> CsvTable {
    let mut t = CsvTable::new([
        "variant",
        "mass_flow",
        "outlet_temperature",
        "friction_dp",
        "acceleration_dp",
        "total_dp",
        "max_wall_iterations",
    ]);
    for (name, s) in [("corrections_off", &run.uncorrected), ("corrections_on", &run.corrected)] {
        t.push(vec![
            name.to_string(),
            format_float(s.mass_flow),
            format_float(s.outlet_temperature),
            format_float(s.friction_dp),
            format_float(s.acceleration_dp),
            format_float(s.total_dp),
            s.max_wall_iterations.to_string(),
        ]);
    }
    t
}
