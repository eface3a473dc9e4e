//! Steady single-tube march with a uniform wall heat flux.

use serde::{Deserialize, Serialize};

use crate::buoyancy::{NuRatioTables, STANDARD_GRAVITY};
use crate::correlations::{BulkState, CorrelationConfig};
use crate::properties::FluidPropertyTable;

use super::geometry::ChannelGeometry;
use super::wall::{wall_temperature_iteration, WallClosure};
use super::SolverError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipeSpec {
    pub geometry: ChannelGeometry,
    /// W/m² into the fluid.
    pub heat_flux: f64,
    pub inlet_velocity: f64,
    pub inlet_temperature: f64,
    pub outlet_pressure: f64,
    pub correlations: CorrelationConfig,
    /// Zero for a horizontal tube; buoyancy then has no effect.
    pub gravity: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PipeNode {
    /// Distance of the cell centre from the inlet, m.
    pub position: f64,
    pub bulk_temperature: f64,
    pub wall_temperature: f64,
    pub velocity: f64,
    pub reynolds: f64,
    pub prandtl: f64,
    pub friction_factor: f64,
    pub nusselt: f64,
    pub heat_transfer_coefficient: f64,
    pub iterations: usize,
    pub friction_dp: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipeSolution {
    pub nodes: Vec<PipeNode>,
    pub mass_flow: f64,
    pub outlet_temperature: f64,
    pub friction_dp: f64,
    /// Momentum-flux change from heating, Pa.
    pub acceleration_dp: f64,
    pub total_dp: f64,
    pub max_wall_iterations: usize,
}

/// Marches the energy balance cell by cell from the inlet, running the wall
/// loop at each cell centre.
pub fn march_heated_pipe(
    spec: &PipeSpec,
    fluid: &FluidPropertyTable,
    tables: Option<&NuRatioTables>,
) -> Result<PipeSolution, SolverError> {
    spec.geometry.validate()?;
    spec.correlations.validate()?;
    if !(spec.inlet_velocity > 0.0 && spec.inlet_temperature > 0.0 && spec.heat_flux.is_finite()) {
        return Err(SolverError::InvalidConfig("pipe inlet velocity and temperature must be positive".into()));
    }
    let area = spec.geometry.flow_area();
    let perimeter = spec.geometry.heated_perimeter();
    let d = spec.geometry.diameter;
    let inlet = fluid.interpolate(spec.inlet_temperature);
    let mass_flow = inlet.density * spec.inlet_velocity * area;
    let closure = WallClosure {
        correlations: &spec.correlations,
        fluid,
        buoyancy: tables,
        gravity: if spec.gravity > 0.0 { spec.gravity } else { STANDARD_GRAVITY },
    };
    let use_tables = spec.gravity > 0.0;
    let closure = WallClosure { buoyancy: closure.buoyancy.filter(|_| use_tables), ..closure };

    let mut nodes = Vec::with_capacity(spec.geometry.axial_nodes());
    let mut position = 0.0;
    let mut friction_dp = 0.0;
    let mut max_wall_iterations = 0;
    for cell in spec.geometry.cells() {
        let centre = position + 0.5 * cell.length;
        let h = inlet.specific_enthalpy + spec.heat_flux * perimeter * centre / mass_flow;
        let props = fluid.interpolate(fluid.temperature_from_enthalpy(h));
        let velocity = mass_flow / (props.density * area);
        let bulk = BulkState::new(&props, velocity, d)?;
        let sol = wall_temperature_iteration(&closure, &bulk, spec.heat_flux, 0.0)?;
        let dp = sol.closure.friction_factor * cell.length / d * props.density * velocity * velocity / 2.0;
        friction_dp += dp;
        max_wall_iterations = max_wall_iterations.max(sol.iterations);
        nodes.push(PipeNode {
            position: centre,
            bulk_temperature: props.temperature,
            wall_temperature: sol.closure.wall_temperature,
            velocity,
            reynolds: bulk.reynolds,
            prandtl: bulk.prandtl,
            friction_factor: sol.closure.friction_factor,
            nusselt: sol.closure.nusselt,
            heat_transfer_coefficient: sol.heat_transfer_coefficient,
            iterations: sol.iterations,
            friction_dp: dp,
        });
        position += cell.length;
    }
    let h_out = inlet.specific_enthalpy + spec.heat_flux * perimeter * position / mass_flow;
    let outlet = fluid.interpolate(fluid.temperature_from_enthalpy(h_out));
    let g = mass_flow / area;
    let acceleration_dp = g * g * (1.0 / outlet.density - 1.0 / inlet.density);
    Ok(PipeSolution {
        nodes,
        mass_flow,
        outlet_temperature: outlet.temperature,
        friction_dp,
        acceleration_dp,
        total_dp: friction_dp + acceleration_dp,
        max_wall_iterations,
    })
}
