//! Mixed-convection operating points and their scaling with flow and flux.

use serde::{Deserialize, Serialize};

use crate::buoyancy::buoyancy_parameter;

use super::ScenarioError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BuoyancyPoint {
    /// m/s
    pub velocity: f64,
    /// kW/m²
    pub heat_flux_kw: f64,
    pub reynolds: f64,
    pub buoyancy_parameter: f64,
}

/// The published flow conditions at 490 °C.
pub fn flow_conditions() -> [BuoyancyPoint; 6] {
    let p = |velocity, heat_flux_kw, reynolds, bo: f64| BuoyancyPoint {
        velocity,
        heat_flux_kw,
        reynolds,
        buoyancy_parameter: bo * 1e-6,
    };
    [
        p(2.89, 29.1, 5134.0, 0.26),
        p(2.89, 72.8, 5134.0, 0.65),
        p(2.89, 145.5, 5134.0, 1.30),
        p(2.89, 218.3, 5134.0, 1.95),
        p(2.32, 145.5, 4108.0, 2.79),
        p(1.74, 218.3, 3080.0, 11.20),
    ]
}

/// Moves a reference point to a new Reynolds number and heat flux at the
/// same bulk state: `Gr*` scales with the flux, Prandtl is unchanged.
pub fn scale_point(
    reference: &BuoyancyPoint,
    reynolds: f64,
    heat_flux_kw: f64,
    prandtl: f64,
) -> Result<f64, ScenarioError> {
    if !(reference.heat_flux_kw > 0.0 && heat_flux_kw >= 0.0) {
        return Err(ScenarioError::Invalid("heat flux must be positive".into()));
    }
    let unit = buoyancy_parameter(1.0, reference.reynolds, prandtl)?;
    let grashof_ref = reference.buoyancy_parameter / unit;
    let grashof = grashof_ref * heat_flux_kw / reference.heat_flux_kw;
    Ok(buoyancy_parameter(grashof, reynolds, prandtl)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_scaling() {
        let rows = flow_conditions();
        let bo = scale_point(&rows[0], rows[0].reynolds, rows[0].heat_flux_kw, 0.66).unwrap();
        assert!((bo - rows[0].buoyancy_parameter).abs() < 1e-18);
    }
}
