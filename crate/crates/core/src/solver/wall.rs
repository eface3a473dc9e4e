//! Per-node wall closure: friction, Nusselt number and the wall-temperature
//! fixed-point loop.

use serde::{Deserialize, Serialize};

use crate::buoyancy::{self, BuoyancyState, NuRatioTables, Orientation};
use crate::correlations::{
    petukhov_cf0, petukhov_nu, property_corrected_cf, variable_property_nu, BulkState, CorrelationConfig,
    WallState,
};
use crate::properties::FluidPropertyTable;

use super::SolverError;

/// Convergence tolerance of the wall loop, K.
pub const WALL_TOLERANCE: f64 = 0.01;
pub const WALL_MAX_ITERATIONS: usize = 50;
pub const WALL_RELAXATION: f64 = 0.5;

/// Everything the wall loop reads besides the node state.
#[derive(Debug, Clone, Copy)]
pub struct WallClosure<'a> {
    pub correlations: &'a CorrelationConfig,
    pub fluid: &'a FluidPropertyTable,
    /// `None` disables the mixed-convection ratio.
    pub buoyancy: Option<&'a NuRatioTables>,
    pub gravity: f64,
}

/// Closure values at one wall temperature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosureValues {
    pub wall_temperature: f64,
    /// Darcy friction factor for the momentum balance, property corrected
    /// when enabled. Zero at rest, where only `friction_re` is meaningful.
    pub friction_factor: f64,
    /// `c_f · Re`, finite down to zero flow (64 times the correction when
    /// laminar).
    pub friction_re: f64,
    /// Forced-convection Nusselt number before the buoyancy ratio.
    pub nusselt_forced: f64,
    pub nusselt: f64,
    pub nusselt_ratio: f64,
    pub buoyancy: BuoyancyState,
    pub saturated: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WallSolution {
    pub closure: ClosureValues,
    /// W/(m²K), `Nu λ_b / D`.
    pub heat_transfer_coefficient: f64,
    pub iterations: usize,
    /// Last `|ΔT_w|`, K.
    pub residual: f64,
}

/// Evaluates friction and Nusselt number at a given wall temperature.
///
/// `acceleration` (m/s²) only matters when the unsteady friction term is
/// enabled; it then augments `c_f0` ahead of the Nusselt evaluation.
pub fn evaluate_closure(
    closure: &WallClosure<'_>,
    bulk: &BulkState,
    heat_flux: f64,
    wall_temperature: f64,
    acceleration: f64,
) -> Result<ClosureValues, SolverError> {
    let cfg = closure.correlations;
    let wall_props = closure.fluid.interpolate(wall_temperature);
    let wall = WallState::from(&wall_props);
    let correction = if cfg.property_corrections { property_corrected_cf(1.0, bulk, &wall, cfg) } else { 1.0 };
    let re = bulk.reynolds;

    let (friction_factor, friction_re) = if re <= cfg.laminar_ceiling {
        let cf = if re > 0.0 { 64.0 / re * correction } else { 0.0 };
        (cf, 64.0 * correction)
    } else {
        let cf = cfg.friction_factor(re)? * correction;
        (cf, cf * re)
    };

    let weight = cfg.turbulent_weight(re);
    let mut buoyancy_state = BuoyancyState { grashof_star: 0.0, buoyancy_parameter: 0.0, orientation: Orientation::from_flow(bulk.velocity, heat_flux) };
    let mut ratio = 1.0;
    let mut saturated = false;
    let mut nusselt_turbulent = 0.0;
    if weight > 0.0 {
        let re_t = re.max(cfg.turbulent_floor);
        nusselt_turbulent = match cfg.pseudo_critical_temperature {
            Some(t_pc) => {
                let at_floor = BulkState { reynolds: re_t, ..*bulk };
                variable_property_nu(&at_floor, &wall, t_pc)?
            }
            None => {
                let mut cf0 = petukhov_cf0(re_t)?;
                if cfg.brunone_enabled {
                    let unsteady =
                        cfg.transient_friction(cf0, re, bulk.hydraulic_diameter, bulk.velocity, acceleration)?;
                    cf0 = unsteady.c_f.clamp(0.1 * cf0, 10.0 * cf0);
                }
                petukhov_nu(re_t, bulk.prandtl, cf0 * correction)?
            }
        };
        if let Some(tables) = closure.buoyancy.filter(|_| cfg.buoyancy_correction) {
            let gr = buoyancy::grashof_star(
                heat_flux.abs(),
                bulk.hydraulic_diameter,
                1.0 / bulk.temperature,
                bulk.conductivity,
                bulk.viscosity / bulk.density,
                closure.gravity,
            )?;
            let bo = buoyancy::buoyancy_parameter(gr, re, bulk.prandtl)?;
            let lookup = tables.lookup(bo, buoyancy_state.orientation);
            buoyancy_state.grashof_star = gr;
            buoyancy_state.buoyancy_parameter = bo;
            ratio = lookup.ratio;
            saturated = lookup.saturated;
        }
    }
    let nusselt_forced = (1.0 - weight) * cfg.laminar_nusselt + weight * nusselt_turbulent;
    let nusselt = (1.0 - weight) * cfg.laminar_nusselt + weight * nusselt_turbulent * ratio;
    Ok(ClosureValues {
        wall_temperature,
        friction_factor,
        friction_re,
        nusselt_forced,
        nusselt,
        nusselt_ratio: if nusselt_forced > 0.0 { nusselt / nusselt_forced } else { 1.0 },
        buoyancy: buoyancy_state,
        saturated,
    })
}

/// Fixed-point loop on the wall temperature for a given wall heat flux
/// (positive into the fluid).
///
/// The first update is taken in full, later ones under-relaxed; the loop
/// stops when `|ΔT_w| < 0.01 K`. Friction and Nusselt number are then
/// re-evaluated at the returned wall temperature.
pub fn wall_temperature_iteration(
    closure: &WallClosure<'_>,
    bulk: &BulkState,
    heat_flux: f64,
    acceleration: f64,
) -> Result<WallSolution, SolverError> {
    wall_temperature_iteration_from(closure, bulk, heat_flux, acceleration, bulk.temperature)
}

/// As [`wall_temperature_iteration`], starting from a previous wall
/// temperature instead of the bulk temperature.
pub fn wall_temperature_iteration_from(
    closure: &WallClosure<'_>,
    bulk: &BulkState,
    heat_flux: f64,
    acceleration: f64,
    start: f64,
) -> Result<WallSolution, SolverError> {
    if !heat_flux.is_finite() {
        return Err(SolverError::InvalidConfig(format!("wall heat flux {heat_flux} is not finite")));
    }
    let t_b = bulk.temperature;
    let scale = heat_flux * bulk.hydraulic_diameter / bulk.conductivity;
    let mut t_w = start;
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    while iterations < WALL_MAX_ITERATIONS {
        iterations += 1;
        let values = evaluate_closure(closure, bulk, heat_flux, t_w, acceleration)?;
        let target = t_b + scale / values.nusselt;
        let next = if iterations == 1 { target } else { t_w + WALL_RELAXATION * (target - t_w) };
        residual = (next - t_w).abs();
        t_w = next;
        if residual < WALL_TOLERANCE {
            let closure_values = evaluate_closure(closure, bulk, heat_flux, t_w, acceleration)?;
            return Ok(WallSolution {
                heat_transfer_coefficient: closure_values.nusselt * bulk.conductivity / bulk.hydraulic_diameter,
                closure: closure_values,
                iterations,
                residual,
            });
        }
    }
    Err(SolverError::WallIteration { iterations, residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correlations::BulkState;
    use crate::properties::FluidStateSample;

    fn constant_fluid() -> FluidPropertyTable {
        let samples = (0..=2)
            .map(|i| {
                let t = 500.0 + 800.0 * i as f64;
                FluidStateSample {
                    temperature: t,
                    density: 4.0,
                    dynamic_viscosity: 4e-5,
                    thermal_conductivity: 0.3,
                    specific_heat: 5193.0,
                    specific_enthalpy: 5193.0 * t,
                }
            })
            .collect();
        FluidPropertyTable::from_samples(7e6, samples).unwrap()
    }

    fn bulk_at(re: f64, pr: f64, t: f64) -> BulkState {
        BulkState {
            velocity: 1.0,
            hydraulic_diameter: 0.01588,
            density: 4.0,
            viscosity: 4e-5,
            conductivity: 0.3,
            specific_heat: 5193.0,
            enthalpy: 5193.0 * t,
            temperature: t,
            reynolds: re,
            prandtl: pr,
        }
    }

    #[test]
    fn zero_flux_returns_bulk() {
        let fluid = FluidPropertyTable::default_helium();
        let cfg = CorrelationConfig::default();
        let closure = WallClosure { correlations: &cfg, fluid: &fluid, buoyancy: None, gravity: 9.81 };
        let b = BulkState::new(&fluid.interpolate(800.0), 10.0, 0.01588).unwrap();
        let s = wall_temperature_iteration(&closure, &b, 0.0, 0.0).unwrap();
        assert_eq!(s.closure.wall_temperature, 800.0);
        assert_eq!(s.iterations, 1);
    }

    #[test]
    fn constant_property_closed_form() {
        let fluid = constant_fluid();
        let cfg = CorrelationConfig::default();
        let closure = WallClosure { correlations: &cfg, fluid: &fluid, buoyancy: None, gravity: 9.81 };
        let b = bulk_at(1e4, 0.66, 800.0);
        // q D / λ = 100 K: T_w - T_b = 100 / Nu with Nu from the uncorrected
        // Petukhov pair.
        let q = 100.0 * b.conductivity / b.hydraulic_diameter;
        let s = wall_temperature_iteration(&closure, &b, q, 0.0).unwrap();
        let nu = petukhov_nu(1e4, 0.66, petukhov_cf0(1e4).unwrap()).unwrap();
        assert!((s.closure.nusselt - nu).abs() < 1e-12);
        assert!((s.closure.wall_temperature - 800.0 - 100.0 / nu).abs() < 1e-9);
        assert!((100.0 / nu - 3.455).abs() < 1e-3);
    }

    #[test]
    fn heated_helium_node_is_self_consistent() {
        let fluid = FluidPropertyTable::default_helium();
        let cfg = CorrelationConfig::default().with_alternative_exponents();
        let closure = WallClosure { correlations: &cfg, fluid: &fluid, buoyancy: None, gravity: 9.81 };
        let b = BulkState::new(&fluid.interpolate(900.0), 25.0, 0.01588).unwrap();
        let s = wall_temperature_iteration(&closure, &b, 1.46e5, 0.0).unwrap();
        let again = evaluate_closure(&closure, &b, 1.46e5, s.closure.wall_temperature, 0.0).unwrap();
        assert!((again.nusselt - s.closure.nusselt).abs() <= 1e-8 * s.closure.nusselt);
        let implied = b.temperature + 1.46e5 * b.hydraulic_diameter / (again.nusselt * b.conductivity);
        assert!((implied - s.closure.wall_temperature).abs() < 2.0 * WALL_TOLERANCE);
        assert!(s.iterations <= 20);
    }

    #[test]
    fn laminar_limit_at_rest() {
        let fluid = FluidPropertyTable::default_helium();
        let cfg = CorrelationConfig::default();
        let closure = WallClosure { correlations: &cfg, fluid: &fluid, buoyancy: None, gravity: 9.81 };
        let b = BulkState::new(&fluid.interpolate(900.0), 0.0, 0.01588).unwrap();
        let v = evaluate_closure(&closure, &b, 1000.0, 900.0, 0.0).unwrap();
        assert_eq!(v.nusselt, cfg.laminar_nusselt);
        assert_eq!(v.friction_re, 64.0);
    }
}
