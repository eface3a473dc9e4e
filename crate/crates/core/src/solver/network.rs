//! N-channel coolant network between two well-mixed plena, with an optional
//! lumped solid conduction graph.
//!
//! Fluid node masses are frozen when the network is built and again when it
//! is sealed, so `Σ ṁ = 0` conserves mass exactly; the property table still
//! supplies the density used in the gravity head, friction and closures.

use serde::{Deserialize, Serialize};

use crate::buoyancy::{BuoyancyState, NuRatioTables, Orientation, DEFAULT_CALIBRATION, STANDARD_GRAVITY};
use crate::correlations::{BulkState, CorrelationConfig};
use crate::properties::{FluidPropertyTable, SolidMaterialModel, NOMINAL_PRESSURE};

use super::decay::DecayHeatSchedule;
use super::geometry::{AxialCell, ChannelGeometry, Segment};
use super::linalg::SymmetricSystem;
use super::wall::{wall_temperature_iteration_from, WallClosure};
use super::SolverError;

/// Inlet helium temperature and fixed periphery temperature, K.
pub const REFERENCE_TEMPERATURE: f64 = 763.15;
pub const MASS_FLOW_FLOOR: f64 = 1e-12;
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowMode {
    /// Mass-flow inlet into the upper plenum, fixed-pressure outlet from the
    /// lower plenum.
    Open,
    Sealed,
}

/// How a channel's heated segment delivers heat.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ChannelHeating {
    /// Heat comes from the channel's fuel nodes through the solid graph.
    Conjugate { peaking_factor: f64 },
    /// Uniform wall flux on the heated segment, W/m²; no solid nodes.
    PrescribedFlux { heat_flux: f64 },
    Adiabatic,
}

/// Per-channel solid cross-sections and conduction shape factors.
///
/// A link between two nodes has conductance `1/(r_a/k_a + r_b/k_b)` where
/// each `r` is a geometric resistance factor: `1/(S Δz)` for radial and
/// lateral links with dimensionless shape factor `S`, `Δz/(2A)` for axial
/// half-cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolidLayout {
    pub fuel: SolidMaterialModel,
    pub graphite: SolidMaterialModel,
    /// Fuel compact area per channel in the heated segment, m².
    pub fuel_area: f64,
    /// Graphite web area per channel in the heated segment (wall layer
    /// included), m².
    pub graphite_area: f64,
    /// Graphite layer lining the coolant hole, m².
    pub wall_area: f64,
    /// Graphite area per channel in the reflectors, m².
    pub reflector_area: f64,
    /// Fuel side of the fuel-to-web link.
    pub fuel_shape: f64,
    /// Web side of the fuel-to-web link.
    pub web_fuel_shape: f64,
    /// Web side of the web-to-wall link.
    pub web_wall_shape: f64,
    /// Wall side of the web-to-wall link.
    pub wall_shape: f64,
    /// Multiplies every solid heat capacity; values below one accelerate
    /// convergence to a steady state.
    pub capacity_scale: f64,
}

impl Default for SolidLayout {
    fn default() -> Self {
        Self {
            fuel: SolidMaterialModel::fuel_compact(),
            graphite: SolidMaterialModel::graphite(),
            fuel_area: 2.46e-4,
            graphite_area: 5.96e-4,
            wall_area: 1.0e-4,
            reflector_area: 8.42e-4,
            // Two compacts per channel, mean-to-surface of a heated rod: 2 × 8π.
            fuel_shape: 16.0 * std::f64::consts::PI,
            web_fuel_shape: 25.0,
            web_wall_shape: 9.0,
            wall_shape: 60.0,
            capacity_scale: 1.0,
        }
    }
}

impl SolidLayout {
    pub fn validate(&self) -> Result<(), SolverError> {
        self.fuel.validate()?;
        self.graphite.validate()?;
        let positive = [
            ("fuel_area", self.fuel_area),
            ("wall_area", self.wall_area),
            ("reflector_area", self.reflector_area),
            ("fuel_shape", self.fuel_shape),
            ("web_fuel_shape", self.web_fuel_shape),
            ("web_wall_shape", self.web_wall_shape),
            ("wall_shape", self.wall_shape),
            ("capacity_scale", self.capacity_scale),
        ];
        for (name, v) in positive {
            if !(v > 0.0) {
                return Err(SolverError::InvalidConfig(format!("solid.{name} must be positive, got {v}")));
            }
        }
        if !(self.graphite_area > self.wall_area) || !(self.reflector_area > self.wall_area) {
            return Err(SolverError::InvalidConfig("graphite areas must exceed the wall layer area".into()));
        }
        Ok(())
    }
}

/// Web-to-web conduction between two channels at every axial level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LateralLink {
    pub a: usize,
    pub b: usize,
    /// Shape factor applied on each side.
    pub shape: f64,
}

/// Web of `channel` conducting to the fixed-temperature core boundary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundaryLink {
    pub channel: usize,
    pub shape: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlenumSpec {
    pub length: f64,
    /// m²; `None` uses the summed channel cell areas.
    pub area: Option<f64>,
}

impl Default for PlenumSpec {
    fn default() -> Self {
        Self { length: 1.0, area: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FormLoss {
    pub entry: f64,
    pub exit: f64,
}

impl Default for FormLoss {
    fn default() -> Self {
        Self { entry: 0.5, exit: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StepControl {
    /// Bound on `|U| Δt / Δz` at every fluid node.
    pub target_cfl: f64,
    /// Bound on the fraction of a node or plenum mass exchanged per step.
    pub mass_courant: f64,
    pub dt_max: f64,
    /// Steps shorter than this are an error.
    pub dt_min: f64,
    /// Largest ratio between consecutive steps.
    pub growth: f64,
}

impl Default for StepControl {
    fn default() -> Self {
        Self { target_cfl: 0.5, mass_courant: 0.9, dt_max: 1.0, dt_min: 1e-7, growth: 1.2 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InletCondition {
    /// kg/s into the upper plenum; the channels carry it downward.
    pub mass_flow: f64,
    pub temperature: f64,
}

/// Full description of a network; everything else is derived from it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSpec {
    pub geometry: ChannelGeometry,
    pub channels: Vec<ChannelHeating>,
    pub solid: Option<SolidLayout>,
    #[serde(default)]
    pub lateral_links: Vec<LateralLink>,
    #[serde(default)]
    pub boundary_links: Vec<BoundaryLink>,
    pub boundary_temperature: f64,
    #[serde(default)]
    pub plenum: PlenumSpec,
    #[serde(default)]
    pub correlations: CorrelationConfig,
    pub calibration_constant: f64,
    #[serde(default)]
    pub form_loss: FormLoss,
    #[serde(default)]
    pub step: StepControl,
    pub gravity: f64,
    pub pressure: f64,
    pub inlet: InletCondition,
    /// Power density at full power, W/m³ of fuel.
    pub nominal_power_density: f64,
}

impl NetworkSpec {
    /// A network of `n` channels with defaults everywhere else.
    pub fn with_channels(geometry: ChannelGeometry, channels: Vec<ChannelHeating>) -> Self {
        Self {
            geometry,
            channels,
            solid: None,
            lateral_links: Vec::new(),
            boundary_links: Vec::new(),
            boundary_temperature: REFERENCE_TEMPERATURE,
            plenum: PlenumSpec::default(),
            correlations: CorrelationConfig::default(),
            calibration_constant: DEFAULT_CALIBRATION,
            form_loss: FormLoss::default(),
            step: StepControl::default(),
            gravity: STANDARD_GRAVITY,
            pressure: NOMINAL_PRESSURE,
            inlet: InletCondition { mass_flow: 0.0, temperature: REFERENCE_TEMPERATURE },
            nominal_power_density: super::decay::NOMINAL_POWER_DENSITY,
        }
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        let bad = |m: String| Err(SolverError::InvalidConfig(m));
        self.geometry.validate()?;
        self.correlations.validate()?;
        if self.channels.is_empty() {
            return bad("network needs at least one channel".into());
        }
        let n = self.channels.len();
        let conjugate = self.channels.iter().any(|c| matches!(c, ChannelHeating::Conjugate { .. }));
        match &self.solid {
            Some(s) => s.validate()?,
            None if conjugate => return bad("conjugate channels need a [solid] layout".into()),
            None => {}
        }
        if self.solid.is_none() && !(self.lateral_links.is_empty() && self.boundary_links.is_empty()) {
            return bad("conduction links need a [solid] layout".into());
        }
        for c in &self.channels {
            match *c {
                ChannelHeating::Conjugate { peaking_factor } if !(peaking_factor >= 0.0) => {
                    return bad(format!("peaking factor must be non-negative, got {peaking_factor}"))
                }
                ChannelHeating::PrescribedFlux { heat_flux } if !heat_flux.is_finite() => {
                    return bad("prescribed heat flux must be finite".into())
                }
                _ => {}
            }
        }
        for l in &self.lateral_links {
            if l.a >= n || l.b >= n || l.a == l.b || !(l.shape > 0.0) {
                return bad(format!("invalid lateral link {l:?} for {n} channels"));
            }
        }
        for l in &self.boundary_links {
            if l.channel >= n || !(l.shape > 0.0) {
                return bad(format!("invalid boundary link {l:?} for {n} channels"));
            }
        }
        let s = &self.step;
        if !(s.target_cfl > 0.0 && s.mass_courant > 0.0 && s.mass_courant <= 1.0 && s.dt_max > s.dt_min && s.dt_min > 0.0 && s.growth >= 1.0) {
            return bad(format!("invalid step control {s:?}"));
        }
        if !(self.plenum.length > 0.0) || self.plenum.area.is_some_and(|a| !(a > 0.0)) {
            return bad("plenum length and area must be positive".into());
        }
        if !(self.pressure > 0.0 && self.gravity >= 0.0 && self.calibration_constant > 0.0) {
            return bad("pressure and calibration constant must be positive, gravity non-negative".into());
        }
        if !(self.inlet.mass_flow >= 0.0 && self.inlet.temperature > 0.0) {
            return bad(format!("invalid inlet {:?}", self.inlet));
        }
        if !(self.form_loss.entry >= 0.0 && self.form_loss.exit >= 0.0) {
            return bad("form loss coefficients must be non-negative".into());
        }
        Ok(())
    }

    fn plenum_volume(&self) -> f64 {
        let cell = match &self.solid {
            Some(s) => self.geometry.flow_area() + s.fuel_area + s.graphite_area,
            None => self.geometry.flow_area(),
        };
        self.plenum.length * self.plenum.area.unwrap_or(cell * self.channels.len() as f64)
    }
}

/// Fluid state of one axial node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluidNode {
    pub enthalpy: f64,
    pub temperature: f64,
    pub density: f64,
    pub velocity: f64,
    pub reynolds: f64,
    pub wall_temperature: f64,
    /// Wall-to-fluid heat flux from the latest energy update, W/m².
    pub heat_flux: f64,
    pub heat_transfer_coefficient: f64,
    pub nusselt: f64,
    pub nusselt_ratio: f64,
    pub friction_factor: f64,
    pub friction_re: f64,
    pub buoyancy: BuoyancyState,
    pub wall_iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelState {
    /// kg/s, positive upward.
    pub mass_flow: f64,
    pub previous_mass_flow: f64,
    pub nodes: Vec<FluidNode>,
    /// Frozen node masses, kg.
    pub node_mass: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlenumState {
    pub volume: f64,
    pub temperature: f64,
    pub enthalpy: f64,
    pub pressure: f64,
    pub mass: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolidRole {
    Fuel,
    Web,
    Wall,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolidNode {
    pub channel: usize,
    pub level: usize,
    pub role: SolidRole,
    pub temperature: f64,
    pub volume: f64,
    /// Heat source at full power, W.
    pub nominal_source: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolidLink {
    pub a: usize,
    pub b: usize,
    pub r_a: f64,
    pub r_b: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolidBoundary {
    pub node: usize,
    pub r: f64,
}

/// Running conservation bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Audit {
    /// Total stored energy when the audit window opened, J.
    pub baseline_energy: f64,
    pub source_energy: f64,
    /// Net heat received from the fixed-temperature boundary, J.
    pub boundary_energy: f64,
    /// Net enthalpy carried in through the open boundaries, J.
    pub boundary_enthalpy: f64,
    pub sealed_mass: f64,
    pub max_mass_residual: f64,
    pub max_mass_drift: f64,
    pub max_cfl: f64,
    pub max_wall_iterations: usize,
    pub saturation_events: u64,
    pub steps: u64,
}

/// Serializable state of a network; [`Network`] adds the rebuilt tables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkState {
    pub version: u32,
    pub spec: NetworkSpec,
    pub time: f64,
    pub mode: FlowMode,
    pub sealed_at: Option<f64>,
    /// `None` runs at full power.
    pub power: Option<DecayHeatSchedule>,
    pub capacity_scale: f64,
    pub channels: Vec<ChannelState>,
    pub upper: PlenumState,
    pub lower: PlenumState,
    pub solids: Vec<SolidNode>,
    pub links: Vec<SolidLink>,
    pub boundary: Vec<SolidBoundary>,
    /// Per channel and level, the solid node facing the coolant.
    pub wall_nodes: Vec<Vec<Option<usize>>>,
    /// Lower minus upper plenum pressure, Pa.
    pub plenum_dp: f64,
    /// `plenum_dp` minus the mean channel gravity head, Pa.
    pub dynamic_dp: f64,
    pub last_dt: f64,
    pub audit: Audit,
}

/// Summary of one accepted step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepReport {
    pub dt: f64,
    pub cfl: f64,
    pub mass_residual: f64,
    pub power_fraction: f64,
    pub max_wall_iterations: usize,
}

/// Per-channel momentum coefficients for `ṁ = (c + δ)/d`.
#[derive(Debug, Clone, Copy)]
struct Momentum {
    c: f64,
    d: f64,
}

pub struct Network {
    state: NetworkState,
    fluid: FluidPropertyTable,
    tables: Option<NuRatioTables>,
    cells: Vec<AxialCell>,
}

impl Network {
    /// Builds a network at a uniform temperature; in open mode each channel
    /// starts with its share of the inlet flow.
    pub fn new(spec: NetworkSpec, fluid: FluidPropertyTable, temperature: f64) -> Result<Self, SolverError> {
        spec.validate()?;
        let cells = spec.geometry.cells();
        let area = spec.geometry.flow_area();
        let sample = fluid.interpolate(temperature);
        let n_ch = spec.channels.len();
        let share = -spec.inlet.mass_flow / n_ch as f64;
        let channels = (0..n_ch)
            .map(|_| ChannelState {
                mass_flow: share,
                previous_mass_flow: share,
                nodes: cells
                    .iter()
                    .map(|_| FluidNode {
                        enthalpy: sample.specific_enthalpy,
                        temperature,
                        density: sample.density,
                        velocity: share / (sample.density * area),
                        reynolds: 0.0,
                        wall_temperature: temperature,
                        heat_flux: 0.0,
                        heat_transfer_coefficient: 0.0,
                        nusselt: 0.0,
                        nusselt_ratio: 1.0,
                        friction_factor: 0.0,
                        friction_re: 0.0,
                        buoyancy: BuoyancyState { grashof_star: 0.0, buoyancy_parameter: 0.0, orientation: Orientation::Opposed },
                        wall_iterations: 0,
                    })
                    .collect(),
                node_mass: cells.iter().map(|c| sample.density * area * c.length).collect(),
            })
            .collect();
        let volume = spec.plenum_volume();
        let plenum = PlenumState {
            volume,
            temperature,
            enthalpy: sample.specific_enthalpy,
            pressure: spec.pressure,
            mass: sample.density * volume,
        };
        let (solids, links, boundary, wall_nodes) = build_solids(&spec, &cells, temperature);
        let tables = Some(NuRatioTables::standard(spec.calibration_constant)?);
        let capacity_scale = spec.solid.as_ref().map_or(1.0, |s| s.capacity_scale);
        let mut network = Self {
            state: NetworkState {
                version: CHECKPOINT_VERSION,
                spec,
                time: 0.0,
                mode: FlowMode::Open,
                sealed_at: None,
                power: None,
                capacity_scale,
                channels,
                upper: plenum,
                lower: plenum,
                solids,
                links,
                boundary,
                wall_nodes,
                plenum_dp: 0.0,
                dynamic_dp: 0.0,
                last_dt: 0.0,
                audit: Audit::default(),
            },
            fluid,
            tables,
            cells,
        };
        network.reset_audit();
        Ok(network)
    }

    /// Restores a network from a checkpointed state.
    pub fn from_state(state: NetworkState, fluid: FluidPropertyTable) -> Result<Self, SolverError> {
        if state.version != CHECKPOINT_VERSION {
            return Err(SolverError::Checkpoint(format!(
                "checkpoint version {} is not supported (expected {CHECKPOINT_VERSION})",
                state.version
            )));
        }
        state.spec.validate()?;
        let cells = state.spec.geometry.cells();
        let tables = Some(NuRatioTables::standard(state.spec.calibration_constant)?);
        Ok(Self { state, fluid, tables, cells })
    }

    pub fn state(&self) -> &NetworkState {
        &self.state
    }

    pub fn fluid(&self) -> &FluidPropertyTable {
        &self.fluid
    }

    pub fn cells(&self) -> &[AxialCell] {
        &self.cells
    }

    pub fn time(&self) -> f64 {
        self.state.time
    }

    /// Time since sealing, or since the start when still open.
    pub fn elapsed(&self) -> f64 {
        self.state.time - self.state.sealed_at.unwrap_or(0.0)
    }

    pub fn set_power(&mut self, schedule: Option<DecayHeatSchedule>) -> Result<(), SolverError> {
        if let Some(s) = &schedule {
            s.validate()?;
        }
        self.state.power = schedule;
        Ok(())
    }

    /// Changes the solid heat-capacity multiplier and reopens the energy
    /// audit window.
    pub fn set_capacity_scale(&mut self, scale: f64) -> Result<(), SolverError> {
        if !(scale > 0.0) {
            return Err(SolverError::InvalidConfig(format!("capacity scale must be positive, got {scale}")));
        }
        self.state.capacity_scale = scale;
        self.reset_audit();
        Ok(())
    }

    pub fn set_step_control(&mut self, step: StepControl) -> Result<(), SolverError> {
        let mut spec = self.state.spec.clone();
        spec.step = step;
        spec.validate()?;
        self.state.spec = spec;
        Ok(())
    }

    pub fn power_fraction_at(&self, t: f64) -> f64 {
        match &self.state.power {
            Some(s) => s.fraction(t - self.state.sealed_at.unwrap_or(0.0)),
            None => 1.0,
        }
    }

    /// Closes the inlet and outlet; plena become closed mixing volumes and
    /// node masses are refreshed from the current temperatures.
    pub fn seal_boundaries(&mut self) -> Result<(), SolverError> {
        if self.state.mode == FlowMode::Sealed {
            return Err(SolverError::AlreadySealed);
        }
        self.state.mode = FlowMode::Sealed;
        self.state.sealed_at = Some(self.state.time);
        self.refresh_masses();
        self.state.audit = Audit::default();
        self.state.audit.sealed_mass = self.total_fluid_mass();
        self.reset_audit();
        Ok(())
    }

    fn refresh_masses(&mut self) {
        let area = self.state.spec.geometry.flow_area();
        for ch in &mut self.state.channels {
            for ((m, node), cell) in ch.node_mass.iter_mut().zip(&ch.nodes).zip(&self.cells) {
                *m = self.fluid.interpolate(node.temperature).density * area * cell.length;
            }
        }
        for p in [&mut self.state.upper, &mut self.state.lower] {
            p.mass = self.fluid.interpolate(p.temperature).density * p.volume;
        }
    }

    fn reset_audit(&mut self) {
        let e = self.total_energy();
        let a = &mut self.state.audit;
        a.baseline_energy = e;
        a.source_energy = 0.0;
        a.boundary_energy = 0.0;
        a.boundary_enthalpy = 0.0;
    }

    pub fn total_fluid_mass(&self) -> f64 {
        let nodes: f64 = self.state.channels.iter().flat_map(|c| c.node_mass.iter()).sum();
        nodes + self.state.upper.mass + self.state.lower.mass
    }

    /// Stored energy: fluid enthalpy plus scaled solid internal energy, J.
    pub fn total_energy(&self) -> f64 {
        let s = &self.state;
        let fluid: f64 = s
            .channels
            .iter()
            .map(|c| c.nodes.iter().zip(&c.node_mass).map(|(n, m)| m * n.enthalpy).sum::<f64>())
            .sum::<f64>()
            + s.upper.mass * s.upper.enthalpy
            + s.lower.mass * s.lower.enthalpy;
        let solid: f64 = match &s.spec.solid {
            Some(layout) => s
                .solids
                .iter()
                .map(|n| {
                    let mat = material(layout, n.role);
                    s.capacity_scale * mat.density * n.volume * mat.specific_energy(n.temperature)
                })
                .sum(),
            None => 0.0,
        };
        fluid + solid
    }

    /// `|E - E₀ - budget|` relative to the cumulative source energy (absolute
    /// when there was none).
    pub fn energy_residual(&self) -> f64 {
        let a = &self.state.audit;
        let budget = a.source_energy + a.boundary_energy + a.boundary_enthalpy;
        let err = (self.total_energy() - a.baseline_energy - budget).abs();
        if a.source_energy > 0.0 {
            err / a.source_energy
        } else {
            err
        }
    }

    /// Relative change of the total fluid mass since sealing.
    pub fn mass_drift(&self) -> f64 {
        let m0 = self.state.audit.sealed_mass;
        if m0 > 0.0 {
            (self.total_fluid_mass() - m0).abs() / m0
        } else {
            0.0
        }
    }

    /// Thermodynamic pressure implied by the fixed mass and current
    /// temperatures (ideal-gas scaling of the table density).
    pub fn system_pressure(&self) -> f64 {
        if self.state.mode == FlowMode::Open {
            return self.state.spec.pressure;
        }
        let area = self.state.spec.geometry.flow_area();
        let mut table_mass = 0.0;
        for ch in &self.state.channels {
            for (n, c) in ch.nodes.iter().zip(&self.cells) {
                table_mass += self.fluid.interpolate(n.temperature).density * area * c.length;
            }
        }
        for p in [&self.state.upper, &self.state.lower] {
            table_mass += self.fluid.interpolate(p.temperature).density * p.volume;
        }
        self.fluid.pressure() * self.total_fluid_mass() / table_mass
    }

    pub fn max_solid_temperature(&self, role: SolidRole) -> Option<f64> {
        self.state
            .solids
            .iter()
            .filter(|n| n.role == role)
            .map(|n| n.temperature)
            .reduce(f64::max)
    }

    /// Solid node of a role at a channel level.
    pub fn solid_index(&self, channel: usize, level: usize, role: SolidRole) -> Option<usize> {
        self.state.solids.iter().position(|n| n.channel == channel && n.level == level && n.role == role)
    }

    /// Conductance of every solid link at the current temperatures, W/K.
    pub fn link_conductances(&self) -> Result<Vec<(usize, usize, f64)>, SolverError> {
        let Some(layout) = &self.state.spec.solid else { return Ok(Vec::new()) };
        let s = &self.state;
        s.links
            .iter()
            .map(|l| {
                let (na, nb) = (&s.solids[l.a], &s.solids[l.b]);
                let ka = material(layout, na.role).conductivity(na.temperature)?;
                let kb = material(layout, nb.role).conductivity(nb.temperature)?;
                Ok((l.a, l.b, 1.0 / (l.r_a / ka + l.r_b / kb)))
            })
            .collect()
    }

    fn closure(&self) -> WallClosure<'_> {
        WallClosure {
            correlations: &self.state.spec.correlations,
            fluid: &self.fluid,
            buoyancy: self.tables.as_ref(),
            gravity: self.state.spec.gravity,
        }
    }

    /// Runs the wall loop at every node with the stored wall fluxes.
    fn update_wall_closures(&mut self) -> Result<usize, SolverError> {
        let area = self.state.spec.geometry.flow_area();
        let diameter = self.state.spec.geometry.diameter;
        let last_dt = self.state.last_dt;
        let mut updates = Vec::with_capacity(self.state.channels.len());
        {
            let closure = self.closure();
            for ch in &self.state.channels {
                let mut per_node = Vec::with_capacity(ch.nodes.len());
                for node in &ch.nodes {
                    let props = self.fluid.interpolate(node.temperature);
                    let velocity = ch.mass_flow / (props.density * area);
                    let acceleration = if last_dt > 0.0 {
                        (ch.mass_flow - ch.previous_mass_flow) / last_dt / (props.density * area)
                    } else {
                        0.0
                    };
                    let bulk = BulkState::new(&props, velocity, diameter)?;
                    let sol = wall_temperature_iteration_from(&closure, &bulk, node.heat_flux, acceleration, node.wall_temperature)?;
                    per_node.push((props.density, velocity, bulk.reynolds, sol));
                }
                updates.push(per_node);
            }
        }
        let mut max_iterations = 0;
        let mut saturations = 0;
        for (ch, per_node) in self.state.channels.iter_mut().zip(updates) {
            for (node, (density, velocity, reynolds, sol)) in ch.nodes.iter_mut().zip(per_node) {
                let c = sol.closure;
                node.density = density;
                node.velocity = velocity;
                node.reynolds = reynolds;
                node.wall_temperature = c.wall_temperature;
                node.heat_transfer_coefficient = sol.heat_transfer_coefficient;
                node.nusselt = c.nusselt;
                node.nusselt_ratio = c.nusselt_ratio;
                node.friction_factor = c.friction_factor;
                node.friction_re = c.friction_re;
                node.buoyancy = c.buoyancy;
                node.wall_iterations = sol.iterations;
                max_iterations = max_iterations.max(sol.iterations);
                saturations += u64::from(c.saturated);
            }
        }
        self.state.audit.saturation_events += saturations;
        self.state.audit.max_wall_iterations = self.state.audit.max_wall_iterations.max(max_iterations);
        Ok(max_iterations)
    }

    /// Semi-implicit momentum coefficients: `ṁⁿ⁺¹ = (c_i + δ)/d_i` with the
    /// plenum pressure difference written as `mean(B) + δ`.
    fn momentum_coefficients(&self, dt: f64) -> (Vec<Momentum>, f64) {
        let spec = &self.state.spec;
        let cfg = &spec.correlations;
        let area = spec.geometry.flow_area();
        let d = spec.geometry.diameter;
        let heads: Vec<f64> = self
            .state
            .channels
            .iter()
            .map(|ch| spec.gravity * ch.nodes.iter().zip(&self.cells).map(|(n, c)| n.density * c.length).sum::<f64>())
            .collect();
        let mean_head = heads.iter().sum::<f64>() / heads.len() as f64;
        let coeffs = self
            .state
            .channels
            .iter()
            .zip(&heads)
            .map(|(ch, head)| {
                let m = ch.mass_flow;
                let mut inertance = 0.0;
                let mut resistance = 0.0;
                for (n, c) in ch.nodes.iter().zip(&self.cells) {
                    inertance += c.length / area;
                    let mu = self.fluid.interpolate(n.temperature).dynamic_viscosity;
                    resistance += n.friction_re * mu * c.length / (2.0 * d * d * n.density * area);
                    if cfg.brunone_enabled && n.velocity.abs() > cfg.brunone_velocity_floor && n.reynolds > 0.0 {
                        let accel = m - ch.previous_mass_flow;
                        let decelerating = m * accel < 0.0;
                        if !(cfg.brunone_off_when_decelerating && decelerating) {
                            let k3 = cfg.k3(n.reynolds).unwrap_or(0.0);
                            inertance += k3 * c.length / (2.0 * area);
                        }
                    }
                }
                let (first, last) = (ch.nodes[0].density, ch.nodes[ch.nodes.len() - 1].density);
                let (up, down) = if m >= 0.0 { (first, last) } else { (last, first) };
                resistance += (spec.form_loss.entry / up + spec.form_loss.exit / down) * m.abs() / (2.0 * area * area);
                let a = inertance / dt;
                Momentum { c: a * m + mean_head - head, d: a + resistance }
            })
            .collect();
        (coeffs, mean_head)
    }

    /// Finds `δ` with `Σ (c_i + δ)/d_i = target` by bracketed false position.
    fn flow_split(coeffs: &[Momentum], target: f64) -> Result<f64, SolverError> {
        let residual = |delta: f64| coeffs.iter().map(|m| (m.c + delta) / m.d).sum::<f64>() - target;
        let scale = coeffs.iter().map(|m| (m.c / m.d).abs()).fold(target.abs(), f64::max).max(MASS_FLOW_FLOOR);
        let tol = 1e-12 * scale;
        let inv: f64 = coeffs.iter().map(|m| 1.0 / m.d).sum();
        let guess = -residual(0.0) / inv;
        let mut width = 1e-9 * guess.abs().max(coeffs.iter().map(|m| m.c.abs()).fold(1e-9, f64::max));
        let (mut lo, mut hi) = (guess - width, guess + width);
        let (mut f_lo, mut f_hi) = (residual(lo), residual(hi));
        let mut expansions = 0;
        while f_lo > 0.0 || f_hi < 0.0 {
            expansions += 1;
            if expansions > 200 {
                return Err(SolverError::Bracket { lo, hi, f_lo, f_hi });
            }
            width *= 4.0;
            lo = guess - width;
            hi = guess + width;
            f_lo = residual(lo);
            f_hi = residual(hi);
        }
        let mut side = 0i8;
        for _ in 0..200 {
            let x = if f_hi == f_lo { 0.5 * (lo + hi) } else { (lo * f_hi - hi * f_lo) / (f_hi - f_lo) };
            let f = residual(x);
            if f.abs() <= tol || hi - lo <= 4.0 * f64::EPSILON * x.abs() {
                return Ok(x);
            }
            if f < 0.0 {
                lo = x;
                f_lo = f;
                if side == -1 {
                    f_hi *= 0.5;
                }
                side = -1;
            } else {
                hi = x;
                f_hi = f;
                if side == 1 {
                    f_lo *= 0.5;
                }
                side = 1;
            }
        }
        Err(SolverError::Bracket { lo, hi, f_lo, f_hi })
    }

    fn flow_target(&self) -> f64 {
        match self.state.mode {
            FlowMode::Open => -self.state.spec.inlet.mass_flow,
            FlowMode::Sealed => 0.0,
        }
    }

    /// Largest step allowed by the flow-based bounds.
    fn stable_dt(&self, flows: &[f64]) -> f64 {
        let spec = &self.state.spec;
        let area = spec.geometry.flow_area();
        let ctl = &spec.step;
        let mut dt = ctl.dt_max;
        let mut upper_in = if self.state.mode == FlowMode::Open { spec.inlet.mass_flow } else { 0.0 };
        let mut lower_in = 0.0;
        for (ch, &m) in self.state.channels.iter().zip(flows) {
            if m == 0.0 {
                continue;
            }
            if m > 0.0 {
                upper_in += m;
            } else {
                lower_in -= m;
            }
            for ((n, c), mass) in ch.nodes.iter().zip(&self.cells).zip(&ch.node_mass) {
                let u = m.abs() / (n.density * area);
                dt = dt.min(ctl.target_cfl * c.length / u).min(ctl.mass_courant * mass / m.abs());
            }
        }
        if upper_in > 0.0 {
            dt = dt.min(ctl.mass_courant * self.state.upper.mass / upper_in);
        }
        if lower_in > 0.0 {
            dt = dt.min(ctl.mass_courant * self.state.lower.mass / lower_in);
        }
        dt
    }

    fn cfl_of(&self, flows: &[f64], dt: f64) -> f64 {
        let area = self.state.spec.geometry.flow_area();
        let mut cfl: f64 = 0.0;
        for (ch, &m) in self.state.channels.iter().zip(flows) {
            for (n, c) in ch.nodes.iter().zip(&self.cells) {
                cfl = cfl.max(m.abs() / (n.density * area) * dt / c.length);
            }
        }
        cfl
    }

    /// Advances one step under the CFL controller.
    pub fn step(&mut self) -> Result<StepReport, SolverError> {
        self.step_limited(f64::INFINITY)
    }

    /// Advances one step no longer than `dt_limit`.
    pub fn step_limited(&mut self, dt_limit: f64) -> Result<StepReport, SolverError> {
        let max_wall_iterations = self.update_wall_closures()?;
        let current: Vec<f64> = self.state.channels.iter().map(|c| c.mass_flow).collect();
        let ctl = self.state.spec.step;
        let mut dt = self.stable_dt(&current).min(dt_limit);
        if self.state.last_dt > 0.0 {
            dt = dt.min(ctl.growth * self.state.last_dt);
        }
        let target = self.flow_target();
        let mut attempts = 0;
        let (flows, delta, mean_head) = loop {
            if dt < ctl.dt_min && dt < dt_limit {
                return Err(SolverError::StepTooSmall { dt, dt_min: ctl.dt_min });
            }
            let (coeffs, mean_head) = self.momentum_coefficients(dt);
            let delta = Self::flow_split(&coeffs, target)?;
            let flows: Vec<f64> = coeffs.iter().map(|m| (m.c + delta) / m.d).collect();
            let allowed = self.stable_dt(&flows);
            if dt <= allowed * (1.0 + 1e-12) {
                break (flows, delta, mean_head);
            }
            attempts += 1;
            if attempts > 50 {
                return Err(SolverError::Cfl { cfl: self.cfl_of(&flows, dt), target: ctl.target_cfl });
            }
            dt = allowed.min(0.9 * dt);
        };

        let t_new = self.state.time + dt;
        let fraction = self.power_fraction_at(t_new);
        // Measured on the densities the step was accepted against.
        let cfl = self.cfl_of(&flows, dt);
        self.advance_energy(&flows, dt, fraction)?;

        for (ch, m) in self.state.channels.iter_mut().zip(&flows) {
            ch.previous_mass_flow = ch.mass_flow;
            ch.mass_flow = *m;
        }
        let area = self.state.spec.geometry.flow_area();
        for ch in &mut self.state.channels {
            for n in &mut ch.nodes {
                n.density = self.fluid.interpolate(n.temperature).density;
                n.velocity = ch.mass_flow / (n.density * area);
            }
        }
        self.state.plenum_dp = mean_head + delta;
        self.state.dynamic_dp = delta;
        self.state.time = t_new;
        self.state.last_dt = dt;

        let max_flow = flows.iter().fold(0.0_f64, |a, m| a.max(m.abs()));
        let sum: f64 = flows.iter().sum();
        let mass_residual = (sum - target).abs() / max_flow.max(MASS_FLOW_FLOOR);
        let pressure = self.system_pressure();
        let drift = self.mass_drift();
        let a = &mut self.state.audit;
        a.steps += 1;
        a.max_cfl = a.max_cfl.max(cfl);
        if self.state.mode == FlowMode::Sealed {
            a.max_mass_residual = a.max_mass_residual.max(mass_residual);
            a.max_mass_drift = a.max_mass_drift.max(drift);
        }
        self.state.upper.pressure = pressure;
        self.state.lower.pressure = pressure + self.state.plenum_dp;
        Ok(StepReport { dt, cfl, mass_residual, power_fraction: fraction, max_wall_iterations })
    }

    /// Advances until `time` reaches `t_end`, landing on it exactly.
    pub fn advance_to(&mut self, t_end: f64) -> Result<(), SolverError> {
        while self.state.time < t_end {
            let remaining = t_end - self.state.time;
            self.step_limited(remaining)?;
            if (t_end - self.state.time).abs() <= 1e-12 * t_end.abs().max(1.0) {
                self.state.time = t_end;
            }
        }
        Ok(())
    }

    /// Upwind advection, implicit wall exchange and backward-Euler solid
    /// conduction, solved together for the temperature increments.
    fn advance_energy(&mut self, flows: &[f64], dt: f64, fraction: f64) -> Result<(), SolverError> {
        let spec = &self.state.spec;
        let n_ax = self.cells.len();
        let n_fluid = n_ax * spec.channels.len();
        let n = n_fluid + self.state.solids.len();
        let perimeter = spec.geometry.heated_perimeter();
        let mut system = SymmetricSystem::new(n);
        let mut rhs = vec![0.0; n];
        let mut cp = vec![0.0; n_fluid];
        let mut exchange = vec![0.0; n_fluid];
        let (h_upper, h_lower) = (self.state.upper.enthalpy, self.state.lower.enthalpy);

        for (i, (ch, &m)) in self.state.channels.iter().zip(flows).enumerate() {
            let heating = spec.channels[i];
            for k in 0..n_ax {
                let idx = i * n_ax + k;
                let node = &ch.nodes[k];
                let props = self.fluid.interpolate(node.temperature);
                cp[idx] = props.specific_heat;
                system.diag[idx] += ch.node_mass[k] * props.specific_heat / dt;
                let upstream = if m > 0.0 {
                    Some(if k == 0 { h_lower } else { ch.nodes[k - 1].enthalpy })
                } else if m < 0.0 {
                    Some(if k == n_ax - 1 { h_upper } else { ch.nodes[k + 1].enthalpy })
                } else {
                    None
                };
                if let Some(h_up) = upstream {
                    rhs[idx] += m.abs() * (h_up - node.enthalpy);
                }
                let heated = self.cells[k].segment == Segment::Heated;
                match heating {
                    ChannelHeating::PrescribedFlux { heat_flux } if heated => {
                        rhs[idx] += heat_flux * perimeter * self.cells[k].length;
                    }
                    ChannelHeating::Conjugate { .. } => {
                        if let Some(s) = self.state.wall_nodes[i][k] {
                            let g = node.heat_transfer_coefficient * perimeter * self.cells[k].length;
                            exchange[idx] = g;
                            let sidx = n_fluid + s;
                            system.add_link(idx, sidx, g);
                            let dt_wall = self.state.solids[s].temperature - node.temperature;
                            rhs[idx] += g * dt_wall;
                            rhs[sidx] -= g * dt_wall;
                        }
                    }
                    _ => {}
                }
            }
        }

        let mut source_power = 0.0;
        let mut boundary_g = vec![0.0; self.state.solids.len()];
        if let Some(layout) = &spec.solid {
            for (s, node) in self.state.solids.iter().enumerate() {
                let mat = material(layout, node.role);
                let c = self.state.capacity_scale * mat.density * node.volume * mat.specific_heat(node.temperature)?;
                system.diag[n_fluid + s] += c / dt;
                let q = fraction * spec.nominal_power_density * node.nominal_source;
                rhs[n_fluid + s] += q;
                source_power += q;
            }
            for (a, b, g) in self.link_conductances()? {
                system.add_link(n_fluid + a, n_fluid + b, g);
                let flow = g * (self.state.solids[b].temperature - self.state.solids[a].temperature);
                rhs[n_fluid + a] += flow;
                rhs[n_fluid + b] -= flow;
            }
            for b in &self.state.boundary {
                let node = &self.state.solids[b.node];
                let g = material(layout, node.role).conductivity(node.temperature)? / b.r;
                boundary_g[b.node] += g;
                system.diag[n_fluid + b.node] += g;
                rhs[n_fluid + b.node] += g * (spec.boundary_temperature - node.temperature);
            }
        }
        let prescribed_power: f64 = spec
            .channels
            .iter()
            .map(|h| match h {
                ChannelHeating::PrescribedFlux { heat_flux } => {
                    heat_flux * perimeter * spec.geometry.heated_length
                }
                _ => 0.0,
            })
            .sum();

        let delta = system.solve(&rhs, 1e-14)?;

        // Plena use the old node enthalpies.
        let mut upper_gain = 0.0;
        let mut lower_gain = 0.0;
        for (ch, &m) in self.state.channels.iter().zip(flows) {
            if m > 0.0 {
                upper_gain += m * (ch.nodes[n_ax - 1].enthalpy - h_upper);
            } else if m < 0.0 {
                lower_gain += -m * (ch.nodes[0].enthalpy - h_lower);
            }
        }
        let open = self.state.mode == FlowMode::Open;
        let inlet_h = self.fluid.interpolate(spec.inlet.temperature).specific_enthalpy;
        if open {
            upper_gain += spec.inlet.mass_flow * (inlet_h - h_upper);
        }
        let inlet_flow = spec.inlet.mass_flow;
        let boundary_temperature = spec.boundary_temperature;

        for (i, ch) in self.state.channels.iter_mut().enumerate() {
            for k in 0..n_ax {
                let idx = i * n_ax + k;
                let node = &mut ch.nodes[k];
                node.enthalpy += cp[idx] * delta[idx];
                node.temperature = self.fluid.temperature_from_enthalpy(node.enthalpy);
            }
        }
        for (s, node) in self.state.solids.iter_mut().enumerate() {
            node.temperature += delta[n_fluid + s];
        }
        let mut boundary_power = 0.0;
        for (s, g) in boundary_g.iter().enumerate() {
            if *g > 0.0 {
                boundary_power += g * (boundary_temperature - self.state.solids[s].temperature);
            }
        }
        // Wall flux for the next wall loop.
        for (i, ch) in self.state.channels.iter_mut().enumerate() {
            for k in 0..n_ax {
                let idx = i * n_ax + k;
                let node = &mut ch.nodes[k];
                node.heat_flux = match self.state.spec.channels[i] {
                    ChannelHeating::PrescribedFlux { heat_flux } if self.cells[k].segment == Segment::Heated => heat_flux,
                    ChannelHeating::Conjugate { .. } => match self.state.wall_nodes[i][k] {
                        Some(s) if exchange[idx] > 0.0 => {
                            exchange[idx] * (self.state.solids[s].temperature - node.temperature)
                                / (perimeter * self.cells[k].length)
                        }
                        _ => 0.0,
                    },
                    _ => 0.0,
                };
            }
        }

        let up = &mut self.state.upper;
        up.enthalpy += dt * upper_gain / up.mass;
        up.temperature = self.fluid.temperature_from_enthalpy(up.enthalpy);
        let low = &mut self.state.lower;
        let lower_h_old = low.enthalpy;
        low.enthalpy += dt * lower_gain / low.mass;
        low.temperature = self.fluid.temperature_from_enthalpy(low.enthalpy);

        let a = &mut self.state.audit;
        a.source_energy += dt * (source_power + prescribed_power);
        a.boundary_energy += dt * boundary_power;
        if open {
            a.boundary_enthalpy += dt * inlet_flow * (inlet_h - lower_h_old);
        }
        Ok(())
    }

    /// Serialized state for an exact restart.
    pub fn checkpoint_json(&self) -> Result<String, SolverError> {
        serde_json::to_string(&self.state).map_err(|e| SolverError::Checkpoint(e.to_string()))
    }

    pub fn from_checkpoint_json(json: &str, fluid: FluidPropertyTable) -> Result<Self, SolverError> {
        let state: NetworkState = serde_json::from_str(json).map_err(|e| SolverError::Checkpoint(e.to_string()))?;
        Self::from_state(state, fluid)
    }
}

fn material(layout: &SolidLayout, role: SolidRole) -> &SolidMaterialModel {
    match role {
        SolidRole::Fuel => &layout.fuel,
        SolidRole::Web | SolidRole::Wall => &layout.graphite,
    }
}

type SolidGraph = (Vec<SolidNode>, Vec<SolidLink>, Vec<SolidBoundary>, Vec<Vec<Option<usize>>>);

/// Lays out wall, web and (heated levels only) fuel nodes per conjugate
/// channel, with radial, axial, lateral and boundary links.
fn build_solids(spec: &NetworkSpec, cells: &[AxialCell], temperature: f64) -> SolidGraph {
    let n_ax = cells.len();
    let mut solids = Vec::new();
    let mut links = Vec::new();
    let mut boundary = Vec::new();
    let mut wall_nodes = vec![vec![None; n_ax]; spec.channels.len()];
    let Some(layout) = &spec.solid else { return (solids, links, boundary, wall_nodes) };

    // web[i][k], fuel[i][k]
    let mut web = vec![vec![None; n_ax]; spec.channels.len()];
    let mut fuel = vec![vec![None; n_ax]; spec.channels.len()];
    for (i, heating) in spec.channels.iter().enumerate() {
        let ChannelHeating::Conjugate { peaking_factor } = *heating else { continue };
        for (k, cell) in cells.iter().enumerate() {
            let heated = cell.segment == Segment::Heated;
            let web_area = if heated { layout.graphite_area } else { layout.reflector_area } - layout.wall_area;
            let mut push = |role, area: f64, source: f64| {
                solids.push(SolidNode {
                    channel: i,
                    level: k,
                    role,
                    temperature,
                    volume: area * cell.length,
                    nominal_source: source,
                });
                solids.len() - 1
            };
            let w = push(SolidRole::Wall, layout.wall_area, 0.0);
            let b = push(SolidRole::Web, web_area, 0.0);
            wall_nodes[i][k] = Some(w);
            web[i][k] = Some((b, web_area));
            links.push(SolidLink { a: b, b: w, r_a: 1.0 / (layout.web_wall_shape * cell.length), r_b: 1.0 / (layout.wall_shape * cell.length) });
            if heated {
                let f = push(SolidRole::Fuel, layout.fuel_area, peaking_factor * layout.fuel_area * cell.length);
                fuel[i][k] = Some(f);
                links.push(SolidLink { a: f, b, r_a: 1.0 / (layout.fuel_shape * cell.length), r_b: 1.0 / (layout.web_fuel_shape * cell.length) });
            }
        }
        // Axial conduction along each column.
        for k in 0..n_ax.saturating_sub(1) {
            let (lo, hi) = (&cells[k], &cells[k + 1]);
            let axial = |a: usize, area_a: f64, b: usize, area_b: f64| SolidLink {
                a,
                b,
                r_a: lo.length / (2.0 * area_a),
                r_b: hi.length / (2.0 * area_b),
            };
            if let (Some((a, aa)), Some((b, ab))) = (web[i][k], web[i][k + 1]) {
                links.push(axial(a, aa, b, ab));
            }
            if let (Some(a), Some(b)) = (wall_nodes[i][k], wall_nodes[i][k + 1]) {
                links.push(axial(a, layout.wall_area, b, layout.wall_area));
            }
            if let (Some(a), Some(b)) = (fuel[i][k], fuel[i][k + 1]) {
                links.push(axial(a, layout.fuel_area, b, layout.fuel_area));
            }
        }
    }
    for l in &spec.lateral_links {
        for (k, cell) in cells.iter().enumerate() {
            if let (Some((a, _)), Some((b, _))) = (web[l.a][k], web[l.b][k]) {
                let r = 1.0 / (l.shape * cell.length);
                links.push(SolidLink { a, b, r_a: r, r_b: r });
            }
        }
    }
    for l in &spec.boundary_links {
        for (k, cell) in cells.iter().enumerate() {
            if let Some((node, _)) = web[l.channel][k] {
                boundary.push(SolidBoundary { node, r: 1.0 / (l.shape * cell.length) });
            }
        }
    }
    (solids, links, boundary, wall_nodes)
}
