//! Steady full-power run followed by a sealed loss-of-flow transient.

use serde::{Deserialize, Serialize};

use crate::buoyancy::{DEFAULT_CALIBRATION, STANDARD_GRAVITY};
use crate::correlations::CorrelationConfig;
use crate::properties::{FluidPropertyTable, NOMINAL_PRESSURE};
use crate::solver::{
    BoundaryLink, ChannelGeometry, ChannelHeating, DecayHeatSchedule, DecayLaw, FormLoss, InletCondition, LateralLink,
    Network, NetworkSpec, PlenumSpec, SolidLayout, SolidRole, StepControl, DEFAULT_TAU, NOMINAL_POWER_DENSITY,
    REFERENCE_TEMPERATURE,
};

use super::output::{format_float, CsvTable};
use super::ScenarioError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeMedium {
    Fluid,
    Fuel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeSpec {
    pub name: String,
    pub channel: usize,
    /// Position within the heated segment, 0 at the bottom.
    pub axial_fraction: f64,
    pub medium: ProbeMedium,
}

/// A sequence of channels sampled at one heated-segment height.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LineSpec {
    pub name: String,
    pub channels: Vec<usize>,
    pub axial_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LofaChannel {
    pub name: String,
    pub peaking_factor: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoreFlow {
    /// Full-core steady mass flow, kg/s.
    pub core_mass_flow: f64,
    /// Coolant channels in the full core; the modelled network receives
    /// its proportional share.
    pub full_core_channels: usize,
    pub inlet_temperature: f64,
}

impl Default for CoreFlow {
    fn default() -> Self {
        Self { core_mass_flow: 14.35, full_core_channels: 561, inlet_temperature: REFERENCE_TEMPERATURE }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PowerSettings {
    /// W/m³ of fuel at full power.
    pub nominal_power_density: f64,
    /// Constant fraction for case 1.
    pub case1_fraction: f64,
    /// Prior operating time in the case 2 decay law, s.
    pub tau: f64,
    /// Upper clamp of the case 2 fraction.
    pub clamp_fraction: f64,
}

impl Default for PowerSettings {
    fn default() -> Self {
        Self { nominal_power_density: NOMINAL_POWER_DENSITY, case1_fraction: 0.1, tau: DEFAULT_TAU, clamp_fraction: 0.1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SteadySettings {
    /// Largest relative probe-temperature change allowed over one window.
    pub tolerance: f64,
    /// s
    pub window: f64,
    /// Give up after this much simulated time, s.
    pub max_time: f64,
    /// Solid heat-capacity multiplier used only while converging.
    pub capacity_scale: f64,
}

impl Default for SteadySettings {
    fn default() -> Self {
        Self { tolerance: 1e-6, window: 10.0, max_time: 2000.0, capacity_scale: 1e-3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TransientSettings {
    /// s after sealing.
    pub duration: f64,
    /// Probe sampling interval, s.
    pub output_cadence: f64,
    /// Line snapshot times after sealing, s.
    pub snapshot_times: Vec<f64>,
}

impl Default for TransientSettings {
    fn default() -> Self {
        Self { duration: 1000.0, output_cadence: 1.0, snapshot_times: vec![503.0, 1000.0] }
    }
}

/// Everything needed to build either LOFA case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LofaConfig {
    pub geometry: ChannelGeometry,
    pub channels: Vec<LofaChannel>,
    pub solid: SolidLayout,
    pub lateral_links: Vec<LateralLink>,
    pub boundary_links: Vec<BoundaryLink>,
    /// Fixed temperature outside the modelled block, K.
    pub boundary_temperature: f64,
    pub plenum: PlenumSpec,
    pub correlations: CorrelationConfig,
    pub calibration_constant: f64,
    pub form_loss: FormLoss,
    pub step: StepControl,
    pub gravity: f64,
    pub pressure: f64,
    pub flow: CoreFlow,
    pub power: PowerSettings,
    pub steady: SteadySettings,
    pub transient: TransientSettings,
    pub probes: Vec<ProbeSpec>,
    pub lines: Vec<LineSpec>,
}

impl Default for LofaConfig {
    /// One periphery-coupled channel and two tiers of three interior
    /// channels.
    fn default() -> Self {
        let channel = |name: &str, peaking_factor| LofaChannel { name: name.into(), peaking_factor };
        let link = |a, b| LateralLink { a, b, shape: 6.0 };
        let probe = |name: &str, channel, axial_fraction, medium| ProbeSpec {
            name: name.into(),
            channel,
            axial_fraction,
            medium,
        };
        Self {
            geometry: ChannelGeometry::default(),
            channels: vec![
                channel("periphery", 0.8),
                channel("inner1_a", 1.0),
                channel("inner1_b", 1.0),
                channel("inner1_c", 1.0),
                channel("inner2_a", 1.2),
                channel("inner2_b", 1.2),
                channel("inner2_c", 1.2),
            ],
            solid: SolidLayout::default(),
            lateral_links: vec![
                link(0, 1),
                link(0, 2),
                link(0, 3),
                link(1, 2),
                link(2, 3),
                link(1, 4),
                link(2, 5),
                link(3, 6),
                link(4, 5),
                link(5, 6),
            ],
            boundary_links: vec![BoundaryLink { channel: 0, shape: 0.1 }],
            boundary_temperature: REFERENCE_TEMPERATURE,
            plenum: PlenumSpec::default(),
            correlations: CorrelationConfig::default(),
            calibration_constant: DEFAULT_CALIBRATION,
            form_loss: FormLoss::default(),
            step: StepControl::default(),
            gravity: STANDARD_GRAVITY,
            pressure: NOMINAL_PRESSURE,
            flow: CoreFlow::default(),
            power: PowerSettings::default(),
            steady: SteadySettings::default(),
            transient: TransientSettings::default(),
            probes: vec![
                probe("fuel_inner1_mid", 1, 0.5, ProbeMedium::Fuel),
                probe("fuel_inner2_mid", 4, 0.5, ProbeMedium::Fuel),
                probe("fuel_inner2_upper", 4, 0.75, ProbeMedium::Fuel),
                probe("fluid_periphery_mid", 0, 0.5, ProbeMedium::Fluid),
                probe("fluid_inner2_mid", 4, 0.5, ProbeMedium::Fluid),
            ],
            lines: vec![LineSpec { name: "slice_mid".into(), channels: vec![0, 1, 4], axial_fraction: 0.5 }],
        }
    }
}

impl LofaConfig {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        let bad = |m: String| Err(ScenarioError::Invalid(m));
        let n = self.channels.len();
        if n < 2 {
            return bad(format!("a LOFA network needs at least two channels, got {n}"));
        }
        if self.flow.full_core_channels < n || !(self.flow.core_mass_flow > 0.0) {
            return bad("flow.full_core_channels must cover the modelled channels and flow must be positive".into());
        }
        let s = &self.steady;
        if !(s.tolerance > 0.0 && s.window > 0.0 && s.max_time >= s.window && s.capacity_scale > 0.0) {
            return bad(format!("invalid steady settings {s:?}"));
        }
        let t = &self.transient;
        if !(t.duration > 0.0 && t.output_cadence > 0.0 && t.output_cadence <= t.duration) {
            return bad("transient duration and output cadence must be positive".into());
        }
        if let Some(x) = t.snapshot_times.iter().find(|x| !(**x >= 0.0 && **x <= t.duration)) {
            return bad(format!("snapshot time {x} lies outside the transient"));
        }
        let mut names = std::collections::BTreeSet::new();
        for p in &self.probes {
            if !names.insert(p.name.as_str()) {
                return bad(format!("duplicate probe name {:?}", p.name));
            }
            if p.channel >= n {
                return bad(format!("probe {:?} references channel {} but only {n} exist", p.name, p.channel));
            }
            if !(0.0..=1.0).contains(&p.axial_fraction) {
                return bad(format!("probe {:?} axial fraction must lie in [0, 1]", p.name));
            }
        }
        for l in &self.lines {
            if l.channels.is_empty() || l.channels.iter().any(|c| *c >= n) {
                return bad(format!("line {:?} references a missing channel", l.name));
            }
            if !(0.0..=1.0).contains(&l.axial_fraction) {
                return bad(format!("line {:?} axial fraction must lie in [0, 1]", l.name));
            }
        }
        if self.boundary_links.is_empty() {
            return bad("at least one channel must be linked to the fixed-temperature boundary".into());
        }
        Ok(())
    }

    /// Steady inlet flow for the modelled channels, kg/s.
    pub fn inlet_mass_flow(&self) -> f64 {
        self.flow.core_mass_flow * self.channels.len() as f64 / self.flow.full_core_channels as f64
    }

    pub fn schedule(&self, case: LofaCaseId) -> DecayHeatSchedule {
        let law = match case {
            LofaCaseId::One => DecayLaw::ConstantFraction { fraction: self.power.case1_fraction },
            LofaCaseId::Two => DecayLaw::DecayLaw { tau: self.power.tau, clamp_fraction: self.power.clamp_fraction },
        };
        DecayHeatSchedule { nominal_power_density: self.power.nominal_power_density, law }
    }

    pub fn network_spec(&self) -> NetworkSpec {
        NetworkSpec {
            geometry: self.geometry.clone(),
            channels: self
                .channels
                .iter()
                .map(|c| ChannelHeating::Conjugate { peaking_factor: c.peaking_factor })
                .collect(),
            solid: Some(SolidLayout { capacity_scale: self.steady.capacity_scale, ..self.solid.clone() }),
            lateral_links: self.lateral_links.clone(),
            boundary_links: self.boundary_links.clone(),
            boundary_temperature: self.boundary_temperature,
            plenum: self.plenum,
            correlations: self.correlations,
            calibration_constant: self.calibration_constant,
            form_loss: self.form_loss,
            step: self.step,
            gravity: self.gravity,
            pressure: self.pressure,
            inlet: InletCondition { mass_flow: self.inlet_mass_flow(), temperature: self.flow.inlet_temperature },
            nominal_power_density: self.power.nominal_power_density,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LofaCaseId {
    /// Constant reduced power.
    One,
    /// Decay-law power.
    Two,
}

impl LofaCaseId {
    pub fn from_number(n: u8) -> Option<Self> {
        match n {
            1 => Some(Self::One),
            2 => Some(Self::Two),
            _ => None,
        }
    }

    pub fn number(self) -> u8 {
        match self {
            Self::One => 1,
            Self::Two => 2,
        }
    }
}

/// A probe resolved to network indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedProbe {
    pub spec: ProbeSpec,
    pub level: usize,
    /// Fuel node index for fuel probes.
    pub solid: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LofaCase {
    pub case: LofaCaseId,
    pub config: LofaConfig,
    pub spec: NetworkSpec,
    pub schedule: DecayHeatSchedule,
}

pub fn build_lofa_case(config: &LofaConfig, case: LofaCaseId) -> Result<LofaCase, ScenarioError> {
    config.validate()?;
    let spec = config.network_spec();
    spec.validate()?;
    let schedule = config.schedule(case);
    schedule.validate()?;
    Ok(LofaCase { case, config: config.clone(), spec, schedule })
}

fn resolve_probes(config: &LofaConfig, network: &Network) -> Result<Vec<ResolvedProbe>, ScenarioError> {
    config
        .probes
        .iter()
        .map(|p| {
            let level = config.geometry.heated_cell_at_fraction(p.axial_fraction);
            let solid = match p.medium {
                ProbeMedium::Fluid => None,
                ProbeMedium::Fuel => Some(network.solid_index(p.channel, level, SolidRole::Fuel).ok_or_else(|| {
                    ScenarioError::Invalid(format!("probe {:?} has no fuel node at level {level}", p.name))
                })?),
            };
            Ok(ResolvedProbe { spec: p.clone(), level, solid })
        })
        .collect()
}

fn probe_temperature(network: &Network, p: &ResolvedProbe) -> f64 {
    match p.solid {
        Some(s) => network.state().solids[s].temperature,
        None => network.state().channels[p.spec.channel].nodes[p.level].temperature,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SteadyLogRow {
    pub time: f64,
    pub max_relative_change: f64,
    pub max_fuel_temperature: f64,
    pub outlet_temperature: f64,
    pub last_dt: f64,
}

/// The converged full-power state and how it was reached.
pub struct SteadyOutcome {
    pub network: Network,
    pub log: Vec<SteadyLogRow>,
    /// Checkpoint of the converged state (solid capacities restored).
    pub checkpoint: String,
}

/// Runs the open network at full power until every probe temperature
/// settles, then restores the physical solid heat capacity.
pub fn run_steady(case: &LofaCase, fluid: FluidPropertyTable) -> Result<SteadyOutcome, ScenarioError> {
    let cfg = &case.config;
    let mut network = Network::new(case.spec.clone(), fluid, cfg.flow.inlet_temperature)?;
    network.set_power(None)?;
    let probes = resolve_probes(cfg, &network)?;
    let settings = cfg.steady;
    let mut previous: Vec<f64> = probes.iter().map(|p| probe_temperature(&network, p)).collect();
    let mut log = Vec::new();
    loop {
        let t = network.time() + settings.window;
        network.advance_to(t)?;
        let current: Vec<f64> = probes.iter().map(|p| probe_temperature(&network, p)).collect();
        let change = current.iter().zip(&previous).map(|(a, b)| ((a - b) / b).abs()).fold(0.0, f64::max);
        log.push(SteadyLogRow {
            time: t,
            max_relative_change: change,
            max_fuel_temperature: network.max_solid_temperature(SolidRole::Fuel).unwrap_or(f64::NAN),
            outlet_temperature: network.state().lower.temperature,
            last_dt: network.state().last_dt,
        });
        if change < settings.tolerance {
            break;
        }
        if t >= settings.max_time {
            return Err(ScenarioError::NotConverged { time: t, change, tolerance: settings.tolerance });
        }
        previous = current;
    }
    network.set_capacity_scale(1.0)?;
    let checkpoint = network.checkpoint_json()?;
    Ok(SteadyOutcome { network, log, checkpoint })
}

pub fn steady_log_table(log: &[SteadyLogRow]) -> CsvTable {
    let mut t = CsvTable::new(["time", "max_relative_change", "max_fuel_temperature", "outlet_temperature", "last_dt"]);
    for r in log {
        t.push_numbers(&[r.time, r.max_relative_change, r.max_fuel_temperature, r.outlet_temperature, r.last_dt]);
    }
    t
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeSample {
    /// s after sealing.
    pub time: f64,
    pub temperature: f64,
    pub velocity: f64,
    pub mass_flow: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineSnapshot {
    pub line: String,
    pub time: f64,
    pub channels: Vec<usize>,
    pub fluid_temperature: Vec<f64>,
    pub fuel_temperature: Vec<Option<f64>>,
    pub velocity: Vec<f64>,
}

impl LineSnapshot {
    pub fn to_table(&self) -> CsvTable {
        let mut t = CsvTable::new(["position", "channel", "T", "T_fuel", "w_velocity"]);
        for (j, &c) in self.channels.iter().enumerate() {
            t.push(vec![
                format_float(j as f64),
                c.to_string(),
                format_float(self.fluid_temperature[j]),
                self.fuel_temperature[j].map(format_float).unwrap_or_default(),
                format_float(self.velocity[j]),
            ]);
        }
        t
    }
}

/// Sampled state after sealing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransientRecord {
    pub case: LofaCaseId,
    pub probes: Vec<ResolvedProbe>,
    pub probe_histories: Vec<Vec<ProbeSample>>,
    pub times: Vec<f64>,
    /// Per sample, per channel, kg/s; positive upward.
    pub mass_flows: Vec<Vec<f64>>,
    pub peak_fuel: Vec<f64>,
    pub system_pressure: Vec<f64>,
    pub snapshots: Vec<LineSnapshot>,
    pub channel_names: Vec<String>,
    /// Channels with a boundary link.
    pub periphery: Vec<usize>,
    /// Mean heated-segment bulk temperature per channel at the end.
    pub final_mean_temperature: Vec<f64>,
    pub max_mass_residual: f64,
    pub max_mass_drift: f64,
    pub energy_residual: f64,
    pub max_cfl: f64,
    pub max_wall_iterations: usize,
    pub saturation_events: u64,
    pub clamp_count: u64,
    pub steps: u64,
}

impl TransientRecord {
    pub fn probe_table(&self, i: usize) -> CsvTable {
        let p = &self.probes[i];
        let temp = match p.spec.medium {
            ProbeMedium::Fluid => "T_fluid",
            ProbeMedium::Fuel => "T_fuel",
        };
        let mut t = CsvTable::new(["time", temp, "U", "mdot"]);
        for s in &self.probe_histories[i] {
            t.push_numbers(&[s.time, s.temperature, s.velocity, s.mass_flow]);
        }
        t
    }

    pub fn flow_table(&self) -> CsvTable {
        let mut header = vec!["time".to_string()];
        header.extend(self.channel_names.iter().map(|n| format!("mdot_{n}")));
        header.push("peak_fuel_temperature".into());
        header.push("system_pressure".into());
        let mut t = CsvTable::new(header);
        for (k, time) in self.times.iter().enumerate() {
            let mut row = vec![*time];
            row.extend(&self.mass_flows[k]);
            row.push(self.peak_fuel[k]);
            row.push(self.system_pressure[k]);
            t.push_numbers(&row);
        }
        t
    }

    /// Interior channel with the highest final mean temperature.
    pub fn hottest_interior(&self) -> Option<usize> {
        (0..self.final_mean_temperature.len())
            .filter(|c| !self.periphery.contains(c))
            .max_by(|a, b| self.final_mean_temperature[*a].total_cmp(&self.final_mean_temperature[*b]))
    }

    pub fn final_mass_flows(&self) -> &[f64] {
        self.mass_flows.last().map(Vec::as_slice).unwrap_or(&[])
    }

    /// Probe temperature at the sample nearest `t`.
    pub fn probe_at(&self, probe: usize, t: f64) -> Option<f64> {
        let h = &self.probe_histories[probe];
        h.iter().min_by(|a, b| (a.time - t).abs().total_cmp(&(b.time - t).abs())).map(|s| s.temperature)
    }

    pub fn peak_fuel_at_end(&self) -> f64 {
        self.peak_fuel.last().copied().unwrap_or(f64::NAN)
    }
}

/// Seals a converged network, applies the case power and runs the transient.
pub fn run_transient(case: &LofaCase, mut network: Network) -> Result<(TransientRecord, Network), ScenarioError> {
    let cfg = &case.config;
    network.seal_boundaries()?;
    network.set_power(Some(case.schedule))?;
    network.fluid().reset_clamp_count();
    let probes = resolve_probes(cfg, &network)?;
    let t0 = network.time();
    let settings = &cfg.transient;
    let mut record = TransientRecord {
        case: case.case,
        probe_histories: vec![Vec::new(); probes.len()],
        probes,
        times: Vec::new(),
        mass_flows: Vec::new(),
        peak_fuel: Vec::new(),
        system_pressure: Vec::new(),
        snapshots: Vec::new(),
        channel_names: cfg.channels.iter().map(|c| c.name.clone()).collect(),
        periphery: cfg.boundary_links.iter().map(|l| l.channel).collect(),
        final_mean_temperature: Vec::new(),
        max_mass_residual: 0.0,
        max_mass_drift: 0.0,
        energy_residual: 0.0,
        max_cfl: 0.0,
        max_wall_iterations: 0,
        saturation_events: 0,
        clamp_count: 0,
        steps: 0,
    };
    record.periphery.sort_unstable();
    record.periphery.dedup();

    let samples = (settings.duration / settings.output_cadence).round() as usize;
    let mut marks: Vec<f64> = (0..=samples).map(|k| (k as f64 * settings.output_cadence).min(settings.duration)).collect();
    marks.extend(&settings.snapshot_times);
    marks.push(settings.duration);
    marks.sort_by(f64::total_cmp);
    marks.dedup_by(|a, b| (*a - *b).abs() < 1e-9);

    for &mark in &marks {
        network.advance_to(t0 + mark)?;
        let on_cadence = ((mark / settings.output_cadence).round() * settings.output_cadence - mark).abs() < 1e-9
            || mark == settings.duration;
        if on_cadence {
            sample(&network, &mut record, mark);
        }
        for line in cfg.lines.iter() {
            if settings.snapshot_times.iter().any(|s| (s - mark).abs() < 1e-9) {
                record.snapshots.push(snapshot(&network, cfg, line, mark));
            }
        }
    }

    let cells = network.cells().to_vec();
    record.final_mean_temperature = network
        .state()
        .channels
        .iter()
        .map(|ch| {
            let (sum, len) = ch
                .nodes
                .iter()
                .zip(&cells)
                .filter(|(_, c)| c.segment == crate::solver::Segment::Heated)
                .fold((0.0, 0.0), |(s, l), (n, c)| (s + n.temperature * c.length, l + c.length));
            sum / len
        })
        .collect();
    let audit = &network.state().audit;
    record.max_mass_residual = audit.max_mass_residual;
    record.max_mass_drift = audit.max_mass_drift;
    record.max_cfl = audit.max_cfl;
    record.max_wall_iterations = audit.max_wall_iterations;
    record.saturation_events = audit.saturation_events;
    record.steps = audit.steps;
    record.energy_residual = network.energy_residual();
    record.clamp_count = network.fluid().clamp_count();
    Ok((record, network))
}

fn sample(network: &Network, record: &mut TransientRecord, t: f64) {
    let state = network.state();
    for (p, history) in record.probes.iter().zip(record.probe_histories.iter_mut()) {
        let ch = &state.channels[p.spec.channel];
        history.push(ProbeSample {
            time: t,
            temperature: probe_temperature(network, p),
            velocity: ch.nodes[p.level].velocity,
            mass_flow: ch.mass_flow,
        });
    }
    record.times.push(t);
    record.mass_flows.push(state.channels.iter().map(|c| c.mass_flow).collect());
    record.peak_fuel.push(network.max_solid_temperature(SolidRole::Fuel).unwrap_or(f64::NAN));
    record.system_pressure.push(network.system_pressure());
}

fn snapshot(network: &Network, cfg: &LofaConfig, line: &LineSpec, t: f64) -> LineSnapshot {
    let level = cfg.geometry.heated_cell_at_fraction(line.axial_fraction);
    let state = network.state();
    LineSnapshot {
        line: line.name.clone(),
        time: t,
        channels: line.channels.clone(),
        fluid_temperature: line.channels.iter().map(|&c| state.channels[c].nodes[level].temperature).collect(),
        fuel_temperature: line
            .channels
            .iter()
            .map(|&c| network.solid_index(c, level, SolidRole::Fuel).map(|s| state.solids[s].temperature))
            .collect(),
        velocity: line.channels.iter().map(|&c| state.channels[c].nodes[level].velocity).collect(),
    }
}

/// Both phases in one call.
pub fn run_lofa(case: &LofaCase, fluid: FluidPropertyTable) -> Result<(SteadyOutcome, TransientRecord), ScenarioError> {
    let steady = run_steady(case, fluid.clone())?;
    let network = Network::from_checkpoint_json(&steady.checkpoint, fluid)?;
    let (record, _) = run_transient(case, network)?;
    Ok((steady, record))
}
