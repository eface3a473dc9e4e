//! Linear velocity ramps in a single isothermal channel.

use serde::{Deserialize, Serialize};

use crate::correlations::{BulkState, CorrelationConfig};
use crate::properties::{FluidPropertyTable, NOMINAL_PRESSURE};

use super::output::CsvTable;
use super::ScenarioError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RampDirection {
    Up,
    Down,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RampSpec {
    /// K
    pub reference_temperature: f64,
    /// s
    pub ramp_duration: f64,
    /// Start velocity, m/s.
    pub u0: f64,
    /// End velocity, m/s.
    pub u1: f64,
    pub direction: RampDirection,
}

/// Reference temperatures and ramp-up end velocities.
const RAMP_ROWS: [(f64, f64); 3] = [(773.15, 35.0), (1023.15, 45.0), (1223.15, 55.0)];
const RAMP_DURATIONS: [f64; 3] = [1.0, 0.1, 0.01];
const RAMP_BASE_VELOCITY: f64 = 10.0;

impl RampSpec {
    /// The nine ramp-up and nine ramp-down combinations.
    pub fn all_rows() -> Vec<RampSpec> {
        let mut rows = Vec::with_capacity(18);
        for direction in [RampDirection::Up, RampDirection::Down] {
            for (t, u_high) in RAMP_ROWS {
                for d in RAMP_DURATIONS {
                    let (u0, u1) = match direction {
                        RampDirection::Up => (RAMP_BASE_VELOCITY, u_high),
                        RampDirection::Down => (u_high, RAMP_BASE_VELOCITY),
                    };
                    rows.push(RampSpec { reference_temperature: t, ramp_duration: d, u0, u1, direction });
                }
            }
        }
        rows
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        let monotone = match self.direction {
            RampDirection::Up => self.u1 > self.u0,
            RampDirection::Down => self.u1 < self.u0,
        };
        if !(self.u0 > 0.0 && self.u1 > 0.0 && self.ramp_duration > 0.0 && self.reference_temperature > 0.0 && monotone) {
            return Err(ScenarioError::Invalid(format!("invalid ramp {self:?}")));
        }
        Ok(())
    }

    /// File-name friendly label, e.g. `up_500C_0.01s`.
    pub fn label(&self) -> String {
        let dir = match self.direction {
            RampDirection::Up => "up",
            RampDirection::Down => "down",
        };
        format!("{dir}_{:.0}C_{}s", self.reference_temperature - 273.15, self.ramp_duration)
    }

    pub fn velocity(&self, t: f64) -> f64 {
        let s = (t / self.ramp_duration).clamp(0.0, 1.0);
        self.u0 + (self.u1 - self.u0) * s
    }

    /// dU/dt; the ramp is active on `[0, duration)`.
    pub fn acceleration(&self, t: f64) -> f64 {
        if (0.0..self.ramp_duration).contains(&t) {
            (self.u1 - self.u0) / self.ramp_duration
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RampSettings {
    pub diameter: f64,
    pub pressure: f64,
    /// Output intervals across the ramp itself.
    pub samples_per_ramp: usize,
    /// Held time after the ramp as a multiple of its duration.
    pub hold_fraction: f64,
    pub correlations: CorrelationConfig,
    /// Defaults to every row.
    pub cases: Vec<RampSpec>,
}

impl Default for RampSettings {
    fn default() -> Self {
        Self {
            diameter: 0.01588,
            pressure: NOMINAL_PRESSURE,
            samples_per_ramp: 200,
            hold_fraction: 1.0,
            correlations: CorrelationConfig { brunone_enabled: true, property_corrections: false, ..Default::default() },
            cases: RampSpec::all_rows(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RampCase {
    pub spec: RampSpec,
    pub diameter: f64,
    pub samples_per_ramp: usize,
    pub hold_fraction: f64,
    pub correlations: CorrelationConfig,
}

pub fn build_ramp_case(spec: &RampSpec, settings: &RampSettings) -> Result<RampCase, ScenarioError> {
    spec.validate()?;
    settings.correlations.validate()?;
    if !(settings.diameter > 0.0 && settings.samples_per_ramp >= 2 && settings.hold_fraction >= 0.0) {
        return Err(ScenarioError::Invalid("ramp diameter, samples and hold must be positive".into()));
    }
    if !settings.correlations.brunone_enabled {
        return Err(ScenarioError::Invalid("ramp cases compare against the unsteady closure; enable brunone".into()));
    }
    Ok(RampCase {
        spec: *spec,
        diameter: settings.diameter,
        samples_per_ramp: settings.samples_per_ramp,
        hold_fraction: settings.hold_fraction,
        correlations: settings.correlations,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RampSample {
    pub time: f64,
    pub velocity: f64,
    pub acceleration: f64,
    pub quasi_steady: f64,
    pub brunone: f64,
}

/// Quasi-steady and unsteady friction side by side along the ramp.
pub fn run_ramp(case: &RampCase, fluid: &FluidPropertyTable) -> Result<Vec<RampSample>, ScenarioError> {
    let props = fluid.interpolate(case.spec.reference_temperature);
    let dt = case.spec.ramp_duration / case.samples_per_ramp as f64;
    let total = case.samples_per_ramp + (case.samples_per_ramp as f64 * case.hold_fraction).round() as usize;
    (0..=total)
        .map(|k| {
            let time = k as f64 * dt;
            let velocity = case.spec.velocity(time);
            let acceleration = case.spec.acceleration(time);
            let bulk = BulkState::new(&props, velocity, case.diameter)?;
            let quasi_steady = case.correlations.friction_factor(bulk.reynolds)?;
            let brunone = case
                .correlations
                .transient_friction(quasi_steady, bulk.reynolds, case.diameter, velocity, acceleration)?
                .c_f;
            Ok(RampSample { time, velocity, acceleration, quasi_steady, brunone })
        })
        .collect()
}

pub fn ramp_table(samples: &[RampSample]) -> CsvTable {
    let mut t = CsvTable::new(["time", "U", "c_f_quasisteady", "c_f_brunone"]);
    for s in samples {
        t.push_numbers(&[s.time, s.velocity, s.quasi_steady, s.brunone]);
    }
    t
}

/// Sample nearest the middle of the ramp.
pub fn mid_ramp(samples: &[RampSample], spec: &RampSpec) -> Option<RampSample> {
    let mid = 0.5 * spec.ramp_duration;
    samples.iter().copied().min_by(|a, b| (a.time - mid).abs().total_cmp(&(b.time - mid).abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_enumerate_both_directions() {
        let rows = RampSpec::all_rows();
        assert_eq!(rows.len(), 18);
        let down750 = rows
            .iter()
            .find(|r| r.direction == RampDirection::Down && r.reference_temperature == 1023.15)
            .unwrap();
        assert_eq!((down750.u0, down750.u1), (45.0, 10.0));
        assert_eq!(rows[2].label(), "up_500C_0.01s");
    }

    #[test]
    fn held_flow_recovers_quasi_steady() {
        let fluid = FluidPropertyTable::default_helium();
        let settings = RampSettings::default();
        let case = build_ramp_case(&settings.cases[2], &settings).unwrap();
        let samples = run_ramp(&case, &fluid).unwrap();
        for s in &samples {
            if s.acceleration > 0.0 {
                assert!(s.brunone > s.quasi_steady);
            } else {
                assert!((s.brunone - s.quasi_steady).abs() <= 1e-9 * s.quasi_steady);
            }
        }
        assert_eq!(samples.last().unwrap().velocity, 35.0);
    }
}
