use serde::{Deserialize, Serialize};

use super::SolverError;

/// Fraction of nominal power as a function of time after shutdown.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DecayLaw {
    ConstantFraction { fraction: f64 },
    /// `0.066 [t^-0.2 - (t + τ)^-0.2]`, clamped from above.
    DecayLaw { tau: f64, clamp_fraction: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecayHeatSchedule {
    /// W/m³ in fuel at full power.
    pub nominal_power_density: f64,
    pub law: DecayLaw,
}

/// One year of prior operation.
pub const DEFAULT_TAU: f64 = 3.156e7;
pub const NOMINAL_POWER_DENSITY: f64 = 3.11e7;

impl DecayHeatSchedule {
    pub fn constant(fraction: f64) -> Self {
        Self { nominal_power_density: NOMINAL_POWER_DENSITY, law: DecayLaw::ConstantFraction { fraction } }
    }

    pub fn decay_law() -> Self {
        Self {
            nominal_power_density: NOMINAL_POWER_DENSITY,
            law: DecayLaw::DecayLaw { tau: DEFAULT_TAU, clamp_fraction: 0.1 },
        }
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        let ok = self.nominal_power_density >= 0.0
            && match self.law {
                DecayLaw::ConstantFraction { fraction } => fraction > 0.0 && fraction <= 1.0,
                DecayLaw::DecayLaw { tau, clamp_fraction } => tau > 0.0 && clamp_fraction > 0.0 && clamp_fraction <= 1.0,
            };
        if ok {
            Ok(())
        } else {
            Err(SolverError::InvalidConfig(format!("invalid decay heat schedule {self:?}")))
        }
    }

    pub fn fraction(&self, t: f64) -> f64 {
        decay_power_fraction(&self.law, t)
    }
}

pub fn decay_power_fraction(law: &DecayLaw, t: f64) -> f64 {
    match *law {
        DecayLaw::ConstantFraction { fraction } => fraction,
        DecayLaw::DecayLaw { tau, clamp_fraction } => {
            if t <= 0.0 {
                clamp_fraction
            } else {
                (0.066 * (t.powf(-0.2) - (t + tau).powf(-0.2))).min(clamp_fraction)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let c1 = DecayHeatSchedule::constant(0.1);
        assert_eq!(c1.fraction(0.0), 0.1);
        assert_eq!(c1.fraction(1234.5), 0.1);
        let c2 = DecayHeatSchedule::decay_law();
        assert!((c2.fraction(1000.0) - 0.014490531).abs() < 1e-8);
        assert_eq!(c2.fraction(0.0), 0.1);
        assert_eq!(c2.fraction(1e-9), 0.1);
        assert!(c2.fraction(200.0) > c2.fraction(700.0));
    }

    #[test]
    fn validation() {
        assert!(DecayHeatSchedule::constant(0.0).validate().is_err());
        assert!(DecayHeatSchedule::decay_law().validate().is_ok());
    }
}
