//! Wall-closure correlations: steady and unsteady friction, Petukhov friction
//! and Nusselt with wall-to-bulk property corrections, and the
//! variable-property Dittus–Boelter form used for supercritical fluids.
//!
//! Friction factors are Darcy-type throughout (laminar limit `64/Re`).

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::properties::FluidStateSample;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CorrelationError {
    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("Reynolds number {0} is outside the Petukhov friction domain (Re > 8)")]
    PetukhovDomain(f64),
    #[error("Nusselt denominator is non-positive ({0})")]
    NusseltDenominator(f64),
    #[error("wall temperature {t_w} K below bulk temperature {t_b} K")]
    WallBelowBulk { t_b: f64, t_w: f64 },
    #[error("invalid correlation configuration: {0}")]
    Config(String),
}

fn positive(name: &'static str, value: f64) -> Result<f64, CorrelationError> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(CorrelationError::NonPositive { name, value })
    }
}

/// Bulk (cross-section averaged) flow state of one subchannel node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BulkState {
    /// m/s, positive upward.
    pub velocity: f64,
    pub hydraulic_diameter: f64,
    pub density: f64,
    pub viscosity: f64,
    pub conductivity: f64,
    pub specific_heat: f64,
    pub enthalpy: f64,
    pub temperature: f64,
    pub reynolds: f64,
    pub prandtl: f64,
}

impl BulkState {
    pub fn new(props: &FluidStateSample, velocity: f64, hydraulic_diameter: f64) -> Result<Self, CorrelationError> {
        let reynolds = reynolds(props.density, velocity, hydraulic_diameter, props.dynamic_viscosity)?;
        Ok(Self {
            velocity,
            hydraulic_diameter,
            density: props.density,
            viscosity: props.dynamic_viscosity,
            conductivity: positive("conductivity", props.thermal_conductivity)?,
            specific_heat: positive("specific heat", props.specific_heat)?,
            enthalpy: props.specific_enthalpy,
            temperature: props.temperature,
            reynolds,
            prandtl: props.dynamic_viscosity * props.specific_heat / props.thermal_conductivity,
        })
    }
}

/// Wall-side properties evaluated at the wall temperature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WallState {
    pub temperature: f64,
    pub density: f64,
    pub viscosity: f64,
    pub enthalpy: f64,
}

impl From<&FluidStateSample> for WallState {
    fn from(s: &FluidStateSample) -> Self {
        Self {
            temperature: s.temperature,
            density: s.density,
            viscosity: s.dynamic_viscosity,
            enthalpy: s.specific_enthalpy,
        }
    }
}

/// How Brunone's `k3` is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case", tag = "mode", content = "value")]
pub enum K3Mode {
    /// Shear-decay coefficient from the local Reynolds number.
    #[default]
    Analytic,
    Constant(f64),
}

/// Which explicit friction law feeds the momentum balance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum FrictionLaw {
    /// Laminar `64/Re` and the implicit smooth-pipe turbulent law.
    #[default]
    Colebrook,
    /// Petukhov's explicit `1/[1.82 log10(Re/8)]^2`.
    Petukhov,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorrelationConfig {
    /// Density-ratio exponent of the friction correction.
    pub exponent_m: f64,
    /// Viscosity-ratio exponent of the friction correction.
    pub exponent_n_friction: f64,
    pub laminar_ceiling: f64,
    pub turbulent_floor: f64,
    /// Apply wall-to-bulk property corrections to friction and Nusselt.
    pub property_corrections: bool,
    /// Multiply Nusselt by the mixed-convection ratio.
    pub buoyancy_correction: bool,
    pub friction_law: FrictionLaw,
    pub brunone_enabled: bool,
    pub k3_mode: K3Mode,
    /// Drop the unsteady term while the flow decelerates.
    pub brunone_off_when_decelerating: bool,
    /// m/s; below it the unsteady term is zeroed.
    pub brunone_velocity_floor: f64,
    /// Laminar fully-developed Nusselt number (uniform heat flux).
    pub laminar_nusselt: f64,
    /// K, used only by the supercritical Nusselt form.
    pub pseudo_critical_temperature: Option<f64>,
}

impl Default for CorrelationConfig {
    fn default() -> Self {
        Self {
            exponent_m: 0.4,
            exponent_n_friction: 1.0,
            laminar_ceiling: 2300.0,
            turbulent_floor: 4000.0,
            property_corrections: true,
            buoyancy_correction: true,
            friction_law: FrictionLaw::Colebrook,
            brunone_enabled: false,
            k3_mode: K3Mode::Analytic,
            brunone_off_when_decelerating: false,
            brunone_velocity_floor: 1e-6,
            laminar_nusselt: 4.36,
            pseudo_critical_temperature: None,
        }
    }
}

impl CorrelationConfig {
    /// Switches to the alternative exponent pair `(m, n) = (0.33, 0.2)`.
    pub fn with_alternative_exponents(mut self) -> Self {
        self.exponent_m = 0.33;
        self.exponent_n_friction = 0.2;
        self
    }

    pub fn validate(&self) -> Result<(), CorrelationError> {
        if !(self.laminar_ceiling > 0.0 && self.laminar_ceiling < self.turbulent_floor) {
            return Err(CorrelationError::Config(format!(
                "need 0 < laminar_ceiling ({}) < turbulent_floor ({})",
                self.laminar_ceiling, self.turbulent_floor
            )));
        }
        if let K3Mode::Constant(v) = self.k3_mode {
            if !(v >= 0.0) {
                return Err(CorrelationError::Config(format!("constant k3 must be non-negative, got {v}")));
            }
        }
        if !(self.brunone_velocity_floor > 0.0) {
            return Err(CorrelationError::Config("brunone_velocity_floor must be positive".into()));
        }
        if !(self.laminar_nusselt > 0.0) {
            return Err(CorrelationError::Config("laminar_nusselt must be positive".into()));
        }
        if let Some(tpc) = self.pseudo_critical_temperature {
            positive("pseudo-critical temperature", tpc)?;
        }
        Ok(())
    }

    /// Weight of the turbulent branch: 0 at or below the laminar ceiling,
    /// 1 at or above the turbulent floor, linear in `ln Re` in between.
    pub fn turbulent_weight(&self, re: f64) -> f64 {
        if re <= self.laminar_ceiling {
            0.0
        } else if re >= self.turbulent_floor {
            1.0
        } else {
            (re / self.laminar_ceiling).ln() / (self.turbulent_floor / self.laminar_ceiling).ln()
        }
    }

    /// Explicit friction factor for the configured law, blended through the
    /// transition band.
    pub fn friction_factor(&self, re: f64) -> Result<f64, CorrelationError> {
        match self.friction_law {
            FrictionLaw::Colebrook => steady_friction(re, self),
            FrictionLaw::Petukhov => {
                positive("Reynolds number", re)?;
                let w = self.turbulent_weight(re);
                if w >= 1.0 {
                    petukhov_cf0(re)
                } else if w <= 0.0 {
                    Ok(64.0 / re)
                } else {
                    let lam = 64.0 / self.laminar_ceiling;
                    let turb = petukhov_cf0(self.turbulent_floor)?;
                    Ok((1.0 - w) * lam + w * turb)
                }
            }
        }
    }

    pub fn k3(&self, re: f64) -> Result<f64, CorrelationError> {
        brunone_k3(re, self)
    }

    /// Friction including the unsteady term when enabled.
    pub fn transient_friction(
        &self,
        c_fs: f64,
        re: f64,
        diameter: f64,
        velocity: f64,
        acceleration: f64,
    ) -> Result<FrictionResult, CorrelationError> {
        let decelerating = velocity * acceleration < 0.0;
        if !self.brunone_enabled || (self.brunone_off_when_decelerating && decelerating) {
            return brunone_friction(c_fs, 0.0, diameter, velocity, 0.0, self.brunone_velocity_floor);
        }
        let k3 = if re > 0.0 { self.k3(re)? } else { 0.0 };
        brunone_friction(c_fs, k3, diameter, velocity, acceleration, self.brunone_velocity_floor)
    }
}

pub fn reynolds(density: f64, velocity: f64, diameter: f64, viscosity: f64) -> Result<f64, CorrelationError> {
    positive("density", density)?;
    positive("hydraulic diameter", diameter)?;
    positive("viscosity", viscosity)?;
    Ok(density * velocity.abs() * diameter / viscosity)
}

/// Residual of the smooth-pipe implicit law written for `x = 1/sqrt(c)`.
fn colebrook_residual(x: f64, re: f64) -> f64 {
    x + 2.0 * (2.51 * x / re).log10()
}

/// Turbulent root of `1/sqrt(c) = -2 log10(2.51 / (Re sqrt(c)))`.
///
/// Newton on `x = 1/sqrt(c)` kept inside a bisection bracket, seeded from
/// Petukhov's explicit value.
pub fn colebrook_smooth(re: f64) -> Result<f64, CorrelationError> {
    positive("Reynolds number", re)?;
    let seed = if re > 16.0 { 1.0 / petukhov_cf0(re)?.sqrt() } else { 1.0 };
    let (mut lo, mut hi) = (0.5 * seed, 2.0 * seed);
    while colebrook_residual(lo, re) > 0.0 {
        lo *= 0.5;
    }
    while colebrook_residual(hi, re) < 0.0 {
        hi *= 2.0;
    }
    let ln10 = std::f64::consts::LN_10;
    let mut x = seed.clamp(lo, hi);
    for _ in 0..200 {
        let r = colebrook_residual(x, re);
        if r.abs() < 1e-13 {
            break;
        }
        if r > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let newton = x - r / (1.0 + 2.0 / (x * ln10));
        x = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if hi - lo < 1e-15 * x {
            break;
        }
    }
    Ok(1.0 / (x * x))
}

/// Steady friction: laminar, turbulent, and a log-linear blend between the
/// laminar ceiling and turbulent floor.
pub fn steady_friction(re: f64, cfg: &CorrelationConfig) -> Result<f64, CorrelationError> {
    positive("Reynolds number", re)?;
    let w = cfg.turbulent_weight(re);
    if w <= 0.0 {
        Ok(64.0 / re)
    } else if w >= 1.0 {
        colebrook_smooth(re)
    } else {
        let lam = 64.0 / cfg.laminar_ceiling;
        let turb = colebrook_smooth(cfg.turbulent_floor)?;
        Ok((1.0 - w) * lam + w * turb)
    }
}

/// Brunone's coefficient `k3 = sqrt(C*)/2` from the shear-decay coefficient.
pub fn brunone_k3(re: f64, cfg: &CorrelationConfig) -> Result<f64, CorrelationError> {
    positive("Reynolds number", re)?;
    if let K3Mode::Constant(v) = cfg.k3_mode {
        return Ok(v);
    }
    let c_star = if re <= cfg.laminar_ceiling {
        0.00476
    } else {
        let kappa = (15.29 / re.powf(0.0567)).log10();
        12.86 / re.powf(kappa)
    };
    Ok(c_star.sqrt() / 2.0)
}

/// Friction factor split into its steady and unsteady parts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrictionResult {
    pub c_f: f64,
    pub steady_part: f64,
    pub transient_part: f64,
    pub k3_used: f64,
    /// The `a ∂U/∂x` contribution; always zero here (not modelled).
    pub convective_part: f64,
    /// Set when `|U|` fell below the velocity floor and the unsteady term
    /// was suppressed.
    pub velocity_guarded: bool,
}

/// `c_f = c_fs + k3 D / (U|U|) · dU/dt`.
pub fn brunone_friction(
    c_fs: f64,
    k3: f64,
    diameter: f64,
    velocity: f64,
    acceleration: f64,
    velocity_floor: f64,
) -> Result<FrictionResult, CorrelationError> {
    positive("steady friction factor", c_fs)?;
    positive("hydraulic diameter", diameter)?;
    let guarded = velocity.abs() <= velocity_floor;
    let transient_part = if guarded || acceleration == 0.0 {
        0.0
    } else {
        k3 * diameter / (velocity * velocity.abs()) * acceleration
    };
    Ok(FrictionResult {
        c_f: c_fs + transient_part,
        steady_part: c_fs,
        transient_part,
        k3_used: k3,
        convective_part: 0.0,
        velocity_guarded: guarded,
    })
}

/// Petukhov's explicit initial friction estimate.
pub fn petukhov_cf0(re: f64) -> Result<f64, CorrelationError> {
    if !(re > 8.0) {
        return Err(CorrelationError::PetukhovDomain(re));
    }
    let d = 1.82 * (re / 8.0).log10();
    Ok(1.0 / (d * d))
}

/// `c_f0 (ρ_w/ρ_b)^m (μ_w/μ_b)^n`.
pub fn property_corrected_cf(c_f0: f64, bulk: &BulkState, wall: &WallState, cfg: &CorrelationConfig) -> f64 {
    let density_ratio = wall.density / bulk.density;
    let viscosity_ratio = wall.viscosity / bulk.viscosity;
    c_f0 * density_ratio.powf(cfg.exponent_m) * viscosity_ratio.powf(cfg.exponent_n_friction)
}

/// Petukhov-type Nusselt number recomputed from a (corrected) friction factor.
pub fn petukhov_nu(re: f64, pr: f64, c_f: f64) -> Result<f64, CorrelationError> {
    positive("Reynolds number", re)?;
    positive("Prandtl number", pr)?;
    positive("friction factor", c_f)?;
    let f8 = c_f / 8.0;
    let denom = 1.0 + 900.0 / re + 12.7 * f8.sqrt() * (pr.powf(2.0 / 3.0) - 1.0);
    if !(denom > 0.0) {
        return Err(CorrelationError::NusseltDenominator(denom));
    }
    Ok(re * pr * f8 / denom)
}

/// Exponent of the mean-specific-heat ratio in the supercritical form.
pub fn supercritical_exponent_n(t_b: f64, t_w: f64, t_pc: f64) -> Result<f64, CorrelationError> {
    positive("pseudo-critical temperature", t_pc)?;
    if t_w < t_b {
        return Err(CorrelationError::WallBelowBulk { t_b, t_w });
    }
    let wall_branch = 0.4 + 0.2 * (t_w / t_pc - 1.0);
    Ok(if t_w <= t_pc || t_b > 1.2 * t_pc {
        0.4
    } else if t_b <= t_pc {
        wall_branch
    } else {
        wall_branch * (1.0 - 5.0 * (t_b / t_pc - 1.0))
    })
}

/// Dittus–Boelter modified by density and mean-specific-heat ratios.
pub fn variable_property_nu(bulk: &BulkState, wall: &WallState, t_pc: f64) -> Result<f64, CorrelationError> {
    positive("Reynolds number", bulk.reynolds)?;
    positive("Prandtl number", bulk.prandtl)?;
    let dt = wall.temperature - bulk.temperature;
    let cp_mean = if dt == 0.0 {
        bulk.specific_heat
    } else {
        (wall.enthalpy - bulk.enthalpy) / dt
    };
    let n = supercritical_exponent_n(bulk.temperature, wall.temperature, t_pc)?;
    Ok(0.0183
        * bulk.reynolds.powf(0.82)
        * bulk.prandtl.powf(0.5)
        * (wall.density / bulk.density).powf(0.3)
        * (cp_mean / bulk.specific_heat).powf(n))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> CorrelationConfig {
        CorrelationConfig::default()
    }

    fn bulk(re: f64, pr: f64) -> BulkState {
        BulkState {
            velocity: 1.0,
            hydraulic_diameter: 0.01588,
            density: 4.0,
            viscosity: 4e-5,
            conductivity: 0.3,
            specific_heat: 5193.0,
            enthalpy: 5193.0 * 800.0,
            temperature: 800.0,
            reynolds: re,
            prandtl: pr,
        }
    }

    #[test]
    fn reynolds_examples() {
        assert_eq!(reynolds(1.0, 1.0, 1.0, 1.0).unwrap(), 1.0);
        let re = reynolds(4.4, 28.0, 0.01588, 3.9e-5).unwrap();
        assert!((re - 50164.51282051283).abs() < 1e-8);
        assert_eq!(reynolds(4.0, -10.0, 0.02, 4e-5).unwrap(), reynolds(4.0, 10.0, 0.02, 4e-5).unwrap());
        assert!(reynolds(0.0, 1.0, 1.0, 1.0).is_err());
        assert!(reynolds(1.0, 1.0, -1.0, 1.0).is_err());
    }

    #[test]
    fn steady_friction_branches() {
        assert!((steady_friction(1000.0, &cfg()).unwrap() - 0.064).abs() < 1e-15);
        assert!((steady_friction(2300.0, &cfg()).unwrap() - 64.0 / 2300.0).abs() < 1e-15);
        // Bisection oracle (scipy brentq, xtol 1e-15): 0.017989773084273842.
        assert!((steady_friction(1e5, &cfg()).unwrap() - 0.017989773084273842).abs() < 1e-9);
        assert!(steady_friction(0.0, &cfg()).is_err());
    }

    #[test]
    fn k3_examples() {
        assert!((brunone_k3(1000.0, &cfg()).unwrap() - 0.034496376621320685).abs() < 1e-12);
        assert!((brunone_k3(15200.0, &cfg()).unwrap() - 0.01874418846230474).abs() < 1e-9);
        let c = CorrelationConfig { k3_mode: K3Mode::Constant(0.02), ..cfg() };
        assert_eq!(brunone_k3(123456.0, &c).unwrap(), 0.02);
    }

    #[test]
    fn brunone_examples() {
        let r = brunone_friction(0.03, 0.02, 0.01588, 10.0, 0.0, 1e-6).unwrap();
        assert_eq!(r.c_f, 0.03);
        let r = brunone_friction(0.03, 0.02, 0.01588, 10.0, 25.0, 1e-6).unwrap();
        assert!((r.c_f - (0.03 + 0.02 * 0.01588 * 25.0 / 100.0)).abs() < 1e-15);
        assert_eq!(r.c_f, r.steady_part + r.transient_part);
        let r = brunone_friction(0.03, 0.02, 0.01588, 1e-7, 25.0, 1e-6).unwrap();
        assert!(r.velocity_guarded);
        assert_eq!(r.transient_part, 0.0);
    }

    #[test]
    fn brunone_deceleration_switch() {
        let c = CorrelationConfig { brunone_enabled: true, brunone_off_when_decelerating: true, ..cfg() };
        let r = c.transient_friction(0.03, 1e4, 0.01588, 10.0, -50.0).unwrap();
        assert_eq!(r.transient_part, 0.0);
        let r = c.transient_friction(0.03, 1e4, 0.01588, 10.0, 50.0).unwrap();
        assert!(r.transient_part > 0.0);
    }

    #[test]
    fn petukhov_cf0_examples() {
        assert!((petukhov_cf0(1e4).unwrap() - 0.031477486878127174).abs() < 1e-12);
        assert!((petukhov_cf0(1e5).unwrap() - 0.01798640524536161).abs() < 1e-12);
        assert!(matches!(petukhov_cf0(8.0), Err(CorrelationError::PetukhovDomain(_))));
    }

    #[test]
    fn property_correction_examples() {
        let b = bulk(1e4, 0.66);
        let same = WallState { temperature: 800.0, density: b.density, viscosity: b.viscosity, enthalpy: b.enthalpy };
        assert_eq!(property_corrected_cf(0.0314, &b, &same, &cfg()), 0.0314);
        let w = WallState { density: 0.8 * b.density, viscosity: 1.1 * b.viscosity, ..same };
        let got = property_corrected_cf(1.0, &b, &w, &cfg());
        assert!((got - 1.006071114240118).abs() < 1e-12);
    }

    #[test]
    fn petukhov_nu_examples() {
        let nu = petukhov_nu(1e4, 0.66, 0.031477).unwrap();
        assert!((nu - 28.94224528300114).abs() < 1e-9);
        let nu1 = petukhov_nu(5e4, 1.0, 0.02).unwrap();
        assert!((nu1 - 5e4 * 0.0025 / (1.0 + 900.0 / 5e4)).abs() < 1e-10);
        let big = petukhov_nu(1e12, 0.7, 0.01).unwrap();
        let bigger = petukhov_nu(2e12, 0.7, 0.01).unwrap();
        assert!((bigger / big - 2.0).abs() < 1e-6);
    }

    #[test]
    fn exponent_n_branches() {
        let tpc = 650.0;
        assert_eq!(supercritical_exponent_n(600.0, 640.0, tpc).unwrap(), 0.4);
        assert!((supercritical_exponent_n(tpc, 1.1 * tpc, tpc).unwrap() - 0.42).abs() < 1e-12);
        assert!(supercritical_exponent_n(1.2 * tpc, 1.3 * tpc, tpc).unwrap().abs() < 1e-12);
        assert_eq!(supercritical_exponent_n(1.3 * tpc, 1.4 * tpc, tpc).unwrap(), 0.4);
        assert!(supercritical_exponent_n(700.0, 690.0, tpc).is_err());
    }

    #[test]
    fn variable_property_nu_examples() {
        let b = bulk(1e5, 0.66);
        let w = WallState { temperature: 800.0, density: b.density, viscosity: b.viscosity, enthalpy: b.enthalpy };
        let nu = variable_property_nu(&b, &w, 650.0).unwrap();
        assert!((nu - 187.1643186099795).abs() < 1e-9);
        // Constant c_p: mean c_p ratio is exactly one for any wall temperature.
        let hot = WallState { temperature: 900.0, density: b.density, viscosity: b.viscosity, enthalpy: 5193.0 * 900.0 };
        assert!((variable_property_nu(&b, &hot, 650.0).unwrap() - nu).abs() < 1e-9);
        let half = WallState { density: 0.5 * b.density, ..w };
        let ratio = variable_property_nu(&b, &half, 650.0).unwrap() / nu;
        assert!((ratio - 0.8122523963562356).abs() < 1e-12);
    }

    #[test]
    fn config_validation() {
        assert!(cfg().validate().is_ok());
        let bad = CorrelationConfig { laminar_ceiling: 5000.0, ..cfg() };
        assert!(bad.validate().is_err());
    }
}
