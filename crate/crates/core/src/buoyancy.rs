//! Mixed-convection Nusselt ratio `Nu/Nu_f` as a function of the buoyancy
//! parameter `Bo* = Gr*/(Re^3.425 Pr^0.8)`.
//!
//! The ratio `x` solves `x = (1 ∓ C·Bo*·x^-2)^0.46`. On the aided branch this
//! loses real solutions once `C·Bo*` passes a critical value; past it the
//! deterioration-branch endpoint is returned and the result is flagged as
//! saturated.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_CALIBRATION: f64 = 1.25e5;
pub const ORIGINAL_CALIBRATION: f64 = 2.5e5;
pub const STANDARD_GRAVITY: f64 = 9.81;

const EXPONENT: f64 = 0.46;
const TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BuoyancyError {
    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("heat flux must be non-negative, got {0}")]
    NegativeHeatFlux(f64),
    #[error("invalid table range [{bo_min}, {bo_max}] with {samples_per_decade} samples per decade")]
    InvalidRange { bo_min: f64, bo_max: f64, samples_per_decade: usize },
}

fn positive(name: &'static str, value: f64) -> Result<f64, BuoyancyError> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(BuoyancyError::NonPositive { name, value })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    /// Heated flow moving with buoyancy (upward flow past a hot wall).
    Aided,
    Opposed,
}

impl Orientation {
    /// Aided when the wall heats the fluid and the flow goes up, or the wall
    /// cools it and the flow goes down.
    pub fn from_flow(velocity: f64, heat_flux_to_fluid: f64) -> Self {
        if velocity * heat_flux_to_fluid > 0.0 {
            Orientation::Aided
        } else {
            Orientation::Opposed
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Orientation::Aided => "aided",
            Orientation::Opposed => "opposed",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BuoyancyState {
    pub grashof_star: f64,
    pub buoyancy_parameter: f64,
    pub orientation: Orientation,
}

/// Heat-flux based modified Grashof number `g β q″ D⁴ / (λ ν²)`.
pub fn grashof_star(
    heat_flux: f64,
    diameter: f64,
    beta: f64,
    conductivity: f64,
    kinematic_viscosity: f64,
    gravity: f64,
) -> Result<f64, BuoyancyError> {
    if !(heat_flux >= 0.0) {
        return Err(BuoyancyError::NegativeHeatFlux(heat_flux));
    }
    positive("hydraulic diameter", diameter)?;
    positive("expansion coefficient", beta)?;
    positive("conductivity", conductivity)?;
    positive("kinematic viscosity", kinematic_viscosity)?;
    positive("gravity", gravity)?;
    Ok(gravity * beta * heat_flux * diameter.powi(4) / (conductivity * kinematic_viscosity * kinematic_viscosity))
}

pub fn buoyancy_parameter(grashof_star: f64, re: f64, pr: f64) -> Result<f64, BuoyancyError> {
    positive("Reynolds number", re)?;
    positive("Prandtl number", pr)?;
    Ok(grashof_star / (re.powf(3.425) * pr.powf(0.8)))
}

/// Result of solving for the Nusselt ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioSolution {
    pub ratio: f64,
    /// The aided branch had no solution and the cap value was returned.
    pub saturated: bool,
}

/// `x^p ± a/x² - 1` with `p = 1/0.46`; its roots are the ratio.
fn power_form(x: f64, a: f64, orientation: Orientation) -> f64 {
    let p = 1.0 / EXPONENT;
    match orientation {
        Orientation::Aided => x.powf(p) + a / (x * x) - 1.0,
        Orientation::Opposed => x.powf(p) - a / (x * x) - 1.0,
    }
}

fn fixed_point_map(x: f64, a: f64, orientation: Orientation) -> Option<f64> {
    let inner = match orientation {
        Orientation::Aided => 1.0 - a / (x * x),
        Orientation::Opposed => 1.0 + a / (x * x),
    };
    (inner > 0.0).then(|| inner.powf(EXPONENT))
}

/// Minimiser of the aided power form, where the two aided roots merge.
fn aided_turning_point(a: f64) -> f64 {
    let p = 1.0 / EXPONENT;
    (2.0 * a / p).powf(1.0 / (p + 2.0))
}

fn aided_solution_exists(a: f64) -> bool {
    a <= 0.0 || power_form(aided_turning_point(a), a, Orientation::Aided) <= 0.0
}

/// Largest `C·Bo*` for which the aided branch still has a real solution,
/// located by bisection on existence.
pub fn critical_product() -> f64 {
    static CRITICAL: OnceLock<f64> = OnceLock::new();
    *CRITICAL.get_or_init(|| {
        let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
        while aided_solution_exists(hi) {
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if aided_solution_exists(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    })
}

/// Largest `Bo*` with an aided-branch solution for calibration constant `c`.
pub fn aided_cap(calibration: f64) -> Result<f64, BuoyancyError> {
    positive("calibration constant", calibration)?;
    Ok(critical_product() / calibration)
}

fn bisect(mut lo: f64, mut hi: f64, a: f64, orientation: Orientation) -> f64 {
    // Aided: the form increases from the turning point to 1. Opposed: it
    // increases on [1, ∞). Either way lo is the non-positive end.
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if power_form(mid, a, orientation) <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Solves for `Nu/Nu_f` at `bo`.
///
/// Damped fixed-point iteration from `x = 1`, falling back to bisection when
/// it stalls or leaves the real domain. Returns the larger (deterioration)
/// root on the aided branch.
pub fn nu_ratio_solve(bo: f64, orientation: Orientation, calibration: f64) -> Result<RatioSolution, BuoyancyError> {
    positive("calibration constant", calibration)?;
    if !(bo > 0.0) {
        return Ok(RatioSolution { ratio: 1.0, saturated: false });
    }
    let mut a = calibration * bo;
    let mut saturated = false;
    if orientation == Orientation::Aided && a > critical_product() {
        a = critical_product();
        saturated = true;
    }

    let mut x = 1.0;
    let mut converged = false;
    for _ in 0..500 {
        let Some(g) = fixed_point_map(x, a, orientation) else { break };
        let next = x + 0.5 * (g - x);
        if (next - x).abs() < TOLERANCE {
            x = next;
            converged = true;
            break;
        }
        x = next;
    }
    let residual_ok = |x: f64| fixed_point_map(x, a, orientation).is_some_and(|g| (g - x).abs() < 1e-13);
    if !(converged && residual_ok(x)) {
        x = match orientation {
            Orientation::Aided => bisect(aided_turning_point(a), 1.0, a, orientation),
            Orientation::Opposed => bisect(1.0, (1.0 + a).powf(EXPONENT), a, orientation),
        };
    }
    Ok(RatioSolution { ratio: x, saturated })
}

/// Residual of `x = (1 ∓ C·Bo*·x^-2)^0.46` at a candidate ratio.
pub fn ratio_residual(x: f64, bo: f64, orientation: Orientation, calibration: f64) -> f64 {
    match fixed_point_map(x, calibration * bo, orientation) {
        Some(g) => x - g,
        None => f64::INFINITY,
    }
}

/// Result of a table lookup.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lookup {
    pub ratio: f64,
    pub saturated: bool,
}

/// Precomputed `Nu/Nu_f` on a log-spaced `Bo*` grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NuRatioTable {
    pub orientation: Orientation,
    pub calibration: f64,
    pub bo_grid: Vec<f64>,
    pub ratio: Vec<f64>,
    /// Largest tabulated `Bo*` with a valid aided solution; `None` for the
    /// opposed branch.
    pub cap_point: Option<f64>,
}

impl NuRatioTable {
    /// Builds a table over `[bo_min, bo_max]`.
    ///
    /// The aided grid stops at the cap, and nodes are added towards the cap
    /// where the ratio falls off like a square root.
    pub fn build(
        orientation: Orientation,
        calibration: f64,
        bo_min: f64,
        bo_max: f64,
        samples_per_decade: usize,
    ) -> Result<Self, BuoyancyError> {
        positive("calibration constant", calibration)?;
        if !(bo_min > 0.0 && bo_max > bo_min && bo_max.is_finite() && samples_per_decade > 0) {
            return Err(BuoyancyError::InvalidRange { bo_min, bo_max, samples_per_decade });
        }
        let cap = match orientation {
            Orientation::Aided => Some(aided_cap(calibration)?),
            Orientation::Opposed => None,
        };
        let top = cap.map_or(bo_max, |c| bo_max.min(c));
        let decades = (top / bo_min).log10();
        let n = ((decades * samples_per_decade as f64).ceil() as usize).max(1);
        let step = decades / n as f64;
        let mut grid: Vec<f64> = (0..n).map(|i| bo_min * 10f64.powf(step * i as f64)).collect();
        if top <= bo_min {
            grid.truncate(1);
        } else if let Some(c) = cap.filter(|&c| top >= c) {
            // Geometric refinement of the gap to the cap.
            let last = *grid.last().unwrap_or(&bo_min);
            let mut gap = c - last;
            while gap > 1e-9 * c {
                gap *= 0.5;
                grid.push(c - gap);
            }
            grid.push(c);
        } else {
            grid.push(top);
        }
        let ratio = grid
            .iter()
            .map(|&bo| nu_ratio_solve(bo, orientation, calibration).map(|s| s.ratio))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            orientation,
            calibration,
            bo_grid: grid,
            ratio,
            cap_point: cap.filter(|&c| top >= c),
        })
    }

    /// Default tables used by the solver: `Bo*` from 1e-12 to 1e-3.
    pub fn standard(orientation: Orientation, calibration: f64) -> Result<Self, BuoyancyError> {
        Self::build(orientation, calibration, 1e-12, 1e-3, 40)
    }

    pub fn bo_min(&self) -> f64 {
        self.bo_grid[0]
    }

    pub fn bo_max(&self) -> f64 {
        *self.bo_grid.last().expect("non-empty grid")
    }

    /// Log-linear interpolation in `Bo*`.
    ///
    /// `Bo* ≤ 0` gives 1; between 0 and the first node the ratio is linear in
    /// `Bo*` from 1; beyond the last node the last value is held, flagged as
    /// saturated on the aided branch.
    pub fn lookup(&self, bo: f64) -> Lookup {
        let unsaturated = |ratio| Lookup { ratio, saturated: false };
        if !(bo > 0.0) {
            return unsaturated(1.0);
        }
        let first = self.bo_min();
        if bo < first {
            return unsaturated(1.0 + (self.ratio[0] - 1.0) * bo / first);
        }
        let last = self.bo_max();
        if bo >= last {
            let ratio = *self.ratio.last().expect("non-empty table");
            let saturated = self.cap_point.is_some() && bo > last;
            return Lookup { ratio, saturated };
        }
        let i = self.bo_grid.partition_point(|&b| b <= bo) - 1;
        let (b0, b1) = (self.bo_grid[i], self.bo_grid[i + 1]);
        if bo == b0 {
            return unsaturated(self.ratio[i]);
        }
        let t = (bo / b0).ln() / (b1 / b0).ln();
        unsaturated(self.ratio[i] + t * (self.ratio[i + 1] - self.ratio[i]))
    }

    /// Delimited text dump: header comments, then `Bo*,ratio` rows.
    pub fn to_csv_string(&self) -> String {
        let mut out = format!(
            "# orientation: {}\n# calibration_constant: {:e}\n",
            self.orientation.as_str(),
            self.calibration
        );
        if let Some(c) = self.cap_point {
            out.push_str(&format!("# cap_point: {c:.16e}\n"));
        }
        out.push_str("Bo*,ratio\n");
        for (b, r) in self.bo_grid.iter().zip(&self.ratio) {
            out.push_str(&format!("{b:.16e},{r:.16e}\n"));
        }
        out
    }
}

/// Aided and opposed tables for one calibration constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NuRatioTables {
    pub aided: NuRatioTable,
    pub opposed: NuRatioTable,
}

impl NuRatioTables {
    pub fn standard(calibration: f64) -> Result<Self, BuoyancyError> {
        Ok(Self {
            aided: NuRatioTable::standard(Orientation::Aided, calibration)?,
            opposed: NuRatioTable::standard(Orientation::Opposed, calibration)?,
        })
    }

    pub fn lookup(&self, bo: f64, orientation: Orientation) -> Lookup {
        match orientation {
            Orientation::Aided => self.aided.lookup(bo),
            Orientation::Opposed => self.opposed.lookup(bo),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grashof_examples() {
        assert_eq!(grashof_star(0.0, 0.01588, 1.0 / 763.0, 0.2, 8.9e-6, 9.81).unwrap(), 0.0);
        let g = grashof_star(29.1e3, 0.01588, 1.0 / 763.0, 0.20, 8.9e-6, 9.81).unwrap();
        assert!((g - 1501859.97).abs() / g < 1e-8);
        let g2 = grashof_star(58.2e3, 0.01588, 1.0 / 763.0, 0.20, 8.9e-6, 9.81).unwrap();
        assert!((g2 / g - 2.0).abs() < 1e-14);
        assert!(grashof_star(-1.0, 0.01588, 1.0 / 763.0, 0.2, 8.9e-6, 9.81).is_err());
        assert!(grashof_star(1.0, 0.0, 1.0 / 763.0, 0.2, 8.9e-6, 9.81).is_err());
    }

    #[test]
    fn buoyancy_parameter_examples() {
        assert_eq!(buoyancy_parameter(0.0, 5000.0, 0.66).unwrap(), 0.0);
        let b1 = buoyancy_parameter(1e6, 5134.0, 0.66).unwrap();
        let b2 = buoyancy_parameter(1e6, 4108.0, 0.66).unwrap();
        assert!((b2 / b1 - 2.1459870).abs() < 1e-6);
        assert!(buoyancy_parameter(1.0, 0.0, 0.66).is_err());
    }

    #[test]
    fn ratio_examples() {
        for o in [Orientation::Aided, Orientation::Opposed] {
            assert_eq!(nu_ratio_solve(0.0, o, DEFAULT_CALIBRATION).unwrap().ratio, 1.0);
        }
        // Bisection oracle on x^(1/0.46) ± a/x² = 1.
        let aided = nu_ratio_solve(1e-6, Orientation::Aided, DEFAULT_CALIBRATION).unwrap();
        assert!((aided.ratio - 0.930842838).abs() < 1e-8);
        let opposed = nu_ratio_solve(1e-6, Orientation::Opposed, DEFAULT_CALIBRATION).unwrap();
        assert!((opposed.ratio - 1.050589178).abs() < 1e-8);
        assert!(nu_ratio_solve(1e-6, Orientation::Aided, 0.0).is_err());
    }

    #[test]
    fn cap_matches_closed_form() {
        // Tangency of x^p + a/x² = 1: x_c = (1 + p/2)^(-1/p), a = p x_c^(p+2) / 2.
        let p = 1.0 / EXPONENT;
        let xc = (1.0 + p / 2.0).powf(-1.0 / p);
        let ac = p * xc.powf(p + 2.0) / 2.0;
        assert!((critical_product() - ac).abs() < 1e-12);
        let cap = aided_cap(DEFAULT_CALIBRATION).unwrap();
        assert!((cap - 2.11756e-6).abs() / cap < 1e-5);
        let beyond = nu_ratio_solve(10.0 * cap, Orientation::Aided, DEFAULT_CALIBRATION).unwrap();
        assert!(beyond.saturated);
        assert!((beyond.ratio - xc).abs() < 1e-6);
    }

    #[test]
    fn table_nodes_and_interpolation() {
        let t = NuRatioTable::build(Orientation::Opposed, DEFAULT_CALIBRATION, 1e-13, 1e-4, 20).unwrap();
        assert!((t.ratio[0] - 1.0).abs() < 1e-7);
        for (b, r) in t.bo_grid.iter().zip(&t.ratio) {
            assert_eq!(t.lookup(*b).ratio, *r);
            assert!(ratio_residual(*r, *b, t.orientation, t.calibration).abs() < 1e-10);
        }
        let mid = (t.bo_grid[100] * t.bo_grid[101]).sqrt();
        let expect = 0.5 * (t.ratio[100] + t.ratio[101]);
        assert!((t.lookup(mid).ratio - expect).abs() < 1e-12);
    }

    #[test]
    fn aided_table_saturates() {
        let t = NuRatioTable::standard(Orientation::Aided, DEFAULT_CALIBRATION).unwrap();
        let cap = t.cap_point.unwrap();
        let l = t.lookup(10.0 * cap);
        assert!(l.saturated);
        assert_eq!(l.ratio, *t.ratio.last().unwrap());
        assert!(!t.lookup(0.5 * cap).saturated);
        assert!(t.ratio.windows(2).all(|w| w[1] <= w[0]));
        assert_eq!(t.lookup(0.0).ratio, 1.0);
    }

    #[test]
    fn csv_dump_has_header() {
        let t = NuRatioTable::build(Orientation::Opposed, ORIGINAL_CALIBRATION, 1e-8, 1e-6, 5).unwrap();
        let s = t.to_csv_string();
        assert!(s.starts_with("# orientation: opposed\n# calibration_constant: 2.5e5\n"));
        assert_eq!(s.lines().filter(|l| !l.starts_with('#')).count(), t.bo_grid.len() + 1);
    }
}
