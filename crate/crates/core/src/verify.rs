//! Self-checks run by `subchan verify`: frozen oracle points, table
//! residuals and short conservation runs.

use serde::{Deserialize, Serialize};

use crate::buoyancy::{nu_ratio_solve, ratio_residual, NuRatioTable, Orientation, DEFAULT_CALIBRATION, ORIGINAL_CALIBRATION};
use crate::correlations::{brunone_k3, colebrook_smooth, petukhov_cf0, CorrelationConfig};
use crate::properties::FluidPropertyTable;
use crate::scenarios::{self as sc, CsvTable};
use crate::solver::{
    decay_power_fraction, ChannelGeometry, ChannelHeating, DecayLaw, Network, NetworkSpec, DEFAULT_TAU,
};

pub const CHECK_COUNT: usize = 12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &str, passed: bool, detail: String) -> Check {
    Check { name: name.into(), passed, detail }
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn point(name: &str, got: Result<f64, impl std::fmt::Display>, expected: f64, tol: f64) -> Check {
    match got {
        Ok(v) => check(name, rel(v, expected) <= tol, format!("{v:.16e} vs {expected:.16e}")),
        Err(e) => check(name, false, e.to_string()),
    }
}

pub fn run_checks() -> Vec<Check> {
    let cfg = CorrelationConfig::default();
    let fluid = FluidPropertyTable::default_helium();
    let decay = DecayLaw::DecayLaw { tau: DEFAULT_TAU, clamp_fraction: 0.1 };
    vec![
        point("colebrook_1e5", colebrook_smooth(1e5), 0.017989773084273842, 1e-12),
        point("petukhov_cf0_1e4", petukhov_cf0(1e4), 0.031477486878127174, 1e-12),
        point("brunone_k3_1e3", brunone_k3(1e3, &cfg), 0.034496376621320685, 1e-12),
        point("brunone_k3_15200", brunone_k3(15200.0, &cfg), 0.01874418846230474, 1e-12),
        point("decay_fraction_1000s", Ok::<_, String>(decay_power_fraction(&decay, 1000.0)), 0.014490531, 1e-6),
        ratio_tables(),
        point(
            "aided_ratio_1e-6",
            nu_ratio_solve(1e-6, Orientation::Aided, DEFAULT_CALIBRATION).map(|s| s.ratio),
            0.9308,
            0.0005 / 0.9308,
        ),
        flow_condition_scaling(&fluid),
        ramps(&fluid),
        pipe(&fluid),
        property_table(&fluid),
        sealed_network(&fluid),
    ]
}

fn ratio_tables() -> Check {
    let mut worst: f64 = 0.0;
    for c in [DEFAULT_CALIBRATION, ORIGINAL_CALIBRATION] {
        for o in [Orientation::Aided, Orientation::Opposed] {
            match NuRatioTable::standard(o, c) {
                Ok(t) => {
                    for (bo, x) in t.bo_grid.iter().zip(&t.ratio) {
                        worst = worst.max(ratio_residual(*x, *bo, o, c).abs());
                    }
                }
                Err(e) => return check("ratio_table_residual", false, e.to_string()),
            }
        }
    }
    check("ratio_table_residual", worst < 1e-10, format!("max residual {worst:e}"))
}

fn flow_condition_scaling(fluid: &FluidPropertyTable) -> Check {
    let rows = sc::flow_conditions();
    let pr = fluid.interpolate(763.15).prandtl();
    let mut worst: f64 = 0.0;
    for r in &rows[1..] {
        match sc::scale_point(&rows[0], r.reynolds, r.heat_flux_kw, pr) {
            Ok(bo) => worst = worst.max(rel(bo, r.buoyancy_parameter)),
            Err(e) => return check("flow_condition_scaling", false, e.to_string()),
        }
    }
    check("flow_condition_scaling", worst < 0.01, format!("max relative error {worst:.3e}"))
}

fn ramps(fluid: &FluidPropertyTable) -> Check {
    let settings = sc::RampSettings::default();
    let run = || -> Result<(bool, f64), sc::ScenarioError> {
        let mut above = true;
        let mut fast = 0.0;
        let mut slow = f64::INFINITY;
        for spec in settings.cases.iter().filter(|s| s.direction == sc::RampDirection::Up) {
            let samples = sc::run_ramp(&sc::build_ramp_case(spec, &settings)?, fluid)?;
            above &= samples.iter().filter(|s| s.acceleration > 0.0).all(|s| s.brunone > s.quasi_steady);
            let mid = sc::mid_ramp(&samples, spec).expect("ramp has samples");
            let excess = mid.brunone - mid.quasi_steady;
            if spec.ramp_duration == 0.01 {
                fast = excess;
            } else if spec.ramp_duration == 1.0 {
                slow = slow.min(excess);
            }
        }
        Ok((above, fast / slow))
    };
    match run() {
        Ok((above, ratio)) => check("ramp_exceedance", above && ratio >= 10.0, format!("above={above} fast/slow={ratio:.3}")),
        Err(e) => check("ramp_exceedance", false, e.to_string()),
    }
}

fn pipe(fluid: &FluidPropertyTable) -> Check {
    let run = || -> Result<sc::PipeRun, sc::ScenarioError> {
        let case = sc::build_pipe_case(&sc::PipeSettings::default())?;
        sc::run_pipe(&case, fluid, None)
    };
    match run() {
        Ok(r) => check(
            "pipe_corrected_drop",
            r.corrected.total_dp < r.uncorrected.total_dp && r.corrected.max_wall_iterations <= 20,
            format!(
                "dp on {:.6} Pa, off {:.6} Pa, iterations {}",
                r.corrected.total_dp, r.uncorrected.total_dp, r.corrected.max_wall_iterations
            ),
        ),
        Err(e) => check("pipe_corrected_drop", false, e.to_string()),
    }
}

fn property_table(fluid: &FluidPropertyTable) -> Check {
    let s = fluid.samples();
    let ok = s.windows(2).all(|w| {
        w[1].temperature > w[0].temperature && w[1].specific_enthalpy > w[0].specific_enthalpy && w[1].density <= w[0].density
    });
    check("property_table_monotone", ok, format!("{} samples", s.len()))
}

/// Short sealed run of three prescribed-flux channels, then a restart from
/// a mid-run checkpoint.
fn sealed_network(fluid: &FluidPropertyTable) -> Check {
    let run = || -> Result<(f64, f64, f64, bool), crate::solver::SolverError> {
        let spec = NetworkSpec::with_channels(
            ChannelGeometry::default(),
            vec![
                ChannelHeating::PrescribedFlux { heat_flux: 2000.0 },
                ChannelHeating::PrescribedFlux { heat_flux: 1000.0 },
                ChannelHeating::Adiabatic,
            ],
        );
        let mut net = Network::new(spec, fluid.clone(), 763.15)?;
        net.seal_boundaries()?;
        net.advance_to(20.0)?;
        let json = net.checkpoint_json()?;
        net.advance_to(40.0)?;
        let mut restarted = Network::from_checkpoint_json(&json, fluid.clone())?;
        restarted.advance_to(40.0)?;
        let identical = restarted.checkpoint_json()? == net.checkpoint_json()?;
        let a = &net.state().audit;
        Ok((a.max_mass_residual, net.mass_drift(), net.energy_residual(), identical))
    };
    match run() {
        Ok((residual, drift, energy, identical)) => check(
            "sealed_network_conservation",
            residual < 1e-9 && drift < 1e-6 && energy < 5e-3 && identical,
            format!("mass residual {residual:e}, drift {drift:e}, energy {energy:e}, restart identical {identical}"),
        ),
        Err(e) => check("sealed_network_conservation", false, e.to_string()),
    }
}

pub fn checks_table(checks: &[Check]) -> CsvTable {
    let mut t = CsvTable::new(["check", "passed", "detail"]);
    for c in checks {
        t.push(vec![c.name.clone(), c.passed.to_string(), c.detail.clone()]);
    }
    t
}
