//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::time::{Duration, Instant};

use proptest::prelude::Rng;
use proptest::test_runner::{RngAlgorithm, TestRng};

use subchan::buoyancy::{nu_ratio_solve, NuRatioTable, Orientation, DEFAULT_CALIBRATION, ORIGINAL_CALIBRATION};
use subchan::cli::{produce, Command};
use subchan::correlations::{
    brunone_k3, petukhov_cf0, petukhov_nu, steady_friction, variable_property_nu, BulkState, CorrelationConfig, WallState,
};
use subchan::properties::{FluidPropertyTable, HeliumModel, NOMINAL_PRESSURE};
use subchan::scenarios::{
    self as sc, build_lofa_case, run_steady, run_transient, LofaCaseId, LofaConfig, ProbeMedium, RampDirection,
    TransientRecord,
};
use subchan::solver::{decay_power_fraction, DecayLaw, Network, DEFAULT_TAU};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

struct Sampler(TestRng);

impl Sampler {
    fn new() -> Self {
        Self(TestRng::deterministic_rng(RngAlgorithm::ChaCha))
    }

    fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        let u = (self.0.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
        lo + (hi - lo) * u
    }

    fn log_uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.uniform(lo.ln(), hi.ln()).exp()
    }
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

// Direct evaluations written from the closure definitions.

fn colebrook_by_bisection(re: f64) -> f64 {
    let g = |c: f64| 1.0 / c.sqrt() + 2.0 * (2.51 / (re * c.sqrt())).log10();
    let (mut lo, mut hi) = (1e-4, 1.0);
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn steady_friction_oracle(re: f64) -> f64 {
    let (lam, turb) = (2300.0, 4000.0);
    if re <= lam {
        64.0 / re
    } else if re >= turb {
        colebrook_by_bisection(re)
    } else {
        let w = (re.ln() - lam.ln()) / (turb.ln() - lam.ln());
        (1.0 - w) * 64.0 / lam + w * colebrook_by_bisection(turb)
    }
}

fn petukhov_cf0_oracle(re: f64) -> f64 {
    let b = 1.82 * (re / 8.0).ln() / std::f64::consts::LN_10;
    1.0 / (b * b)
}

fn petukhov_nu_oracle(re: f64, pr: f64, c: f64) -> f64 {
    let f = c / 8.0;
    re * pr * f / (1.0 + 900.0 / re + 12.7 * f.sqrt() * (pr.powf(2.0 / 3.0) - 1.0))
}

fn variable_nu_oracle(re: f64, pr: f64, rho_ratio: f64, cp_ratio: f64, tb: f64, tw: f64, tpc: f64) -> f64 {
    let n = if tw <= tpc {
        0.4
    } else if tb <= tpc {
        0.4 + 0.2 * (tw / tpc - 1.0)
    } else if tb <= 1.2 * tpc {
        (0.4 + 0.2 * (tw / tpc - 1.0)) * (1.0 - 5.0 * (tb / tpc - 1.0))
    } else {
        0.4
    };
    0.0183 * re.powf(0.82) * pr.sqrt() * rho_ratio.powf(0.3) * cp_ratio.powf(n)
}

fn k3_oracle(re: f64) -> f64 {
    let c = if re <= 2300.0 {
        0.00476
    } else {
        12.86 / re.powf((15.29 / re.powf(0.0567)).log10())
    };
    c.sqrt() / 2.0
}

fn decay_oracle(t: f64) -> f64 {
    let p = 0.066 * (1.0 / t.powf(0.2) - 1.0 / (t + DEFAULT_TAU).powf(0.2));
    if p > 0.1 {
        0.1
    } else {
        p
    }
}

fn criterion_1() -> Outcome {
    let mut s = Sampler::new();
    let cfg = CorrelationConfig::default();
    let n = 200;
    let mut worst = [0.0_f64; 6];
    let mut failures = Vec::new();
    for _ in 0..n {
        let re = s.log_uniform(200.0, 1e7);
        match steady_friction(re, &cfg) {
            Ok(v) => worst[0] = worst[0].max(rel(v, steady_friction_oracle(re))),
            Err(e) => failures.push(e.to_string()),
        }
        let re = s.log_uniform(1e3, 1e7);
        match petukhov_cf0(re) {
            Ok(v) => worst[1] = worst[1].max(rel(v, petukhov_cf0_oracle(re))),
            Err(e) => failures.push(e.to_string()),
        }
        let (re, pr, c) = (s.log_uniform(4e3, 1e6), s.uniform(0.5, 1.0), s.uniform(0.01, 0.05));
        match petukhov_nu(re, pr, c) {
            Ok(v) => worst[2] = worst[2].max(rel(v, petukhov_nu_oracle(re, pr, c))),
            Err(e) => failures.push(e.to_string()),
        }
        let tb = s.uniform(600.0, 1300.0);
        let tw = tb + s.uniform(1.0, 400.0);
        let tpc = s.uniform(600.0, 1400.0);
        let b = HeliumModel::sample(NOMINAL_PRESSURE, tb);
        let w = HeliumModel::sample(NOMINAL_PRESSURE, tw);
        let cp_factor = s.uniform(0.7, 1.6);
        let velocity = s.uniform(1.0, 60.0);
        let bulk = BulkState::new(&b, velocity, 0.01588).unwrap();
        let wall = WallState {
            temperature: tw,
            density: w.density,
            viscosity: w.dynamic_viscosity,
            enthalpy: b.specific_enthalpy + cp_factor * b.specific_heat * (tw - tb),
        };
        let re_o = b.density * velocity * 0.01588 / b.dynamic_viscosity;
        let pr_o = b.dynamic_viscosity * b.specific_heat / b.thermal_conductivity;
        match variable_property_nu(&bulk, &wall, tpc) {
            Ok(v) => {
                let o = variable_nu_oracle(re_o, pr_o, w.density / b.density, cp_factor, tb, tw, tpc);
                worst[3] = worst[3].max(rel(v, o));
            }
            Err(e) => failures.push(e.to_string()),
        }
        let re = s.log_uniform(100.0, 1e7);
        match brunone_k3(re, &cfg) {
            Ok(v) => worst[4] = worst[4].max(rel(v, k3_oracle(re))),
            Err(e) => failures.push(e.to_string()),
        }
        let t = s.log_uniform(1e-3, 1e6);
        let law = DecayLaw::DecayLaw { tau: DEFAULT_TAU, clamp_fraction: 0.1 };
        worst[5] = worst[5].max(rel(decay_power_fraction(&law, t), decay_oracle(t)));
    }
    let max = worst.iter().copied().fold(0.0, f64::max);
    outcome(
        failures.is_empty() && max <= 1e-6,
        format!(
            "{n} samples per function; max rel err steady {:.1e}, cf0 {:.1e}, Nu {:.1e}, variable Nu {:.1e}, k3 {:.1e}, decay {:.1e}{}",
            worst[0],
            worst[1],
            worst[2],
            worst[3],
            worst[4],
            worst[5],
            if failures.is_empty() { String::new() } else { format!("; errors: {}", failures.join(", ")) }
        ),
    )
}

/// Upper root of `x^(1/0.46) + a/x² = 1` by a downward scan and bisection.
fn aided_ratio_oracle(a: f64) -> f64 {
    let f = |x: f64| x.powf(1.0 / 0.46) + a / (x * x) - 1.0;
    let mut hi = 1.0;
    let mut lo = hi - 1e-4;
    while f(lo) > 0.0 {
        hi = lo;
        lo -= 1e-4;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

fn criterion_2() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut entries = 0;
    for c in [DEFAULT_CALIBRATION, ORIGINAL_CALIBRATION] {
        for o in [Orientation::Aided, Orientation::Opposed] {
            let table = NuRatioTable::standard(o, c).expect("table builds");
            for (bo, x) in table.bo_grid.iter().zip(&table.ratio) {
                let sign = if o == Orientation::Aided { -1.0 } else { 1.0 };
                let inner: f64 = 1.0 + sign * c * bo / (x * x);
                worst = worst.max((x - inner.max(0.0).powf(0.46)).abs());
                entries += 1;
            }
        }
    }
    let got = nu_ratio_solve(1e-6, Orientation::Aided, DEFAULT_CALIBRATION).expect("solves").ratio;
    let oracle = aided_ratio_oracle(DEFAULT_CALIBRATION * 1e-6);
    outcome(
        worst < 1e-10 && (got - 0.9308).abs() <= 0.0005 && (got - oracle).abs() < 1e-9,
        format!("{entries} entries, max residual {worst:.2e}; aided Bo*=1e-6 ratio {got:.6} (oracle {oracle:.6})"),
    )
}

fn criterion_3() -> Outcome {
    let rows = sc::flow_conditions();
    let pr = FluidPropertyTable::default_helium().interpolate(763.15).prandtl();
    let mut worst: f64 = 0.0;
    let mut values = Vec::new();
    for r in &rows[1..] {
        let bo = sc::scale_point(&rows[0], r.reynolds, r.heat_flux_kw, pr).expect("scales");
        worst = worst.max(rel(bo, r.buoyancy_parameter));
        values.push(format!("{:.3}", bo * 1e6));
    }
    outcome(worst < 0.01, format!("Bo*x1e6 = [{}], max rel err {:.2}%", values.join(", "), 100.0 * worst))
}

fn criterion_4() -> Outcome {
    let fluid = FluidPropertyTable::default_helium();
    let settings = sc::RampSettings::default();
    let mut above = true;
    let mut ratios = Vec::new();
    let mut reversed = 0;
    for (temperature, _) in [(773.15, 0), (1023.15, 1), (1223.15, 2)] {
        let mut excess = std::collections::BTreeMap::new();
        for spec in settings.cases.iter().filter(|s| s.reference_temperature == temperature) {
            let samples = sc::run_ramp(&sc::build_ramp_case(spec, &settings).unwrap(), &fluid).unwrap();
            match spec.direction {
                RampDirection::Up => {
                    above &= samples.iter().filter(|s| s.acceleration > 0.0).all(|s| s.brunone > s.quasi_steady);
                    let mid = sc::mid_ramp(&samples, spec).unwrap();
                    excess.insert((spec.ramp_duration * 1000.0) as u64, mid.brunone - mid.quasi_steady);
                }
                RampDirection::Down => {
                    reversed += samples.iter().filter(|s| s.acceleration < 0.0 && s.brunone < s.quasi_steady).count();
                }
            }
        }
        ratios.push(excess[&10] / excess[&1000]);
    }
    let min_ratio = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    println!("    note: ramp-down samples with unsteady friction below quasi-steady: {reversed} (documented, not asserted)");
    outcome(
        above && min_ratio >= 10.0,
        format!("unsteady above quasi-steady on all ramp-up rows: {above}; mid-ramp exceedance 0.01 s / 1.0 s >= {min_ratio:.1}"),
    )
}

fn criterion_5() -> Outcome {
    let fluid = FluidPropertyTable::default_helium();
    let settings = sc::PipeSettings::default();
    let run = sc::run_pipe(&sc::build_pipe_case(&settings).unwrap(), &fluid, None).unwrap();
    let iterations = run.corrected.nodes.iter().chain(&run.uncorrected.nodes).map(|n| n.iterations).max().unwrap_or(0);
    let last = run.corrected.nodes.last().unwrap();
    let multiplier = (last.wall_temperature / last.bulk_temperature).powf(-0.19);
    outcome(
        run.corrected.total_dp < run.uncorrected.total_dp && iterations <= 20,
        format!(
            "{} nodes, total dp corrected {:.2} Pa < uncorrected {:.2} Pa; outlet multiplier r^-0.19 = {multiplier:.4}; max wall iterations {iterations}",
            run.corrected.nodes.len(),
            run.corrected.total_dp,
            run.uncorrected.total_dp
        ),
    )
}

struct LofaPair {
    case1: TransientRecord,
    case2: TransientRecord,
}

fn run_pair(config: &LofaConfig, fluid: &FluidPropertyTable, cases: &[LofaCaseId]) -> Vec<TransientRecord> {
    let first = build_lofa_case(config, cases[0]).expect("case builds");
    let steady = run_steady(&first, fluid.clone()).expect("steady converges");
    cases
        .iter()
        .map(|&id| {
            let case = build_lofa_case(config, id).unwrap();
            let network = Network::from_checkpoint_json(&steady.checkpoint, fluid.clone()).unwrap();
            run_transient(&case, network).expect("transient runs").0
        })
        .collect()
}

fn fuel_probes(r: &TransientRecord) -> Vec<usize> {
    (0..r.probes.len()).filter(|&i| r.probes[i].spec.medium == ProbeMedium::Fuel).collect()
}

fn criterion_6(pair: &LofaPair, elapsed: Duration) -> Outcome {
    let (c1, c2) = (&pair.case1, &pair.case2);
    let residual = c1.max_mass_residual.max(c2.max_mass_residual);
    let a = residual < 1e-9;

    let flows = c2.final_mass_flows();
    let periphery = c2.periphery[0];
    let hottest = c2.hottest_interior().unwrap();
    let flows1 = c1.final_mass_flows();
    let hottest1 = c1.hottest_interior().unwrap();
    let b = flows[periphery] < 0.0 && flows[hottest] > 0.0 && flows1[periphery] < 0.0 && flows1[hottest1] > 0.0;

    let mut monotone = true;
    let mut worst_share: f64 = 0.0;
    for p in fuel_probes(c1) {
        let h = &c1.probe_histories[p];
        let window: Vec<f64> = h.iter().filter(|s| s.time >= 200.0 && s.time <= 1000.0).map(|s| s.temperature).collect();
        monotone &= window.windows(2).all(|w| w[1] >= w[0]);
        let d1 = c1.probe_at(p, 1000.0).unwrap() - c1.probe_at(p, 700.0).unwrap();
        let d2 = c2.probe_at(p, 1000.0).unwrap() - c2.probe_at(p, 700.0).unwrap();
        worst_share = worst_share.max(d2.abs() / d1);
    }
    let c = monotone && worst_share < 0.1;
    let (p1, p2) = (c1.peak_fuel_at_end(), c2.peak_fuel_at_end());
    let d = p1 > p2;
    let fast = elapsed < Duration::from_secs(900);
    outcome(
        a && b && c && d && fast,
        format!(
            "(a) max mass residual {residual:.1e}; (b) periphery {:.2e} kg/s, hottest interior ch{hottest} {:.2e} kg/s; \
             (c) case 1 monotone {monotone}, case 2 final-300 s change {:.1}% of case 1; \
             (d) peak fuel {p1:.1} K > {p2:.1} K; runtime {:.1} s",
            flows[periphery],
            flows[hottest],
            100.0 * worst_share,
            elapsed.as_secs_f64()
        ),
    )
}

fn criterion_7(pair: &LofaPair, config: &LofaConfig, fluid: &FluidPropertyTable) -> Outcome {
    let mut spec = config.network_spec();
    spec.boundary_links.clear();
    let mut network = Network::new(spec, fluid.clone(), config.flow.inlet_temperature).unwrap();
    network.set_capacity_scale(1.0).unwrap();
    network.seal_boundaries().unwrap();
    network.set_power(Some(config.schedule(LofaCaseId::One))).unwrap();
    network.advance_to(1000.0).unwrap();
    let energy = network.energy_residual();
    let drift = pair.case1.max_mass_drift.max(pair.case2.max_mass_drift).max(network.state().audit.max_mass_drift);

    let command = Command::RunLofa { case: Some(2), checkpoint: None };
    let first = produce(&command, sc::BUNDLED_LOFA).unwrap();
    let second = produce(&command, sc::BUNDLED_LOFA).unwrap();
    let identical = first.files == second.files;
    outcome(
        energy < 5e-3 && drift < 1e-6 && identical,
        format!(
            "adiabatic energy error {:.2e} of source; max sealed mass drift {drift:.1e}; repeated runs byte-identical: {identical} ({} files)",
            energy,
            first.files.len()
        ),
    )
}

fn criterion_8(base: f64, config: &LofaConfig, fluid: &FluidPropertyTable) -> Outcome {
    let mut fine = config.clone();
    fine.geometry = fine.geometry.refined(2);
    let dz = run_pair(&fine, fluid, &[LofaCaseId::Two]).remove(0).peak_fuel_at_end();
    let mut small = config.clone();
    small.step.target_cfl *= 0.5;
    let cfl = run_pair(&small, fluid, &[LofaCaseId::Two]).remove(0).peak_fuel_at_end();
    let mut short = config.clone();
    short.step.target_cfl *= 0.5;
    short.step.dt_max *= 0.5;
    let short_run = run_pair(&short, fluid, &[LofaCaseId::Two]).remove(0);
    let dt = short_run.peak_fuel_at_end();
    println!(
        "    note: halving the dt cap as well gives {dt:.6} K ({:.2e} relative, {} steps)",
        rel(dt, base),
        short_run.steps
    );
    let (e_dz, e_cfl) = (rel(dz, base), rel(cfl, base));
    outcome(
        e_dz < 0.01 && e_cfl < 0.01,
        format!("case 2 peak fuel {base:.6} K; half dz {dz:.6} K ({:.3}%), half CFL {cfl:.6} K ({:.2e} relative)", 100.0 * e_dz, e_cfl),
    )
}

fn report(results: &mut Vec<bool>, n: usize, title: &str, f: impl FnOnce() -> Outcome) {
    let clock = Instant::now();
    let o = f();
    let tag = if o.passed { "PASS" } else { "FAIL" };
    println!("criterion {n} [{tag}] {title}: {} ({:.1} s)", o.detail, clock.elapsed().as_secs_f64());
    results.push(o.passed);
}

fn main() {
    let mut results = Vec::new();
    let fluid = FluidPropertyTable::default_helium();
    let config = LofaConfig::default();

    report(&mut results, 1, "correlation oracles", criterion_1);
    report(&mut results, 2, "ratio equation residual", criterion_2);
    report(&mut results, 3, "flow-condition scaling", criterion_3);
    report(&mut results, 4, "ramp behaviour", criterion_4);
    report(&mut results, 5, "heated pipe", criterion_5);

    let clock = Instant::now();
    let mut records = run_pair(&config, &fluid, &[LofaCaseId::One, LofaCaseId::Two]);
    let elapsed = clock.elapsed();
    let pair = LofaPair { case2: records.pop().unwrap(), case1: records.pop().unwrap() };
    report(&mut results, 6, "LOFA case 1 vs case 2", || criterion_6(&pair, elapsed));
    report(&mut results, 7, "conservation and determinism", || criterion_7(&pair, &config, &fluid));
    let base = pair.case2.peak_fuel_at_end();
    report(&mut results, 8, "grid and step robustness", || criterion_8(base, &config, &fluid));

    let failed = results.iter().filter(|p| !**p).count();
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
