use proptest::prelude::*;

use subchan::buoyancy::{nu_ratio_solve, ratio_residual, Orientation, DEFAULT_CALIBRATION};
use subchan::correlations::{brunone_k3, colebrook_smooth, steady_friction, BulkState, CorrelationConfig};
use subchan::properties::{FluidPropertyTable, NOMINAL_PRESSURE};
use subchan::scenarios::{format_float, RampSpec};
use subchan::solver::{decay_power_fraction, wall_temperature_iteration, DecayLaw, WallClosure, DEFAULT_TAU};

fn fluid() -> &'static FluidPropertyTable {
    static FLUID: std::sync::OnceLock<FluidPropertyTable> = std::sync::OnceLock::new();
    FLUID.get_or_init(FluidPropertyTable::default_helium)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn helium_table_is_monotone(a in 500.0..2100.0f64, b in 500.0..2100.0f64) {
        prop_assume!((a - b).abs() > 1e-6);
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let (p, q) = (fluid().interpolate(lo), fluid().interpolate(hi));
        prop_assert!(q.specific_enthalpy > p.specific_enthalpy);
        prop_assert!(q.density < p.density);
        prop_assert!(q.dynamic_viscosity > p.dynamic_viscosity);
    }

    #[test]
    fn colebrook_root_satisfies_its_equation(re in 4.0e3..1.0e8f64) {
        let c = colebrook_smooth(re).unwrap();
        let residual = 1.0 / c.sqrt() + 2.0 * (2.51 / (re * c.sqrt())).log10();
        prop_assert!(residual.abs() < 1e-10, "residual {residual}");
    }

    #[test]
    fn steady_friction_is_monotone_within_each_regime(re in 100.0..1.0e7f64, factor in 1.001..3.0f64) {
        let cfg = CorrelationConfig::default();
        let regime = |r: f64| (r > 2300.0) as u8 + (r >= 4000.0) as u8;
        prop_assume!(regime(re) == regime(re * factor));
        let (a, b) = (steady_friction(re, &cfg).unwrap(), steady_friction(re * factor, &cfg).unwrap());
        // The transition blend climbs from the laminar to the turbulent value.
        if regime(re) == 1 {
            prop_assert!(b > a);
        } else {
            prop_assert!(b < a);
        }
    }

    #[test]
    fn brunone_coefficient_is_positive_and_bounded(re in 10.0..1.0e8f64) {
        let k3 = brunone_k3(re, &CorrelationConfig::default()).unwrap();
        prop_assert!(k3 > 0.0 && k3 <= 0.0345);
    }

    #[test]
    fn aided_ratio_lies_in_unit_interval(log_bo in -9.0..-3.0f64) {
        let bo = 10f64.powf(log_bo);
        let s = nu_ratio_solve(bo, Orientation::Aided, DEFAULT_CALIBRATION).unwrap();
        prop_assert!(s.ratio > 0.0 && s.ratio <= 1.0);
        if !s.saturated {
            prop_assert!(ratio_residual(s.ratio, bo, Orientation::Aided, DEFAULT_CALIBRATION).abs() < 1e-10);
        }
    }

    #[test]
    fn opposed_ratio_grows_with_buoyancy(log_bo in -9.0..-3.0f64, step in 0.01..1.0f64) {
        let solve = |l: f64| nu_ratio_solve(10f64.powf(l), Orientation::Opposed, DEFAULT_CALIBRATION).unwrap().ratio;
        let (x, y) = (solve(log_bo), solve(log_bo + step));
        prop_assert!(x >= 1.0 && y > x);
    }

    #[test]
    fn decay_fraction_is_bounded_and_non_increasing(t in 0.0..1.0e6f64, dt in 0.0..1.0e4f64) {
        let law = DecayLaw::DecayLaw { tau: DEFAULT_TAU, clamp_fraction: 0.1 };
        let (a, b) = (decay_power_fraction(&law, t), decay_power_fraction(&law, t + dt));
        prop_assert!(a > 0.0 && a <= 0.1);
        prop_assert!(b <= a);
    }

    #[test]
    fn wall_solution_is_consistent_with_the_flux(
        t_b in 600.0..1200.0f64,
        velocity in 5.0..60.0f64,
        q in 1.0e3..2.0e5f64,
    ) {
        let cfg = CorrelationConfig::default();
        let closure = WallClosure { correlations: &cfg, fluid: fluid(), buoyancy: None, gravity: 0.0 };
        let bulk = BulkState::new(&fluid().interpolate(t_b), velocity, 0.01588).unwrap();
        let s = wall_temperature_iteration(&closure, &bulk, q, 0.0).unwrap();
        let t_w = s.closure.wall_temperature;
        prop_assert!(t_w > t_b);
        prop_assert!(s.iterations <= 50);
        prop_assert!((t_w - t_b - q / s.heat_transfer_coefficient).abs() < 0.05, "T_w {t_w}");
    }

    #[test]
    fn ramp_velocity_stays_between_endpoints(index in 0usize..18, fraction in -0.5..2.0f64) {
        let spec = RampSpec::all_rows()[index].clone();
        let u = spec.velocity(fraction * spec.ramp_duration);
        let (lo, hi) = (spec.u0.min(spec.u1), spec.u0.max(spec.u1));
        prop_assert!(u >= lo - 1e-12 && u <= hi + 1e-12);
    }

    #[test]
    fn formatted_floats_round_trip(v in proptest::num::f64::NORMAL | proptest::num::f64::ZERO) {
        let back: f64 = format_float(v).parse().unwrap();
        prop_assert_eq!(back.to_bits(), v.to_bits());
    }
}

#[test]
fn steady_friction_is_continuous_at_the_blend_edges() {
    let cfg = CorrelationConfig::default();
    for edge in [2300.0, 4000.0] {
        let below = steady_friction(edge * (1.0 - 1e-9), &cfg).unwrap();
        let above = steady_friction(edge * (1.0 + 1e-9), &cfg).unwrap();
        assert!((below - above).abs() / above < 1e-6, "jump at {edge}");
    }
}

#[test]
fn table_pressure_is_nominal() {
    assert_eq!(fluid().pressure(), NOMINAL_PRESSURE);
}
