mod common;

use common::{designs, k, log_uniform, rel};
use proptest::prelude::*;
use qgem_core::casimir::min_separation_bound;
use qgem_core::kinematics::full_profile;
use qgem_core::phase::{
    max_phase_original, min_mass_for_phase, step1_pair_phases, step1_pair_phases_quadrature,
    step1_phase, step1_phase_quadrature, step3_phase, total_phase,
};

/// (m, a, τ, d) with d between 1.05 and 11 split sizes.
fn split_inputs() -> impl Strategy<Value = (f64, f64, f64, f64)> {
    (
        log_uniform(1e-17, 1e-13),
        log_uniform(1e-5, 1.0),
        0.05..2.0f64,
        0.05..10.0f64,
    )
        .prop_map(|(m, a, tau, r)| (m, a, tau, a * tau * tau / 2.0 * (1.0 + r)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn split_closed_form_matches_quadrature((m, a, tau, d) in split_inputs()) {
        let k = k();
        let closed = step1_pair_phases(&k, m, d, a, tau).unwrap();
        let quad = step1_pair_phases_quadrature(&k, m, d, a, tau).unwrap();
        prop_assert!(rel(closed.ud, quad.ud) < 1e-8);
        prop_assert!(rel(closed.du, quad.du) < 1e-8);
        let direct = step1_phase_quadrature(&k, m, d, a, tau).unwrap();
        prop_assert!(rel(closed.total(), direct) < 1e-8);
    }

    #[test]
    fn recombination_closed_form_matches_quadrature((m, a, tau, d) in split_inputs(), frac in 0.0..0.5f64) {
        let k = k();
        let s_max = frac * (d - a * tau * tau / 2.0);
        let closed = step3_phase(&k, m, d, s_max, a, tau).unwrap();
        let quad = step1_phase_quadrature(&k, m, d - s_max, a, tau).unwrap();
        prop_assert!(rel(closed, quad) < 1e-8);
        prop_assert!(rel(step1_phase(&k, m, d, a, tau).unwrap(), step3_phase(&k, m, d, 0.0, a, tau).unwrap()) == 0.0);
    }

    #[test]
    fn min_mass_plugs_back(phi in log_uniform(1e-3, 3.0), db in log_uniform(1e5, 1e7), tau in 0.2..1.0f64, t in 0.5..3.0f64) {
        let k = k();
        let a_min = min_separation_bound(&k, 3500.0, 5.7).unwrap();
        let Ok(m) = min_mass_for_phase(&k, phi, a_min, db, tau, t) else { return Ok(()) };
        let dx = 2.0 * k.spin_moment() * db * (tau / 2.0).powi(2) / m;
        let back = max_phase_original(&k, m, dx, a_min, t).unwrap();
        prop_assert!(rel(back, phi) < 1e-6, "{back} vs {phi}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn effective_phase_is_sum_of_pair_phases(d in designs(1e-3)) {
        let k = k();
        let Ok(p) = full_profile(&k, &d.spec, &d.geometry, &d.drive) else { return Ok(()) };
        let b = total_phase(&k, d.spec.mass, &p).unwrap();
        prop_assert!((b.total - (b.dphi_ud + b.dphi_du)).abs() <= 1e-13 * b.dphi_du.abs().max(b.dphi_ud.abs()));
        prop_assert!(b.total > 0.0);
    }

    #[test]
    fn phase_grows_with_flight_time(d in designs(1e-3), extra in 1.05..1.5f64) {
        let k = k();
        let mut longer = d.drive;
        longer.flight_time *= extra;
        let (Ok(p1), Ok(p2)) = (
            full_profile(&k, &d.spec, &d.geometry, &d.drive),
            full_profile(&k, &d.spec, &d.geometry, &longer),
        ) else { return Ok(()) };
        let phi1 = total_phase(&k, d.spec.mass, &p1).unwrap().total;
        let phi2 = total_phase(&k, d.spec.mass, &p2).unwrap().total;
        prop_assert!(phi2 > phi1);
    }

    #[test]
    fn phase_grows_with_mass_at_fixed_inner_separation(d in designs(1e-3), extra in 1.02..1.3f64) {
        let k = k();
        let mut heavy = d.spec;
        heavy.mass *= extra;
        // keep N·R fixed so the plate geometry is unchanged
        let mut geom = d.geometry;
        geom.separation_multiplier *= d.spec.radius() / heavy.radius();
        let (Ok(p1), Ok(p2)) = (
            full_profile(&k, &d.spec, &d.geometry, &d.drive),
            full_profile(&k, &heavy, &geom, &d.drive),
        ) else { return Ok(()) };
        prop_assume!(p1.split_size > p1.inner_separation);
        let phi1 = total_phase(&k, d.spec.mass, &p1).unwrap().total;
        let phi2 = total_phase(&k, heavy.mass, &p2).unwrap().total;
        prop_assert!(phi2 > phi1, "{phi1} -> {phi2}");
    }
}
