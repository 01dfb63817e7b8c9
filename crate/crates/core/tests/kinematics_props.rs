mod common;

use common::{designs, k, rel, Design};
use proptest::prelude::*;
use qgem_core::casimir::plate_force;
use qgem_core::kinematics::{freefall_drift, full_profile, split_separation};
use qgem_core::{Error, Step, TrajectoryProfile};

fn profile(d: &Design) -> Option<TrajectoryProfile> {
    match full_profile(&k(), &d.spec, &d.geometry, &d.drive) {
        Ok(p) => Some(p),
        Err(Error::Collision { .. }) => None,
        Err(e) => panic!("{e}"),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn split_follows_closed_forms(d in designs(1e-3)) {
        let Some(p) = profile(&d) else { return Ok(()) };
        let a = p.a_mag;
        let tau = p.split_time;
        let dx = p.split_size;
        for i in p.range(Step::Split) {
            let t = p.times[i];
            let expected = if t <= tau / 2.0 { a * t * t } else { dx - a * (tau - t).powi(2) };
            prop_assert!((p.separation[i] - expected).abs() <= 1e-12 * dx);
            prop_assert_eq!(split_separation(a, tau, t), p.separation[i]);
        }
        prop_assert!(rel(dx, a * tau * tau / 2.0) < 1e-14);
    }

    #[test]
    fn free_fall_is_convex_and_increasing(d in designs(1e-3)) {
        let Some(p) = profile(&d) else { return Ok(()) };
        let r = p.range(Step::FreeFall);
        let v = &p.drift_velocity[r.clone()];
        let s = &p.drift[r];
        prop_assert!(v.iter().all(|&x| x >= 0.0));
        prop_assert!(v.windows(2).all(|w| w[1] >= w[0]));
        prop_assert!(s.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn outer_branch_stays_put(d in designs(1e-3)) {
        let Some(p) = profile(&d) else { return Ok(()) };
        for i in p.range(Step::FreeFall) {
            // separation is Δx + s: only the inner branch moves
            prop_assert_eq!(p.separation[i], p.split_size + p.drift[i]);
        }
    }

    #[test]
    fn kinetic_energy_matches_casimir_work(d in designs(1e-4)) {
        let k = k();
        let fall = match freefall_drift(&k, &d.spec, &d.geometry, &d.drive) {
            Ok(f) => f,
            Err(_) => return Ok(()),
        };
        let x0 = d.geometry.initial_gap(d.spec.radius());
        let c = plate_force(&k, &d.spec, x0).unwrap() * x0.powi(5) / d.spec.mass;
        let s = fall.s_max;
        prop_assume!(s > 1e-6 * x0);
        let v = *fall.velocity.last().unwrap();
        let work = c / 4.0 * ((x0 - s).powi(-4) - x0.powi(-4));
        prop_assert!(rel(0.5 * v * v, work) < 1e-4, "{} vs {}", 0.5 * v * v, work);
    }

    #[test]
    fn step_halving_converges(d in designs(1e-3)) {
        let k = k();
        let mut fine = d.drive;
        fine.time_step /= 2.0;
        let (Ok(a), Ok(b)) = (
            freefall_drift(&k, &d.spec, &d.geometry, &d.drive),
            freefall_drift(&k, &d.spec, &d.geometry, &fine),
        ) else { return Ok(()) };
        prop_assert!(rel(a.s_max, b.s_max) < 1e-6);
    }
}
