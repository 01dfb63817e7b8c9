use qgem_core::designer::{min_feasible_mass, min_saturated_mass, saturated_design};
use qgem_core::{DriveSpec, ExperimentConfig, GeometrySpec, TestMassSpec};

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn search(db: f64, t_int: f64, target: f64) -> (f64, f64) {
    let cfg = ExperimentConfig::flagship();
    let d = min_saturated_mass(
        &cfg.constants,
        &cfg.mass_spec,
        1e-6,
        &DriveSpec::new(db, 0.5, t_int),
        target,
    )
    .unwrap();
    (d.mass, d.separation_multiplier)
}

// reference masses from an independent scipy implementation of the same model
#[test]
fn saturated_strong_gradient() {
    let (m, _) = search(1e6, 2.5, 0.01);
    assert!(rel(m, 3.724e-16) < 5e-3, "{m}");
}

#[test]
fn saturated_strong_gradient_unit_phase() {
    let (m, _) = search(1e6, 2.5, 1.0);
    assert!(rel(m, 3.871e-15) < 5e-3, "{m}");
}

#[test]
fn saturated_weak_gradient() {
    let (m, n) = search(1e4, 1.0, 0.01);
    assert!(rel(m, 8.879e-16) < 5e-3, "{m}");
    assert!((n - 57.06).abs() < 0.5, "{n}");
}

#[test]
fn saturated_design_sits_on_recapture_bound() {
    let cfg = ExperimentConfig::flagship();
    let d = saturated_design(&cfg.constants, &cfg.mass_spec, 1e-6, &cfg.drive).unwrap();
    let o = d.outcome;
    assert!(o.end_gap >= o.recapture_gap);
    assert!(rel(o.end_gap, o.recapture_gap) < 1e-5);
}

#[test]
fn fixed_n_mass_exceeds_saturated_mass() {
    let cfg = ExperimentConfig::flagship();
    let k = &cfg.constants;
    let fixed = min_feasible_mass(
        k,
        &cfg.mass_spec,
        &GeometrySpec::new(40.0, 1e-6),
        &cfg.drive,
        0.01,
    )
    .unwrap();
    let sat = min_saturated_mass(k, &cfg.mass_spec, 1e-6, &cfg.drive, 0.01)
        .unwrap()
        .mass;
    assert!(fixed >= sat * (1.0 - 1e-3), "{fixed} {sat}");
}

#[test]
fn unreachable_target_is_reported() {
    let cfg = ExperimentConfig::flagship();
    let heavy = TestMassSpec {
        mass: 1e-15,
        ..cfg.mass_spec
    };
    let r = min_saturated_mass(
        &cfg.constants,
        &heavy,
        1e-6,
        &DriveSpec::new(1e4, 0.5, 1.0),
        1e6,
    );
    assert!(r.is_err());
}
