#![allow(dead_code)]

use proptest::prelude::*;
use qgem_core::casimir::recapture_gap;
use qgem_core::{DriveSpec, GeometrySpec, PhysicalConstants, TestMassSpec};

pub fn k() -> PhysicalConstants {
    PhysicalConstants::codata()
}

pub fn log_uniform(lo: f64, hi: f64) -> impl Strategy<Value = f64> {
    (lo.ln()..hi.ln()).prop_map(f64::exp)
}

pub fn rel(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// A screened design whose branches start `gap_factor` recapture gaps from
/// the plate.
#[derive(Debug, Clone, Copy)]
pub struct Design {
    pub spec: TestMassSpec,
    pub geometry: GeometrySpec,
    pub drive: DriveSpec,
}

pub fn design_with(
    mass: f64,
    field_gradient: f64,
    split_time: f64,
    flight_time: f64,
    gap_factor: f64,
    time_step: f64,
) -> Design {
    let spec = TestMassSpec::diamond(mass);
    let x_min = recapture_gap(&k(), &spec, field_gradient).unwrap();
    let w = 1e-6;
    let n = (2.0 * gap_factor * x_min + w) / spec.radius();
    let mut drive = DriveSpec::new(field_gradient, split_time, flight_time);
    drive.time_step = time_step;
    Design {
        spec,
        geometry: GeometrySpec::new(n, w),
        drive,
    }
}

pub fn designs(time_step: f64) -> impl Strategy<Value = Design> {
    (
        log_uniform(1e-16, 1e-14),
        log_uniform(1e3, 1e5),
        0.2..1.0f64,
        0.2..2.0f64,
        1.5..5.0f64,
    )
        .prop_map(move |(m, db, tau, t, f)| design_with(m, db, tau, t, f, time_step))
}
