//! Branch trajectories through the three interferometer stages.
//!
//! * step 1: magnetic split over `τ` (accelerate `τ/2`, decelerate `τ/2`);
//! * step 2: free fall for `t_int`, the plate-side branches drifting inward by
//!   `s(t)` under the sphere–plate Casimir force;
//! * step 3: recombination over `τ₁ = 2·√((τ/2)² + s_max/a_mag)`, modeled as
//!   the time reverse of step 1 with `τ → τ₁` and an instantaneous turnaround.
//!
//! Outer branches are held fixed (their Casimir drift is sub-nanometre).

use std::io::{self, Write};
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::casimir::{plate_force_coefficient, TestMassSpec};
use crate::constants::PhysicalConstants;
use crate::error::{ensure, Error, Result};
use crate::ode::rk4_step;
use crate::scalar::Real;

/// Default integrator step (s).
pub const DEFAULT_TIME_STEP: f64 = 1e-4;

/// Magnetic drive and timing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveSpec<T> {
    /// ∂B (T/m)
    pub field_gradient: T,
    /// Split time τ (s).
    pub split_time: T,
    /// Free-fall (interaction) time t_int (s).
    pub flight_time: T,
    /// Integrator step Δt (s).
    pub time_step: T,
}

impl<T: Real> DriveSpec<T> {
    pub fn new(field_gradient: T, split_time: T, flight_time: T) -> Self {
        Self {
            field_gradient,
            split_time,
            flight_time,
            time_step: T::lit(DEFAULT_TIME_STEP),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("field_gradient", self.field_gradient),
            ("split_time", self.split_time),
            ("flight_time", self.flight_time),
            ("time_step", self.time_step),
        ] {
            ensure(v > T::zero() && v.is_finite(), || {
                Error::Validation(format!("{name} must be positive"))
            })?;
        }
        let hundred = T::lit(100.0);
        ensure(self.time_step <= self.split_time / hundred, || {
            Error::Validation("time_step must not exceed split_time/100".into())
        })?;
        ensure(self.time_step <= self.flight_time / hundred, || {
            Error::Validation("time_step must not exceed flight_time/100".into())
        })
    }
}

/// Placement of the two interferometers around the plate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometrySpec<T> {
    /// N in A = d − Δx = N·R.
    pub separation_multiplier: T,
    /// Plate thickness W (m).
    pub plate_thickness: T,
}

impl<T: Real> GeometrySpec<T> {
    pub fn new(separation_multiplier: T, plate_thickness: T) -> Self {
        Self {
            separation_multiplier,
            plate_thickness,
        }
    }

    /// Inner–inner distance N·R at the start of free fall.
    pub fn inner_separation(&self, radius: T) -> T {
        self.separation_multiplier * radius
    }

    /// Center-to-plate-surface gap of an inner branch at the start of free fall.
    pub fn initial_gap(&self, radius: T) -> T {
        (self.inner_separation(radius) - self.plate_thickness) * T::lit(0.5)
    }

    pub fn validate(&self, radius: T) -> Result<()> {
        ensure(self.separation_multiplier > T::one(), || {
            Error::Validation("N must exceed 1".into())
        })?;
        ensure(self.plate_thickness > T::zero(), || {
            Error::Validation("plate thickness must be positive".into())
        })?;
        ensure(self.initial_gap(radius) > T::zero(), || {
            Error::Geometry("N·R/2 − W/2 must be positive (branches start inside the plate)".into())
        })
    }
}

/// a_mag = g·μ_B·∂B/m.
pub fn magnetic_acceleration<T: Real>(
    k: &PhysicalConstants<T>,
    spec: &TestMassSpec<T>,
    field_gradient: T,
) -> T {
    k.spin_moment() * field_gradient / spec.mass
}

/// Δx = 2·a_mag·(τ/2)².
pub fn split_size<T: Real>(
    k: &PhysicalConstants<T>,
    spec: &TestMassSpec<T>,
    drive: &DriveSpec<T>,
) -> T {
    let a = magnetic_acceleration(k, spec, drive.field_gradient);
    let half = drive.split_time * T::lit(0.5);
    T::lit(2.0) * a * half * half
}

/// τ₁ = 2·√((τ/2)² + s_max/a_mag).
pub fn recombine_time<T: Real>(split_time: T, a_mag: T, s_max: T) -> Result<T> {
    ensure(a_mag > T::zero(), || {
        Error::Domain("recombination needs a positive magnetic acceleration".into())
    })?;
    let half = split_time * T::lit(0.5);
    Ok(T::lit(2.0) * (half * half + s_max / a_mag).sqrt())
}

/// Branch separation during a split of duration `tau` at local time `t`:
/// `a·t²` while accelerating, `Δx − a·(τ−t)²` while decelerating.
pub fn split_separation<T: Real>(a_mag: T, tau: T, t: T) -> T {
    let half = tau * T::lit(0.5);
    if t <= half {
        a_mag * t * t
    } else {
        let rest = tau - t;
        T::lit(2.0) * a_mag * half * half - a_mag * rest * rest
    }
}

/// Step-2 drift of the plate-side branches.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FreeFall<T> {
    /// Local times from 0 to t_int.
    pub times: Vec<T>,
    /// s(t)
    pub drift: Vec<T>,
    /// ds/dt
    pub velocity: Vec<T>,
    pub s_max: T,
    /// Actual uniform step (t_int divided into whole steps).
    pub step: T,
}

/// Integrates s̈ = |F_ca(x₀ − s)|/m from rest with fixed-step RK4, calling
/// `observe(t, s, ṡ)` on every sample including t = 0. Returns the step used.
pub(crate) fn integrate_drift<T: Real>(
    k: &PhysicalConstants<T>,
    spec: &TestMassSpec<T>,
    geom: &GeometrySpec<T>,
    flight_time: T,
    time_step: T,
    mut observe: impl FnMut(T, T, T),
) -> Result<T> {
    let x0 = geom.initial_gap(spec.radius());
    ensure(x0 > T::zero(), || Error::Collision {
        time: 0.0,
        gap: x0.to_f64_lossy(),
    })?;
    let (n, dt) = uniform_steps(flight_time, time_step);
    let accel_coeff = plate_force_coefficient(k, spec) / spec.mass;

    let mut state = [T::zero(), T::zero()];
    observe(T::zero(), T::zero(), T::zero());
    for i in 0..n {
        let t_next = T::count(i + 1) * dt;
        let mut rhs = |y: &[T; 2]| {
            let gap = x0 - y[0];
            if gap > T::zero() {
                Ok([y[1], accel_coeff / gap.powi(5)])
            } else {
                Err(Error::Collision {
                    time: t_next.to_f64_lossy(),
                    gap: gap.to_f64_lossy(),
                })
            }
        };
        state = rk4_step(&state, dt, &mut rhs)?;
        let gap = x0 - state[0];
        if !(gap > T::zero()) || !state[0].is_finite() {
            return Err(Error::Collision {
                time: t_next.to_f64_lossy(),
                gap: gap.to_f64_lossy(),
            });
        }
        observe(t_next, state[0], state[1]);
    }
    Ok(dt)
}

/// Splits `duration` into a whole number of steps no longer than `max_step`.
fn uniform_steps<T: Real>(duration: T, max_step: T) -> (usize, T) {
    if !(duration > T::zero()) {
        return (0, T::zero());
    }
    let n = (duration / max_step).round().to_usize().unwrap_or(0).max(1);
    let n = if T::count(n) * max_step < duration * (T::one() - T::lit(1e-12)) {
        // round() went down by more than a rounding error: keep dt <= max_step
        (duration / max_step).ceil().to_usize().unwrap_or(1)
    } else {
        n
    };
    (n, duration / T::count(n))
}

/// Same as [`uniform_steps`] but with an even count so τ/2 falls on a sample.
fn even_steps<T: Real>(duration: T, max_step: T) -> (usize, T) {
    if !(duration > T::zero()) {
        return (0, T::zero());
    }
    let halves = (duration * T::lit(0.5) / max_step)
        .ceil()
        .to_usize()
        .unwrap_or(1)
        .max(1);
    let n = 2 * halves;
    (n, duration / T::count(n))
}

/// Free-fall drift over `[0, t_int]`.
pub fn freefall_drift<T: Real>(
    k: &PhysicalConstants<T>,
    spec: &TestMassSpec<T>,
    geom: &GeometrySpec<T>,
    drive: &DriveSpec<T>,
) -> Result<FreeFall<T>> {
    let mut times = Vec::new();
    let mut drift = Vec::new();
    let mut velocity = Vec::new();
    let step = integrate_drift(
        k,
        spec,
        geom,
        drive.flight_time,
        drive.time_step,
        |t, s, v| {
            times.push(t);
            drift.push(s);
            velocity.push(v);
        },
    )?;
    let s_max = *drift.last().expect("at least the initial sample");
    Ok(FreeFall {
        times,
        drift,
        velocity,
        s_max,
        step,
    })
}

/// Which interferometer stage a sample belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Step {
    Split,
    FreeFall,
    Recombine,
}

/// Index ranges of the three stages inside a [`TrajectoryProfile`].
///
/// Every stage stores both of its endpoints, so the boundary times appear
/// twice. The separation is discontinuous at the step-2/3 boundary because the
/// recombination is modeled as a mirrored split with `τ₁`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepMarkers {
    pub split: Range<usize>,
    pub free_fall: Range<usize>,
    pub recombine: Range<usize>,
}

/// Time series of one interferometer's branches over the full sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryProfile<T> {
    pub times: Vec<T>,
    /// |x_↑ − x_↓| of one interferometer.
    pub separation: Vec<T>,
    /// s(t), zero outside step 2.
    pub drift: Vec<T>,
    /// ds/dt, zero outside step 2.
    pub drift_velocity: Vec<T>,
    /// Inner-branch center to plate surface.
    pub gap: Vec<T>,
    pub markers: StepMarkers,
    /// Uniform step used within each stage.
    pub steps: [T; 3],
    pub a_mag: T,
    /// Δx
    pub split_size: T,
    /// N·R
    pub inner_separation: T,
    /// d = Δx + N·R
    pub center_distance: T,
    /// x₀ = N·R/2 − W/2
    pub initial_gap: T,
    pub split_time: T,
    pub flight_time: T,
    pub s_max: T,
    pub tau1: T,
}

impl<T: Real> TrajectoryProfile<T> {
    pub fn range(&self, step: Step) -> Range<usize> {
        match step {
            Step::Split => self.markers.split.clone(),
            Step::FreeFall => self.markers.free_fall.clone(),
            Step::Recombine => self.markers.recombine.clone(),
        }
    }

    pub fn step_size(&self, step: Step) -> T {
        match step {
            Step::Split => self.steps[0],
            Step::FreeFall => self.steps[1],
            Step::Recombine => self.steps[2],
        }
    }

    /// s(t) samples of step 2.
    pub fn free_fall_drift(&self) -> &[T] {
        &self.drift[self.markers.free_fall.clone()]
    }

    /// Gap at the end of free fall, the closest approach to the plate.
    pub fn min_gap(&self) -> T {
        self.initial_gap - self.s_max
    }

    pub fn total_duration(&self) -> T {
        self.split_time + self.flight_time + self.tau1
    }

    /// Σ_k (separation_k)²·Δt over all three stages (trapezoid per stage).
    pub fn separation_squared_integral(&self) -> T {
        [Step::Split, Step::FreeFall, Step::Recombine]
            .into_iter()
            .map(|step| {
                let r = self.range(step);
                crate::scalar::trapezoid(
                    self.separation[r].iter().map(|&x| x * x),
                    self.step_size(step),
                )
            })
            .sum()
    }

    /// Writes `t,separation,s,gap` rows with a header, 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "t,separation,s,gap")?;
        for i in 0..self.times.len() {
            writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e}",
                self.times[i], self.separation[i], self.drift[i], self.gap[i]
            )?;
        }
        Ok(())
    }
}

/// Builds the full three-stage profile.
pub fn full_profile<T: Real>(
    k: &PhysicalConstants<T>,
    spec: &TestMassSpec<T>,
    geom: &GeometrySpec<T>,
    drive: &DriveSpec<T>,
) -> Result<TrajectoryProfile<T>> {
    let radius = spec.radius();
    let a = magnetic_acceleration(k, spec, drive.field_gradient);
    let tau = drive.split_time;
    let dx = split_size(k, spec, drive);
    let nr = geom.inner_separation(radius);
    let x0 = geom.initial_gap(radius);
    let d = dx + nr;
    let half_w = geom.plate_thickness * T::lit(0.5);
    let start_gap = d * T::lit(0.5) - half_w;

    let fall = if a > T::zero() {
        freefall_drift(k, spec, geom, drive)?
    } else {
        // no split, so no plate-side branch to follow
        FreeFall {
            times: vec![T::zero()],
            drift: vec![T::zero()],
            velocity: vec![T::zero()],
            s_max: T::zero(),
            step: T::zero(),
        }
    };
    let s_max = fall.s_max;
    let tau1 = if a > T::zero() {
        recombine_time(tau, a, s_max)?
    } else {
        tau
    };

    let mut times = Vec::new();
    let mut separation = Vec::new();
    let mut drift = Vec::new();
    let mut drift_velocity = Vec::new();
    let mut gap = Vec::new();

    // step 1
    let (n1, dt1) = even_steps(tau, drive.time_step);
    for i in 0..=n1 {
        let t = T::count(i) * dt1;
        let sep = split_separation(a, tau, t);
        times.push(t);
        separation.push(sep);
        drift.push(T::zero());
        drift_velocity.push(T::zero());
        gap.push(start_gap - sep * T::lit(0.5));
    }
    let split = 0..times.len();

    // step 2
    let start2 = times.len();
    for i in 0..fall.times.len() {
        times.push(tau + fall.times[i]);
        separation.push(dx + fall.drift[i]);
        drift.push(fall.drift[i]);
        drift_velocity.push(fall.velocity[i]);
        gap.push(x0 - fall.drift[i]);
    }
    let free_fall = start2..times.len();

    // step 3
    let start3 = times.len();
    let (n3, dt3) = even_steps(tau1, drive.time_step);
    let t3 = tau + drive.flight_time;
    let end_gap = x0 - s_max;
    for i in 0..=n3 {
        let u = T::count(i) * dt3;
        times.push(t3 + u);
        separation.push(split_separation(a, tau1, tau1 - u));
        drift.push(T::zero());
        drift_velocity.push(T::zero());
        // inner branch travels a·(τ₁/2)² = a·(τ/2)² + s_max back outward
        gap.push(end_gap + split_separation(a, tau1, u) * T::lit(0.5));
    }
    let recombine = start3..times.len();

    Ok(TrajectoryProfile {
        times,
        separation,
        drift,
        drift_velocity,
        gap,
        markers: StepMarkers {
            split,
            free_fall,
            recombine,
        },
        steps: [dt1, fall.step, dt3],
        a_mag: a,
        split_size: dx,
        inner_separation: nr,
        center_distance: d,
        initial_gap: x0,
        split_time: tau,
        flight_time: drive.flight_time,
        s_max,
        tau1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k() -> PhysicalConstants<f64> {
        PhysicalConstants::codata()
    }

    fn flagship() -> (TestMassSpec<f64>, GeometrySpec<f64>, DriveSpec<f64>) {
        (
            TestMassSpec::diamond(1e-15),
            GeometrySpec::new(57.0, 1e-6),
            DriveSpec::new(1e4, 0.5, 1.0),
        )
    }

    #[test]
    fn magnetic_acceleration_flagship() {
        let (spec, _, _) = flagship();
        let a = magnetic_acceleration(&k(), &spec, 1e4);
        assert!((a - 1.855e-4).abs() / 1.855e-4 < 1e-3, "{a}");
        assert_eq!(magnetic_acceleration(&k(), &spec, 0.0), 0.0);
        let heavier = TestMassSpec::diamond(2e-15);
        assert!((magnetic_acceleration(&k(), &heavier, 1e4) * 2.0 - a).abs() < 1e-18);
    }

    #[test]
    fn split_size_flagship_and_scaling() {
        let (spec, _, drive) = flagship();
        let dx = split_size(&k(), &spec, &drive);
        assert!((dx - 2.32e-5).abs() / 2.32e-5 < 0.01, "{dx}");
        let zero = DriveSpec {
            split_time: 0.0,
            ..drive
        };
        assert_eq!(split_size(&k(), &spec, &zero), 0.0);
        let doubled = DriveSpec {
            split_time: 1.0,
            ..drive
        };
        assert!((split_size(&k(), &spec, &doubled) / dx - 4.0).abs() < 1e-12);
    }

    #[test]
    fn drive_validation() {
        let (_, _, drive) = flagship();
        drive.validate().unwrap();
        let coarse = DriveSpec {
            time_step: 0.01,
            ..drive
        };
        assert!(coarse.validate().is_err());
        let negative = DriveSpec {
            field_gradient: -1.0,
            ..drive
        };
        assert!(negative.validate().is_err());
    }

    #[test]
    fn geometry_validation() {
        let (spec, geom, _) = flagship();
        geom.validate(spec.radius()).unwrap();
        assert!(GeometrySpec::new(0.5, 1e-6)
            .validate(spec.radius())
            .is_err());
        assert!(GeometrySpec::new(2.0, 1e-6)
            .validate(spec.radius())
            .is_err());
    }

    #[test]
    fn zero_flight_time_has_no_drift() {
        let (spec, geom, drive) = flagship();
        let drive = DriveSpec {
            flight_time: 0.0,
            ..drive
        };
        let fall = freefall_drift(&k(), &spec, &geom, &drive).unwrap();
        assert_eq!(fall.s_max, 0.0);
        assert_eq!(fall.drift.len(), 1);
    }

    #[test]
    fn flagship_drift_is_about_two_microns() {
        let (spec, geom, drive) = flagship();
        let fall = freefall_drift(&k(), &spec, &geom, &drive).unwrap();
        assert!((fall.s_max - 2e-6).abs() / 2e-6 < 0.25, "{}", fall.s_max);
        assert!(fall.drift.windows(2).all(|w| w[1] >= w[0]));
        assert!(fall.velocity.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn collision_is_reported() {
        let spec = TestMassSpec::diamond(1e-15);
        // N just above W/R: starts a hair away from the plate
        let n = 1e-6 / spec.radius() + 0.05;
        let geom = GeometrySpec::new(n, 1e-6);
        let drive = DriveSpec::new(1e4, 0.5, 1.0);
        assert!(matches!(
            freefall_drift(&k(), &spec, &geom, &drive),
            Err(Error::Collision { .. })
        ));
    }

    #[test]
    fn recombine_time_values() {
        assert_eq!(recombine_time(0.5, 1.855e-4, 0.0).unwrap(), 0.5);
        let tau1 = recombine_time(0.5, 1.855e-4, 2e-6).unwrap();
        let expected = 2.0 * (0.0625_f64 + 2e-6 / 1.855e-4).sqrt();
        assert!((tau1 - expected).abs() < 1e-15);
        assert!((tau1 - 0.54).abs() < 0.01);
        assert!(recombine_time(0.5, 0.0, 1e-6).is_err());
    }

    #[test]
    fn profile_matches_closed_forms() {
        let (spec, geom, drive) = flagship();
        let p = full_profile(&k(), &spec, &geom, &drive).unwrap();
        let dx = p.split_size;
        let end1 = p.markers.split.end - 1;
        assert!((p.separation[end1] - dx).abs() / dx < 1e-9);
        for i in p.markers.split.clone() {
            let t = p.times[i];
            let expect = if t <= 0.25 {
                p.a_mag * t * t
            } else {
                dx - p.a_mag * (0.5 - t) * (0.5 - t)
            };
            assert!((p.separation[i] - expect).abs() <= 1e-12 * dx);
            assert_eq!(p.drift[i], 0.0);
        }
        let last = p.separation.len() - 1;
        assert!(p.separation[last] <= 1e-3 * dx);
        assert!(p.gap.iter().all(|&g| g > 0.0));
        assert!(
            (p.total_duration() - 2.04).abs() < 0.02,
            "{}",
            p.total_duration()
        );
        // gap returns to its starting value
        assert!((p.gap[last] - p.gap[0]).abs() < 1e-12 * p.gap[0]);
        // outer branches are not modeled as drifting: the free-fall separation is Δx + s exactly
        for i in p.markers.free_fall.clone() {
            assert_eq!(p.separation[i], dx + p.drift[i]);
        }
    }

    #[test]
    fn no_field_means_no_branches() {
        let (spec, geom, drive) = flagship();
        let drive = DriveSpec {
            field_gradient: 0.0,
            ..drive
        };
        let p = full_profile(&k(), &spec, &geom, &drive).unwrap();
        assert!(p.separation.iter().all(|&x| x == 0.0));
        assert!(p.drift.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn csv_has_header_and_all_rows() {
        let (spec, geom, drive) = flagship();
        let drive = DriveSpec {
            time_step: 1e-2,
            ..drive
        };
        let p = full_profile(&k(), &spec, &geom, &drive).unwrap();
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("t,separation,s,gap"));
        assert_eq!(lines.count(), p.times.len());
    }

    #[test]
    fn uniform_step_count() {
        let (n, dt) = uniform_steps(1.0_f64, 1e-4);
        assert_eq!(n, 10_000);
        assert!((dt - 1e-4).abs() < 1e-18);
        let (n, dt) = even_steps(0.54_f64, 1e-4);
        assert_eq!(n % 2, 0);
        assert!(dt <= 1e-4);
        assert_eq!(uniform_steps(0.0_f64, 1e-4).0, 0);
    }
}
