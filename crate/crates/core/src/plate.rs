//! Screening plate mechanics: clamped-beam deflection under a central point
//! load, fundamental frequency, ground-state spread and the length bound
//! that keeps the deflection below that spread.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::casimir::{plate_force, plate_gravity_acceleration, TestMassSpec};
use crate::constants::{preset, PhysicalConstants};
use crate::error::{ensure, Error, Result};
use crate::kinematics::TrajectoryProfile;
use crate::scalar::Real;

/// Largest placement error accepted, as a fraction of R.
pub const MAX_PLACEMENT_FRACTION: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlateSpec<T> {
    /// L (m)
    pub length: T,
    /// W (m)
    pub thickness: T,
    /// ρ_p (kg/m³)
    pub density: T,
    /// E (Pa)
    pub youngs_modulus: T,
}

impl<T: Real> PlateSpec<T> {
    pub fn new(length: T, thickness: T, density: T, youngs_modulus: T) -> Self {
        Self {
            length,
            thickness,
            density,
            youngs_modulus,
        }
    }

    /// Copper plate of the given size.
    pub fn copper(length: T, thickness: T) -> Self {
        let cu = preset::<T>("copper").expect("built-in preset");
        Self::new(
            length,
            thickness,
            cu.density,
            cu.youngs_modulus().expect("copper is a plate material"),
        )
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("plate length", self.length),
            ("plate thickness", self.thickness),
            ("plate density", self.density),
            ("Young's modulus", self.youngs_modulus),
        ] {
            ensure(v > T::zero() && v.is_finite(), || {
                Error::Validation(format!("{name} must be positive"))
            })?;
        }
        ensure(self.length > T::lit(10.0) * self.thickness, || {
            Error::Validation("plate length must exceed 10x its thickness".into())
        })
    }

    /// ρ_p·L²·W
    pub fn mass(&self) -> T {
        self.density * self.length * self.length * self.thickness
    }
}

/// δ = F·L²/(16·E·W³).
pub fn deflection<T: Real>(force: T, plate: &PlateSpec<T>) -> T {
    force * plate.length * plate.length
        / (T::lit(16.0) * plate.youngs_modulus * plate.thickness.powi(3))
}

/// Net Casimir pull on the plate when both inner masses sit u·R off-center
/// toward the same side, at the closest approach (end of free fall).
pub fn max_imbalance_force<T: Real>(
    k: &PhysicalConstants<T>,
    spec: &TestMassSpec<T>,
    profile: &TrajectoryProfile<T>,
    u: T,
) -> Result<T> {
    ensure(
        u >= T::zero() && u <= T::lit(MAX_PLACEMENT_FRACTION),
        || {
            Error::Domain(format!(
                "placement fraction u = {} outside [0, 0.5]",
                u.to_f64_lossy()
            ))
        },
    )?;
    let gap = profile.min_gap();
    let offset = u * spec.radius();
    ensure(gap - offset > T::zero(), || {
        Error::Geometry("displaced mass would touch the plate".into())
    })?;
    Ok(plate_force(k, spec, gap - offset)? - plate_force(k, spec, gap + offset)?)
}

/// ω = √(16·E·W²/(ρ_p·L⁴)).
pub fn vibration_frequency<T: Real>(plate: &PlateSpec<T>) -> T {
    (T::lit(16.0) * plate.youngs_modulus * plate.thickness * plate.thickness
        / (plate.density * plate.length.powi(4)))
    .sqrt()
}

/// ΔS = √(ℏ/(m_plate·ω)).
pub fn ground_state_spread<T: Real>(k: &PhysicalConstants<T>, plate: &PlateSpec<T>) -> T {
    (k.hbar / (plate.mass() * vibration_frequency(plate))).sqrt()
}

/// Length at which δ(F_max) equals ΔS. ΔS does not depend on L, so
/// L = √(16·E·W³·ΔS/F_max). The plate's own `length` is ignored.
pub fn max_length<T: Real>(k: &PhysicalConstants<T>, plate: &PlateSpec<T>, f_max: T) -> Result<T> {
    ensure(f_max >= T::zero(), || {
        Error::Domain("force must be non-negative".into())
    })?;
    if f_max == T::zero() {
        return Ok(T::infinity());
    }
    let spread = ground_state_spread(k, plate);
    Ok((T::lit(16.0) * plate.youngs_modulus * plate.thickness.powi(3) * spread / f_max).sqrt())
}

/// ((1/W²)·F_max/(16E)^(3/4)·√(ρ_p/ℏ))^(−1/2), the bound with the density
/// exponent of the simplified spread formula. Kept for comparison only.
pub fn max_length_simplified<T: Real>(
    k: &PhysicalConstants<T>,
    plate: &PlateSpec<T>,
    f_max: T,
) -> T {
    let inner = f_max
        / (plate.thickness * plate.thickness)
        / (T::lit(16.0) * plate.youngs_modulus).powf(T::lit(0.75))
        * (plate.density / k.hbar).sqrt();
    inner.powf(T::lit(-0.5))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlateAssessment<T> {
    pub imbalance_force: T,
    pub deflection_max: T,
    /// rad/s
    pub frequency: T,
    pub ground_spread: T,
    pub which_path_ok: bool,
    pub length_bound: T,
    /// Newtonian pull of the plate on a test mass (m/s²).
    pub plate_gravity: T,
}

pub fn assess<T: Real>(
    k: &PhysicalConstants<T>,
    spec: &TestMassSpec<T>,
    plate: &PlateSpec<T>,
    profile: &TrajectoryProfile<T>,
    u: T,
) -> Result<PlateAssessment<T>> {
    let force = max_imbalance_force(k, spec, profile, u)?;
    let deflection_max = deflection(force, plate);
    let ground_spread = ground_state_spread(k, plate);
    Ok(PlateAssessment {
        imbalance_force: force,
        deflection_max,
        frequency: vibration_frequency(plate),
        ground_spread,
        which_path_ok: deflection_max < ground_spread,
        length_bound: max_length(k, plate, force)?,
        plate_gravity: plate_gravity_acceleration(k, plate.density, plate.thickness),
    })
}

/// Worst-case deflection for each placement fraction, in order.
pub fn deflection_curve<T: Real>(
    k: &PhysicalConstants<T>,
    spec: &TestMassSpec<T>,
    plate: &PlateSpec<T>,
    profile: &TrajectoryProfile<T>,
    fractions: &[T],
) -> Result<Vec<(T, T)>> {
    fractions
        .iter()
        .map(|&u| {
            Ok((
                u,
                deflection(max_imbalance_force(k, spec, profile, u)?, plate),
            ))
        })
        .collect()
}

/// `u,deflection` with a header row.
pub fn write_deflection_csv<T: Real, W: Write>(rows: &[(T, T)], mut out: W) -> io::Result<()> {
    writeln!(out, "u,deflection")?;
    for (u, d) in rows {
        writeln!(out, "{u:.16e},{d:.16e}")?;
    }
    Ok(())
}
