//! Vacuum-force formulas: sphere–sphere Casimir-Polder potential, the
//! separation bound it implies, the sphere–plate Casimir force, the recapture
//! gap and the plate's own Newtonian pull.
//!
//! Sign convention: potentials are returned with their sign (always ≤ 0);
//! forces are returned as magnitudes and always point toward the plate.
//!
//! The "gap" `x` is measured from the sphere *center* to the nearest plate
//! surface, so the initial gap of an inner branch is `N·R/2 − W/2`.

use serde::{Deserialize, Serialize};

use crate::constants::{MaterialPreset, PhysicalConstants};
use crate::error::{ensure, Error, Result};
use crate::scalar::Real;

/// Spherical dielectric test mass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestMassSpec<T> {
    /// kg
    pub mass: T,
    /// kg/m³
    pub density: T,
    /// Static relative permittivity ε.
    pub dielectric_constant: T,
    /// Im((ε−1)/(ε+2)), drives blackbody absorption and emission.
    pub cm_imag: T,
}

impl<T: Real> TestMassSpec<T> {
    pub fn new(mass: T, density: T, dielectric_constant: T) -> Result<Self> {
        let spec = Self {
            mass,
            density,
            dielectric_constant,
            cm_imag: T::lit(crate::constants::DEFAULT_CM_IMAG),
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Diamond sphere of the given mass.
    pub fn diamond(mass: T) -> Self {
        Self::from_preset(
            mass,
            &crate::constants::preset("diamond").expect("built-in preset"),
        )
        .expect("diamond preset is a dielectric")
    }

    pub fn from_preset(mass: T, preset: &MaterialPreset<T>) -> Result<Self> {
        let eps = preset.dielectric_constant().ok_or_else(|| {
            Error::Validation(format!("`{}` is not a test-mass dielectric", preset.name))
        })?;
        Self::new(mass, preset.density, eps)
    }

    pub fn with_cm_imag(mut self, cm_imag: T) -> Self {
        self.cm_imag = cm_imag;
        self
    }

    pub fn validate(&self) -> Result<()> {
        ensure(self.mass > T::zero() && self.mass.is_finite(), || {
            Error::Validation("mass must be positive".into())
        })?;
        ensure(self.density > T::zero() && self.density.is_finite(), || {
            Error::Validation("density must be positive".into())
        })?;
        ensure(self.dielectric_constant >= T::one(), || {
            Error::Validation("dielectric constant must be >= 1".into())
        })?;
        ensure(self.cm_imag >= T::zero(), || {
            Error::Validation("imaginary Clausius-Mossotti factor must be >= 0".into())
        })
    }

    /// R = (3m / 4πρ)^(1/3).
    pub fn radius(&self) -> T {
        (T::lit(3.0) * self.mass / (T::lit(4.0) * T::PI() * self.density)).cbrt()
    }

    /// Real Clausius–Mossotti factor (ε−1)/(ε+2).
    pub fn clausius_mossotti(&self) -> T {
        clausius_mossotti(self.dielectric_constant)
    }
}

pub fn clausius_mossotti<T: Real>(eps: T) -> T {
    (eps - T::one()) / (eps + T::lit(2.0))
}

/// Casimir-Polder potential between two identical spheres at center distance `r`:
/// V = −(23ℏc/4π)·(R⁶/r⁷)·((ε−1)/(ε+2))².
pub fn cp_potential<T: Real>(k: &PhysicalConstants<T>, spec: &TestMassSpec<T>, r: T) -> Result<T> {
    let radius = spec.radius();
    ensure(r > T::lit(2.0) * radius, || {
        Error::Geometry(format!(
            "spheres overlap: r = {:e} m <= 2R = {:e} m",
            r.to_f64_lossy(),
            (T::lit(2.0) * radius).to_f64_lossy()
        ))
    })?;
    let cm = spec.clausius_mossotti();
    let pre = T::lit(23.0) * k.hbar * k.c / (T::lit(4.0) * T::PI());
    Ok(-pre * radius.powi(6) / r.powi(7) * cm * cm)
}

/// Smallest separation at which |V_CP| is at most a tenth of the Newtonian
/// potential G·m²/r. Independent of the mass.
pub fn min_separation_bound<T: Real>(
    k: &PhysicalConstants<T>,
    density: T,
    epsilon: T,
) -> Result<T> {
    ensure(density > T::zero(), || {
        Error::Domain("density must be positive".into())
    })?;
    ensure(epsilon > T::one(), || {
        Error::Domain("bound undefined for epsilon <= 1 (no Casimir-Polder attraction)".into())
    })?;
    let four_pi = T::lit(4.0) * T::PI();
    let shape = T::lit(3.0) / (four_pi * density) * clausius_mossotti(epsilon);
    let inner = T::lit(10.0) * T::lit(23.0) * k.hbar * k.c / (four_pi * k.g_newton) * shape * shape;
    Ok(inner.powf(T::one() / T::lit(6.0)))
}

/// Magnitude of the sphere–plate Casimir force at gap `x`:
/// |F| = (3ℏc/2π)·((ε−1)/(ε+2))·R³/x⁵.
pub fn plate_force<T: Real>(k: &PhysicalConstants<T>, spec: &TestMassSpec<T>, x: T) -> Result<T> {
    ensure(x > T::zero(), || {
        Error::Domain(format!(
            "plate gap must be positive, got {:e} m",
            x.to_f64_lossy()
        ))
    })?;
    Ok(plate_force_coefficient(k, spec) / x.powi(5))
}

/// The constant C in |F| = C/x⁵.
pub(crate) fn plate_force_coefficient<T: Real>(
    k: &PhysicalConstants<T>,
    spec: &TestMassSpec<T>,
) -> T {
    T::lit(3.0) * k.hbar * k.c / (T::lit(2.0) * T::PI())
        * spec.clausius_mossotti()
        * spec.radius().powi(3)
}

/// Smallest gap at which the Casimir acceleration is at most a tenth of the
/// magnetic acceleration g·μ_B·∂B/m (so the interferometer can still be closed).
pub fn recapture_gap<T: Real>(
    k: &PhysicalConstants<T>,
    spec: &TestMassSpec<T>,
    field_gradient: T,
) -> Result<T> {
    ensure(field_gradient > T::zero(), || {
        Error::Domain("field gradient must be positive".into())
    })?;
    let pi = T::PI();
    let num = T::lit(90.0) * k.hbar * k.c / (T::lit(8.0) * spec.density * pi * pi)
        * spec.clausius_mossotti()
        * spec.mass;
    Ok((num / (k.spin_moment() * field_gradient)).powf(T::lit(0.2)))
}

/// Newtonian acceleration toward an infinite sheet: a_g = 2πG·ρ_p·W.
pub fn plate_gravity_acceleration<T: Real>(
    k: &PhysicalConstants<T>,
    plate_density: T,
    thickness: T,
) -> T {
    T::lit(2.0) * T::PI() * k.g_newton * plate_density * thickness
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn k() -> PhysicalConstants<f64> {
        PhysicalConstants::codata()
    }

    #[test]
    fn flagship_radius() {
        let r = TestMassSpec::<f64>::diamond(1e-15).radius();
        assert!((r - 4.086e-7).abs() / 4.086e-7 < 1e-3, "{r}");
    }

    #[test]
    fn vacuum_sphere_has_no_potential() {
        let spec = TestMassSpec::new(1e-14, 3500.0, 1.0).unwrap();
        assert_eq!(cp_potential(&k(), &spec, 1e-4).unwrap(), 0.0);
        assert_eq!(plate_force(&k(), &spec, 1e-5).unwrap(), 0.0);
    }

    #[test]
    fn cp_potential_is_a_tenth_of_gravity_at_bound() {
        let spec = TestMassSpec::diamond(1e-14);
        let a = min_separation_bound(&k(), 3500.0, 5.7).unwrap();
        let v = cp_potential(&k(), &spec, a).unwrap();
        let grav = -GRAV * 1e-28 / a;
        assert!((v / grav - 0.1).abs() < 1e-12, "{}", v / grav);
    }
    const GRAV: f64 = crate::constants::GRAVITATIONAL_CONSTANT;

    #[test]
    fn cp_potential_power_law() {
        let spec = TestMassSpec::diamond(1e-14);
        let v1 = cp_potential(&k(), &spec, 1e-4).unwrap();
        let v2 = cp_potential(&k(), &spec, 2e-4).unwrap();
        assert!((v1 / v2 - 128.0).abs() < 1e-9);
    }

    #[test]
    fn cp_potential_rejects_overlap() {
        let spec = TestMassSpec::diamond(1e-14);
        let r = spec.radius();
        assert!(matches!(
            cp_potential(&k(), &spec, 2.0 * r),
            Err(Error::Geometry(_))
        ));
    }

    #[test]
    fn separation_bound_value() {
        let a = min_separation_bound(&k(), 3500.0, 5.7).unwrap();
        assert!((a - 157e-6).abs() / 157e-6 < 0.02, "{a}");
        assert!(matches!(
            min_separation_bound(&k(), 3500.0, 1.0),
            Err(Error::Domain(_))
        ));
        // A ∝ ρ^(-1/3)
        let dense = min_separation_bound(&k(), 3.5e9, 5.7).unwrap();
        assert!((dense / a - 1e-2).abs() < 1e-12);
    }

    #[test]
    fn plate_force_flagship() {
        // direct evaluation: 3ħc/(2π)·(4.7/7.7)·R³/x⁵
        let spec = TestMassSpec::diamond(1e-15);
        let f = plate_force(&k(), &spec, 1.115e-5).unwrap();
        assert!((f - 3.7e-21).abs() / 3.7e-21 < 0.03, "{f}");
        let f2 = plate_force(&k(), &spec, 2.23e-5).unwrap();
        assert!((f / f2 - 32.0).abs() < 1e-9);
        assert!(plate_force(&k(), &spec, 0.0).is_err());
    }

    #[test]
    fn recapture_gap_flagship() {
        let spec = TestMassSpec::diamond(1e-15);
        let x = recapture_gap(&k(), &spec, 1e4).unwrap();
        assert!((x - 8.1e-6).abs() / 8.1e-6 < 0.01, "{x}");
        let a_mag = k().spin_moment() * 1e4 / 1e-15;
        let a_ca = plate_force(&k(), &spec, x).unwrap() / 1e-15;
        assert!((a_ca / a_mag - 0.1).abs() < 1e-9);
    }

    #[test]
    fn recapture_gap_scaling() {
        // x_min ∝ m^(1/5) at fixed ρ, ε, ∂B
        let x1 = recapture_gap(&k(), &TestMassSpec::diamond(1e-15), 1e4).unwrap();
        let x2 = recapture_gap(&k(), &TestMassSpec::diamond(32e-15), 1e4).unwrap();
        assert!((x2 / x1 - 2.0).abs() < 1e-12);
    }

    #[test]
    fn plate_gravity() {
        let a = plate_gravity_acceleration(&k(), 8960.0, 1e-6);
        assert!(a > 1e-12 && a < 1e-11, "{a}");
        assert!((a - 3.76e-12).abs() / 3.76e-12 < 0.01);
        assert_eq!(plate_gravity_acceleration(&k(), 8960.0, 0.0), 0.0);
        assert!((plate_gravity_acceleration(&k(), 8960.0, 2e-6) / a - 2.0).abs() < 1e-15);
    }

    #[test]
    fn f32_bound_agrees_with_f64() {
        let a32 = min_separation_bound(&PhysicalConstants::<f32>::codata(), 3500.0, 5.7).unwrap();
        let a64 = min_separation_bound(&k(), 3500.0, 5.7).unwrap();
        assert!((a32 as f64 - a64).abs() / a64 < 1e-5);
    }

    proptest! {
        #[test]
        fn forces_are_attractive(
            log_m in -18.0f64..-12.0,
            rho in 1000.0f64..20000.0,
            eps in 1.0f64..20.0,
            stretch in 2.01f64..100.0,
        ) {
            let spec = TestMassSpec::new(10f64.powf(log_m), rho, eps).unwrap();
            let r = spec.radius() * stretch;
            prop_assert!(cp_potential(&k(), &spec, r).unwrap() <= 0.0);
            prop_assert!(plate_force(&k(), &spec, r).unwrap() >= 0.0);
        }

        #[test]
        fn bound_defining_property(
            log_m in -18.0f64..-12.0,
            rho in 1000.0f64..20000.0,
            eps in 1.5f64..20.0,
        ) {
            let m = 10f64.powf(log_m);
            let spec = TestMassSpec::new(m, rho, eps).unwrap();
            let a = min_separation_bound(&k(), rho, eps).unwrap();
            prop_assume!(a > 2.0 * spec.radius());
            let v = cp_potential(&k(), &spec, a).unwrap().abs();
            let grav = GRAV * m * m / a;
            prop_assert!((v / grav - 0.1).abs() < 1e-10);
        }

        #[test]
        fn recapture_defining_property(
            log_m in -18.0f64..-12.0,
            rho in 1000.0f64..20000.0,
            eps in 1.5f64..20.0,
            log_db in 2.0f64..7.0,
        ) {
            let m = 10f64.powf(log_m);
            let db = 10f64.powf(log_db);
            let spec = TestMassSpec::new(m, rho, eps).unwrap();
            let x = recapture_gap(&k(), &spec, db).unwrap();
            let a_ca = plate_force(&k(), &spec, x).unwrap() / m;
            let a_mag = k().spin_moment() * db / m;
            prop_assert!((a_ca / a_mag - 0.1).abs() < 1e-9);
        }
    }
}
