//! Physical constants and material presets (SI units throughout).
//!
//! CODATA 2018 values. Every numeric constant used by the engine lives here.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Reduced Planck constant (J·s).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Speed of light (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Newtonian constant of gravitation (m³/(kg·s²)).
pub const GRAVITATIONAL_CONSTANT: f64 = 6.674_30e-11;
/// Boltzmann constant (J/K).
pub const BOLTZMANN: f64 = 1.380_649e-23;
/// Bohr magneton (J/T).
pub const BOHR_MAGNETON: f64 = 9.274_010_078_3e-24;
/// Electron g-factor, taken as exactly 2.
pub const ELECTRON_G_FACTOR: f64 = 2.0;
/// Mean mass of an air molecule (kg), about 29 u.
pub const AIR_MOLECULE_MASS: f64 = 4.8e-26;

/// 8!·ζ(9), the prefactor of the blackbody scattering constant.
pub const FACTORIAL_8_ZETA_9: f64 = 40_320.0 * ZETA_9;
/// Riemann ζ(9).
pub const ZETA_9: f64 = 1.002_008_392_826_082_2;

/// Diamond density (kg/m³).
pub const DIAMOND_DENSITY: f64 = 3500.0;
/// Static dielectric constant of diamond.
pub const DIAMOND_DIELECTRIC: f64 = 5.7;
/// Copper density (kg/m³).
pub const COPPER_DENSITY: f64 = 8960.0;
/// Young's modulus of copper at cryogenic temperature (Pa).
pub const COPPER_YOUNGS_MODULUS: f64 = 1.37e11;

/// Default imaginary part of the Clausius–Mossotti factor Im((ε−1)/(ε+2)).
///
/// Corresponds to a far-infrared loss tangent of a few 1e-4 for diamond.
pub const DEFAULT_CM_IMAG: f64 = 1e-5;

/// Set of physical constants threaded through every computation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants<T> {
    pub hbar: T,
    pub c: T,
    pub g_newton: T,
    pub k_b: T,
    pub mu_b: T,
    pub g_factor: T,
    pub m_air: T,
}

impl<T: Real> PhysicalConstants<T> {
    pub fn codata() -> Self {
        Self {
            hbar: T::lit(HBAR),
            c: T::lit(SPEED_OF_LIGHT),
            g_newton: T::lit(GRAVITATIONAL_CONSTANT),
            k_b: T::lit(BOLTZMANN),
            mu_b: T::lit(BOHR_MAGNETON),
            g_factor: T::lit(ELECTRON_G_FACTOR),
            m_air: T::lit(AIR_MOLECULE_MASS),
        }
    }

    pub fn with_air_mass(mut self, m_air: T) -> Self {
        self.m_air = m_air;
        self
    }

    /// g·μ_B, the spin magnetic moment magnitude.
    pub fn spin_moment(&self) -> T {
        self.g_factor * self.mu_b
    }

    pub fn validate(&self) -> Result<()> {
        let all = [
            ("hbar", self.hbar),
            ("c", self.c),
            ("G", self.g_newton),
            ("k_b", self.k_b),
            ("mu_B", self.mu_b),
            ("g_factor", self.g_factor),
            ("m_air", self.m_air),
        ];
        for (name, v) in all {
            if !(v > T::zero() && v.is_finite()) {
                return Err(Error::Validation(format!(
                    "constant {name} must be positive"
                )));
            }
        }
        Ok(())
    }
}

impl<T: Real> Default for PhysicalConstants<T> {
    fn default() -> Self {
        Self::codata()
    }
}

/// What a material preset is used for.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum MaterialKind<T> {
    /// Test-mass dielectric.
    Dielectric { dielectric_constant: T },
    /// Screening plate conductor.
    Plate { youngs_modulus: T },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MaterialPreset<T> {
    pub name: &'static str,
    pub density: T,
    pub kind: MaterialKind<T>,
}

impl<T: Real> MaterialPreset<T> {
    pub fn dielectric_constant(&self) -> Option<T> {
        match self.kind {
            MaterialKind::Dielectric {
                dielectric_constant,
            } => Some(dielectric_constant),
            MaterialKind::Plate { .. } => None,
        }
    }

    pub fn youngs_modulus(&self) -> Option<T> {
        match self.kind {
            MaterialKind::Plate { youngs_modulus } => Some(youngs_modulus),
            MaterialKind::Dielectric { .. } => None,
        }
    }
}

/// Names accepted by [`preset`].
pub const PRESET_NAMES: [&str; 2] = ["diamond", "copper"];

/// Looks up a material preset by name (case-insensitive).
pub fn preset<T: Real>(name: &str) -> Result<MaterialPreset<T>> {
    match name.trim().to_ascii_lowercase().as_str() {
        "diamond" => Ok(MaterialPreset {
            name: "diamond",
            density: T::lit(DIAMOND_DENSITY),
            kind: MaterialKind::Dielectric {
                dielectric_constant: T::lit(DIAMOND_DIELECTRIC),
            },
        }),
        "copper" => Ok(MaterialPreset {
            name: "copper",
            density: T::lit(COPPER_DENSITY),
            kind: MaterialKind::Plate {
                youngs_modulus: T::lit(COPPER_YOUNGS_MODULUS),
            },
        }),
        _ => Err(Error::UnknownPreset(name.to_string())),
    }
}
