//! Decoherence budget: air-molecule and blackbody scattering constants and the
//! exponent Σγ_kΔt accumulated over the three interferometer stages.
//!
//! Air collisions resolve the superposition completely (short-wavelength
//! limit, a rate Γ_air independent of the separation). Photons are in the
//! long-wavelength limit, so their rate is Λ·(Δx)² with Δx the separation of
//! one interferometer's branches at that instant.

use std::fmt;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::casimir::TestMassSpec;
use crate::constants::{PhysicalConstants, FACTORIAL_8_ZETA_9};
use crate::error::{ensure, Error, Result};
use crate::kinematics::{Step, TrajectoryProfile};
use crate::scalar::{trapezoid, Real};

/// Closed form and direct profile summation must agree to this relative level.
pub const SUMMATION_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvironmentSpec<T> {
    /// n_V (m⁻³)
    pub number_density: T,
    /// T_ex (K)
    pub external_temperature: T,
    /// T_i (K)
    pub internal_temperature: T,
}

impl<T: Real> EnvironmentSpec<T> {
    pub fn new(number_density: T, external_temperature: T, internal_temperature: T) -> Self {
        Self {
            number_density,
            external_temperature,
            internal_temperature,
        }
    }

    pub fn with_density(mut self, number_density: T) -> Self {
        self.number_density = number_density;
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("number_density", self.number_density),
            ("external_temperature", self.external_temperature),
            ("internal_temperature", self.internal_temperature),
        ] {
            ensure(v > T::zero() && v.is_finite(), || {
                Error::Validation(format!("{name} must be positive"))
            })?;
        }
        Ok(())
    }

    /// Thermal photon wavelength scale ℏc/(k_b·T_ex).
    pub fn photon_wavelength(&self, k: &PhysicalConstants<T>) -> T {
        k.hbar * k.c / (k.k_b * self.external_temperature)
    }

    /// Long-wavelength photon treatment holds if ℏc/(k_bT_ex) > 10·(Δx + s_max).
    pub fn long_wavelength_ok(&self, k: &PhysicalConstants<T>, max_separation: T) -> bool {
        self.photon_wavelength(k) > T::lit(10.0) * max_separation
    }
}

/// Λ_air = (4R²/3ℏ²)·n_V·√(π·m_air)·(2k_bT_ex)^(3/2).
pub fn lambda_air<T: Real>(
    k: &PhysicalConstants<T>,
    env: &EnvironmentSpec<T>,
    spec: &TestMassSpec<T>,
) -> T {
    let r = spec.radius();
    let thermal = T::lit(2.0) * k.k_b * env.external_temperature;
    T::lit(4.0) * r * r / (T::lit(3.0) * k.hbar * k.hbar)
        * env.number_density
        * (T::PI() * k.m_air).sqrt()
        * thermal.powf(T::lit(1.5))
}

/// Γ_air = (16π·n_V·R²/3)·√(2π·k_bT_ex/m_air).
pub fn gamma_air<T: Real>(
    k: &PhysicalConstants<T>,
    env: &EnvironmentSpec<T>,
    spec: &TestMassSpec<T>,
) -> T {
    let r = spec.radius();
    T::lit(16.0) * T::PI() * env.number_density * r * r / T::lit(3.0)
        * (T::lit(2.0) * T::PI() * k.k_b * env.external_temperature / k.m_air).sqrt()
}

/// Thermal de Broglie wavelength of an air molecule, h/√(2π·m_air·k_b·T).
pub fn air_thermal_wavelength<T: Real>(k: &PhysicalConstants<T>, temperature: T) -> T {
    let h = T::lit(2.0) * T::PI() * k.hbar;
    h / (T::lit(2.0) * T::PI() * k.m_air * k.k_b * temperature).sqrt()
}

/// Blackbody localization constants (1/(m²·s)).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhotonConstants<T> {
    pub scattering: T,
    pub absorption: T,
    pub emission: T,
}

impl<T: Real> PhotonConstants<T> {
    pub fn sum(&self) -> T {
        self.scattering + self.absorption + self.emission
    }
}

/// Λ_sc = 8!ζ(9)·(8cR⁶/9π)·(k_bT_ex/ℏc)⁹·Re(CM)²;
/// Λ_a (T_ex) and Λ_e (T_i) = (16π⁵cR³/189)·(k_bT/ℏc)⁶·Im(CM).
pub fn photon_constants<T: Real>(
    k: &PhysicalConstants<T>,
    env: &EnvironmentSpec<T>,
    spec: &TestMassSpec<T>,
) -> PhotonConstants<T> {
    let r = spec.radius();
    let re = spec.clausius_mossotti();
    let wavenumber = |temp: T| k.k_b * temp / (k.hbar * k.c);
    let pi = T::PI();
    let scattering = T::lit(FACTORIAL_8_ZETA_9) * T::lit(8.0) * k.c * r.powi(6)
        / (T::lit(9.0) * pi)
        * wavenumber(env.external_temperature).powi(9)
        * re
        * re;
    let thermal = |temp: T| {
        T::lit(16.0) * pi.powi(5) * k.c * r.powi(3) / T::lit(189.0)
            * wavenumber(temp).powi(6)
            * spec.cm_imag
    };
    PhotonConstants {
        scattering,
        absorption: thermal(env.external_temperature),
        emission: thermal(env.internal_temperature),
    }
}

/// n_V·k_b·T_ex (ideal gas).
pub fn pressure<T: Real>(k: &PhysicalConstants<T>, env: &EnvironmentSpec<T>) -> T {
    env.number_density * k.k_b * env.external_temperature
}

/// ∫(Δx)² dt over the three stages, from the piecewise kinematics:
/// (46/15)a²((τ/2)⁵ + (τ₁/2)⁵) + 4a²(τ/2)⁴t_int + Σ_k(4a(τ/2)²s_k + s_k²)Δt.
pub fn separation_moment<T: Real>(profile: &TrajectoryProfile<T>) -> T {
    let a = profile.a_mag;
    let h = profile.split_time * T::lit(0.5);
    let h1 = profile.tau1 * T::lit(0.5);
    let splits = T::lit(46.0) / T::lit(15.0) * a * a * (h.powi(5) + h1.powi(5));
    let flight = T::lit(4.0) * a * a * h.powi(4) * profile.flight_time;
    let cross = T::lit(4.0) * a * h * h;
    let drift = trapezoid(
        profile.free_fall_drift().iter().map(|&s| cross * s + s * s),
        profile.step_size(Step::FreeFall),
    );
    splits + flight + drift
}

/// Linear model of the exponent in n_V, cheap to evaluate in root searches.
#[derive(Debug, Clone, Copy, PartialEq)]
struct ExponentModel<T> {
    gamma_per_density: T,
    duration: T,
    photon_rate: T,
    moment: T,
}

impl<T: Real> ExponentModel<T> {
    fn new(
        k: &PhysicalConstants<T>,
        env: &EnvironmentSpec<T>,
        spec: &TestMassSpec<T>,
        profile: &TrajectoryProfile<T>,
    ) -> Self {
        let unit = env.with_density(T::one());
        Self {
            gamma_per_density: gamma_air(k, &unit, spec),
            duration: profile.total_duration(),
            photon_rate: photon_constants(k, env, spec).sum(),
            moment: separation_moment(profile),
        }
    }

    fn at(&self, density: T) -> T {
        self.gamma_per_density * density * self.duration + self.photon_rate * self.moment
    }
}

/// Channel that contributes most to the exponent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    Air,
    Scattering,
    Absorption,
    Emission,
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Channel::Air => "air",
            Channel::Scattering => "scattering",
            Channel::Absorption => "absorption",
            Channel::Emission => "emission",
        })
    }
}

/// Per-channel share of the exponent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelContributions<T> {
    pub air: T,
    pub scattering: T,
    pub absorption: T,
    pub emission: T,
}

impl<T: Real> ChannelContributions<T> {
    pub fn photon_total(&self) -> T {
        self.scattering + self.absorption + self.emission
    }

    pub fn dominant(&self) -> Channel {
        [
            (Channel::Air, self.air),
            (Channel::Scattering, self.scattering),
            (Channel::Absorption, self.absorption),
            (Channel::Emission, self.emission),
        ]
        .into_iter()
        .fold((Channel::Air, T::neg_infinity()), |best, cur| {
            if cur.1 > best.1 {
                cur
            } else {
                best
            }
        })
        .0
    }

    /// True when the air channel exceeds each photon channel.
    pub fn air_dominates(&self) -> bool {
        self.air > self.scattering && self.air > self.absorption && self.air > self.emission
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecoherenceBudget<T> {
    pub gamma_air: T,
    pub lambda_air: T,
    pub lambda_sc: T,
    pub lambda_e: T,
    pub lambda_a: T,
    /// Σγ_kΔt from the closed form.
    pub exponent: T,
    /// Σγ_kΔt from direct summation over the profile.
    pub exponent_direct: T,
    pub contributions: ChannelContributions<T>,
    pub dominant_channel: Channel,
    pub long_wavelength_ok: bool,
    pub pressure: T,
}

/// Builds the full budget for one run.
///
/// Fails with a validation error when the closed form and the direct
/// summation over `profile` disagree by more than [`SUMMATION_TOLERANCE`].
pub fn accumulated_exponent<T: Real>(
    k: &PhysicalConstants<T>,
    env: &EnvironmentSpec<T>,
    spec: &TestMassSpec<T>,
    profile: &TrajectoryProfile<T>,
) -> Result<DecoherenceBudget<T>> {
    let gamma = gamma_air(k, env, spec);
    let photons = photon_constants(k, env, spec);
    let moment = separation_moment(profile);
    let direct_moment = profile.separation_squared_integral();
    ensure(
        moment.rel_diff(direct_moment) <= T::lit(SUMMATION_TOLERANCE),
        || {
            Error::Validation(format!(
                "closed-form separation moment {:e} disagrees with the profile sum {:e}",
                moment.to_f64_lossy(),
                direct_moment.to_f64_lossy()
            ))
        },
    )?;
    let duration = profile.total_duration();
    let contributions = ChannelContributions {
        air: gamma * duration,
        scattering: photons.scattering * moment,
        absorption: photons.absorption * moment,
        emission: photons.emission * moment,
    };
    let exponent = contributions.air + contributions.photon_total();
    let exponent_direct = gamma * duration + photons.sum() * direct_moment;
    let max_sep = profile.separation.iter().copied().fold(T::zero(), T::max);
    Ok(DecoherenceBudget {
        gamma_air: gamma,
        lambda_air: lambda_air(k, env, spec),
        lambda_sc: photons.scattering,
        lambda_e: photons.emission,
        lambda_a: photons.absorption,
        exponent,
        exponent_direct,
        contributions,
        dominant_channel: contributions.dominant(),
        long_wavelength_ok: env.long_wavelength_ok(k, max_sep),
        pressure: pressure(k, env),
    })
}

/// n_V at which the exponent reaches `limit`, by bisection.
pub fn threshold_density<T: Real>(
    k: &PhysicalConstants<T>,
    env: &EnvironmentSpec<T>,
    spec: &TestMassSpec<T>,
    profile: &TrajectoryProfile<T>,
    limit: T,
) -> Result<T> {
    ensure(limit > T::zero(), || {
        Error::Domain("budget limit must be positive".into())
    })?;
    let model = ExponentModel::new(k, env, spec, profile);
    let floor = model.at(T::zero());
    ensure(floor < limit, || {
        Error::NoSolution(format!(
            "photon floor {:e} already exceeds the budget {:e}",
            floor.to_f64_lossy(),
            limit.to_f64_lossy()
        ))
    })?;
    let mut lo = T::zero();
    let mut hi = T::one();
    while model.at(hi) < limit {
        hi = hi * T::lit(10.0);
        ensure(hi.is_finite(), || {
            Error::NoSolution("exponent never reaches the budget".into())
        })?;
    }
    for _ in 0..200 {
        let mid = (lo + hi) * T::lit(0.5);
        if !(mid > lo && mid < hi) {
            break;
        }
        if model.at(mid) < limit {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo + hi) * T::lit(0.5))
}

/// One row of a density scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityRow<T> {
    pub number_density: T,
    pub exponent: T,
    pub limit: T,
}

impl<T: Real> DensityRow<T> {
    pub fn pass(&self) -> bool {
        self.exponent < self.limit
    }
}

/// Exponent at each density, in the given order.
pub fn density_scan<T: Real>(
    k: &PhysicalConstants<T>,
    env: &EnvironmentSpec<T>,
    spec: &TestMassSpec<T>,
    profile: &TrajectoryProfile<T>,
    densities: &[T],
    limit: T,
) -> Vec<DensityRow<T>> {
    let model = ExponentModel::new(k, env, spec, profile);
    densities
        .iter()
        .map(|&n| DensityRow {
            number_density: n,
            exponent: model.at(n),
            limit,
        })
        .collect()
}

/// `n_V,exponent,limit,pass` with a header row.
pub fn write_density_csv<T: Real, W: Write>(rows: &[DensityRow<T>], mut out: W) -> io::Result<()> {
    writeln!(out, "n_V,exponent,limit,pass")?;
    for r in rows {
        writeln!(
            out,
            "{:.16e},{:.16e},{:.16e},{}",
            r.number_density,
            r.exponent,
            r.limit,
            r.pass()
        )?;
    }
    Ok(())
}
