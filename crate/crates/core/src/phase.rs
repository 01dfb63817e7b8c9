//! Gravitational entangling phases.
//!
//! Static two-interferometer formulas, the minimum-mass root, and the dynamic
//! accumulation over the three stages of a [`TrajectoryProfile`].
//!
//! Pair convention: `ud` is the pair whose branches sit farther apart than the
//! centers (distance d + y), `du` the pair that sits closer (d − y). Both are
//! measured relative to the common phase φ of the equal-spin pairs.

use serde::{Deserialize, Serialize};

use crate::constants::PhysicalConstants;
use crate::error::{ensure, Error, Result};
use crate::kinematics::{Step, TrajectoryProfile};
use crate::quadrature;
use crate::scalar::{trapezoid, Real};

/// Below this value of a·(τ/2)²/d the split closed forms lose too many digits
/// to cancellation and quadrature is used instead.
pub const CLOSED_FORM_MIN_RATIO: f64 = 1e-3;

/// Relative tolerance of the quadrature fallback.
const QUAD_REL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseBreakdown<T> {
    /// φ accumulated by the equal-spin pairs over the whole sequence.
    pub phi_common: T,
    pub dphi_ud: T,
    pub dphi_du: T,
    pub step1: T,
    pub step2: T,
    pub step3: T,
    pub total: T,
}

/// `(ud, du)` contribution of one stage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairPhases<T> {
    pub ud: T,
    pub du: T,
}

impl<T: Real> PairPhases<T> {
    pub fn total(&self) -> T {
        self.ud + self.du
    }
}

fn coupling<T: Real>(k: &PhysicalConstants<T>, m: T) -> T {
    k.g_newton * m * m / k.hbar
}

fn check_static<T: Real>(d: T, dx: T, t: T) -> Result<()> {
    ensure(dx >= T::zero() && t >= T::zero(), || {
        Error::Domain("split size and time must be non-negative".into())
    })?;
    ensure(d > dx, || {
        Error::Geometry(format!(
            "center distance {:e} m must exceed the split {:e} m",
            d.to_f64_lossy(),
            dx.to_f64_lossy()
        ))
    })
}

/// (φ, Δφ_↑↓, Δφ_↓↑) for static branches: φ = Gm²t/(ℏd),
/// Δφ_↑↓ = Gm²t/(ℏ(d+Δx)) − φ, Δφ_↓↑ = Gm²t/(ℏ(d−Δx)) − φ.
pub fn pairwise_phases<T: Real>(
    k: &PhysicalConstants<T>,
    m: T,
    d: T,
    dx: T,
    t: T,
) -> Result<(T, T, T)> {
    check_static(d, dx, t)?;
    let c = coupling(k, m) * t;
    let phi = c / d;
    // written as differences over a common denominator to avoid cancellation
    let ud = -c * dx / (d * (d + dx));
    let du = c * dx / (d * (d - dx));
    Ok((phi, ud, du))
}

/// Φ_eff = (Gm²t/ℏ)·(1/(d−Δx) + 1/(d+Δx) − 2/d).
pub fn effective_phase_static<T: Real>(
    k: &PhysicalConstants<T>,
    m: T,
    d: T,
    dx: T,
    t: T,
) -> Result<T> {
    let (_, ud, du) = pairwise_phases(k, m, d, dx, t)?;
    Ok(ud + du)
}

/// Φ = (Gm²t/ℏ)·(1/A + 1/(2Δx+A) − 2/(Δx+A)), the static phase at the
/// closest allowed inner distance A.
pub fn max_phase_original<T: Real>(
    k: &PhysicalConstants<T>,
    m: T,
    dx: T,
    a_min: T,
    t: T,
) -> Result<T> {
    ensure(a_min > T::zero(), || {
        Error::Domain("A must be positive".into())
    })?;
    effective_phase_static(k, m, a_min + dx, dx, t)
}

/// Mass at which [`max_phase_original`] reaches `phi_target` when the split is
/// Δx = C/m with C = 2gμ_B·∂B·(τ/2)² and D = G·t_int/ℏ.
///
/// Positive root of (ΦA³ − 2DC²)m² + 3ΦA²C·m + 2ΦAC² = 0.
pub fn min_mass_for_phase<T: Real>(
    k: &PhysicalConstants<T>,
    phi_target: T,
    a_min: T,
    field_gradient: T,
    split_time: T,
    flight_time: T,
) -> Result<T> {
    ensure(phi_target > T::zero(), || {
        Error::Domain("phase target must be positive".into())
    })?;
    ensure(a_min > T::zero(), || {
        Error::Domain("A must be positive".into())
    })?;
    let half = split_time * T::lit(0.5);
    let c = T::lit(2.0) * k.spin_moment() * field_gradient * half * half;
    let d = k.g_newton * flight_time / k.hbar;
    let a = a_min;
    let phi = phi_target;
    let disc = a * phi * (a.powi(3) * phi + T::lit(16.0) * d * c * c);
    let root = (-T::lit(3.0) * a * a * phi * c - c * disc.sqrt())
        / (T::lit(2.0) * (a.powi(3) * phi - T::lit(2.0) * d * c * c));
    ensure(root.is_finite() && root > T::zero(), || {
        Error::NoSolution(format!(
            "no positive mass reaches Φ = {} rad (root {:e})",
            phi.to_f64_lossy(),
            root.to_f64_lossy()
        ))
    })?;
    Ok(root)
}

/// Φ ≈ (2G·t_int/(ℏA³))·(gμ_B·∂B·τ²/2)², valid for Δx ≪ A.
pub fn small_split_limit<T: Real>(
    k: &PhysicalConstants<T>,
    field_gradient: T,
    split_time: T,
    flight_time: T,
    a_min: T,
) -> T {
    let kick = k.spin_moment() * field_gradient * split_time * split_time * T::lit(0.5);
    T::lit(2.0) * k.g_newton * flight_time / (k.hbar * a_min.powi(3)) * kick * kick
}

fn step2_integrands<T: Real>(profile: &TrajectoryProfile<T>) -> Result<(Vec<T>, Vec<T>)> {
    let nr = profile.inner_separation;
    let dx = profile.split_size;
    let outer = T::one() / (T::lit(2.0) * dx + nr);
    let mut ud = Vec::new();
    let mut du = Vec::new();
    for (i, &s) in profile.free_fall_drift().iter().enumerate() {
        let inner = nr - T::lit(2.0) * s;
        if !(inner > T::zero()) {
            let t = profile.times[profile.markers.free_fall.start + i];
            return Err(Error::Collision {
                time: (t - profile.split_time).to_f64_lossy(),
                gap: (inner * T::lit(0.5)).to_f64_lossy(),
            });
        }
        let mixed = T::one() / (dx + nr - s);
        du.push(T::one() / inner - mixed);
        ud.push(outer - mixed);
    }
    Ok((ud, du))
}

/// Step-2 pair phases by trapezoid quadrature over the free-fall samples.
pub fn step2_pair_phases<T: Real>(
    k: &PhysicalConstants<T>,
    m: T,
    profile: &TrajectoryProfile<T>,
) -> Result<PairPhases<T>> {
    let (ud, du) = step2_integrands(profile)?;
    let dt = profile.step_size(Step::FreeFall);
    let c = coupling(k, m);
    Ok(PairPhases {
        ud: c * trapezoid(ud, dt),
        du: c * trapezoid(du, dt),
    })
}

/// Φ₂ = (Gm²/ℏ)·∫(1/(NR−2s) + 1/(2Δx+NR) − 2/(Δx+NR−s)) dt over free fall.
pub fn step2_phase<T: Real>(
    k: &PhysicalConstants<T>,
    m: T,
    profile: &TrajectoryProfile<T>,
) -> Result<T> {
    step2_pair_phases(k, m, profile).map(|p| p.total())
}

/// Closed-form step-1 pair phases for a split of duration `tau` between
/// interferometers whose centers are `d` apart.
///
/// Requires 4a·d₁ > (aτ)² and (aτ)² < 4a·d₂ with d₁,₂ = d ∓ a(τ/2)².
pub fn step1_pair_phases<T: Real>(
    k: &PhysicalConstants<T>,
    m: T,
    d: T,
    a_mag: T,
    tau: T,
) -> Result<PairPhases<T>> {
    ensure(
        d > T::zero() && tau >= T::zero() && a_mag >= T::zero(),
        || Error::Domain("step phase needs d > 0, τ >= 0, a >= 0".into()),
    )?;
    if a_mag == T::zero() || tau == T::zero() {
        return Ok(PairPhases {
            ud: T::zero(),
            du: T::zero(),
        });
    }
    let two = T::lit(2.0);
    let four = T::lit(4.0);
    let at = a_mag * tau;
    let shift = a_mag * tau * tau / four;
    let d1 = d - shift;
    let d2 = d + shift;
    let q = four * a_mag * d1 - at * at;
    let p2 = at * at + four * a_mag * d2;
    ensure(q > T::zero() && p2 > T::zero(), || {
        Error::Domain("split closed form outside its validity region".into())
    })?;
    let root_ad = (a_mag * d).sqrt();
    let half_at = at * T::lit(0.5);
    let log_den = (root_ad - half_at).abs();
    ensure(log_den > T::epsilon() * root_ad, || {
        Error::Domain("logarithm argument too close to zero".into())
    })?;

    // accelerating half: y = a·t²
    let accel_du = ((root_ad + half_at) / log_den).ln() / (two * root_ad);
    let accel_ud = (half_at / root_ad).atan() / root_ad;
    // decelerating half: y = −a·t² + aτ·t + a(τ/2)²
    let sq = q.sqrt();
    let decel_du = two / sq * (at / sq).atan();
    let p = p2.sqrt();
    let decel_ud = ((p + at) / (p - at)).ln() / p;

    let c = coupling(k, m);
    let reference = tau / d;
    Ok(PairPhases {
        ud: c * (accel_ud + decel_ud - reference),
        du: c * (accel_du + decel_du - reference),
    })
}

/// Separation y(t) of one interferometer during a split of duration `tau`.
fn split_offset<T: Real>(a_mag: T, tau: T, t: T) -> T {
    crate::kinematics::split_separation(a_mag, tau, t)
}

/// Step-1 pair phases by adaptive quadrature of the defining integrals.
pub fn step1_pair_phases_quadrature<T: Real>(
    k: &PhysicalConstants<T>,
    m: T,
    d: T,
    a_mag: T,
    tau: T,
) -> Result<PairPhases<T>> {
    ensure(
        d > T::zero() && tau >= T::zero() && a_mag >= T::zero(),
        || Error::Domain("step phase needs d > 0, τ >= 0, a >= 0".into()),
    )?;
    let half = tau * T::lit(0.5);
    let rel = T::lit(QUAD_REL_TOL).max(T::epsilon() * T::lit(100.0));
    let tiny = T::min_positive_value();
    let mut ud = T::zero();
    let mut du = T::zero();
    for (lo, hi) in [(T::zero(), half), (half, tau)] {
        ud = ud
            + quadrature::integrate(
                |t| {
                    let y = split_offset(a_mag, tau, t);
                    -y / (d * (d + y))
                },
                lo,
                hi,
                rel,
                tiny,
            )?;
        du = du
            + quadrature::integrate(
                |t| {
                    let y = split_offset(a_mag, tau, t);
                    y / (d * (d - y))
                },
                lo,
                hi,
                rel,
                tiny,
            )?;
    }
    let c = coupling(k, m);
    Ok(PairPhases {
        ud: c * ud,
        du: c * du,
    })
}

/// Φ₁ by direct quadrature of ∫ 2y²/(d(d²−y²)) dt.
pub fn step1_phase_quadrature<T: Real>(
    k: &PhysicalConstants<T>,
    m: T,
    d: T,
    a_mag: T,
    tau: T,
) -> Result<T> {
    ensure(
        d > T::zero() && tau >= T::zero() && a_mag >= T::zero(),
        || Error::Domain("step phase needs d > 0, τ >= 0, a >= 0".into()),
    )?;
    let half = tau * T::lit(0.5);
    let rel = T::lit(QUAD_REL_TOL).max(T::epsilon() * T::lit(100.0));
    let two = T::lit(2.0);
    let integrand = |t: T| {
        let y = split_offset(a_mag, tau, t);
        two * y * y / (d * (d * d - y * y))
    };
    let first = quadrature::integrate(integrand, T::zero(), half, rel, T::min_positive_value())?;
    let second = quadrature::integrate(integrand, half, tau, rel, T::min_positive_value())?;
    Ok(coupling(k, m) * (first + second))
}

/// Closed-form Φ₁ (sum of both halves of the split).
pub fn step1_phase<T: Real>(k: &PhysicalConstants<T>, m: T, d: T, a_mag: T, tau: T) -> Result<T> {
    step1_pair_phases(k, m, d, a_mag, tau).map(|p| p.total())
}

/// Φ₃: the step-1 form with τ → τ₁ and d → d − s_max.
pub fn step3_phase<T: Real>(
    k: &PhysicalConstants<T>,
    m: T,
    d: T,
    s_max: T,
    a_mag: T,
    tau1: T,
) -> Result<T> {
    step1_phase(k, m, d - s_max, a_mag, tau1)
}

/// Production path for a split stage: closed form, or quadrature when the
/// split is too small relative to `d` for the closed form to be accurate.
pub fn split_pair_phases<T: Real>(
    k: &PhysicalConstants<T>,
    m: T,
    d: T,
    a_mag: T,
    tau: T,
) -> Result<PairPhases<T>> {
    let half = tau * T::lit(0.5);
    let ratio = a_mag * half * half / d;
    if ratio < T::lit(CLOSED_FORM_MIN_RATIO) {
        return step1_pair_phases_quadrature(k, m, d, a_mag, tau);
    }
    match step1_pair_phases(k, m, d, a_mag, tau) {
        Err(Error::Domain(_)) => step1_pair_phases_quadrature(k, m, d, a_mag, tau),
        other => other,
    }
}

/// Assembles all three stages of a profile.
pub fn total_phase<T: Real>(
    k: &PhysicalConstants<T>,
    m: T,
    profile: &TrajectoryProfile<T>,
) -> Result<PhaseBreakdown<T>> {
    let d = profile.center_distance;
    let a = profile.a_mag;
    let s1 = split_pair_phases(k, m, d, a, profile.split_time)?;
    let s2 = step2_pair_phases(k, m, profile)?;
    let d3 = d - profile.s_max;
    let s3 = split_pair_phases(k, m, d3, a, profile.tau1)?;

    let c = coupling(k, m);
    let nr = profile.inner_separation;
    let dx = profile.split_size;
    let common2 = trapezoid(
        profile
            .free_fall_drift()
            .iter()
            .map(|&s| T::one() / (dx + nr - s)),
        profile.step_size(Step::FreeFall),
    );
    let phi_common = c * (profile.split_time / d + common2 + profile.tau1 / d3);

    let (step1, step2, step3) = (s1.total(), s2.total(), s3.total());
    Ok(PhaseBreakdown {
        phi_common,
        dphi_ud: s1.ud + s2.ud + s3.ud,
        dphi_du: s1.du + s2.du + s3.du,
        step1,
        step2,
        step3,
        total: step1 + step2 + step3,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::casimir::{min_separation_bound, TestMassSpec};
    use crate::kinematics::{full_profile, DriveSpec, GeometrySpec};

    fn k() -> PhysicalConstants<f64> {
        PhysicalConstants::codata()
    }

    #[test]
    fn static_identity_and_limits() {
        let (phi, ud, du) = pairwise_phases(&k(), 1e-14, 2e-4, 5e-5, 2.0).unwrap();
        assert!(phi > 0.0 && ud < 0.0 && du > 0.0);
        let eff = effective_phase_static(&k(), 1e-14, 2e-4, 5e-5, 2.0).unwrap();
        assert_eq!(eff, ud + du);
        let direct = coupling(&k(), 1e-14) * 2.0 * (1.0 / 1.5e-4 + 1.0 / 2.5e-4 - 2.0 / 2e-4);
        assert!((eff - direct).abs() / direct < 1e-12);
        assert_eq!(
            effective_phase_static(&k(), 1e-14, 2e-4, 0.0, 2.0).unwrap(),
            0.0
        );
        assert_eq!(
            pairwise_phases(&k(), 1e-14, 2e-4, 5e-5, 0.0).unwrap(),
            (0.0, -0.0, 0.0)
        );
        assert!(matches!(
            pairwise_phases(&k(), 1e-14, 1e-4, 1e-4, 1.0),
            Err(Error::Geometry(_))
        ));
    }

    #[test]
    fn max_phase_is_static_with_shifted_center() {
        let a = 157e-6;
        let dx = 3e-5;
        let lhs = max_phase_original(&k(), 2e-14, dx, a, 2.5).unwrap();
        let rhs = effective_phase_static(&k(), 2e-14, a + dx, dx, 2.5).unwrap();
        assert_eq!(lhs, rhs);
        assert_eq!(max_phase_original(&k(), 2e-14, 0.0, a, 2.5).unwrap(), 0.0);
    }

    #[test]
    fn min_mass_plug_back() {
        let a = min_separation_bound(&k(), 3500.0, 5.7).unwrap();
        for target in [1.0, 0.1, 0.01] {
            let m = min_mass_for_phase(&k(), target, a, 1e6, 0.5, 2.5).unwrap();
            let dx = 2.0 * k().spin_moment() * 1e6 * 0.0625 / m;
            let phi = max_phase_original(&k(), m, dx, a, 2.5).unwrap();
            assert!((phi - target).abs() / target < 1e-6, "{target}: {phi}");
        }
        assert!(min_mass_for_phase(&k(), 0.0, a, 1e6, 0.5, 2.5).is_err());
    }

    #[test]
    fn small_split_scaling() {
        let a = 157e-6;
        let base = small_split_limit(&k(), 1e4, 0.5, 2.5, a);
        assert!((base - 4e-4).abs() / 4e-4 < 0.15, "{base}");
        assert_eq!(small_split_limit(&k(), 0.0, 0.5, 2.5, a), 0.0);
        let doubled = small_split_limit(&k(), 2e4, 0.5, 2.5, a);
        assert!((doubled / base - 4.0).abs() < 1e-12);
    }

    #[test]
    fn step1_closed_form_matches_quadrature() {
        let m = 1e-15;
        for &(d, a, tau) in &[(4.6e-5, 1.85e-4, 0.5), (1e-4, 1e-3, 0.3), (6e-5, 1e-4, 1.0)] {
            let closed = step1_pair_phases(&k(), m, d, a, tau).unwrap();
            let quad = step1_pair_phases_quadrature(&k(), m, d, a, tau).unwrap();
            assert!((closed.ud - quad.ud).abs() / quad.ud.abs() < 1e-9);
            assert!((closed.du - quad.du).abs() / quad.du.abs() < 1e-9);
            let total = step1_phase_quadrature(&k(), m, d, a, tau).unwrap();
            assert!((closed.total() - total).abs() / total < 1e-9);
        }
    }

    #[test]
    fn step1_vanishes_without_split() {
        assert_eq!(step1_phase(&k(), 1e-15, 4e-5, 0.0, 0.5).unwrap(), 0.0);
        let tiny = step1_phase_quadrature(&k(), 1e-15, 4e-5, 1e-15, 0.5).unwrap();
        assert!(tiny < 1e-20);
    }

    #[test]
    fn step3_reduces_to_step1() {
        let a = step3_phase(&k(), 1e-15, 4.6e-5, 0.0, 1.85e-4, 0.5).unwrap();
        let b = step1_phase(&k(), 1e-15, 4.6e-5, 1.85e-4, 0.5).unwrap();
        assert_eq!(a, b);
    }

    fn flagship_profile() -> (TestMassSpec<f64>, TrajectoryProfile<f64>) {
        let spec = TestMassSpec::diamond(1e-15);
        let p = full_profile(
            &k(),
            &spec,
            &GeometrySpec::new(57.0, 1e-6),
            &DriveSpec::new(1e4, 0.5, 1.0),
        )
        .unwrap();
        (spec, p)
    }

    #[test]
    fn flagship_breakdown() {
        let (spec, p) = flagship_profile();
        let b = total_phase(&k(), spec.mass, &p).unwrap();
        assert!((b.step2 - 0.01).abs() / 0.01 < 0.3, "{b:?}");
        assert!((b.total - 0.015).abs() / 0.015 < 0.3, "{b:?}");
        assert_eq!(b.total, b.step1 + b.step2 + b.step3);
        assert!((b.dphi_ud + b.dphi_du - b.total).abs() < 1e-15);
        assert!(b.step1 > 0.0 && b.step3 > 0.0);
        assert!(b.phi_common > b.total);
    }

    #[test]
    fn static_limit_of_step2() {
        // no Casimir drift: W tiny and far plate, compare with the static formula
        let (spec, mut p) = flagship_profile();
        let n = p.markers.free_fall.clone();
        for i in n {
            p.drift[i] = 0.0;
        }
        let step2 = step2_phase(&k(), spec.mass, &p).unwrap();
        let stat = effective_phase_static(
            &k(),
            spec.mass,
            p.center_distance,
            p.split_size,
            p.flight_time,
        )
        .unwrap();
        assert!((step2 - stat).abs() / stat < 1e-6, "{step2} {stat}");
    }
}
