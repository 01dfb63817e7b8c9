//! Design checks and parameter searches built on the physics modules.

use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::casimir::{recapture_gap, TestMassSpec};
use crate::constants::PhysicalConstants;
use crate::decoherence::{accumulated_exponent, density_scan, DecoherenceBudget, EnvironmentSpec};
use crate::error::{ensure, Error, Result};
use crate::kinematics::{
    full_profile, integrate_drift, magnetic_acceleration, split_size, DriveSpec, GeometrySpec,
};
use crate::phase::{total_phase, PhaseBreakdown};
use crate::plate::{assess, deflection, max_imbalance_force, PlateAssessment, PlateSpec};
use crate::scalar::Real;
use crate::witness::{detectability, DephasingModel, WitnessOperator};

/// Mass search bracket (kg).
pub const MASS_BRACKET: (f64, f64) = (1e-18, 1e-12);
/// Log-spaced points scanned before bisection in [`min_feasible_mass`].
const MASS_SCAN_POINTS: usize = 61;
/// Relative mass resolution of the searches (well inside the 0.5% contract).
const MASS_REL_TOL: f64 = 1e-4;
/// Grid for [`min_saturated_mass`]. The phase peaks at an intermediate mass
/// when the drive is weak, so the bracket cannot be bisected directly.
const SATURATED_SCAN_POINTS: usize = 31;
/// Relative resolution of the saturating N.
const N_REL_TOL: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig<T> {
    pub constants: PhysicalConstants<T>,
    pub mass_spec: TestMassSpec<T>,
    pub drive: DriveSpec<T>,
    pub geometry: GeometrySpec<T>,
    pub environment: EnvironmentSpec<T>,
    pub plate: PlateSpec<T>,
    /// Placement error u, as a fraction of R.
    pub placement_uncertainty: T,
    /// Φ target (rad).
    pub phase_target: T,
    pub dephasing: DephasingModel,
    pub witness: WitnessOperator<T>,
}

impl<T: Real> ExperimentConfig<T> {
    /// 10⁻¹⁵ kg diamond, N = 57, ∂B = 10⁴ T/m, τ = 0.5 s, t_int = 1 s, 1 µm
    /// thick 1 mm copper plate, n_V = 10⁷ m⁻³ at 4 K.
    pub fn flagship() -> Self {
        let l = T::lit;
        Self {
            constants: PhysicalConstants::codata(),
            mass_spec: TestMassSpec::diamond(l(1e-15)),
            drive: DriveSpec::new(l(1e4), l(0.5), l(1.0)),
            geometry: GeometrySpec::new(l(57.0), l(1e-6)),
            environment: EnvironmentSpec::new(l(1e7), l(4.0), l(4.0)),
            plate: PlateSpec::copper(l(1e-3), l(1e-6)),
            placement_uncertainty: l(0.5),
            phase_target: l(0.01),
            dephasing: DephasingModel::default(),
            witness: WitnessOperator::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.constants.validate()?;
        self.mass_spec.validate()?;
        self.drive.validate()?;
        self.geometry.validate(self.mass_spec.radius())?;
        self.environment.validate()?;
        self.plate.validate()?;
        ensure(
            (self.plate.thickness - self.geometry.plate_thickness).abs()
                <= T::epsilon() * self.plate.thickness,
            || Error::Validation("plate thickness differs between geometry and plate".into()),
        )?;
        let u = self.placement_uncertainty;
        ensure(u >= T::zero() && u <= T::lit(0.5), || {
            Error::Validation("placement uncertainty u must lie in [0, 0.5]".into())
        })?;
        ensure(self.phase_target > T::zero(), || {
            Error::Validation("phase target must be positive".into())
        })
    }

    pub fn with_mass(&self, mass: T) -> Self {
        let mut c = self.clone();
        c.mass_spec.mass = mass;
        c
    }

    /// Flat `(key, value)` listing in SI units, shared with the config file format.
    pub fn describe(&self) -> Vec<(&'static str, String)> {
        let f = |v: T| format!("{v:e}");
        vec![
            ("mass_kg", f(self.mass_spec.mass)),
            ("density_kg_per_m3", f(self.mass_spec.density)),
            ("dielectric_constant", f(self.mass_spec.dielectric_constant)),
            ("cm_imag", f(self.mass_spec.cm_imag)),
            ("field_gradient_T_per_m", f(self.drive.field_gradient)),
            ("N", f(self.geometry.separation_multiplier)),
            ("tau_s", f(self.drive.split_time)),
            ("t_int_s", f(self.drive.flight_time)),
            ("dt_s", f(self.drive.time_step)),
            ("n_V_per_m3", f(self.environment.number_density)),
            ("T_ex_K", f(self.environment.external_temperature)),
            ("T_i_K", f(self.environment.internal_temperature)),
            ("plate_length_m", f(self.plate.length)),
            ("plate_thickness_m", f(self.plate.thickness)),
            ("plate_density_kg_per_m3", f(self.plate.density)),
            ("youngs_modulus_Pa", f(self.plate.youngs_modulus)),
            ("u", f(self.placement_uncertainty)),
            ("phase_target_rad", f(self.phase_target)),
            ("m_air_kg", f(self.constants.m_air)),
            ("dephasing_model", self.dephasing.to_string()),
            ("witness", self.witness.label()),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollisionInfo {
    pub time: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport<T> {
    pub radius: T,
    pub a_mag: T,
    pub split_size: T,
    pub center_distance: T,
    pub initial_gap: T,
    pub s_max: T,
    pub tau1: T,
    pub end_gap: T,
    pub recapture_gap: T,
    /// Absent when the run collided.
    pub phase: Option<PhaseBreakdown<T>>,
    pub decoherence: Option<DecoherenceBudget<T>>,
    pub plate: Option<PlateAssessment<T>>,
    pub collision: Option<CollisionInfo>,
    pub recapture_ok: bool,
    pub collision_ok: bool,
    pub phase_ok: bool,
    pub witness_ok: bool,
    /// Φ_eff/2 − Σγ_kΔt
    pub witness_margin: T,
    pub long_wavelength_ok: bool,
    pub plate_ok: bool,
    pub overall: bool,
}

/// A summary field: JSON number or boolean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SummaryValue {
    Number(f64),
    Flag(bool),
}

impl<T: Real> FeasibilityReport<T> {
    /// Flat `(key, value)` record. Quantities that were not computed
    /// because of a collision are omitted.
    pub fn summary(&self) -> Vec<(&'static str, SummaryValue)> {
        use SummaryValue::{Flag, Number};
        let n = |v: T| Number(v.to_f64_lossy());
        let mut out = vec![
            ("radius_m", n(self.radius)),
            ("a_mag_m_per_s2", n(self.a_mag)),
            ("split_size_m", n(self.split_size)),
            ("center_distance_m", n(self.center_distance)),
            ("initial_gap_m", n(self.initial_gap)),
            ("recapture_gap_m", n(self.recapture_gap)),
        ];
        if let Some(c) = self.collision {
            out.push(("collision_time_s", Number(c.time)));
            out.push(("collision_gap_m", Number(c.gap)));
        } else {
            out.push(("s_max_m", n(self.s_max)));
            out.push(("tau1_s", n(self.tau1)));
            out.push(("end_gap_m", n(self.end_gap)));
        }
        if let Some(p) = &self.phase {
            out.extend([
                ("phase_step1_rad", n(p.step1)),
                ("phase_step2_rad", n(p.step2)),
                ("phase_step3_rad", n(p.step3)),
                ("phase_total_rad", n(p.total)),
                ("phase_common_rad", n(p.phi_common)),
                ("dphi_ud_rad", n(p.dphi_ud)),
                ("dphi_du_rad", n(p.dphi_du)),
            ]);
        }
        if let Some(d) = &self.decoherence {
            out.extend([
                ("gamma_air_per_s", n(d.gamma_air)),
                ("lambda_air_per_m2s", n(d.lambda_air)),
                ("lambda_sc_per_m2s", n(d.lambda_sc)),
                ("lambda_a_per_m2s", n(d.lambda_a)),
                ("lambda_e_per_m2s", n(d.lambda_e)),
                ("decoherence_exponent", n(d.exponent)),
                ("pressure_pa", n(d.pressure)),
                ("witness_margin", n(self.witness_margin)),
            ]);
        }
        if let Some(p) = &self.plate {
            out.extend([
                ("imbalance_force_n", n(p.imbalance_force)),
                ("deflection_max_m", n(p.deflection_max)),
                ("plate_frequency_rad_per_s", n(p.frequency)),
                ("ground_spread_m", n(p.ground_spread)),
                ("plate_length_bound_m", n(p.length_bound)),
                ("plate_gravity_m_per_s2", n(p.plate_gravity)),
            ]);
        }
        out.extend([
            ("collision_ok", Flag(self.collision_ok)),
            ("recapture_ok", Flag(self.recapture_ok)),
            ("phase_ok", Flag(self.phase_ok)),
            ("witness_ok", Flag(self.witness_ok)),
            ("long_wavelength_ok", Flag(self.long_wavelength_ok)),
            ("plate_ok", Flag(self.plate_ok)),
            ("overall", Flag(self.overall)),
        ]);
        out
    }
}

/// Runs every check. A collision yields an infeasible report, not an error.
pub fn feasibility<T: Real>(config: &ExperimentConfig<T>) -> Result<FeasibilityReport<T>> {
    config.validate()?;
    let k = &config.constants;
    let spec = &config.mass_spec;
    let radius = spec.radius();
    let a_mag = magnetic_acceleration(k, spec, config.drive.field_gradient);
    let dx = split_size(k, spec, &config.drive);
    let initial_gap = config.geometry.initial_gap(radius);
    let x_min = recapture_gap(k, spec, config.drive.field_gradient)?;
    let nan = T::nan();
    let mut report = FeasibilityReport {
        radius,
        a_mag,
        split_size: dx,
        center_distance: dx + config.geometry.inner_separation(radius),
        initial_gap,
        s_max: nan,
        tau1: nan,
        end_gap: nan,
        recapture_gap: x_min,
        phase: None,
        decoherence: None,
        plate: None,
        collision: None,
        recapture_ok: false,
        collision_ok: false,
        phase_ok: false,
        witness_ok: false,
        witness_margin: nan,
        long_wavelength_ok: false,
        plate_ok: false,
        overall: false,
    };

    let profile = match full_profile(k, spec, &config.geometry, &config.drive) {
        Ok(p) => p,
        Err(Error::Collision { time, gap }) => {
            report.collision = Some(CollisionInfo { time, gap });
            return Ok(report);
        }
        Err(e) => return Err(e),
    };
    report.collision_ok = true;
    report.s_max = profile.s_max;
    report.tau1 = profile.tau1;
    report.end_gap = profile.min_gap();
    report.recapture_ok = report.end_gap >= x_min;

    let phase = total_phase(k, spec.mass, &profile)?;
    report.phase_ok = phase.total >= config.phase_target;
    let budget = accumulated_exponent(k, &config.environment, spec, &profile)?;
    let duration = profile.total_duration();
    let detect = detectability(phase.total, budget.exponent / duration, duration)?;
    report.witness_ok = detect.detectable;
    report.witness_margin = detect.margin;
    report.long_wavelength_ok = budget.long_wavelength_ok;
    let plate = assess(
        k,
        spec,
        &config.plate,
        &profile,
        config.placement_uncertainty,
    )?;
    report.plate_ok = plate.which_path_ok;

    report.phase = Some(phase);
    report.decoherence = Some(budget);
    report.plate = Some(plate);
    report.overall = report.collision_ok
        && report.recapture_ok
        && report.phase_ok
        && report.witness_ok
        && report.long_wavelength_ok
        && report.plate_ok;
    Ok(report)
}

/// Free-fall summary from a single integration pass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FallOutcome<T> {
    pub s_max: T,
    pub end_gap: T,
    pub recapture_gap: T,
    pub step2_phase: T,
}

impl<T: Real> FallOutcome<T> {
    pub fn recapture_ok(&self) -> bool {
        self.end_gap >= self.recapture_gap
    }
}

/// Integrates step 2 and its phase without storing the trajectory.
pub fn evaluate_fall<T: Real>(
    k: &PhysicalConstants<T>,
    spec: &TestMassSpec<T>,
    geom: &GeometrySpec<T>,
    drive: &DriveSpec<T>,
) -> Result<FallOutcome<T>> {
    let radius = spec.radius();
    let nr = geom.inner_separation(radius);
    let dx = split_size(k, spec, drive);
    let outer = T::one() / (T::lit(2.0) * dx + nr);
    let two = T::lit(2.0);
    let integrand = |s: T| T::one() / (nr - two * s) + outer - two / (dx + nr - s);
    let mut sum = T::zero();
    let mut first = T::zero();
    let mut last = T::zero();
    let mut s_max = T::zero();
    let mut count = 0usize;
    let step = integrate_drift(
        k,
        spec,
        geom,
        drive.flight_time,
        drive.time_step,
        |_, s, _| {
            let v = integrand(s);
            if count == 0 {
                first = v;
            }
            last = v;
            sum = sum + v;
            s_max = s;
            count += 1;
        },
    )?;
    let integral = if count > 1 {
        step * (sum - (first + last) * T::lit(0.5))
    } else {
        T::zero()
    };
    Ok(FallOutcome {
        s_max,
        end_gap: geom.initial_gap(radius) - s_max,
        recapture_gap: recapture_gap(k, spec, drive.field_gradient)?,
        step2_phase: k.g_newton * spec.mass * spec.mass / k.hbar * integral,
    })
}

/// Recapture holds, the branch never reaches the plate, and the step-2 phase
/// reaches `phase_target`.
pub fn meets_design_target<T: Real>(
    k: &PhysicalConstants<T>,
    spec: &TestMassSpec<T>,
    geom: &GeometrySpec<T>,
    drive: &DriveSpec<T>,
    phase_target: T,
) -> Result<bool> {
    match evaluate_fall(k, spec, geom, drive) {
        Ok(f) => Ok(f.recapture_ok() && f.step2_phase >= phase_target),
        Err(Error::Collision { .. }) => Ok(false),
        Err(e) => Err(e),
    }
}

fn log_grid<T: Real>(lo: T, hi: T, points: usize) -> Vec<T> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..points)
        .map(|i| (a + (b - a) * T::count(i) / T::count(points - 1)).exp())
        .collect()
}

/// Bisects in log space between a failing `lo` and a passing `hi`.
fn bisect_log<T: Real>(
    mut lo: T,
    mut hi: T,
    rel_tol: T,
    mut pass: impl FnMut(T) -> Result<bool>,
) -> Result<T> {
    while hi / lo - T::one() > rel_tol {
        let mid = (lo * hi).sqrt();
        if pass(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Smallest mass at fixed N that meets [`meets_design_target`].
///
/// The feasible set at fixed N is an interval (light masses violate
/// recapture, heavy ones collide), so the bracket is scanned on a log grid
/// first and the lower edge of the first feasible cell is bisected.
pub fn min_feasible_mass<T: Real>(
    k: &PhysicalConstants<T>,
    template: &TestMassSpec<T>,
    geom: &GeometrySpec<T>,
    drive: &DriveSpec<T>,
    phase_target: T,
) -> Result<T> {
    ensure(phase_target > T::zero(), || {
        Error::Domain("phase target must be positive".into())
    })?;
    let with_mass = |m: T| TestMassSpec {
        mass: m,
        ..*template
    };
    let pass = |m: T| meets_design_target(k, &with_mass(m), geom, drive, phase_target);
    let grid = log_grid(
        T::lit(MASS_BRACKET.0),
        T::lit(MASS_BRACKET.1),
        MASS_SCAN_POINTS,
    );
    let flags = grid
        .par_iter()
        .map(|&m| pass(m))
        .collect::<Result<Vec<bool>>>()?;
    let first = flags
        .iter()
        .position(|&f| f)
        .ok_or_else(|| Error::NoSolution("no feasible mass in [1e-18, 1e-12] kg".into()))?;
    if first == 0 {
        return Ok(grid[0]);
    }
    bisect_log(grid[first - 1], grid[first], T::lit(MASS_REL_TOL), pass)
}

/// N at which the end-of-fall gap equals the recapture gap.
pub fn saturating_separation<T: Real>(
    k: &PhysicalConstants<T>,
    spec: &TestMassSpec<T>,
    plate_thickness: T,
    drive: &DriveSpec<T>,
) -> Result<T> {
    let radius = spec.radius();
    let gap_ok = |n: T| -> Result<bool> {
        match evaluate_fall(k, spec, &GeometrySpec::new(n, plate_thickness), drive) {
            Ok(f) => Ok(f.recapture_ok()),
            Err(Error::Collision { .. }) => Ok(false),
            Err(e) => Err(e),
        }
    };
    let lo = (plate_thickness / radius).max(T::one());
    let mut hi = lo * T::lit(2.0) + T::lit(10.0);
    while !gap_ok(hi)? {
        hi = hi * T::lit(2.0);
        ensure(hi < T::lit(1e8), || {
            Error::NoSolution("no N satisfies the recapture gap".into())
        })?;
    }
    bisect_log(lo, hi, T::lit(N_REL_TOL), gap_ok)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SaturatedDesign<T> {
    pub mass: T,
    pub separation_multiplier: T,
    pub outcome: FallOutcome<T>,
}

/// Step-2 phase when N is chosen so that recapture is exactly saturated.
pub fn saturated_design<T: Real>(
    k: &PhysicalConstants<T>,
    spec: &TestMassSpec<T>,
    plate_thickness: T,
    drive: &DriveSpec<T>,
) -> Result<SaturatedDesign<T>> {
    let n = saturating_separation(k, spec, plate_thickness, drive)?;
    let outcome = evaluate_fall(k, spec, &GeometrySpec::new(n, plate_thickness), drive)?;
    Ok(SaturatedDesign {
        mass: spec.mass,
        separation_multiplier: n,
        outcome,
    })
}

/// Smallest mass whose recapture-saturating design reaches `phase_target`
/// in step 2. N is re-optimized for every trial mass.
pub fn min_saturated_mass<T: Real>(
    k: &PhysicalConstants<T>,
    template: &TestMassSpec<T>,
    plate_thickness: T,
    drive: &DriveSpec<T>,
    phase_target: T,
) -> Result<SaturatedDesign<T>> {
    ensure(phase_target > T::zero(), || {
        Error::Domain("phase target must be positive".into())
    })?;
    let design = |m: T| {
        saturated_design(
            k,
            &TestMassSpec {
                mass: m,
                ..*template
            },
            plate_thickness,
            drive,
        )
    };
    let pass = |m: T| design(m).map(|d| d.outcome.step2_phase >= phase_target);
    let grid = log_grid(
        T::lit(MASS_BRACKET.0),
        T::lit(MASS_BRACKET.1),
        SATURATED_SCAN_POINTS,
    );
    let flags = grid
        .par_iter()
        .map(|&m| pass(m))
        .collect::<Result<Vec<bool>>>()?;
    let first = flags
        .iter()
        .position(|&f| f)
        .ok_or_else(|| Error::NoSolution("phase target unreachable in [1e-18, 1e-12] kg".into()))?;
    if first == 0 {
        return design(grid[0]);
    }
    let (lo, hi) = (grid[first - 1], grid[first]);
    let m = bisect_log(lo, hi, T::lit(MASS_REL_TOL), pass)?;
    design(m)
}

/// One grid point of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow<T> {
    pub params: Vec<T>,
    pub values: Vec<T>,
    pub flag: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult<T> {
    pub axes: Vec<String>,
    pub columns: Vec<String>,
    pub flag_label: Option<String>,
    /// Written as `# key = value` lines above the header.
    pub comments: Vec<(String, String)>,
    pub rows: Vec<SweepRow<T>>,
}

impl<T: Real> SweepResult<T> {
    fn new(
        config: &ExperimentConfig<T>,
        axes: &[&str],
        columns: &[&str],
        flag: Option<&str>,
    ) -> Self {
        Self {
            axes: axes.iter().map(|s| s.to_string()).collect(),
            columns: columns.iter().map(|s| s.to_string()).collect(),
            flag_label: flag.map(str::to_string),
            comments: config
                .describe()
                .into_iter()
                .map(|(k, v)| (k.to_string(), v))
                .collect(),
            rows: Vec::new(),
        }
    }

    pub fn header(&self) -> String {
        let mut cols: Vec<&str> = self
            .axes
            .iter()
            .chain(self.columns.iter())
            .map(String::as_str)
            .collect();
        if let Some(f) = &self.flag_label {
            cols.push(f);
        }
        cols.join(",")
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        for (k, v) in &self.comments {
            writeln!(out, "# {k} = {v}")?;
        }
        writeln!(out, "{}", self.header())?;
        for row in &self.rows {
            let mut fields: Vec<String> = row
                .params
                .iter()
                .chain(row.values.iter())
                .map(|v| format!("{v:.16e}"))
                .collect();
            if let Some(f) = row.flag {
                fields.push(f.to_string());
            }
            writeln!(out, "{}", fields.join(","))?;
        }
        Ok(())
    }
}

/// Sorted, duplicate-free copy of a grid.
fn canonical_grid<T: Real>(values: &[T]) -> Vec<T> {
    let mut v: Vec<T> = values.iter().copied().filter(|x| !x.is_nan()).collect();
    v.sort_by(|a, b| a.partial_cmp(b).expect("NaN filtered"));
    v.dedup();
    v
}

/// Step-2 phase over (N, m) at the drive of `config`.
pub fn sweep_phase_vs_mass<T: Real>(
    config: &ExperimentConfig<T>,
    separations: &[T],
    masses: &[T],
) -> Result<SweepResult<T>> {
    let k = &config.constants;
    let ns = canonical_grid(separations);
    let ms = canonical_grid(masses);
    let points: Vec<(T, T)> = ns
        .iter()
        .flat_map(|&n| ms.iter().map(move |&m| (n, m)))
        .collect();
    let rows = points
        .par_iter()
        .map(|&(n, m)| {
            let spec = TestMassSpec {
                mass: m,
                ..config.mass_spec
            };
            let geom = GeometrySpec::new(n, config.geometry.plate_thickness);
            let x_min = recapture_gap(k, &spec, config.drive.field_gradient)?;
            let (values, flag) = match evaluate_fall(k, &spec, &geom, &config.drive) {
                Ok(f) => (vec![f.step2_phase, f.end_gap, x_min], f.recapture_ok()),
                Err(Error::Collision { .. }) => (vec![T::nan(), T::nan(), x_min], false),
                Err(e) => return Err(e),
            };
            Ok(SweepRow {
                params: vec![n, m],
                values,
                flag: Some(flag),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut result = SweepResult::new(
        config,
        &["N", "mass_kg"],
        &["step2_phase_rad", "end_gap_m", "recapture_gap_m"],
        Some("feasible"),
    );
    result.rows = rows;
    Ok(result)
}

/// Exponent against n_V, one result per external temperature. The budget
/// line is Φ_eff/2 of the configured design.
pub fn sweep_decoherence<T: Real>(
    config: &ExperimentConfig<T>,
    densities: &[T],
    temperatures: &[T],
) -> Result<Vec<SweepResult<T>>> {
    config.validate()?;
    let k = &config.constants;
    let profile = full_profile(k, &config.mass_spec, &config.geometry, &config.drive)?;
    let limit = total_phase(k, config.mass_spec.mass, &profile)?.total * T::lit(0.5);
    let ns = canonical_grid(densities);
    canonical_grid(temperatures)
        .par_iter()
        .map(|&temp| {
            let env = EnvironmentSpec {
                external_temperature: temp,
                ..config.environment
            };
            let mut cfg = config.clone();
            cfg.environment = env;
            let mut result = SweepResult::new(&cfg, &["n_V"], &["exponent", "limit"], Some("pass"));
            result.rows = density_scan(k, &env, &config.mass_spec, &profile, &ns, limit)
                .into_iter()
                .map(|r| SweepRow {
                    params: vec![r.number_density],
                    values: vec![r.exponent, r.limit],
                    flag: Some(r.pass()),
                })
                .collect();
            Ok(result)
        })
        .collect()
}

/// Worst-case plate deflection against the placement fraction u.
pub fn sweep_deflection<T: Real>(
    config: &ExperimentConfig<T>,
    fractions: &[T],
) -> Result<SweepResult<T>> {
    config.validate()?;
    let k = &config.constants;
    let profile = full_profile(k, &config.mass_spec, &config.geometry, &config.drive)?;
    let us = canonical_grid(fractions);
    let rows = us
        .par_iter()
        .map(|&u| {
            let f = max_imbalance_force(k, &config.mass_spec, &profile, u)?;
            Ok(SweepRow {
                params: vec![u],
                values: vec![deflection(f, &config.plate)],
                flag: None,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut result = SweepResult::new(config, &["u"], &["deflection"], None);
    result.rows = rows;
    Ok(result)
}
