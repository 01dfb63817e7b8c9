use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use clap::ValueEnum;
use serde_json::{Map, Value};
use thiserror::Error;

use qgem_core::casimir::min_separation_bound;
use qgem_core::decoherence::{
    accumulated_exponent, density_scan, threshold_density, write_density_csv,
};
use qgem_core::designer::{
    feasibility, min_feasible_mass, min_saturated_mass, sweep_decoherence, sweep_deflection,
    sweep_phase_vs_mass, SummaryValue,
};
use qgem_core::kinematics::full_profile;
use qgem_core::phase::{min_mass_for_phase, total_phase};
use qgem_core::plate::{assess, max_length_simplified};
use qgem_core::witness::{
    detectability, entangled_state, witness_root, witness_scan, write_scan_csv,
};
use qgem_core::{DriveSpec, ExperimentConfig, PhaseBreakdown, SweepResult, TrajectoryProfile};

use crate::config::ConfigError;
use crate::manifest::RunManifest;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// All checks for one design.
    Feasibility,
    /// Smallest mass reaching the phase target.
    MinMass,
    /// Branch separation and plate gap against time.
    Trajectory,
    /// Entanglement phase per stage.
    Phase,
    /// Decoherence budget and threshold gas density.
    Decoherence,
    /// Witness expectation against accumulated dephasing.
    WitnessScan,
    /// Plate deflection and which-path check.
    Plate,
    /// Step-2 phase against mass at ∂B = 10⁶ T/m, t_int = 2.5 s.
    Fig3,
    /// Step-2 phase against mass at ∂B = 10⁴ T/m, t_int = 1 s.
    Fig4,
    /// Decoherence exponent against gas density.
    Fig5,
    /// Plate deflection against placement error.
    Fig6,
}

impl Command {
    pub fn name(self) -> String {
        self.to_possible_value()
            .expect("no skipped variants")
            .get_name()
            .to_string()
    }
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Physics(#[from] qgem_core::Error),
    #[error("output error: {0}")]
    Io(#[from] std::io::Error),
}

impl RunError {
    /// 1 when the physics rules the design out, 2 for bad input.
    pub fn exit_code(&self) -> u8 {
        match self {
            RunError::Physics(
                qgem_core::Error::NoSolution(_) | qgem_core::Error::Collision { .. },
            ) => 1,
            _ => 2,
        }
    }
}

pub struct Outcome {
    pub manifest: RunManifest,
    pub summary: String,
    pub feasible: bool,
}

struct Output<'a> {
    dir: &'a Path,
    files: Vec<String>,
    summary: String,
    feasible: bool,
}

impl Output<'_> {
    fn csv(
        &mut self,
        name: &str,
        write: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
    ) -> std::io::Result<()> {
        let mut w = BufWriter::new(File::create(self.dir.join(name))?);
        write(&mut w)?;
        w.flush()?;
        self.files.push(name.into());
        Ok(())
    }

    fn json(&mut self, name: &str, record: Map<String, Value>) -> std::io::Result<()> {
        let text =
            serde_json::to_string_pretty(&Value::Object(record)).map_err(std::io::Error::other)?;
        fs::write(self.dir.join(name), text + "\n")?;
        self.files.push(name.into());
        Ok(())
    }

    fn line(&mut self, label: &str, value: impl std::fmt::Display) {
        let _ = writeln!(self.summary, "{label:<28} {value}");
    }
}

fn num(v: f64) -> Value {
    Value::from(v)
}

fn record<'a>(pairs: impl IntoIterator<Item = (&'a str, Value)>) -> Map<String, Value> {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..points)
        .map(|i| (a + (b - a) * i as f64 / (points - 1) as f64).exp())
        .collect()
}

fn profile(cfg: &ExperimentConfig) -> qgem_core::Result<TrajectoryProfile> {
    full_profile(&cfg.constants, &cfg.mass_spec, &cfg.geometry, &cfg.drive)
}

fn phases(cfg: &ExperimentConfig, p: &TrajectoryProfile) -> qgem_core::Result<PhaseBreakdown> {
    total_phase(&cfg.constants, cfg.mass_spec.mass, p)
}

pub fn run(cmd: Command, cfg: &ExperimentConfig, out_dir: &Path) -> Result<Outcome, RunError> {
    cfg.validate()?;
    fs::create_dir_all(out_dir)?;
    let mut out = Output {
        dir: out_dir,
        files: Vec::new(),
        summary: String::new(),
        feasible: true,
    };
    match cmd {
        Command::Feasibility => run_feasibility(cfg, &mut out)?,
        Command::MinMass => run_min_mass(cfg, &mut out)?,
        Command::Trajectory => run_trajectory(cfg, &mut out)?,
        Command::Phase => run_phase(cfg, &mut out)?,
        Command::Decoherence => run_decoherence(cfg, &mut out)?,
        Command::WitnessScan => run_witness(cfg, &mut out)?,
        Command::Plate => run_plate(cfg, &mut out)?,
        Command::Fig3 => run_mass_figure(
            cfg,
            &mut out,
            "fig3",
            1e6,
            2.5,
            &[40.0, 60.0, 80.0, 100.0, 120.0, 140.0],
        )?,
        Command::Fig4 => run_mass_figure(
            cfg,
            &mut out,
            "fig4",
            1e4,
            1.0,
            &[40.0, 50.0, 57.0, 70.0, 90.0, 110.0],
        )?,
        Command::Fig5 => run_fig5(cfg, &mut out)?,
        Command::Fig6 => run_fig6(cfg, &mut out)?,
    }
    let manifest = RunManifest::new(&cmd.name(), cfg, out.files);
    manifest.write(out_dir)?;
    Ok(Outcome {
        manifest,
        summary: out.summary,
        feasible: out.feasible,
    })
}

fn run_feasibility(cfg: &ExperimentConfig, out: &mut Output) -> Result<(), RunError> {
    let report = feasibility(cfg)?;
    let summary = report.summary();
    let rec = record(summary.iter().map(|&(k, v)| {
        let v = match v {
            SummaryValue::Number(x) => num(x),
            SummaryValue::Flag(b) => Value::Bool(b),
        };
        (k, v)
    }));
    out.json("feasibility.json", rec)?;
    for (k, v) in summary {
        match v {
            SummaryValue::Number(x) => out.line(k, format!("{x:.6e}")),
            SummaryValue::Flag(b) => out.line(k, if b { "pass" } else { "FAIL" }),
        }
    }
    out.feasible = report.overall;
    Ok(())
}

fn run_min_mass(cfg: &ExperimentConfig, out: &mut Output) -> Result<(), RunError> {
    let k = &cfg.constants;
    let target = cfg.phase_target;
    let fixed = min_feasible_mass(k, &cfg.mass_spec, &cfg.geometry, &cfg.drive, target)?;
    let sat = min_saturated_mass(
        k,
        &cfg.mass_spec,
        cfg.geometry.plate_thickness,
        &cfg.drive,
        target,
    )?;
    let bound = min_separation_bound(k, cfg.mass_spec.density, cfg.mass_spec.dielectric_constant)?;
    let unscreened = min_mass_for_phase(
        k,
        target,
        bound,
        cfg.drive.field_gradient,
        cfg.drive.split_time,
        cfg.drive.flight_time,
    )
    .ok();
    out.json(
        "min_mass.json",
        record([
            ("phase_target_rad", num(target)),
            ("N", num(cfg.geometry.separation_multiplier)),
            ("min_mass_fixed_N_kg", num(fixed)),
            ("min_mass_saturated_kg", num(sat.mass)),
            ("saturated_N", num(sat.separation_multiplier)),
            ("saturated_step2_phase_rad", num(sat.outcome.step2_phase)),
            ("unscreened_separation_m", num(bound)),
            (
                "unscreened_min_mass_kg",
                unscreened.map_or(Value::Null, num),
            ),
        ]),
    )?;
    out.line("phase target (rad)", target);
    out.line(
        &format!("min mass at N = {}", cfg.geometry.separation_multiplier),
        format!("{fixed:.4e} kg"),
    );
    out.line("min mass, saturated N", format!("{:.4e} kg", sat.mass));
    out.line("saturating N", format!("{:.2}", sat.separation_multiplier));
    match unscreened {
        Some(m) => out.line("unscreened min mass", format!("{m:.4e} kg")),
        None => out.line("unscreened min mass", "none"),
    }
    Ok(())
}

fn run_trajectory(cfg: &ExperimentConfig, out: &mut Output) -> Result<(), RunError> {
    let p = profile(cfg)?;
    out.csv("trajectory.csv", |w| p.write_csv(w))?;
    out.line("samples", p.times.len());
    out.line("split size (m)", format!("{:.6e}", p.split_size));
    out.line("s_max (m)", format!("{:.6e}", p.s_max));
    out.line("end-of-fall gap (m)", format!("{:.6e}", p.min_gap()));
    out.line("recombination time (s)", format!("{:.6e}", p.tau1));
    out.line("total duration (s)", format!("{:.6e}", p.total_duration()));
    Ok(())
}

fn run_phase(cfg: &ExperimentConfig, out: &mut Output) -> Result<(), RunError> {
    let b = phases(cfg, &profile(cfg)?)?;
    out.json(
        "phase.json",
        record([
            ("step1_rad", num(b.step1)),
            ("step2_rad", num(b.step2)),
            ("step3_rad", num(b.step3)),
            ("total_rad", num(b.total)),
            ("phi_common_rad", num(b.phi_common)),
            ("dphi_ud_rad", num(b.dphi_ud)),
            ("dphi_du_rad", num(b.dphi_du)),
            ("phase_target_rad", num(cfg.phase_target)),
        ]),
    )?;
    for (label, v) in [
        ("step 1", b.step1),
        ("step 2", b.step2),
        ("step 3", b.step3),
        ("total", b.total),
    ] {
        out.line(&format!("{label} phase (rad)"), format!("{v:.6e}"));
    }
    Ok(())
}

fn run_decoherence(cfg: &ExperimentConfig, out: &mut Output) -> Result<(), RunError> {
    let k = &cfg.constants;
    let p = profile(cfg)?;
    let limit = phases(cfg, &p)?.total * 0.5;
    let budget = accumulated_exponent(k, &cfg.environment, &cfg.mass_spec, &p)?;
    let threshold = threshold_density(k, &cfg.environment, &cfg.mass_spec, &p, limit).ok();
    let rows = density_scan(
        k,
        &cfg.environment,
        &cfg.mass_spec,
        &p,
        &log_grid(1e4, 1e10, 61),
        limit,
    );
    out.csv("decoherence.csv", |w| write_density_csv(&rows, w))?;
    out.json(
        "decoherence.json",
        record([
            ("n_V_per_m3", num(cfg.environment.number_density)),
            ("T_ex_K", num(cfg.environment.external_temperature)),
            ("T_i_K", num(cfg.environment.internal_temperature)),
            ("gamma_air_per_s", num(budget.gamma_air)),
            ("lambda_air_per_m2s", num(budget.lambda_air)),
            ("lambda_sc_per_m2s", num(budget.lambda_sc)),
            ("lambda_a_per_m2s", num(budget.lambda_a)),
            ("lambda_e_per_m2s", num(budget.lambda_e)),
            ("exponent", num(budget.exponent)),
            ("limit", num(limit)),
            ("threshold_n_V_per_m3", threshold.map_or(Value::Null, num)),
            ("pressure_pa", num(budget.pressure)),
            (
                "dominant_channel",
                Value::from(budget.dominant_channel.to_string()),
            ),
            (
                "air_dominates",
                Value::Bool(budget.contributions.air_dominates()),
            ),
            ("long_wavelength_ok", Value::Bool(budget.long_wavelength_ok)),
        ]),
    )?;
    out.line("exponent", format!("{:.6e}", budget.exponent));
    out.line("budget (Φ_eff/2)", format!("{limit:.6e}"));
    match threshold {
        Some(n) => out.line("threshold n_V (m^-3)", format!("{n:.4e}")),
        None => out.line("threshold n_V (m^-3)", "none"),
    }
    out.line("pressure (Pa)", format!("{:.4e}", budget.pressure));
    out.line("dominant channel", budget.dominant_channel);
    out.feasible = budget.exponent < limit;
    Ok(())
}

fn run_witness(cfg: &ExperimentConfig, out: &mut Output) -> Result<(), RunError> {
    let b = phases(cfg, &profile(cfg)?)?;
    let state = entangled_state(b.dphi_ud, b.dphi_du);
    let grid: Vec<f64> = (0..=100).map(|i| b.total * i as f64 / 100.0).collect();
    let rows = witness_scan(&state, &grid, cfg.dephasing, &cfg.witness)?;
    out.csv("witness_scan.csv", |w| write_scan_csv(&rows, w))?;
    let analytic = detectability(b.total, 0.0, 1.0)?.threshold;
    let root = witness_root(b.dphi_ud, b.dphi_du, cfg.dephasing, &cfg.witness).ok();
    out.json(
        "witness.json",
        record([
            ("phi_eff_rad", num(b.total)),
            ("analytic_threshold_gamma_t", num(analytic)),
            ("numeric_root_gamma_t", root.map_or(Value::Null, num)),
            ("dephasing_model", Value::from(cfg.dephasing.to_string())),
            ("witness", Value::from(cfg.witness.label())),
        ]),
    )?;
    out.line("Φ_eff (rad)", format!("{:.6e}", b.total));
    out.line("analytic γt threshold", format!("{analytic:.6e}"));
    match root {
        Some(r) => out.line("Tr(Wρ) = 0 at γt", format!("{r:.6e}")),
        None => out.line("Tr(Wρ) = 0 at γt", "not witnessed"),
    }
    Ok(())
}

fn run_plate(cfg: &ExperimentConfig, out: &mut Output) -> Result<(), RunError> {
    let k = &cfg.constants;
    let p = profile(cfg)?;
    let a = assess(k, &cfg.mass_spec, &cfg.plate, &p, cfg.placement_uncertainty)?;
    let simplified = max_length_simplified(k, &cfg.plate, a.imbalance_force);
    out.json(
        "plate.json",
        record([
            ("u", num(cfg.placement_uncertainty)),
            ("imbalance_force_n", num(a.imbalance_force)),
            ("deflection_max_m", num(a.deflection_max)),
            ("frequency_rad_per_s", num(a.frequency)),
            ("ground_spread_m", num(a.ground_spread)),
            ("which_path_ok", Value::Bool(a.which_path_ok)),
            ("length_bound_m", num(a.length_bound)),
            ("length_bound_simplified_m", num(simplified)),
            ("plate_gravity_m_per_s2", num(a.plate_gravity)),
        ]),
    )?;
    out.line("imbalance force (N)", format!("{:.4e}", a.imbalance_force));
    out.line("max deflection (m)", format!("{:.4e}", a.deflection_max));
    out.line(
        "ground-state spread (m)",
        format!("{:.4e}", a.ground_spread),
    );
    out.line("length bound (m)", format!("{:.4e}", a.length_bound));
    out.line("plate gravity (m/s^2)", format!("{:.4e}", a.plate_gravity));
    out.feasible = a.which_path_ok;
    Ok(())
}

fn write_sweep(out: &mut Output, name: &str, sweep: &SweepResult) -> std::io::Result<()> {
    out.csv(name, |w| sweep.write_csv(w))
}

fn run_mass_figure(
    cfg: &ExperimentConfig,
    out: &mut Output,
    name: &str,
    field_gradient: f64,
    flight_time: f64,
    separations: &[f64],
) -> Result<(), RunError> {
    let mut fig = cfg.clone();
    fig.drive = DriveSpec {
        field_gradient,
        flight_time,
        ..cfg.drive
    };
    let sweep = sweep_phase_vs_mass(&fig, separations, &log_grid(1e-17, 1e-14, 31))?;
    write_sweep(out, &format!("{name}.csv"), &sweep)?;
    out.line("field gradient (T/m)", field_gradient);
    out.line("flight time (s)", flight_time);
    for n in separations {
        let lowest = sweep
            .rows
            .iter()
            .find(|r| r.params[0] == *n && r.flag == Some(true))
            .map(|r| (r.params[1], r.values[0]));
        match lowest {
            Some((m, phi)) => out.line(
                &format!("N = {n}: lowest mass"),
                format!("{m:.3e} kg, Φ = {phi:.3e}"),
            ),
            None => out.line(&format!("N = {n}: lowest mass"), "none"),
        }
    }
    Ok(())
}

fn run_fig5(cfg: &ExperimentConfig, out: &mut Output) -> Result<(), RunError> {
    let mut temps = vec![1.0, 2.0, 4.0, cfg.environment.external_temperature];
    temps.sort_by(f64::total_cmp);
    temps.dedup();
    let sweeps = sweep_decoherence(cfg, &log_grid(1e4, 1e10, 61), &temps)?;
    for (t, s) in temps.iter().zip(&sweeps) {
        write_sweep(out, &format!("fig5_T{t}K.csv"), s)?;
        let crossing = s
            .rows
            .iter()
            .find(|r| r.flag == Some(false))
            .map(|r| r.params[0]);
        match crossing {
            Some(n) => out.line(
                &format!("T_ex = {t} K: first failing n_V"),
                format!("{n:.3e}"),
            ),
            None => out.line(&format!("T_ex = {t} K: first failing n_V"), "none"),
        }
    }
    Ok(())
}

fn run_fig6(cfg: &ExperimentConfig, out: &mut Output) -> Result<(), RunError> {
    let us: Vec<f64> = (0..=50).map(|i| i as f64 * 0.01).collect();
    let sweep = sweep_deflection(cfg, &us)?;
    write_sweep(out, "fig6.csv", &sweep)?;
    let last = sweep.rows.last().map_or(f64::NAN, |r| r.values[0]);
    out.line("deflection at u = 0.5 (m)", format!("{last:.4e}"));
    Ok(())
}
