//! Flat `key = value` experiment files.
//!
//! Blank lines and `#` comments are ignored. Every key is optional and
//! defaults to the flagship design. Unit-suffixed aliases (`tau_ms`,
//! `plate_length_mm`, `plate_thickness_um`) may be used instead of the SI key
//! but not together with it.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use qgem_core::constants::preset;
use qgem_core::{DephasingModel, ExperimentConfig, PlateSpec, TestMassSpec, WitnessOperator};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: `{key}` already set on line {first}")]
    Duplicate {
        line: usize,
        key: String,
        first: usize,
    },
    #[error("line {line}: bad value for `{key}`: {message}")]
    Value {
        line: usize,
        key: String,
        message: String,
    },
    #[error("invalid `{key}`: {message}")]
    Invariant { key: String, message: String },
}

type Result<T> = std::result::Result<T, ConfigError>;

#[derive(Clone, Copy, PartialEq)]
enum Kind {
    Number,
    Text,
}

/// Accepted keys, their SI equivalent and the factor to SI units.
#[rustfmt::skip]
const KEYS: &[(&str, &str, f64, Kind)] = &[
    ("mass_kg", "mass_kg", 1.0, Kind::Number),
    ("material", "material", 1.0, Kind::Text),
    ("density_kg_per_m3", "density_kg_per_m3", 1.0, Kind::Number),
    ("dielectric_constant", "dielectric_constant", 1.0, Kind::Number),
    ("cm_imag", "cm_imag", 1.0, Kind::Number),
    ("field_gradient_T_per_m", "field_gradient_T_per_m", 1.0, Kind::Number),
    ("N", "N", 1.0, Kind::Number),
    ("tau_s", "tau_s", 1.0, Kind::Number),
    ("tau_ms", "tau_s", 1e-3, Kind::Number),
    ("t_int_s", "t_int_s", 1.0, Kind::Number),
    ("dt_s", "dt_s", 1.0, Kind::Number),
    ("n_V_per_m3", "n_V_per_m3", 1.0, Kind::Number),
    ("T_ex_K", "T_ex_K", 1.0, Kind::Number),
    ("T_i_K", "T_i_K", 1.0, Kind::Number),
    ("plate_material", "plate_material", 1.0, Kind::Text),
    ("plate_length_m", "plate_length_m", 1.0, Kind::Number),
    ("plate_length_mm", "plate_length_m", 1e-3, Kind::Number),
    ("plate_thickness_m", "plate_thickness_m", 1.0, Kind::Number),
    ("plate_thickness_um", "plate_thickness_m", 1e-6, Kind::Number),
    ("plate_density_kg_per_m3", "plate_density_kg_per_m3", 1.0, Kind::Number),
    ("youngs_modulus_Pa", "youngs_modulus_Pa", 1.0, Kind::Number),
    ("u", "u", 1.0, Kind::Number),
    ("phase_target_rad", "phase_target_rad", 1.0, Kind::Number),
    ("m_air_kg", "m_air_kg", 1.0, Kind::Number),
    ("dephasing_model", "dephasing_model", 1.0, Kind::Text),
    ("witness", "witness", 1.0, Kind::Text),
];

/// Keys allowed to be zero rather than strictly positive.
const NON_NEGATIVE: [&str; 2] = ["cm_imag", "u"];

#[derive(Debug, Clone)]
enum Value {
    Number(f64),
    Text(String),
}

#[derive(Debug, Clone)]
struct Entry {
    /// Key as written in the file.
    key: String,
    line: usize,
    value: Value,
}

struct Entries(HashMap<&'static str, Entry>);

impl Entries {
    fn number(&self, canon: &str) -> Option<f64> {
        match self.0.get(canon) {
            Some(Entry {
                value: Value::Number(v),
                ..
            }) => Some(*v),
            _ => None,
        }
    }

    fn text(&self, canon: &str) -> Option<&Entry> {
        self.0
            .get(canon)
            .filter(|e| matches!(e.value, Value::Text(_)))
    }

    /// Key as the user wrote it, falling back to the SI name.
    fn name(&self, canon: &str) -> String {
        self.0
            .get(canon)
            .map_or_else(|| canon.to_string(), |e| e.key.clone())
    }

    fn invariant(&self, canon: &str, message: impl ToString) -> ConfigError {
        ConfigError::Invariant {
            key: self.name(canon),
            message: message.to_string(),
        }
    }
}

fn parse_entries(text: &str) -> Result<Entries> {
    let mut map: HashMap<&'static str, Entry> = HashMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let (key, value) = body.split_once('=').ok_or_else(|| ConfigError::Syntax {
            line,
            message: format!("expected `key = value`, found `{body}`"),
        })?;
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() || value.is_empty() {
            return Err(ConfigError::Syntax {
                line,
                message: "empty key or value".into(),
            });
        }
        let &(_, canon, scale, kind) =
            KEYS.iter()
                .find(|(k, ..)| *k == key)
                .ok_or_else(|| ConfigError::UnknownKey {
                    line,
                    key: key.into(),
                })?;
        if let Some(prev) = map.get(canon) {
            return Err(ConfigError::Duplicate {
                line,
                key: key.into(),
                first: prev.line,
            });
        }
        let value = match kind {
            Kind::Text => Value::Text(value.to_string()),
            Kind::Number => {
                let v = f64::from_str(value).map_err(|e| ConfigError::Value {
                    line,
                    key: key.into(),
                    message: e.to_string(),
                })?;
                if !v.is_finite() {
                    return Err(ConfigError::Value {
                        line,
                        key: key.into(),
                        message: "must be finite".into(),
                    });
                }
                Value::Number(v * scale)
            }
        };
        map.insert(
            canon,
            Entry {
                key: key.into(),
                line,
                value,
            },
        );
    }
    Ok(Entries(map))
}

fn text_value(e: &Entry) -> &str {
    match &e.value {
        Value::Text(s) => s,
        Value::Number(_) => unreachable!("text keys hold text"),
    }
}

fn build(entries: &Entries) -> Result<ExperimentConfig> {
    for (canon, v) in entries
        .0
        .keys()
        .filter_map(|c| entries.number(c).map(|v| (*c, v)))
    {
        let ok = if NON_NEGATIVE.contains(&canon) {
            v >= 0.0
        } else {
            v > 0.0
        };
        if !ok {
            return Err(entries.invariant(canon, "must be positive"));
        }
    }

    let mut cfg = ExperimentConfig::flagship();
    let value_err = |e: &Entry, message: String| ConfigError::Value {
        line: e.line,
        key: e.key.clone(),
        message,
    };

    if let Some(e) = entries.text("material") {
        let p = preset::<f64>(text_value(e)).map_err(|err| value_err(e, err.to_string()))?;
        let eps = p
            .dielectric_constant()
            .ok_or_else(|| value_err(e, format!("`{}` is not a test-mass material", p.name)))?;
        cfg.mass_spec = TestMassSpec {
            density: p.density,
            dielectric_constant: eps,
            ..cfg.mass_spec
        };
    }
    if let Some(e) = entries.text("plate_material") {
        let p = preset::<f64>(text_value(e)).map_err(|err| value_err(e, err.to_string()))?;
        let modulus = p
            .youngs_modulus()
            .ok_or_else(|| value_err(e, format!("`{}` is not a plate material", p.name)))?;
        cfg.plate = PlateSpec {
            density: p.density,
            youngs_modulus: modulus,
            ..cfg.plate
        };
    }
    if let Some(e) = entries.text("dephasing_model") {
        cfg.dephasing =
            DephasingModel::from_str(text_value(e)).map_err(|err| value_err(e, err.to_string()))?;
    }
    if let Some(e) = entries.text("witness") {
        cfg.witness =
            WitnessOperator::parse(text_value(e)).map_err(|err| value_err(e, err.to_string()))?;
    }

    let set = |canon: &str, field: &mut f64| {
        if let Some(v) = entries.number(canon) {
            *field = v;
        }
    };
    set("mass_kg", &mut cfg.mass_spec.mass);
    set("density_kg_per_m3", &mut cfg.mass_spec.density);
    set(
        "dielectric_constant",
        &mut cfg.mass_spec.dielectric_constant,
    );
    set("cm_imag", &mut cfg.mass_spec.cm_imag);
    set("field_gradient_T_per_m", &mut cfg.drive.field_gradient);
    set("N", &mut cfg.geometry.separation_multiplier);
    set("tau_s", &mut cfg.drive.split_time);
    set("t_int_s", &mut cfg.drive.flight_time);
    set("dt_s", &mut cfg.drive.time_step);
    set("n_V_per_m3", &mut cfg.environment.number_density);
    set("T_ex_K", &mut cfg.environment.external_temperature);
    set("T_i_K", &mut cfg.environment.internal_temperature);
    set("plate_length_m", &mut cfg.plate.length);
    set("plate_thickness_m", &mut cfg.plate.thickness);
    set("plate_density_kg_per_m3", &mut cfg.plate.density);
    set("youngs_modulus_Pa", &mut cfg.plate.youngs_modulus);
    set("u", &mut cfg.placement_uncertainty);
    set("phase_target_rad", &mut cfg.phase_target);
    set("m_air_kg", &mut cfg.constants.m_air);
    cfg.geometry.plate_thickness = cfg.plate.thickness;

    check(entries, &cfg)?;
    Ok(cfg)
}

/// Component invariants, each reported against the key that controls it.
fn check(entries: &Entries, cfg: &ExperimentConfig) -> Result<()> {
    let spec = &cfg.mass_spec;
    if spec.dielectric_constant < 1.0 {
        return Err(entries.invariant("dielectric_constant", "must be at least 1"));
    }
    cfg.geometry
        .validate(spec.radius())
        .map_err(|e| entries.invariant("N", e))?;
    cfg.drive
        .validate()
        .map_err(|e| entries.invariant("dt_s", e))?;
    cfg.plate
        .validate()
        .map_err(|e| entries.invariant("plate_length_m", e))?;
    if cfg.placement_uncertainty > 0.5 {
        return Err(entries.invariant("u", "must not exceed 0.5"));
    }
    cfg.validate().map_err(|e| ConfigError::Invariant {
        key: "config".into(),
        message: e.to_string(),
    })
}

pub fn parse_str(text: &str) -> Result<ExperimentConfig> {
    build(&parse_entries(text)?)
}

pub fn parse_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_str(&text)
}

/// Canonical text form: every key in SI units, fixed order.
pub fn render(cfg: &ExperimentConfig) -> String {
    let mut out = String::new();
    for (k, v) in cfg.describe() {
        let _ = writeln!(out, "{k} = {v}");
    }
    out
}
