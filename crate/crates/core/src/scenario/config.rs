//! Scenario configuration.
//!
//! The file is flat `key = value` text. Keys may carry a dotted section
//! prefix (`vehicle.d_max = 5`); lists use brackets. The syntax is
//! TOML, so `[vehicle]` tables work too. Every key is optional and
//! unknown keys are rejected. The schema lives in `docs/config.md`.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use thiserror::Error;
use toml::Value;

use crate::crash::{YARIS_FAILURE_POINT, YARIS_STIFFNESS};
use crate::dynamics::{VehicleParams, DEFAULT_DT, MAX_STEERING_ANGLE};
use crate::ethics::{Policy, TargetKind};
use crate::severity::{DEFORMATION_BOUNDS, PEDESTRIAN_VELOCITY_BOUNDS};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("config syntax error: {0}")]
    Parse(String),
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("config key `{key}` must be {expected}")]
    Type { key: String, expected: &'static str },
    #[error("config key `{key}` is invalid: {reason}")]
    Invalid { key: String, reason: String },
}

impl ConfigError {
    fn invalid(key: &str, reason: impl Into<String>) -> Self {
        Self::Invalid {
            key: key.to_string(),
            reason: reason.into(),
        }
    }
}

/// Which policies to report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PolicySelection {
    Utilitarian,
    Deontological,
    #[default]
    Both,
}

impl PolicySelection {
    pub fn policies(self) -> &'static [Policy] {
        match self {
            Self::Utilitarian => &[Policy::Utilitarian],
            Self::Deontological => &[Policy::Deontological],
            Self::Both => &[Policy::Utilitarian, Policy::Deontological],
        }
    }
}

impl FromStr for PolicySelection {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "utilitarian" => Ok(Self::Utilitarian),
            "deontological" => Ok(Self::Deontological),
            "both" => Ok(Self::Both),
            other => Err(format!(
                "unknown policy `{other}`, expected utilitarian, deontological or both"
            )),
        }
    }
}

impl fmt::Display for PolicySelection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Utilitarian => "utilitarian",
            Self::Deontological => "deontological",
            Self::Both => "both",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrashConstants {
    pub stiffness: f64,
    pub failure_point: f64,
    pub include_failure_point_in_energy: bool,
}

impl Default for CrashConstants {
    fn default() -> Self {
        Self {
            stiffness: YARIS_STIFFNESS,
            failure_point: YARIS_FAILURE_POINT,
            include_failure_point_in_energy: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniverseBounds {
    pub deformation: (f64, f64),
    pub pedestrian_velocity: (f64, f64),
}

impl Default for UniverseBounds {
    fn default() -> Self {
        Self {
            deformation: DEFORMATION_BOUNDS,
            pedestrian_velocity: PEDESTRIAN_VELOCITY_BOUNDS,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub initial_velocities: Vec<f64>,
    pub occupant_counts: Vec<u32>,
    pub pedestrian_counts: Vec<u32>,
    pub base_mass: f64,
    pub occupant_mass: f64,
    /// Distance to the barrier [m].
    pub barrier_distance: f64,
    /// Distance to the pedestrians [m].
    pub pedestrian_distance: f64,
    pub steering_gamma: f64,
    /// Vehicle constants; `mass` is replaced by the laden mass per case.
    pub vehicle: VehicleParams,
    pub crash: CrashConstants,
    pub universes: UniverseBounds,
    pub policy: PolicySelection,
    pub original_course: TargetKind,
    pub dt: f64,
    pub crash_dt: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            initial_velocities: vec![12.0, 16.0, 20.0],
            occupant_counts: vec![0, 1, 2],
            pedestrian_counts: vec![0, 1, 2, 3, 4],
            base_mass: 1247.0,
            occupant_mass: 80.0,
            barrier_distance: 10.0,
            pedestrian_distance: 10.0,
            steering_gamma: 0.15,
            vehicle: VehicleParams::default(),
            crash: CrashConstants::default(),
            universes: UniverseBounds::default(),
            policy: PolicySelection::Both,
            original_course: TargetKind::RigidBarrier,
            dt: DEFAULT_DT,
            crash_dt: 1e-5,
        }
    }
}

impl ScenarioConfig {
    pub fn laden_mass(&self, occupants: u32) -> f64 {
        self.base_mass + self.occupant_mass * f64::from(occupants)
    }

    pub fn vehicle_for(&self, occupants: u32) -> VehicleParams {
        self.vehicle.with_mass(self.laden_mass(occupants))
    }

    /// True when every physical constant matches the shipped defaults, so
    /// published reference tables apply to the results.
    pub fn uses_reference_constants(&self) -> bool {
        let d = Self::default();
        self.base_mass == d.base_mass
            && self.occupant_mass == d.occupant_mass
            && self.barrier_distance == d.barrier_distance
            && self.pedestrian_distance == d.pedestrian_distance
            && self.vehicle.with_mass(d.vehicle.mass) == d.vehicle
            && self.crash == d.crash
            && self.universes == d.universes
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let lists = [
            ("initial_velocities", self.initial_velocities.is_empty()),
            ("occupant_counts", self.occupant_counts.is_empty()),
            ("pedestrian_counts", self.pedestrian_counts.is_empty()),
        ];
        for (key, empty) in lists {
            if empty {
                return Err(ConfigError::invalid(key, "list must not be empty"));
            }
        }

        let positive = [
            ("base_mass", self.base_mass),
            ("occupant_mass", self.occupant_mass),
            ("options.barrier_distance", self.barrier_distance),
            ("options.pedestrian_distance", self.pedestrian_distance),
            ("vehicle.wheelbase", self.vehicle.wheelbase),
            ("vehicle.v_max", self.vehicle.v_max),
            ("vehicle.a_max", self.vehicle.a_max),
            ("vehicle.d_max", self.vehicle.d_max),
            ("vehicle.f_max", self.vehicle.f_max),
            ("vehicle.p_gain", self.vehicle.p_gain),
            ("crash.stiffness", self.crash.stiffness),
            ("simulation.dt", self.dt),
            ("simulation.crash_dt", self.crash_dt),
        ];
        for (key, value) in positive {
            if !(value > 0.0 && value.is_finite()) {
                return Err(ConfigError::invalid(key, format!("must be positive, got {value}")));
            }
        }
        let non_negative = [
            ("vehicle.drag", self.vehicle.drag),
            ("crash.failure_point", self.crash.failure_point),
        ];
        for (key, value) in non_negative {
            if !(value >= 0.0 && value.is_finite()) {
                return Err(ConfigError::invalid(
                    key,
                    format!("must be non-negative, got {value}"),
                ));
            }
        }
        for &v in &self.initial_velocities {
            if !(v > 0.0 && v <= self.vehicle.v_max) {
                return Err(ConfigError::invalid(
                    "initial_velocities",
                    format!("{v} must lie in (0, {}]", self.vehicle.v_max),
                ));
            }
        }
        if !(self.steering_gamma.abs() <= MAX_STEERING_ANGLE) {
            return Err(ConfigError::invalid(
                "steering_gamma",
                format!("|{}| exceeds {MAX_STEERING_ANGLE:.6} rad", self.steering_gamma),
            ));
        }
        let bounds = [
            ("universe.deformation", self.universes.deformation),
            ("universe.velocity", self.universes.pedestrian_velocity),
        ];
        for (key, (lo, hi)) in bounds {
            if !(hi > lo && lo.is_finite() && hi.is_finite()) {
                return Err(ConfigError::invalid(
                    &format!("{key}_upper"),
                    format!("upper bound {hi} must exceed lower bound {lo}"),
                ));
            }
        }
        Ok(())
    }
}

pub fn load_config(path: impl AsRef<Path>) -> Result<ScenarioConfig, ConfigError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_config(&text)
}

fn flatten(prefix: &str, table: &toml::Table, out: &mut Vec<(String, Value)>) {
    for (k, v) in table {
        let key = if prefix.is_empty() {
            k.clone()
        } else {
            format!("{prefix}.{k}")
        };
        match v {
            Value::Table(inner) => flatten(&key, inner, out),
            other => out.push((key, other.clone())),
        }
    }
}

fn as_f64(key: &str, value: &Value) -> Result<f64, ConfigError> {
    match value {
        Value::Float(f) => Ok(*f),
        Value::Integer(i) => Ok(*i as f64),
        _ => Err(ConfigError::Type {
            key: key.to_string(),
            expected: "a number",
        }),
    }
}

fn as_count(key: &str, value: &Value) -> Result<u32, ConfigError> {
    match value {
        Value::Integer(i) => u32::try_from(*i)
            .map_err(|_| ConfigError::invalid(key, format!("count {i} must be a non-negative integer"))),
        _ => Err(ConfigError::Type {
            key: key.to_string(),
            expected: "a list of non-negative integers",
        }),
    }
}

fn as_list<'a>(key: &str, value: &'a Value) -> Result<&'a [Value], ConfigError> {
    match value {
        Value::Array(items) => Ok(items),
        _ => Err(ConfigError::Type {
            key: key.to_string(),
            expected: "a list",
        }),
    }
}

fn as_str<'a>(key: &str, value: &'a Value) -> Result<&'a str, ConfigError> {
    value.as_str().ok_or_else(|| ConfigError::Type {
        key: key.to_string(),
        expected: "a string",
    })
}

pub fn parse_config(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let table: toml::Table = text.parse().map_err(|e: toml::de::Error| {
        ConfigError::Parse(e.message().to_string())
    })?;
    let mut entries = Vec::new();
    flatten("", &table, &mut entries);

    let mut cfg = ScenarioConfig::default();
    let mut shared_distance = None;
    let mut barrier_distance = None;
    let mut pedestrian_distance = None;

    for (key, value) in &entries {
        let key = key.as_str();
        let num = || as_f64(key, value);
        match key {
            "initial_velocities" => {
                cfg.initial_velocities = as_list(key, value)?
                    .iter()
                    .map(|v| as_f64(key, v))
                    .collect::<Result<_, _>>()?;
            }
            "occupant_counts" => {
                cfg.occupant_counts = as_list(key, value)?
                    .iter()
                    .map(|v| as_count(key, v))
                    .collect::<Result<_, _>>()?;
            }
            "pedestrian_counts" => {
                cfg.pedestrian_counts = as_list(key, value)?
                    .iter()
                    .map(|v| as_count(key, v))
                    .collect::<Result<_, _>>()?;
            }
            "base_mass" => cfg.base_mass = num()?,
            "occupant_mass" => cfg.occupant_mass = num()?,
            "target_distance" => shared_distance = Some(num()?),
            "options.barrier_distance" => barrier_distance = Some(num()?),
            "options.pedestrian_distance" => pedestrian_distance = Some(num()?),
            "options.original_course" => {
                cfg.original_course = as_str(key, value)?
                    .parse()
                    .map_err(|e: String| ConfigError::invalid(key, e))?;
            }
            "steering_gamma" => cfg.steering_gamma = num()?,
            "policy" => {
                cfg.policy = as_str(key, value)?
                    .parse()
                    .map_err(|e: String| ConfigError::invalid(key, e))?;
            }
            "vehicle.wheelbase" => cfg.vehicle.wheelbase = num()?,
            "vehicle.drag" => cfg.vehicle.drag = num()?,
            "vehicle.v_max" => cfg.vehicle.v_max = num()?,
            "vehicle.a_max" => cfg.vehicle.a_max = num()?,
            "vehicle.d_max" => cfg.vehicle.d_max = num()?,
            "vehicle.f_max" => cfg.vehicle.f_max = num()?,
            "vehicle.p_gain" => cfg.vehicle.p_gain = num()?,
            "crash.stiffness" => cfg.crash.stiffness = num()?,
            "crash.failure_point" => cfg.crash.failure_point = num()?,
            "crash.include_failure_point_in_energy" => {
                cfg.crash.include_failure_point_in_energy =
                    value.as_bool().ok_or_else(|| ConfigError::Type {
                        key: key.to_string(),
                        expected: "a boolean",
                    })?;
            }
            "universe.deformation_lower" => cfg.universes.deformation.0 = num()?,
            "universe.deformation_upper" => cfg.universes.deformation.1 = num()?,
            "universe.velocity_lower" => cfg.universes.pedestrian_velocity.0 = num()?,
            "universe.velocity_upper" => cfg.universes.pedestrian_velocity.1 = num()?,
            "simulation.dt" => cfg.dt = num()?,
            "simulation.crash_dt" => cfg.crash_dt = num()?,
            other => return Err(ConfigError::UnknownKey(other.to_string())),
        }
    }

    if let Some(d) = shared_distance {
        if !(d > 0.0 && d.is_finite()) {
            return Err(ConfigError::invalid(
                "target_distance",
                format!("must be positive, got {d}"),
            ));
        }
        cfg.barrier_distance = d;
        cfg.pedestrian_distance = d;
    }
    if let Some(d) = barrier_distance {
        cfg.barrier_distance = d;
    }
    if let Some(d) = pedestrian_distance {
        cfg.pedestrian_distance = d;
    }

    cfg.validate()?;
    Ok(cfg)
}
