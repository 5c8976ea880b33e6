//! Planar vehicle motion and emergency braking.
//!
//! Lateral motion follows the kinematic bicycle model; longitudinal motion is
//! a mass with linear drag driven by a saturated proportional velocity
//! controller. Everything is integrated with fixed-step RK4.

use std::io::{self, Write};

use thiserror::Error;

use crate::ode::rk4_step;

/// Largest steering angle the model accepts (10 degrees).
pub const MAX_STEERING_ANGLE: f64 = 10.0 * std::f64::consts::PI / 180.0;

/// Width of one road lane in metres.
pub const LANE_WIDTH: f64 = 3.5;

/// Default integration step in seconds.
pub const DEFAULT_DT: f64 = 1e-3;

/// Below this speed the vehicle counts as stopped.
pub const STOP_VELOCITY: f64 = 1e-6;

const MAX_STEPS: usize = 50_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("steering angle {gamma} rad exceeds the {MAX_STEERING_ANGLE:.6} rad limit")]
    SteeringAngle { gamma: f64 },
    #[error("time step must be positive, got {dt}")]
    NonPositiveStep { dt: f64 },
    #[error("vehicle parameter `{name}` is invalid: {value}")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error("initial velocity {v0} m/s must lie in (0, {v_max}]")]
    InitialVelocity { v0: f64, v_max: f64 },
    #[error("target distance must be positive, got {distance}")]
    NonPositiveDistance { distance: f64 },
    #[error("braking profile is empty")]
    EmptyProfile,
    #[error("simulation did not terminate within {MAX_STEPS} steps")]
    StepLimit,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VehicleParams {
    /// Front-to-rear axle distance [m].
    pub wheelbase: f64,
    /// Laden mass [kg].
    pub mass: f64,
    /// Combined rolling resistance and aerodynamic drag [N s/m].
    pub drag: f64,
    /// Maximum velocity [m/s].
    pub v_max: f64,
    /// Maximum acceleration [m/s^2].
    pub a_max: f64,
    /// Maximum deceleration, as a positive magnitude [m/s^2].
    pub d_max: f64,
    /// Force produced at full control input [N].
    pub f_max: f64,
    /// Proportional velocity-control gain.
    pub p_gain: f64,
}

impl Default for VehicleParams {
    /// The 2010 Toyota Yaris sedan with two 80 kg occupants.
    fn default() -> Self {
        Self {
            wheelbase: 2.55,
            mass: 1407.0,
            drag: 140.0,
            v_max: 47.8,
            a_max: 8.5,
            d_max: 5.0,
            f_max: 10_600.0,
            p_gain: 70.0,
        }
    }
}

impl VehicleParams {
    pub fn with_mass(self, mass: f64) -> Self {
        Self { mass, ..self }
    }

    pub fn validate(&self) -> Result<(), DynamicsError> {
        let positive = [
            ("wheelbase", self.wheelbase),
            ("mass", self.mass),
            ("v_max", self.v_max),
            ("a_max", self.a_max),
            ("d_max", self.d_max),
            ("f_max", self.f_max),
            ("p_gain", self.p_gain),
        ];
        for (name, value) in positive {
            if !(value > 0.0 && value.is_finite()) {
                return Err(DynamicsError::InvalidParameter { name, value });
            }
        }
        if !(self.drag >= 0.0 && self.drag.is_finite()) {
            return Err(DynamicsError::InvalidParameter {
                name: "drag",
                value: self.drag,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct KinematicState {
    pub x: f64,
    pub y: f64,
    pub heading: f64,
    pub t: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LongitudinalState {
    pub x: f64,
    pub v: f64,
    pub t: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImpactResult {
    /// Speed at the target, zero when the vehicle stopped short of it.
    pub impact_velocity: f64,
    /// Time of impact, or of coming to rest.
    pub impact_time: f64,
    pub stopped_before_target: bool,
    /// Braking history; the last sample is the impact (or rest) state.
    pub series: Vec<LongitudinalState>,
}

fn check_steering(gamma: f64) -> Result<(), DynamicsError> {
    if gamma.abs() > MAX_STEERING_ANGLE || gamma.is_nan() {
        Err(DynamicsError::SteeringAngle { gamma })
    } else {
        Ok(())
    }
}

fn check_dt(dt: f64) -> Result<(), DynamicsError> {
    if dt > 0.0 && dt.is_finite() {
        Ok(())
    } else {
        Err(DynamicsError::NonPositiveStep { dt })
    }
}

/// Advances the kinematic bicycle model by one step at constant speed and
/// steering angle.
pub fn kinematic_step(
    state: KinematicState,
    v: f64,
    gamma: f64,
    wheelbase: f64,
    dt: f64,
) -> Result<KinematicState, DynamicsError> {
    check_steering(gamma)?;
    check_dt(dt)?;
    let yaw_rate = v / wheelbase * gamma.tan();
    let [x, y, heading] = rk4_step([state.x, state.y, state.heading], dt, |s| {
        let (sin, cos) = s[2].sin_cos();
        [v * cos, v * sin, yaw_rate]
    });
    Ok(KinematicState {
        x,
        y,
        heading,
        t: state.t + dt,
    })
}

/// Acceleration produced by the saturated velocity controller at speed `v`.
///
/// The control signal is clamped to [-1, 1] and scales the full actuator
/// force; drag is subtracted and the result is clamped to the acceleration
/// envelope.
pub fn commanded_acceleration(v: f64, v_ref: f64, params: &VehicleParams) -> f64 {
    let control = (params.p_gain * (v_ref - v)).clamp(-1.0, 1.0);
    let force = control * params.f_max;
    let accel = (force - params.drag * v) / params.mass;
    accel.clamp(-params.d_max, params.a_max)
}

pub fn longitudinal_step(
    state: LongitudinalState,
    v_ref: f64,
    params: &VehicleParams,
    dt: f64,
) -> Result<LongitudinalState, DynamicsError> {
    check_dt(dt)?;
    let v_max = params.v_max;
    let [x, v] = rk4_step([state.x, state.v], dt, |s| {
        let v = s[1].clamp(0.0, v_max);
        [v, commanded_acceleration(v, v_ref, params)]
    });
    Ok(LongitudinalState {
        x,
        v: v.clamp(0.0, v_max),
        t: state.t + dt,
    })
}

/// Emergency braking (reference velocity zero) from `v0` towards a target
/// `d_target` metres ahead.
pub fn brake_to_target(
    params: &VehicleParams,
    v0: f64,
    d_target: f64,
    dt: f64,
) -> Result<ImpactResult, DynamicsError> {
    params.validate()?;
    check_dt(dt)?;
    if !(v0 > 0.0 && v0 <= params.v_max) {
        return Err(DynamicsError::InitialVelocity {
            v0,
            v_max: params.v_max,
        });
    }
    if !(d_target > 0.0 && d_target.is_finite()) {
        return Err(DynamicsError::NonPositiveDistance { distance: d_target });
    }

    let mut state = LongitudinalState { x: 0.0, v: v0, t: 0.0 };
    let mut series = vec![state];
    for _ in 0..MAX_STEPS {
        let next = longitudinal_step(state, 0.0, params, dt)?;
        if next.x >= d_target {
            let frac = (d_target - state.x) / (next.x - state.x);
            let impact = LongitudinalState {
                x: d_target,
                v: state.v + frac * (next.v - state.v),
                t: state.t + frac * dt,
            };
            series.push(impact);
            return Ok(ImpactResult {
                impact_velocity: impact.v,
                impact_time: impact.t,
                stopped_before_target: false,
                series,
            });
        }
        series.push(next);
        state = next;
        if state.v <= STOP_VELOCITY {
            return Ok(ImpactResult {
                impact_velocity: 0.0,
                impact_time: state.t,
                stopped_before_target: true,
                series,
            });
        }
    }
    Err(DynamicsError::StepLimit)
}

/// Impact speed after braking at a constant `a_dec` over `d` metres.
pub fn closed_form_impact_velocity(v0: f64, a_dec: f64, d: f64) -> f64 {
    (v0 * v0 - 2.0 * a_dec * d).max(0.0).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathSample {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub heading: f64,
    pub v: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SteeringPath {
    pub samples: Vec<PathSample>,
    /// True when the vehicle left its lane before reaching the target.
    pub lane_clearance: bool,
}

impl SteeringPath {
    /// Lateral offset of the last sample.
    pub fn final_lateral_offset(&self) -> f64 {
        self.samples.last().map_or(0.0, |s| s.y)
    }
}

/// Drives the bicycle model along the braking speed profile with a constant
/// steering angle until `x` reaches `d_target`.
///
/// The braking series measures distance along a straight line; a curved path
/// covers less ground in `x`, so once the series runs out braking continues
/// with the longitudinal model at step `dt`.
pub fn steering_trajectory(
    params: &VehicleParams,
    braking: &ImpactResult,
    gamma: f64,
    d_target: f64,
    dt: f64,
) -> Result<SteeringPath, DynamicsError> {
    check_steering(gamma)?;
    check_dt(dt)?;
    let first = braking.series.first().ok_or(DynamicsError::EmptyProfile)?;

    let mut pose = KinematicState {
        t: first.t,
        ..KinematicState::default()
    };
    let mut samples = vec![PathSample {
        t: pose.t,
        x: 0.0,
        y: 0.0,
        heading: 0.0,
        v: first.v,
    }];
    let mut lane_clearance = false;

    // Returns true once the target has been reached.
    let advance = |pose: &mut KinematicState,
                   v_start: f64,
                   v_end: f64,
                   h: f64,
                   samples: &mut Vec<PathSample>,
                   lane_clearance: &mut bool|
     -> Result<bool, DynamicsError> {
        if h <= 0.0 {
            return Ok(false);
        }
        // mean speed gives the exact arc length for a linear profile
        let next = kinematic_step(*pose, 0.5 * (v_start + v_end), gamma, params.wheelbase, h)?;
        if next.x >= d_target {
            let frac = if next.x > pose.x {
                (d_target - pose.x) / (next.x - pose.x)
            } else {
                1.0
            };
            let lerp = |a: f64, b: f64| a + frac * (b - a);
            samples.push(PathSample {
                t: lerp(pose.t, next.t),
                x: d_target,
                y: lerp(pose.y, next.y),
                heading: lerp(pose.heading, next.heading),
                v: lerp(v_start, v_end),
            });
            return Ok(true);
        }
        if next.y.abs() >= LANE_WIDTH {
            *lane_clearance = true;
        }
        *pose = next;
        samples.push(PathSample {
            t: next.t,
            x: next.x,
            y: next.y,
            heading: next.heading,
            v: v_end,
        });
        Ok(false)
    };

    for pair in braking.series.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        if advance(&mut pose, a.v, b.v, b.t - a.t, &mut samples, &mut lane_clearance)? {
            return Ok(SteeringPath {
                samples,
                lane_clearance,
            });
        }
    }

    let last = *braking.series.last().ok_or(DynamicsError::EmptyProfile)?;
    let mut longitudinal = last;
    let mut steps = 0;
    while longitudinal.v > STOP_VELOCITY {
        let next = longitudinal_step(longitudinal, 0.0, params, dt)?;
        if advance(
            &mut pose,
            longitudinal.v,
            next.v,
            dt,
            &mut samples,
            &mut lane_clearance,
        )? {
            break;
        }
        longitudinal = next;
        steps += 1;
        if steps > MAX_STEPS {
            return Err(DynamicsError::StepLimit);
        }
    }
    Ok(SteeringPath {
        samples,
        lane_clearance,
    })
}

/// Writes a braking series as `t,x,v`.
pub fn write_braking_csv<W: Write>(mut out: W, series: &[LongitudinalState]) -> io::Result<()> {
    writeln!(out, "t,x,v")?;
    for s in series {
        writeln!(out, "{},{},{}", s.t, s.x, s.v)?;
    }
    Ok(())
}

/// Writes a planar trajectory as `t,x,y,theta,v`.
pub fn write_trajectory_csv<W: Write>(mut out: W, samples: &[PathSample]) -> io::Result<()> {
    writeln!(out, "t,x,y,theta,v")?;
    for s in samples {
        writeln!(out, "{},{},{},{},{}", s.t, s.x, s.y, s.heading, s.v)?;
    }
    Ok(())
}
