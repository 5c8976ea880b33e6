//! Lumped-parameter frontal crash model.
//!
//! The vehicle is an undamped mass on a linear spring struck against a rigid
//! barrier. Only the first quarter cycle matters: it ends at peak
//! deformation, where the closing velocity reaches zero. The failure point
//! (force intercept of the fitted force-deformation line) is a reporting
//! quantity and does not enter the equation of motion.

use std::io::{self, Read, Write};

use thiserror::Error;

use crate::ode::rk4_step;

/// Average crumple-zone stiffness identified for the 2010 Yaris [N/m].
pub const YARIS_STIFFNESS: f64 = 894_300.0;
/// Fitted failure (buckling) point for the 2010 Yaris [N].
pub const YARIS_FAILURE_POINT: f64 = 1_410.0;
/// Area under the fitted force-deformation line [J].
pub const YARIS_FITTED_ENERGY: f64 = 149_200.0;

/// Finite-element reference run (US NCAP, 35 mph into a rigid wall).
pub mod fe_reference {
    pub const MASS: f64 = 1247.0;
    pub const IMPACT_VELOCITY: f64 = 15.6464;
    pub const PEAK_DEFORMATION: f64 = 0.5625;
    pub const COLLISION_ENERGY: f64 = 149_100.0;
    pub const COLLISION_DURATION: f64 = 0.0522;
    pub const DESIGNED_DEFORMATION_LENGTH: f64 = 0.5900;
}

#[derive(Debug, Error)]
pub enum CrashError {
    #[error("crash model parameter `{name}` is invalid: {value}")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error("impact velocity must be positive, got {0}")]
    NonPositiveVelocity(f64),
    #[error("time step must be positive, got {0}")]
    NonPositiveStep(f64),
    #[error("least-squares fit needs at least two samples, got {0}")]
    TooFewSamples(usize),
    #[error("least-squares design matrix is singular: all deformations are equal")]
    Singular,
    #[error("negative deformation {0} in force-deformation data")]
    NegativeDeformation(f64),
    #[error("reference value is zero")]
    ZeroReference,
    #[error("force-deformation CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("force-deformation CSV header must be `deformation_m,force_N`, got `{0}`")]
    Header(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrashModel {
    pub mass: f64,
    pub stiffness: f64,
    pub failure_point: f64,
    /// Add the failure-point rectangle `fp * x_peak` to the collision energy.
    pub include_failure_point_in_energy: bool,
}

impl CrashModel {
    pub fn new(mass: f64, stiffness: f64, failure_point: f64) -> Result<Self, CrashError> {
        let model = Self {
            mass,
            stiffness,
            failure_point,
            include_failure_point_in_energy: false,
        };
        model.validate()?;
        Ok(model)
    }

    /// Yaris stiffness and failure point at the given laden mass.
    pub fn yaris(mass: f64) -> Result<Self, CrashError> {
        Self::new(mass, YARIS_STIFFNESS, YARIS_FAILURE_POINT)
    }

    pub fn with_failure_point_energy(self, include: bool) -> Self {
        Self {
            include_failure_point_in_energy: include,
            ..self
        }
    }

    pub fn validate(&self) -> Result<(), CrashError> {
        if !(self.mass > 0.0 && self.mass.is_finite()) {
            return Err(CrashError::InvalidParameter {
                name: "mass",
                value: self.mass,
            });
        }
        if !(self.stiffness > 0.0 && self.stiffness.is_finite()) {
            return Err(CrashError::InvalidParameter {
                name: "stiffness",
                value: self.stiffness,
            });
        }
        if !(self.failure_point >= 0.0 && self.failure_point.is_finite()) {
            return Err(CrashError::InvalidParameter {
                name: "failure_point",
                value: self.failure_point,
            });
        }
        Ok(())
    }

    /// Natural angular frequency sqrt(k/m) [rad/s].
    pub fn angular_frequency(&self) -> f64 {
        (self.stiffness / self.mass).sqrt()
    }

    /// Peak deformation for an impact at `impact_v`: the quarter-cycle
    /// amplitude `v * sqrt(m/k)`.
    pub fn peak_deformation(&self, impact_v: f64) -> f64 {
        impact_v.max(0.0) * (self.mass / self.stiffness).sqrt()
    }

    /// Time from contact to peak deformation, a quarter of the period.
    pub fn quarter_period(&self) -> f64 {
        std::f64::consts::FRAC_PI_2 / self.angular_frequency()
    }

    /// Energy absorbed up to the given deformation.
    pub fn collision_energy(&self, deformation: f64) -> f64 {
        let spring = 0.5 * self.stiffness * deformation * deformation;
        if self.include_failure_point_in_energy {
            spring + self.failure_point * deformation
        } else {
            spring
        }
    }

    /// Closed-form quarter-cycle outcome, without a time series.
    pub fn outcome(&self, impact_v: f64) -> CrashOutcome {
        let peak = self.peak_deformation(impact_v);
        CrashOutcome {
            peak_deformation: peak,
            collision_duration: self.quarter_period(),
            collision_energy: self.collision_energy(peak),
            peak_acceleration: impact_v * self.angular_frequency(),
            series: Vec::new(),
        }
    }

    /// Integrates `m x'' + k x = 0` from `x = 0`, `x' = impact_v` until the
    /// deformation rate first reaches zero.
    pub fn simulate(&self, impact_v: f64, dt: f64) -> Result<CrashOutcome, CrashError> {
        self.validate()?;
        if !(impact_v > 0.0 && impact_v.is_finite()) {
            return Err(CrashError::NonPositiveVelocity(impact_v));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(CrashError::NonPositiveStep(dt));
        }
        let omega_sq = self.stiffness / self.mass;
        let accel = |x: f64| -omega_sq * x;

        let mut t = 0.0;
        let mut state = [0.0, impact_v];
        let mut series = vec![CrashSample {
            t,
            deformation: 0.0,
            acceleration: 0.0,
        }];
        // the quarter period bounds the loop; the cap guards against misuse
        let max_steps = (4.0 * self.quarter_period() / dt).ceil() as usize + 2;
        for _ in 0..max_steps {
            let next = rk4_step(state, dt, |s| [s[1], accel(s[0])]);
            if next[1] <= 0.0 {
                let frac = state[1] / (state[1] - next[1]);
                let peak = state[0] + frac * (next[0] - state[0]);
                let duration = t + frac * dt;
                series.push(CrashSample {
                    t: duration,
                    deformation: peak,
                    acceleration: accel(peak),
                });
                let peak_acceleration = series
                    .iter()
                    .map(|s| s.acceleration.abs())
                    .fold(0.0, f64::max);
                return Ok(CrashOutcome {
                    peak_deformation: peak,
                    collision_duration: duration,
                    collision_energy: self.collision_energy(peak),
                    peak_acceleration,
                    series,
                });
            }
            t += dt;
            state = next;
            series.push(CrashSample {
                t,
                deformation: state[0],
                acceleration: accel(state[0]),
            });
        }
        unreachable!("an undamped oscillator always reverses within one period")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrashSample {
    pub t: f64,
    pub deformation: f64,
    /// Signed acceleration of the vehicle mass [m/s^2].
    pub acceleration: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrashOutcome {
    pub peak_deformation: f64,
    pub collision_duration: f64,
    pub collision_energy: f64,
    pub peak_acceleration: f64,
    /// Empty for closed-form outcomes.
    pub series: Vec<CrashSample>,
}

/// Kinetic energy `m v^2 / 2`.
pub fn kinetic_energy(mass: f64, v: f64) -> f64 {
    0.5 * mass * v * v
}

/// Per-unit deviation `|(reference - model) / reference|`.
pub fn discrepancy(reference: f64, model: f64) -> Result<f64, CrashError> {
    if reference == 0.0 {
        return Err(CrashError::ZeroReference);
    }
    Ok(((reference - model) / reference).abs())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForceDeformationSample {
    pub deformation: f64,
    pub force: f64,
}

/// Affine force-deformation line `force = failure_point + stiffness * deformation`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub failure_point: f64,
    pub stiffness: f64,
    /// Area under the fitted line across the sampled deformation range.
    pub fitted_energy: f64,
}

impl LineFit {
    pub fn force_at(&self, deformation: f64) -> f64 {
        self.failure_point + self.stiffness * deformation
    }
}

/// Ordinary least squares fit of the affine crumple-zone line.
///
/// Solves the 2x2 normal equations in centred form, which keeps the
/// residuals orthogonal to both regressors to rounding accuracy even when
/// deformations sit far from zero.
pub fn lls_fit(samples: &[ForceDeformationSample]) -> Result<LineFit, CrashError> {
    if samples.len() < 2 {
        return Err(CrashError::TooFewSamples(samples.len()));
    }
    if let Some(bad) = samples.iter().find(|s| s.deformation < 0.0) {
        return Err(CrashError::NegativeDeformation(bad.deformation));
    }
    let n = samples.len() as f64;
    let mean_d = samples.iter().map(|s| s.deformation).sum::<f64>() / n;
    let mean_f = samples.iter().map(|s| s.force).sum::<f64>() / n;
    let (sxx, sxy) = samples.iter().fold((0.0, 0.0), |(sxx, sxy), s| {
        let dd = s.deformation - mean_d;
        (sxx + dd * dd, sxy + dd * (s.force - mean_f))
    });
    let spread = samples
        .iter()
        .map(|s| (s.deformation - mean_d).abs())
        .fold(0.0, f64::max);
    if spread == 0.0 || sxx <= f64::EPSILON * n * mean_d * mean_d {
        return Err(CrashError::Singular);
    }
    let stiffness = sxy / sxx;
    let failure_point = mean_f - stiffness * mean_d;

    let (lo, hi) = samples.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| {
        (lo.min(s.deformation), hi.max(s.deformation))
    });
    let fitted_energy = failure_point * (hi - lo) + 0.5 * stiffness * (hi * hi - lo * lo);
    Ok(LineFit {
        failure_point,
        stiffness,
        fitted_energy,
    })
}

/// Reads force-deformation data with header `deformation_m,force_N`.
pub fn read_force_deformation_csv<R: Read>(
    input: R,
) -> Result<Vec<ForceDeformationSample>, CrashError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let headers = reader.headers()?.clone();
    if headers.len() != 2 || &headers[0] != "deformation_m" || &headers[1] != "force_N" {
        return Err(CrashError::Header(headers.iter().collect::<Vec<_>>().join(",")));
    }
    let mut samples = Vec::new();
    for record in reader.deserialize() {
        let (deformation, force): (f64, f64) = record?;
        if deformation < 0.0 {
            return Err(CrashError::NegativeDeformation(deformation));
        }
        samples.push(ForceDeformationSample { deformation, force });
    }
    Ok(samples)
}

/// Writes a crash series as `t,deformation,acceleration`.
pub fn write_crash_series_csv<W: Write>(mut out: W, series: &[CrashSample]) -> io::Result<()> {
    writeln!(out, "t,deformation,acceleration")?;
    for s in series {
        writeln!(out, "{},{},{}", s.t, s.deformation, s.acceleration)?;
    }
    Ok(())
}
