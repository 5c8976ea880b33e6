//! Collision-outcome prediction and path selection for an autonomous vehicle
//! facing an unavoidable collision.
//!
//! The pipeline runs in four stages:
//!
//! * [`dynamics`] brakes the vehicle towards each target and reports the
//!   impact velocity (kinematic bicycle + saturated proportional velocity
//!   control).
//! * [`crash`] turns a barrier impact into a peak crumple-zone deformation
//!   with an undamped lumped mass-spring model.
//! * [`severity`] maps deformation and pedestrian impact velocity onto five
//!   triangular fuzzy severity sets.
//! * [`ethics`] weights the memberships with factorial-squared weights and
//!   picks a path under a utilitarian or deontological policy.
//!
//! [`scenario`] wires the stages together, sweeps configurations and writes
//! CSV reports.

pub mod crash;
pub mod dynamics;
pub mod ethics;
pub mod format;
mod ode;
pub mod scenario;
pub mod severity;

pub use crash::{CrashModel, CrashOutcome, ForceDeformationSample, LineFit};
pub use dynamics::{ImpactResult, KinematicState, LongitudinalState, VehicleParams};
pub use ethics::{CollisionOption, Decision, Policy, TargetKind};
pub use scenario::{ScenarioConfig, ScenarioReport};
pub use severity::{FuzzyUniverse, MembershipResult, SeveritySet};
