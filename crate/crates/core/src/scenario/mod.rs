//! End-to-end pipeline: braking, crash, severity and decision for each case
//! of a sweep over initial velocity, occupants and pedestrians.

mod config;
pub mod reference;
mod report;

use rayon::prelude::*;
use thiserror::Error;

use crate::crash::{CrashError, CrashModel};
use crate::dynamics::{brake_to_target, DynamicsError, ImpactResult};
use crate::ethics::{decide, CollisionOption, Decision, EthicsError, Policy, TargetKind};
use crate::severity::{FuzzyUniverse, MembershipResult, UniverseError};

pub use config::{
    load_config, parse_config, ConfigError, CrashConstants, PolicySelection, ScenarioConfig,
    UniverseBounds,
};
pub use report::{
    emit_report, write_decisions_csv, write_report_csv, write_row_csv, write_summary_csv,
    EmitFormat, REPORT_HEADER,
};

/// Relative deviation from a published cost above which a row is annotated.
pub const ERRATUM_THRESHOLD: f64 = 0.01;

pub const BARRIER_OPTION: &str = "barrier";
pub const PEDESTRIAN_OPTION: &str = "pedestrians";

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Crash(#[from] CrashError),
    #[error(transparent)]
    Universe(#[from] UniverseError),
    #[error(transparent)]
    Ethics(#[from] EthicsError),
    #[error("report has no rows")]
    EmptyReport,
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl ScenarioError {
    pub fn is_io(&self) -> bool {
        matches!(
            self,
            Self::Io { .. } | Self::Config(ConfigError::Io { .. })
        )
    }
}

/// One case of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub velocity: f64,
    pub occupants: u32,
    pub pedestrians: u32,
    pub laden_mass: f64,
    pub barrier_impact_velocity: f64,
    pub pedestrian_impact_velocity: f64,
    pub peak_deformation: f64,
    pub deformation_membership: MembershipResult,
    pub velocity_membership: MembershipResult,
    pub cost_pedestrians: f64,
    pub cost_occupants: f64,
    pub utilitarian: Decision,
    pub deontological: Decision,
    /// Departures from published reference values, e.g.
    /// `paper_erratum(cost_occupants=264.3827)`.
    pub annotations: Vec<String>,
}

impl ReportRow {
    pub fn utilitarian_choice(&self) -> TargetKind {
        self.utilitarian.chosen_target
    }

    pub fn deontological_choice(&self) -> TargetKind {
        self.deontological.chosen_target
    }

    pub fn decision(&self, policy: Policy) -> &Decision {
        match policy {
            Policy::Utilitarian => &self.utilitarian,
            Policy::Deontological => &self.deontological,
        }
    }

    pub fn is_flagged(&self) -> bool {
        !self.annotations.is_empty()
    }
}

/// Summed chosen cost for one occupant count under one policy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolicySummary {
    pub occupants: u32,
    pub policy: Policy,
    pub total_cost: f64,
    pub published_total: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioReport {
    pub rows: Vec<ReportRow>,
    pub summaries: Vec<PolicySummary>,
}

impl ScenarioReport {
    pub fn row(&self, velocity: f64, occupants: u32, pedestrians: u32) -> Option<&ReportRow> {
        self.rows.iter().find(|r| {
            r.velocity == velocity && r.occupants == occupants && r.pedestrians == pedestrians
        })
    }

    pub fn summary(&self, occupants: u32, policy: Policy) -> Option<&PolicySummary> {
        self.summaries
            .iter()
            .find(|s| s.occupants == occupants && s.policy == policy)
    }
}

fn impacts(config: &ScenarioConfig, v0: f64, occupants: u32) -> Result<(ImpactResult, ImpactResult), ScenarioError> {
    let vehicle = config.vehicle_for(occupants);
    let barrier = brake_to_target(&vehicle, v0, config.barrier_distance, config.dt)?;
    let pedestrians = if config.pedestrian_distance == config.barrier_distance {
        barrier.clone()
    } else {
        brake_to_target(&vehicle, v0, config.pedestrian_distance, config.dt)?
    };
    Ok((barrier, pedestrians))
}

fn collision_option(
    id: &str,
    target: TargetKind,
    people: u32,
    feature_value: f64,
    universe: &FuzzyUniverse,
    config: &ScenarioConfig,
    impact: &ImpactResult,
) -> CollisionOption {
    let mut option = CollisionOption::new(
        id,
        target,
        people,
        feature_value,
        universe,
        config.original_course == target,
    );
    if impact.stopped_before_target {
        option.cost = 0.0;
    }
    option
}

fn erratum_annotations(config: &ScenarioConfig, row: &ReportRow) -> Vec<String> {
    if !config.uses_reference_constants() {
        return Vec::new();
    }
    let Some(published) = reference::published_row(row.velocity, row.occupants, row.pedestrians)
    else {
        return Vec::new();
    };
    let differs = |ours: f64, theirs: f64| {
        if theirs == 0.0 {
            ours.abs() > 1e-9
        } else {
            ((ours - theirs) / theirs).abs() > ERRATUM_THRESHOLD
        }
    };
    let mut notes = Vec::new();
    if differs(row.cost_pedestrians, published.cost_pedestrians) {
        notes.push(format!("paper_erratum(cost_pedestrians={})", published.cost_pedestrians));
    }
    if differs(row.cost_occupants, published.cost_occupants) {
        notes.push(format!("paper_erratum(cost_occupants={})", published.cost_occupants));
    }
    notes
}

/// Runs the full pipeline for a single case.
pub fn run_case(
    config: &ScenarioConfig,
    v0: f64,
    occupants: u32,
    pedestrians: u32,
) -> Result<ReportRow, ScenarioError> {
    let (barrier_impact, pedestrian_impact) = impacts(config, v0, occupants)?;
    let laden_mass = config.laden_mass(occupants);
    let crash = CrashModel::new(laden_mass, config.crash.stiffness, config.crash.failure_point)?;
    let peak_deformation = crash.peak_deformation(barrier_impact.impact_velocity);

    let (d_lo, d_hi) = config.universes.deformation;
    let (v_lo, v_hi) = config.universes.pedestrian_velocity;
    let deformation_universe = FuzzyUniverse::new(d_lo, d_hi)?;
    let velocity_universe = FuzzyUniverse::new(v_lo, v_hi)?;

    let options = [
        collision_option(
            BARRIER_OPTION,
            TargetKind::RigidBarrier,
            occupants,
            peak_deformation,
            &deformation_universe,
            config,
            &barrier_impact,
        ),
        collision_option(
            PEDESTRIAN_OPTION,
            TargetKind::Pedestrians,
            pedestrians,
            pedestrian_impact.impact_velocity,
            &velocity_universe,
            config,
            &pedestrian_impact,
        ),
    ];
    let utilitarian = decide(&options, Policy::Utilitarian)?;
    let deontological = decide(&options, Policy::Deontological)?;

    let mut row = ReportRow {
        velocity: v0,
        occupants,
        pedestrians,
        laden_mass,
        barrier_impact_velocity: barrier_impact.impact_velocity,
        pedestrian_impact_velocity: pedestrian_impact.impact_velocity,
        peak_deformation,
        deformation_membership: options[0].membership,
        velocity_membership: options[1].membership,
        cost_occupants: options[0].cost,
        cost_pedestrians: options[1].cost,
        utilitarian,
        deontological,
        annotations: Vec::new(),
    };
    row.annotations = erratum_annotations(config, &row);
    Ok(row)
}

/// Sums the chosen cost of each `(cost_pedestrians, cost_occupants)` pair
/// under `policy`, with the barrier as the original course.
pub fn policy_total<I>(pairs: I, policy: Policy) -> Result<f64, ScenarioError>
where
    I: IntoIterator<Item = (f64, f64)>,
{
    let blank = FuzzyUniverse::new(0.0, 1.0)?.membership(0.0);
    let mut total = 0.0;
    for (cost_pedestrians, cost_occupants) in pairs {
        let option = |id: &str, target, cost, original| CollisionOption {
            id: id.to_string(),
            is_original_course: original,
            target,
            people: 0,
            feature_value: 0.0,
            membership: blank,
            cost,
        };
        let options = [
            option(BARRIER_OPTION, TargetKind::RigidBarrier, cost_occupants, true),
            option(PEDESTRIAN_OPTION, TargetKind::Pedestrians, cost_pedestrians, false),
        ];
        total += decide(&options, policy)?.chosen_cost();
    }
    Ok(total)
}

fn published_total(config: &ScenarioConfig, occupants: u32, policy: Policy) -> Option<f64> {
    let d = ScenarioConfig::default();
    let default_grid = config.initial_velocities == d.initial_velocities
        && config.pedestrian_counts == d.pedestrian_counts;
    if !(config.uses_reference_constants()
        && default_grid
        && config.original_course == TargetKind::RigidBarrier)
    {
        return None;
    }
    let (util, deont) = *reference::POLICY_SUMS.get(occupants as usize)?;
    Some(match policy {
        Policy::Utilitarian => util,
        Policy::Deontological => deont,
    })
}

/// Runs every case of the configured grid. Rows come back sorted by
/// velocity, occupants and pedestrians whatever order the lists are given in.
pub fn sweep(config: &ScenarioConfig) -> Result<ScenarioReport, ScenarioError> {
    config.validate()?;
    let mut cases = Vec::new();
    for &v in &config.initial_velocities {
        for &o in &config.occupant_counts {
            for &p in &config.pedestrian_counts {
                cases.push((v, o, p));
            }
        }
    }
    cases.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    cases.dedup();

    let rows = cases
        .par_iter()
        .map(|&(v, o, p)| run_case(config, v, o, p))
        .collect::<Result<Vec<_>, _>>()?;

    let mut occupant_counts = config.occupant_counts.clone();
    occupant_counts.sort_unstable();
    occupant_counts.dedup();
    let mut summaries = Vec::new();
    for &occupants in &occupant_counts {
        for &policy in config.policy.policies() {
            let total_cost = rows
                .iter()
                .filter(|r| r.occupants == occupants)
                .map(|r| r.decision(policy).chosen_cost())
                .sum();
            summaries.push(PolicySummary {
                occupants,
                policy,
                total_cost,
                published_total: published_total(config, occupants, policy),
            });
        }
    }
    Ok(ScenarioReport { rows, summaries })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn defaults() -> ScenarioConfig {
        ScenarioConfig::default()
    }

    #[test]
    fn worked_example_case() {
        let row = run_case(&defaults(), 20.0, 2, 2).unwrap();
        assert!((row.barrier_impact_velocity - 17.32).abs() < 0.01);
        assert!((row.peak_deformation - 0.687).abs() < 1e-3);
        assert!((row.cost_pedestrians - 476.4).abs() < 1.0);
        assert!((row.cost_occupants - 833.86).abs() < 1.0);
        assert_eq!(row.utilitarian_choice(), TargetKind::Pedestrians);
        assert_eq!(row.deontological_choice(), TargetKind::RigidBarrier);
        assert_eq!(row.annotations, vec!["paper_erratum(cost_occupants=390.205)"]);
    }

    #[test]
    fn sixteen_with_four_pedestrians() {
        let row = run_case(&defaults(), 16.0, 2, 4).unwrap();
        assert!((row.cost_pedestrians - 53.6234).abs() < 0.3);
        assert!((row.cost_occupants - 37.9579).abs() < 0.2);
        assert_eq!(row.utilitarian_choice(), TargetKind::RigidBarrier);
        assert!(!row.is_flagged());
    }

    #[test]
    fn empty_case_ties_to_original_course() {
        let row = run_case(&defaults(), 12.0, 0, 0).unwrap();
        assert_eq!(row.cost_pedestrians, 0.0);
        assert_eq!(row.cost_occupants, 0.0);
        assert_eq!(row.utilitarian_choice(), TargetKind::RigidBarrier);
    }

    #[test]
    fn stopping_short_costs_nothing() {
        let row = run_case(&defaults(), 5.0, 2, 3).unwrap();
        assert_eq!(row.barrier_impact_velocity, 0.0);
        assert_eq!(row.cost_pedestrians, 0.0);
        assert_eq!(row.cost_occupants, 0.0);
        assert_eq!(row.utilitarian_choice(), TargetKind::RigidBarrier);
    }

    #[test]
    fn separate_target_distances() {
        let cfg = ScenarioConfig {
            pedestrian_distance: 5.0,
            ..defaults()
        };
        let row = run_case(&cfg, 20.0, 1, 1).unwrap();
        assert!((row.pedestrian_impact_velocity - 350f64.sqrt()).abs() < 1e-3);
        assert!((row.barrier_impact_velocity - 300f64.sqrt()).abs() < 1e-3);
        assert!(row.annotations.is_empty());
    }

    #[test]
    fn original_course_can_be_the_pedestrians() {
        let cfg = ScenarioConfig {
            original_course: TargetKind::Pedestrians,
            ..defaults()
        };
        let row = run_case(&cfg, 20.0, 2, 1).unwrap();
        assert_eq!(row.deontological_choice(), TargetKind::Pedestrians);
        assert_eq!(row.utilitarian_choice(), TargetKind::Pedestrians);
    }

    #[test]
    fn sweep_sorts_and_sums() {
        let cfg = ScenarioConfig {
            initial_velocities: vec![20.0, 12.0, 16.0],
            pedestrian_counts: vec![4, 3, 2, 1, 0],
            ..defaults()
        };
        let report = sweep(&cfg).unwrap();
        assert_eq!(report.rows.len(), 45);
        let keys: Vec<_> = report
            .rows
            .iter()
            .map(|r| (r.velocity, r.occupants, r.pedestrians))
            .collect();
        let mut sorted = keys.clone();
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        assert_eq!(keys, sorted);
        let zero = report.summary(0, Policy::Utilitarian).unwrap();
        assert_eq!(zero.total_cost, 0.0);
        assert!(zero.published_total.is_none());
    }

    #[test]
    fn sweep_rejects_empty_lists() {
        let cfg = ScenarioConfig {
            occupant_counts: vec![],
            ..defaults()
        };
        assert!(matches!(sweep(&cfg), Err(ScenarioError::Config(_))));
    }

    #[test]
    fn policy_total_uses_tie_break() {
        let pairs = [(0.0, 0.0), (1.0, 2.0), (3.0, 2.0)];
        assert_eq!(policy_total(pairs, Policy::Utilitarian).unwrap(), 3.0);
        assert_eq!(policy_total(pairs, Policy::Deontological).unwrap(), 4.0);
    }
}
