//! Common utility cost and path selection.
//!
//! Memberships from either feature are weighted with `(n!)^2`, where `n` is
//! the rank of the set they belong to, and scaled by the number of people at
//! risk. The resulting cost has no unit and can be compared across the
//! barrier and pedestrian outcomes.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use thiserror::Error;

use crate::format::sig6;
use crate::severity::{FuzzyUniverse, MembershipResult};

/// Costs closer than this (scaled by magnitude) count as a tie.
pub const TIE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EthicsError {
    #[error("severity rank must be in 1..=5, got {0}")]
    RankOutOfRange(u8),
    #[error("no collision options to choose from")]
    NoOptions,
    #[error("no option is marked as the original course")]
    NoOriginalCourse,
    #[error("{0} options are marked as the original course, expected one")]
    MultipleOriginalCourses(usize),
}

/// `(n!)^2` for a set rank `n` in 1..=5.
pub fn factorial_squared_weight(rank: u8) -> Result<f64, EthicsError> {
    if !(1..=5).contains(&rank) {
        return Err(EthicsError::RankOutOfRange(rank));
    }
    let factorial: u64 = (1..=u64::from(rank)).product();
    Ok((factorial * factorial) as f64)
}

fn weight(rank: u8) -> f64 {
    factorial_squared_weight(rank).expect("membership ranks are always in 1..=5")
}

/// Weighted cost of lives at risk for one outcome.
///
/// Far below the lowest set the extrapolated memberships would make the
/// weighted sum negative; the cost is floored at zero there.
pub fn utility_cost(membership: &MembershipResult, people: u32) -> f64 {
    let per_person = weight(membership.higher_rank()) * membership.mu_higher
        + weight(membership.lower_rank()) * membership.mu_lower;
    per_person.max(0.0) * f64::from(people)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TargetKind {
    RigidBarrier,
    Pedestrians,
}

impl TargetKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::RigidBarrier => "barrier",
            Self::Pedestrians => "pedestrians",
        }
    }
}

impl fmt::Display for TargetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TargetKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "barrier" | "rigid_barrier" => Ok(Self::RigidBarrier),
            "pedestrians" => Ok(Self::Pedestrians),
            other => Err(format!("unknown target `{other}`, expected barrier or pedestrians")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Policy {
    /// Minimise the common utility cost.
    Utilitarian,
    /// Never leave the original course.
    Deontological,
}

impl Policy {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Utilitarian => "utilitarian",
            Self::Deontological => "deontological",
        }
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A candidate collision path and its cost.
#[derive(Debug, Clone, PartialEq)]
pub struct CollisionOption {
    pub id: String,
    pub is_original_course: bool,
    pub target: TargetKind,
    pub people: u32,
    /// Peak deformation [m] for a barrier, impact velocity [m/s] for pedestrians.
    pub feature_value: f64,
    pub membership: MembershipResult,
    pub cost: f64,
}

impl CollisionOption {
    pub fn new(
        id: impl Into<String>,
        target: TargetKind,
        people: u32,
        feature_value: f64,
        universe: &FuzzyUniverse,
        is_original_course: bool,
    ) -> Self {
        let membership = universe.membership(feature_value);
        Self {
            id: id.into(),
            is_original_course,
            target,
            people,
            feature_value,
            membership,
            cost: utility_cost(&membership, people),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptionCost {
    pub id: String,
    pub target: TargetKind,
    pub people: u32,
    pub feature_value: f64,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decision {
    pub chosen: String,
    pub chosen_target: TargetKind,
    pub policy: Policy,
    pub options: Vec<OptionCost>,
    pub rationale: String,
}

impl Decision {
    pub fn chosen_cost(&self) -> f64 {
        self.options
            .iter()
            .find(|o| o.id == self.chosen)
            .map_or(0.0, |o| o.cost)
    }

    /// One record per option: `policy,chosen,option_id,target,people,feature_value,cost`.
    pub fn write_csv<W: Write>(&self, mut out: W, header: bool) -> io::Result<()> {
        if header {
            writeln!(out, "policy,chosen,option_id,target,people,feature_value,cost")?;
        }
        for o in &self.options {
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                self.policy,
                self.chosen,
                o.id,
                o.target,
                o.people,
                sig6(o.feature_value),
                sig6(o.cost)
            )?;
        }
        Ok(())
    }
}

fn costs_tie(a: f64, b: f64) -> bool {
    (a - b).abs() <= TIE_TOLERANCE * a.abs().max(b.abs()).max(1.0)
}

/// Chooses a path. Utilitarian ties go to the original course.
pub fn decide(options: &[CollisionOption], policy: Policy) -> Result<Decision, EthicsError> {
    if options.is_empty() {
        return Err(EthicsError::NoOptions);
    }
    let originals = options.iter().filter(|o| o.is_original_course).count();
    let original = match originals {
        0 => return Err(EthicsError::NoOriginalCourse),
        1 => options
            .iter()
            .find(|o| o.is_original_course)
            .expect("counted above"),
        n => return Err(EthicsError::MultipleOriginalCourses(n)),
    };

    let (chosen, rationale) = match policy {
        Policy::Deontological => (original, "remain on the original course".to_string()),
        Policy::Utilitarian => {
            let cheapest = options
                .iter()
                .min_by(|a, b| a.cost.total_cmp(&b.cost))
                .expect("non-empty");
            if costs_tie(original.cost, cheapest.cost) {
                (
                    original,
                    format!("original course has the lowest cost {}", sig6(original.cost)),
                )
            } else {
                (
                    cheapest,
                    format!(
                        "lowest cost {} beats original course cost {}",
                        sig6(cheapest.cost),
                        sig6(original.cost)
                    ),
                )
            }
        }
    };

    Ok(Decision {
        chosen: chosen.id.clone(),
        chosen_target: chosen.target,
        policy,
        options: options
            .iter()
            .map(|o| OptionCost {
                id: o.id.clone(),
                target: o.target,
                people: o.people,
                feature_value: o.feature_value,
                cost: o.cost,
            })
            .collect(),
        rationale,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::severity::SeveritySet;

    fn membership(lower: SeveritySet, mu_lower: f64) -> MembershipResult {
        MembershipResult {
            lower_set: lower,
            higher_set: SeveritySet::from_rank(lower.rank() + 1).unwrap(),
            mu_lower,
            mu_higher: 1.0 - mu_lower,
        }
    }

    fn option(id: &str, target: TargetKind, cost: f64, original: bool) -> CollisionOption {
        CollisionOption {
            id: id.to_string(),
            is_original_course: original,
            target,
            people: 1,
            feature_value: 0.0,
            membership: membership(SeveritySet::E, 1.0),
            cost,
        }
    }

    #[test]
    fn weights_match_table() {
        let weights: Vec<f64> = (1..=5).map(|n| factorial_squared_weight(n).unwrap()).collect();
        assert_eq!(weights, vec![1.0, 4.0, 36.0, 576.0, 14400.0]);
        assert_eq!(factorial_squared_weight(0), Err(EthicsError::RankOutOfRange(0)));
        assert_eq!(factorial_squared_weight(6), Err(EthicsError::RankOutOfRange(6)));
    }

    #[test]
    fn pedestrian_cost_at_twenty() {
        let m = FuzzyUniverse::pedestrian_velocity().membership(17.3205);
        assert!((utility_cost(&m, 1) - 238.22).abs() < 0.5);
        assert!((utility_cost(&m, 2) - 476.4).abs() < 1.0);
        assert_eq!(utility_cost(&m, 0), 0.0);
    }

    #[test]
    fn pedestrian_cost_at_sixteen() {
        let m = FuzzyUniverse::pedestrian_velocity().membership(12.49);
        assert!((utility_cost(&m, 3) - 40.2175).abs() < 0.2);
    }

    #[test]
    fn weights_follow_their_own_sets() {
        // mu_higher belongs to B (576), mu_lower to C (36)
        let m = membership(SeveritySet::C, 0.25);
        assert_eq!(utility_cost(&m, 1), 576.0 * 0.75 + 36.0 * 0.25);
    }

    #[test]
    fn cost_is_floored_far_below_range() {
        let u = FuzzyUniverse::pedestrian_velocity();
        // just under the bound the extrapolation still gives a positive cost
        assert!((utility_cost(&u.membership(6.6332), 1) - 0.9514).abs() < 1e-3);
        assert_eq!(utility_cost(&u.membership(2.0), 3), 0.0);
    }

    #[test]
    fn utilitarian_picks_cheapest() {
        let options = [
            option("barrier", TargetKind::RigidBarrier, 0.7579, true),
            option("pedestrians", TargetKind::Pedestrians, 0.9514, false),
        ];
        let d = decide(&options, Policy::Utilitarian).unwrap();
        assert_eq!(d.chosen, "barrier");

        let options = [
            option("barrier", TargetKind::RigidBarrier, 347.96, true),
            option("pedestrians", TargetKind::Pedestrians, 238.22, false),
        ];
        let d = decide(&options, Policy::Utilitarian).unwrap();
        assert_eq!(d.chosen_target, TargetKind::Pedestrians);
        assert_eq!(d.chosen_cost(), 238.22);
        assert_eq!(d.options.len(), 2);
    }

    #[test]
    fn deontological_keeps_course() {
        let options = [
            option("barrier", TargetKind::RigidBarrier, 1e6, true),
            option("pedestrians", TargetKind::Pedestrians, 0.0, false),
        ];
        assert_eq!(decide(&options, Policy::Deontological).unwrap().chosen, "barrier");
    }

    #[test]
    fn ties_go_to_original_course() {
        let options = [
            option("pedestrians", TargetKind::Pedestrians, 5.0, false),
            option("barrier", TargetKind::RigidBarrier, 5.0 + 1e-12, true),
        ];
        assert_eq!(decide(&options, Policy::Utilitarian).unwrap().chosen, "barrier");
        let zero = [
            option("pedestrians", TargetKind::Pedestrians, 0.0, false),
            option("barrier", TargetKind::RigidBarrier, 0.0, true),
        ];
        assert_eq!(decide(&zero, Policy::Utilitarian).unwrap().chosen, "barrier");
    }

    #[test]
    fn original_course_must_be_unique() {
        assert_eq!(decide(&[], Policy::Utilitarian), Err(EthicsError::NoOptions));
        let none = [option("a", TargetKind::Pedestrians, 1.0, false)];
        assert_eq!(
            decide(&none, Policy::Deontological),
            Err(EthicsError::NoOriginalCourse)
        );
        let two = [
            option("a", TargetKind::Pedestrians, 1.0, true),
            option("b", TargetKind::RigidBarrier, 1.0, true),
        ];
        assert_eq!(
            decide(&two, Policy::Utilitarian),
            Err(EthicsError::MultipleOriginalCourses(2))
        );
    }

    #[test]
    fn decision_csv_rows() {
        let options = [
            option("barrier", TargetKind::RigidBarrier, 0.7579, true),
            option("pedestrians", TargetKind::Pedestrians, 0.9514, false),
        ];
        let d = decide(&options, Policy::Utilitarian).unwrap();
        let mut buf = Vec::new();
        d.write_csv(&mut buf, true).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "policy,chosen,option_id,target,people,feature_value,cost\n\
             utilitarian,barrier,barrier,barrier,1,0,0.757900\n\
             utilitarian,barrier,pedestrians,pedestrians,1,0,0.951400\n"
        );
    }
}
