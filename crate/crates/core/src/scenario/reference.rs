//! Published reference results for the default sweep.
//!
//! Costs are the common utility costs reported for 12, 16 and 20 m/s with
//! zero to two occupants and zero to four pedestrians. They are kept as data
//! so reports can flag where a consistent evaluation departs from them.

pub const VELOCITIES: [f64; 3] = [12.0, 16.0, 20.0];

/// Per-pedestrian count costs, indexed `[velocity][pedestrians]`.
pub const PEDESTRIAN_COSTS: [[f64; 5]; 3] = [
    [0.0, 0.9514, 1.9029, 2.8543, 3.8058],
    [0.0, 13.4058, 26.8117, 40.2175, 53.6234],
    [0.0, 238.2231, 476.4463, 714.6694, 952.8926],
];

/// The zero-occupant table prints 39.8117 for three pedestrians at 16 m/s;
/// the other two tables agree on 40.2175.
pub const ZERO_OCCUPANT_TYPO: (f64, u32, f64) = (16.0, 3, 39.8117);

/// Occupant costs indexed `[occupants][velocity]`.
pub const OCCUPANT_COSTS: [[f64; 3]; 3] = [
    [0.0, 0.0, 0.0],
    [0.7579, 16.028, 264.3827],
    [1.8092, 37.9579, 390.205],
];

/// Worked example at 20 m/s with two occupants and two pedestrians.
pub const WORKED_EXAMPLE_BARRIER_COST: f64 = 390.2;
pub const WORKED_EXAMPLE_PEDESTRIAN_COST: f64 = 476.4;

/// Summed chosen costs per occupant count: (utilitarian, deontological).
pub const POLICY_SUMS: [(f64, f64); 3] = [(0.0, 0.0), (1096.0, 1406.0), (1531.0, 2150.0)];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PublishedRow {
    pub velocity: f64,
    pub occupants: u32,
    pub pedestrians: u32,
    pub cost_pedestrians: f64,
    pub cost_occupants: f64,
}

fn velocity_index(velocity: f64) -> Option<usize> {
    VELOCITIES.iter().position(|&v| v == velocity)
}

/// The published row for a case, if the tables cover it.
pub fn published_row(velocity: f64, occupants: u32, pedestrians: u32) -> Option<PublishedRow> {
    let vi = velocity_index(velocity)?;
    let occ = OCCUPANT_COSTS.get(occupants as usize)?;
    let mut cost_pedestrians = *PEDESTRIAN_COSTS[vi].get(pedestrians as usize)?;
    let (typo_v, typo_p, typo_cost) = ZERO_OCCUPANT_TYPO;
    if occupants == 0 && velocity == typo_v && pedestrians == typo_p {
        cost_pedestrians = typo_cost;
    }
    Some(PublishedRow {
        velocity,
        occupants,
        pedestrians,
        cost_pedestrians,
        cost_occupants: occ[vi],
    })
}

/// All 45 published rows, ordered by occupants, velocity, pedestrians.
pub fn published_rows() -> Vec<PublishedRow> {
    let mut rows = Vec::with_capacity(45);
    for occupants in 0..3 {
        for &v in &VELOCITIES {
            for pedestrians in 0..5 {
                rows.push(published_row(v, occupants, pedestrians).expect("in range"));
            }
        }
    }
    rows
}

pub fn is_zero_occupant_typo(velocity: f64, occupants: u32, pedestrians: u32) -> bool {
    let (v, p, _) = ZERO_OCCUPANT_TYPO;
    occupants == 0 && velocity == v && pedestrians == p
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn typo_row_is_only_in_zero_occupant_table() {
        assert_eq!(published_row(16.0, 0, 3).unwrap().cost_pedestrians, 39.8117);
        assert_eq!(published_row(16.0, 1, 3).unwrap().cost_pedestrians, 40.2175);
        assert!(is_zero_occupant_typo(16.0, 0, 3));
        assert!(!is_zero_occupant_typo(16.0, 2, 3));
    }

    #[test]
    fn coverage() {
        assert_eq!(published_rows().len(), 45);
        assert!(published_row(14.0, 0, 0).is_none());
        assert!(published_row(12.0, 3, 0).is_none());
        assert!(published_row(12.0, 0, 5).is_none());
    }
}
