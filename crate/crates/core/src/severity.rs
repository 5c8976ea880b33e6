//! Fuzzy injury-severity universes.
//!
//! Each feature (peak deformation, pedestrian impact velocity) is covered by
//! five triangular sets E, D, C, B, A with equally spaced peaks; E sits on
//! the lower bound and A on the upper. A crisp value belongs to the two
//! adjacent sets that bracket it. Values outside the bounds keep the
//! outermost pair and extrapolate linearly.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
#[error("universe upper bound {upper} must exceed lower bound {lower}")]
pub struct UniverseError {
    pub lower: f64,
    pub upper: f64,
}

/// Severity sets, least severe first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SeveritySet {
    E,
    D,
    C,
    B,
    A,
}

impl SeveritySet {
    pub const ALL: [SeveritySet; 5] = [Self::E, Self::D, Self::C, Self::B, Self::A];

    /// 1-based rank: E = 1 ... A = 5.
    pub fn rank(self) -> u8 {
        self as u8 + 1
    }

    pub fn from_rank(rank: u8) -> Option<Self> {
        Self::ALL.get(usize::from(rank).checked_sub(1)?).copied()
    }
}

impl fmt::Display for SeveritySet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::E => "E",
            Self::D => "D",
            Self::C => "C",
            Self::B => "B",
            Self::A => "A",
        };
        f.write_str(s)
    }
}

/// Peak-deformation universe bounds [m].
pub const DEFORMATION_BOUNDS: (f64, f64) = (0.2681, 0.8874);
/// Pedestrian impact-velocity universe bounds [m/s].
pub const PEDESTRIAN_VELOCITY_BOUNDS: (f64, f64) = (6.7056, 24.5872);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FuzzyUniverse {
    lower: f64,
    upper: f64,
    centers: [f64; 5],
}

impl FuzzyUniverse {
    pub fn new(lower: f64, upper: f64) -> Result<Self, UniverseError> {
        if !(upper > lower) || !lower.is_finite() || !upper.is_finite() {
            return Err(UniverseError { lower, upper });
        }
        let spacing = (upper - lower) / 4.0;
        let mut centers = [0.0; 5];
        for (i, c) in centers.iter_mut().enumerate() {
            *c = lower + i as f64 * spacing;
        }
        centers[4] = upper;
        Ok(Self {
            lower,
            upper,
            centers,
        })
    }

    pub fn deformation() -> Self {
        Self::new(DEFORMATION_BOUNDS.0, DEFORMATION_BOUNDS.1).expect("valid bounds")
    }

    pub fn pedestrian_velocity() -> Self {
        Self::new(PEDESTRIAN_VELOCITY_BOUNDS.0, PEDESTRIAN_VELOCITY_BOUNDS.1)
            .expect("valid bounds")
    }

    pub fn lower_bound(&self) -> f64 {
        self.lower
    }

    pub fn upper_bound(&self) -> f64 {
        self.upper
    }

    /// Peaks for E, D, C, B, A in that order.
    pub fn centers(&self) -> &[f64; 5] {
        &self.centers
    }

    pub fn center(&self, set: SeveritySet) -> f64 {
        self.centers[set as usize]
    }

    pub fn spacing(&self) -> f64 {
        (self.upper - self.lower) / 4.0
    }

    /// Degrees of membership of `value` to its bracketing pair of sets.
    ///
    /// A value on an interior peak reports that set as the lower member with
    /// degree one. The directly computed degree is always the one of larger
    /// magnitude and the other is its complement, so the two sum to exactly
    /// one in floating point.
    pub fn membership(&self, value: f64) -> MembershipResult {
        let low = self.centers[1..4]
            .iter()
            .take_while(|&&c| value >= c)
            .count();
        let (c_l, c_h) = (self.centers[low], self.centers[low + 1]);
        let span = c_h - c_l;
        let mu_lower = (c_h - value) / span;
        let (mu_lower, mu_higher) = if mu_lower >= 0.5 {
            (mu_lower, 1.0 - mu_lower)
        } else {
            let mu_higher = (value - c_l) / span;
            (1.0 - mu_higher, mu_higher)
        };
        MembershipResult {
            lower_set: SeveritySet::ALL[low],
            higher_set: SeveritySet::ALL[low + 1],
            mu_lower,
            mu_higher,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MembershipResult {
    pub lower_set: SeveritySet,
    pub higher_set: SeveritySet,
    pub mu_lower: f64,
    pub mu_higher: f64,
}

impl MembershipResult {
    pub fn lower_rank(&self) -> u8 {
        self.lower_set.rank()
    }

    pub fn higher_rank(&self) -> u8 {
        self.higher_set.rank()
    }

    /// Same set pair with the two degrees exchanged.
    ///
    /// Diagnostic only: reproduces published cost figures that paired each
    /// weight with the opposite membership.
    pub fn swapped(&self) -> Self {
        Self {
            mu_lower: self.mu_higher,
            mu_higher: self.mu_lower,
            ..*self
        }
    }

    /// Crisp value recovered as the membership-weighted pair of peaks.
    pub fn reconstruct(&self, universe: &FuzzyUniverse) -> f64 {
        self.mu_lower * universe.center(self.lower_set)
            + self.mu_higher * universe.center(self.higher_set)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deformation_centers_are_equally_spaced() {
        let u = FuzzyUniverse::deformation();
        let expected = [0.2681, 0.42293, 0.57775, 0.73258, 0.8874];
        for (c, e) in u.centers().iter().zip(expected) {
            assert!((c - e).abs() < 1e-5, "{c} vs {e}");
        }
        assert!((u.spacing() - 0.154825).abs() < 1e-12);
    }

    #[test]
    fn velocity_midpoint_is_ncap_speed() {
        let u = FuzzyUniverse::pedestrian_velocity();
        assert!((u.center(SeveritySet::C) - 15.6464).abs() < 1e-12);
    }

    #[test]
    fn unit_universe() {
        let u = FuzzyUniverse::new(0.0, 4.0).unwrap();
        assert_eq!(u.centers(), &[0.0, 1.0, 2.0, 3.0, 4.0]);
        assert!(FuzzyUniverse::new(1.0, 1.0).is_err());
        assert!(FuzzyUniverse::new(2.0, 1.0).is_err());
    }

    #[test]
    fn worked_example_memberships() {
        let m = FuzzyUniverse::deformation().membership(0.687);
        assert_eq!((m.lower_set, m.higher_set), (SeveritySet::C, SeveritySet::B));
        assert_eq!(m.lower_rank(), 3);
        assert!((m.mu_lower - 0.2946).abs() < 2e-3);
        assert!((m.mu_higher - 0.7054).abs() < 2e-3);

        let m = FuzzyUniverse::pedestrian_velocity().membership(17.3205);
        assert_eq!((m.lower_set, m.higher_set), (SeveritySet::C, SeveritySet::B));
        assert!((m.mu_lower - 0.6255).abs() < 2e-3);
        assert!((m.mu_higher - 0.3745).abs() < 2e-3);
    }

    #[test]
    fn extrapolates_below_lower_bound() {
        let m = FuzzyUniverse::pedestrian_velocity().membership(6.6332);
        assert_eq!((m.lower_set, m.higher_set), (SeveritySet::E, SeveritySet::D));
        assert!((m.mu_lower - 1.0162).abs() < 1e-4);
        assert!((m.mu_higher + 0.0162).abs() < 1e-4);
        assert_eq!(m.mu_lower + m.mu_higher, 1.0);
    }

    #[test]
    fn extrapolates_above_upper_bound() {
        let u = FuzzyUniverse::new(0.0, 4.0).unwrap();
        let m = u.membership(4.5);
        assert_eq!((m.lower_set, m.higher_set), (SeveritySet::B, SeveritySet::A));
        assert!((m.mu_higher - 1.5).abs() < 1e-12);
        assert!((m.mu_lower + 0.5).abs() < 1e-12);
    }

    #[test]
    fn peaks_resolve_to_upper_pair() {
        let u = FuzzyUniverse::new(0.0, 4.0).unwrap();
        for (i, set) in SeveritySet::ALL.iter().enumerate().take(4) {
            let m = u.membership(i as f64);
            assert_eq!(m.lower_set, *set);
            assert_eq!(m.mu_lower, 1.0);
            assert_eq!(m.mu_higher, 0.0);
        }
        let top = u.membership(4.0);
        assert_eq!((top.lower_set, top.higher_set), (SeveritySet::B, SeveritySet::A));
        assert_eq!(top.mu_higher, 1.0);
    }

    #[test]
    fn swapped_exchanges_degrees() {
        let m = FuzzyUniverse::deformation().membership(0.687);
        let s = m.swapped();
        assert_eq!((s.mu_lower, s.mu_higher), (m.mu_higher, m.mu_lower));
        assert_eq!(s.lower_set, m.lower_set);
    }

    #[test]
    fn rank_round_trip() {
        for set in SeveritySet::ALL {
            assert_eq!(SeveritySet::from_rank(set.rank()), Some(set));
        }
        assert_eq!(SeveritySet::from_rank(0), None);
        assert_eq!(SeveritySet::from_rank(6), None);
        assert_eq!(SeveritySet::A.to_string(), "A");
    }
}
