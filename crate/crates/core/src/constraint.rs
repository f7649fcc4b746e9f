//! Pairwise distance constraints between the two sets.
//!
//! Every cross-set pair `(a, b)` gets bounds of the form
//! `lambda * (r_a + r_b) + delta`.  Three rules are configured globally:
//! a collision floor (no pair may come closer), and the lower/upper ends of
//! the "active" well that defines contact.  The collision floor is required
//! to coincide with the active lower bound, so the well is exactly the band
//! a pair can legally occupy below the upper bound.

use crate::geom::{pair_distance, principal_axis_angle, Configuration, GeomError};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConstraintError {
    #[error("active lower bound exceeds upper bound for radii sum {radii_sum}: {lower} > {upper}")]
    EmptyWell { radii_sum: f64, lower: f64, upper: f64 },
    #[error("collision rule must equal the active lower rule (got {collision:?} vs {active_lower:?})")]
    CollisionMismatch { collision: PairRule, active_lower: PairRule },
    #[error("angular restraint interval is empty: {lo} > {hi}")]
    EmptyRestraint { lo: f64, hi: f64 },
    #[error(transparent)]
    Geom(#[from] GeomError),
}

/// Linear bound rule `lambda * (r_a + r_b) + delta`, in length units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairRule {
    pub lambda: f64,
    pub delta: f64,
}

impl PairRule {
    pub fn new(lambda: f64, delta: f64) -> Self {
        PairRule { lambda, delta }
    }

    pub fn bound(&self, radii_sum: f64) -> f64 {
        self.lambda * radii_sum + self.delta
    }
}

/// Global constraint configuration shared by every cross-set pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstraintSystem {
    pub active_lower: PairRule,
    pub active_upper: PairRule,
    pub collision: PairRule,
    /// Optional allowed interval (radians) for the angle between the two
    /// sets' dominant principal axes.
    pub axis_restraint: Option<(f64, f64)>,
}

impl ConstraintSystem {
    /// Build a system with the collision floor tied to the active lower rule.
    pub fn new(active_lower: PairRule, active_upper: PairRule) -> Self {
        ConstraintSystem {
            active_lower,
            active_upper,
            collision: active_lower,
            axis_restraint: None,
        }
    }

    pub fn with_axis_restraint(mut self, lo: f64, hi: f64) -> Self {
        self.axis_restraint = Some((lo, hi));
        self
    }

    /// Check structural invariants: collision == active lower, and the well
    /// non-empty for a representative radii sum.
    pub fn validate(&self, radii_sum: f64) -> Result<(), ConstraintError> {
        if self.collision != self.active_lower {
            return Err(ConstraintError::CollisionMismatch {
                collision: self.collision,
                active_lower: self.active_lower,
            });
        }
        let lo = self.active_lower.bound(radii_sum);
        let hi = self.active_upper.bound(radii_sum);
        if lo > hi {
            return Err(ConstraintError::EmptyWell { radii_sum, lower: lo, upper: hi });
        }
        if let Some((a, b)) = self.axis_restraint {
            if a > b {
                return Err(ConstraintError::EmptyRestraint { lo: a, hi: b });
            }
        }
        Ok(())
    }

    pub fn active_interval(&self, radii_sum: f64) -> (f64, f64) {
        (self.active_lower.bound(radii_sum), self.active_upper.bound(radii_sum))
    }

    /// Distance a pair is driven to when its contact is held active: the
    /// midpoint of the active well unless overridden.
    pub fn active_target(&self, radii_sum: f64, choice: ActiveTarget) -> f64 {
        let (lo, hi) = self.active_interval(radii_sum);
        match choice {
            ActiveTarget::Midpoint => 0.5 * (lo + hi),
            ActiveTarget::Lower => lo,
            ActiveTarget::Upper => hi,
        }
    }
}

/// Which point of the active well a held contact is pinned to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum ActiveTarget {
    #[default]
    Midpoint,
    Lower,
    Upper,
}

/// The two point sets plus the constraint configuration: everything needed
/// to judge a pose.
#[derive(Debug, Clone)]
pub struct AssemblySystem {
    pub set_a: crate::geom::PointSet,
    pub set_b: crate::geom::PointSet,
    pub constraints: ConstraintSystem,
}

impl AssemblySystem {
    pub fn new(
        set_a: crate::geom::PointSet,
        set_b: crate::geom::PointSet,
        constraints: ConstraintSystem,
    ) -> Self {
        AssemblySystem { set_a, set_b, constraints }
    }

    pub fn configuration(&self, pose: crate::geom::Pose) -> Configuration<'_> {
        Configuration::new(&self.set_a, &self.set_b, pose)
    }

    pub fn radii_sum(&self, a: u32, b: u32) -> Result<f64, GeomError> {
        let ra = self
            .set_a
            .get(a)
            .ok_or(GeomError::UnknownPoint { set: 'A', id: a })?
            .radius;
        let rb = self
            .set_b
            .get(b)
            .ok_or(GeomError::UnknownPoint { set: 'B', id: b })?
            .radius;
        Ok(ra + rb)
    }

    /// All cross-set pairs in ascending `(a, b)` id order.
    pub fn pairs(&self) -> Vec<(u32, u32)> {
        let mut v = Vec::with_capacity(self.set_a.len() * self.set_b.len());
        for a in self.set_a.points() {
            for b in self.set_b.points() {
                v.push((a.id, b.id));
            }
        }
        v.sort_unstable();
        v
    }
}

/// Outcome of a collision scan: either clean or the first offending pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum C1Outcome {
    Ok,
    Violated { a: u32, b: u32, distance: f64, bound: f64 },
}

impl C1Outcome {
    pub fn is_ok(&self) -> bool {
        matches!(self, C1Outcome::Ok)
    }
}

/// Check the collision floor over every cross-set pair.  Pairs are scanned in
/// ascending id order and the first violation (if any) is reported.
pub fn check_c1(system: &AssemblySystem, config: &Configuration) -> Result<C1Outcome, GeomError> {
    for a in system.set_a.points() {
        for b in system.set_b.points() {
            let d = (a.pos - config.pose.apply(b.pos)).norm();
            let bound = system.constraints.collision.bound(a.radius + b.radius);
            if d < bound {
                return Ok(C1Outcome::Violated { a: a.id, b: b.id, distance: d, bound });
            }
        }
    }
    Ok(C1Outcome::Ok)
}

/// Is pair `(a, b)` inside its closed active well in this configuration?
pub fn check_active_interval(
    system: &AssemblySystem,
    config: &Configuration,
    a: u32,
    b: u32,
) -> Result<bool, GeomError> {
    let d = pair_distance(config, a, b)?;
    let (lo, hi) = system.constraints.active_interval(system.radii_sum(a, b)?);
    Ok(d >= lo && d <= hi)
}

/// Does the configuration respect the optional principal-axis restraint?
/// A system without a restraint accepts everything.  A degenerate set (no
/// dominant axis) is reported as an error rather than silently passed.
pub fn check_axis_restraint(
    system: &AssemblySystem,
    config: &Configuration,
) -> Result<bool, GeomError> {
    match system.constraints.axis_restraint {
        None => Ok(true),
        Some((lo, hi)) => {
            let ang = principal_axis_angle(config)?;
            Ok(ang >= lo && ang <= hi)
        }
    }
}
