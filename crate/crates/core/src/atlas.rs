//! Region descriptors, basin lattices, trajectory partitioning, and
//! boundary-contact detection.
//!
//! A region of the assembly space is described by the set of cross-set
//! pairs whose distance is pinned to the active well; dropping pairs moves
//! up in energy (more degrees of freedom), so the 64 subsets of a full
//! six-pair set form the basin lattice used by the volume measurements.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cayley::{realize, CayleyPoint, CompleteThreeTree, FlipSignature};
use crate::constraint::{check_c1, AssemblySystem, C1Outcome};
use crate::geom::{pair_distance, Pose};
use crate::grid::CubeKey;

/// Distance agreement for boundary bisection, in length units.
pub const BOUNDARY_TOL: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum AtlasError {
    #[error("basin bottom needs exactly 6 pairs, got {0}")]
    NotABottom(usize),
    #[error("Boltzmann estimation needs occupied samples at two adjacent levels")]
    InsufficientData,
}

#[derive(Debug, Error)]
pub enum PartitionError {
    #[error("sample violates the collision bound: pair {a}-{b} at {distance:.6} < {bound:.6}")]
    InfeasibleSample { a: u32, b: u32, distance: f64, bound: f64 },
}

/// A region identified by its pinned cross-set pairs `(a_id, b_id)`.
///
/// Pairs are kept sorted and unique; the energy level is the number of
/// remaining degrees of freedom.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct AcrDescriptor {
    pairs: Vec<(u32, u32)>,
}

impl AcrDescriptor {
    pub fn new(pairs: &[(u32, u32)]) -> Self {
        let mut pairs = pairs.to_vec();
        pairs.sort_unstable();
        pairs.dedup();
        AcrDescriptor { pairs }
    }

    pub fn pairs(&self) -> &[(u32, u32)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Degrees of freedom left once these pairs are pinned.
    pub fn energy_level(&self) -> usize {
        6usize.saturating_sub(self.pairs.len())
    }

    pub fn contains(&self, other: &AcrDescriptor) -> bool {
        other.pairs.iter().all(|p| self.pairs.binary_search(p).is_ok())
    }
}

impl fmt::Display for AcrDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.pairs.is_empty() {
            return write!(f, "ambient");
        }
        for (i, (a, b)) in self.pairs.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}-{b}")?;
        }
        Ok(())
    }
}

impl FromStr for AcrDescriptor {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() || s == "ambient" {
            return Ok(AcrDescriptor::new(&[]));
        }
        let mut pairs = Vec::new();
        for part in s.split(',') {
            let (a, b) = part
                .trim()
                .split_once('-')
                .ok_or_else(|| format!("pair `{part}` is not of the form a-b"))?;
            let a = a.trim().parse::<u32>().map_err(|e| format!("pair `{part}`: {e}"))?;
            let b = b.trim().parse::<u32>().map_err(|e| format!("pair `{part}`: {e}"))?;
            pairs.push((a, b));
        }
        Ok(AcrDescriptor::new(&pairs))
    }
}

/// The 64-element subset lattice under a six-pair bottom region.
#[derive(Debug, Clone)]
pub struct Basin {
    bottom: AcrDescriptor,
    /// All subsets of the bottom pairs, sorted by descriptor order.
    members: Vec<AcrDescriptor>,
}

impl Basin {
    pub fn bottom(&self) -> &AcrDescriptor {
        &self.bottom
    }

    pub fn members(&self) -> &[AcrDescriptor] {
        &self.members
    }

    pub fn level_members(&self, level: usize) -> impl Iterator<Item = &AcrDescriptor> {
        self.members.iter().filter(move |d| d.energy_level() == level)
    }

    pub fn is_member(&self, d: &AcrDescriptor) -> bool {
        self.members.binary_search(d).is_ok()
    }

    /// Covering relations: (superset index, subset index) for members
    /// differing by exactly one pair.
    pub fn covering_edges(&self) -> Vec<(usize, usize)> {
        let mut edges = Vec::new();
        for (i, sup) in self.members.iter().enumerate() {
            for (j, sub) in self.members.iter().enumerate() {
                if sub.len() + 1 == sup.len() && sup.contains(sub) {
                    edges.push((i, j));
                }
            }
        }
        edges
    }
}

pub fn basin_from_bottom(bottom: &AcrDescriptor) -> Result<Basin, AtlasError> {
    if bottom.len() != 6 {
        return Err(AtlasError::NotABottom(bottom.len()));
    }
    let pairs = bottom.pairs();
    let mut members: Vec<AcrDescriptor> = (0u32..64)
        .map(|mask| {
            let subset: Vec<(u32, u32)> = pairs
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, &p)| p)
                .collect();
            AcrDescriptor::new(&subset)
        })
        .collect();
    members.sort();
    Ok(Basin { bottom: bottom.clone(), members })
}

/// Which inner cutoff decides that a pair is bound to the well.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum McVariant {
    Mc1,
    Mc2,
    Mc3,
}

impl McVariant {
    /// Upper distance cutoff for calling a pair active, per radii sum.
    pub fn inner_upper(&self, radii_sum: f64) -> f64 {
        match self {
            McVariant::Mc1 => 0.85 * radii_sum,
            McVariant::Mc2 => radii_sum,
            McVariant::Mc3 => radii_sum + 0.8,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            McVariant::Mc1 => "MC1",
            McVariant::Mc2 => "MC2",
            McVariant::Mc3 => "MC3",
        }
    }
}

impl FromStr for McVariant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "mc1" | "1" => Ok(McVariant::Mc1),
            "mc2" | "2" => Ok(McVariant::Mc2),
            "mc3" | "3" => Ok(McVariant::Mc3),
            other => Err(format!("unknown partition variant `{other}`")),
        }
    }
}

/// Close-set classification outcome before any fallback policy.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InnerPartition {
    Assigned(AcrDescriptor),
    /// No pair sat at or under the cutoff; carries the nearest pair for
    /// callers that fall back to a singleton.
    EmptyClose { nearest: (u32, u32) },
}

/// Classify a pose by which cross pairs sit at or under an inner distance
/// cutoff (a function of the pair's radii sum).
///
/// More than six close pairs keep the six smallest distances, ties broken by
/// pair ids.  Trajectory partitioning and the reference-grid scan share this
/// so their region assignment can never drift apart.
pub fn partition_by_inner(
    sys: &AssemblySystem,
    pose: &Pose,
    inner_upper: &dyn Fn(f64) -> f64,
) -> Result<InnerPartition, PartitionError> {
    let config = sys.configuration(*pose);
    let outcome = check_c1(sys, &config).expect("collision scan uses only stored points");
    if let C1Outcome::Violated { a, b, distance, bound } = outcome {
        return Err(PartitionError::InfeasibleSample { a, b, distance, bound });
    }
    // (distance, pair) for every cross pair, ascending with id tie-break.
    let mut by_distance: Vec<(f64, (u32, u32))> = sys
        .pairs()
        .iter()
        .map(|&(a, b)| {
            let d = pair_distance(&config, a, b).expect("pair ids come from the system");
            (d, (a, b))
        })
        .collect();
    by_distance.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
    let close: Vec<(u32, u32)> = by_distance
        .iter()
        .filter(|&&(d, (a, b))| {
            d <= inner_upper(sys.radii_sum(a, b).expect("pair ids come from the system"))
        })
        .map(|&(_, p)| p)
        .collect();
    if close.is_empty() {
        return Ok(InnerPartition::EmptyClose { nearest: by_distance[0].1 });
    }
    let chosen = if close.len() > 6 { &close[..6] } else { &close[..] };
    Ok(InnerPartition::Assigned(AcrDescriptor::new(chosen)))
}

/// Assign a pose to a region descriptor by its close cross-set pairs.
///
/// Pairs at or under the variant's inner cutoff become the descriptor; more
/// than six close pairs keep the six smallest distances (ties broken by pair
/// ids), and a pose with no close pair is assigned the single nearest pair.
pub fn partition_mc_sample(
    sys: &AssemblySystem,
    pose: &Pose,
    variant: McVariant,
) -> Result<AcrDescriptor, PartitionError> {
    match partition_by_inner(sys, pose, &|rs| variant.inner_upper(rs))? {
        InnerPartition::Assigned(d) => Ok(d),
        InnerPartition::EmptyClose { nearest } => Ok(AcrDescriptor::new(&[nearest])),
    }
}

/// Per-region tally of an externally sampled trajectory: raw sample count
/// and the distinct reference-grid cubes those samples occupy.
#[derive(Debug, Clone, Default)]
pub struct PseudoAtlas {
    entries: BTreeMap<AcrDescriptor, (u64, BTreeSet<CubeKey>)>,
}

impl PseudoAtlas {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_sample(&mut self, descriptor: AcrDescriptor, cube: CubeKey) {
        self.add_sample_cubes(descriptor, [cube]);
    }

    /// Record one sample occupying several reference cubes (a pose and its
    /// paired rotation tuple land in two).
    pub fn add_sample_cubes(
        &mut self,
        descriptor: AcrDescriptor,
        cubes: impl IntoIterator<Item = CubeKey>,
    ) {
        let entry = self.entries.entry(descriptor).or_default();
        entry.0 += 1;
        entry.1.extend(cubes);
    }

    /// Commutative merge for parallel shard accumulation.
    pub fn merge(&mut self, other: PseudoAtlas) {
        for (d, (n, cubes)) in other.entries {
            let entry = self.entries.entry(d).or_default();
            entry.0 += n;
            entry.1.extend(cubes);
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&AcrDescriptor, u64, usize)> {
        self.entries.iter().map(|(d, (n, cubes))| (d, *n, cubes.len()))
    }

    pub fn total_samples(&self) -> u64 {
        self.entries.values().map(|(n, _)| n).sum()
    }

    pub fn descriptor_count(&self) -> usize {
        self.entries.len()
    }

    /// Samples per distinct occupied cube, aggregated over descriptors of
    /// one energy level; `None` when the level is unoccupied.
    pub fn repetition_rate(&self, level: usize) -> Option<f64> {
        let (mut samples, mut cubes) = (0u64, 0usize);
        for (d, (n, c)) in &self.entries {
            if d.energy_level() == level {
                samples += n;
                cubes += c.len();
            }
        }
        (cubes > 0).then(|| samples as f64 / cubes as f64)
    }
}

/// Estimate the per-level occupancy falloff: the mean ratio of repetition
/// rates between adjacent energy levels (lower level over higher).
pub fn estimate_boltzmann(atlas: &PseudoAtlas) -> Result<f64, AtlasError> {
    let rates: Vec<Option<f64>> = (0..=6).map(|l| atlas.repetition_rate(l)).collect();
    let mut ratios = Vec::new();
    for level in 1..=6usize {
        if let (Some(low), Some(high)) = (rates[level - 1], rates[level]) {
            ratios.push(low / high);
        }
    }
    if ratios.is_empty() {
        return Err(AtlasError::InsufficientData);
    }
    Ok(ratios.iter().sum::<f64>() / ratios.len() as f64)
}

/// Walk the segment between two base-space points until the first collision
/// bound is met, within [`BOUNDARY_TOL`].
///
/// `c_prev` must realize to a collision-free configuration.  Returns the
/// boundary point and the newly contacting pair, or `None` when `c_next`
/// is also collision-free.  Realization failures along the segment count as
/// the infeasible side.
pub fn detect_boundary_contact(
    c_prev: &CayleyPoint,
    c_next: &CayleyPoint,
    flip: FlipSignature,
    tree: &CompleteThreeTree,
    sys: &AssemblySystem,
) -> Option<(CayleyPoint, (u32, u32))> {
    let violation = |point: &CayleyPoint| -> Option<Option<(u32, u32, f64, f64)>> {
        // Outer None: unrealizable. Inner: Some(pair info) when violated.
        let pose = realize(tree, point, &flip).ok()?;
        let config = sys.configuration(pose);
        match check_c1(sys, &config).expect("collision scan uses only stored points") {
            C1Outcome::Ok => Some(None),
            C1Outcome::Violated { a, b, distance, bound } => Some(Some((a, b, distance, bound))),
        }
    };
    match violation(c_next) {
        Some(None) => return None,
        None | Some(Some(_)) => {}
    }
    let (mut t_ok, mut t_bad) = (0.0f64, 1.0f64);
    let mut contact = None;
    for _ in 0..80 {
        let mid = 0.5 * (t_ok + t_bad);
        let point = c_prev.lerp(c_next, mid);
        match violation(&point) {
            Some(None) => t_ok = mid,
            Some(Some((a, b, distance, bound))) => {
                t_bad = mid;
                contact = Some((point, (a, b)));
                if (distance - bound).abs() <= BOUNDARY_TOL {
                    return contact;
                }
            }
            None => t_bad = mid,
        }
    }
    // Fell through the iteration cap: report the best violating point seen.
    contact.or_else(|| {
        let point = *c_next;
        violation(&point)
            .flatten()
            .map(|(a, b, _, _)| (point, (a, b)))
    })
}
