//! Measurements over sampled regions: the exhaustive reference grid, basin
//! volumes weighted by the Boltzmann-style level factor, per-level shape
//! distributions, γ-coverage accuracy, and sampling-efficiency tables.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::atlas::{partition_by_inner, AcrDescriptor, InnerPartition};
use crate::constraint::{check_axis_restraint, check_c1, AssemblySystem, C1Outcome};
use crate::geom::Pose;
use crate::grid::{cube_center, cube_of, CubeKey, GridSpec};
use crate::sampler::{map_collect, Parallelism};

#[derive(Debug, Error)]
pub enum MeasureError {
    #[error("reference scan of {projected} grid points exceeds the cap of {cap}")]
    BudgetExceeded { projected: u128, cap: u64 },
    #[error("total volume is zero; relative volumes are undefined")]
    ZeroVolume,
}

/// Exhaustive feasibility scan over a bounded fine grid, with every stored
/// point assigned to the region whose pairs sit inside their active wells.
/// Points with no pair in its well belong to no region and are dropped.
#[derive(Debug, Clone)]
pub struct BaselineGrid {
    pub grid: GridSpec,
    pub per_acr: BTreeMap<AcrDescriptor, BTreeSet<CubeKey>>,
    /// Grid points examined.
    pub scanned: u64,
    /// Grid points stored (feasible and region-assigned).
    pub feasible: u64,
}

impl BaselineGrid {
    pub fn points(&self, acr: &AcrDescriptor) -> Option<&BTreeSet<CubeKey>> {
        self.per_acr.get(acr)
    }

    pub fn total_points(&self) -> u64 {
        self.per_acr.values().map(|s| s.len() as u64).sum()
    }

    pub fn all_points(&self) -> BTreeSet<CubeKey> {
        let mut out = BTreeSet::new();
        for s in self.per_acr.values() {
            out.extend(s.iter().copied());
        }
        out
    }

    /// Map each stored fine-grid point to the cube of a coarser grid that
    /// contains it, keeping the per-region split.
    pub fn project(&self, target: &GridSpec) -> BTreeMap<AcrDescriptor, BTreeSet<CubeKey>> {
        let mut out: BTreeMap<AcrDescriptor, BTreeSet<CubeKey>> = BTreeMap::new();
        for (acr, keys) in &self.per_acr {
            let set = out.entry(acr.clone()).or_default();
            for key in keys {
                let pose = cube_center(&self.grid, key);
                set.insert(cube_of(target, &pose));
            }
        }
        out
    }
}

/// Half-width of the translation search box: no pose with any pair inside
/// its active well can translate further than the largest well upper bound
/// plus both sets' maximal point norms.
fn translation_half_width(sys: &AssemblySystem) -> f64 {
    let max_norm = |points: &[crate::geom::Point]| {
        points.iter().map(|p| p.pos.norm()).fold(0.0, f64::max)
    };
    let mut max_upper: f64 = 0.0;
    for &(a, b) in &sys.pairs() {
        let rs = sys.radii_sum(a, b).expect("pair ids come from the system");
        max_upper = max_upper.max(sys.constraints.active_upper.bound(rs));
    }
    max_upper + max_norm(sys.set_a.points()) + max_norm(sys.set_b.points())
}

/// Index range of cube centers `origin + (i + 1/2)·step` within `[-r, r]`.
fn center_range(origin: f64, step: f64, r: f64) -> (i64, i64) {
    let lo = ((-r - origin) / step - 0.5).ceil() as i64;
    let hi = ((r - origin) / step - 0.5).floor() as i64;
    (lo, hi)
}

struct Shard {
    per_acr: BTreeMap<AcrDescriptor, BTreeSet<CubeKey>>,
    scanned: u64,
}

/// Scan every cube center of `grid` inside the derived translation box (and
/// the full rotation periods), keeping centers that pass the collision floor
/// and axis restraint, assigned by the active wells as the inner intervals.
/// `filter` keeps a single region's points only.
pub fn baseline_enumerate(
    sys: &AssemblySystem,
    filter: Option<&AcrDescriptor>,
    grid: &GridSpec,
    cap: u64,
    par: Parallelism,
) -> Result<BaselineGrid, MeasureError> {
    let r = translation_half_width(sys);
    let mut ranges = [(0i64, -1i64); 6];
    let mut projected: u128 = 1;
    for axis in 0..6 {
        let range = match grid.period(axis) {
            Some(n) => (0, n - 1),
            None => center_range(grid.origin[axis], grid.step(axis), r),
        };
        ranges[axis] = range;
        projected = projected.saturating_mul((range.1 - range.0 + 1).max(0) as u128);
    }
    if projected > cap as u128 {
        return Err(MeasureError::BudgetExceeded { projected, cap });
    }
    let inner = |rs: f64| sys.constraints.active_upper.bound(rs);
    let slabs: Vec<i64> = (ranges[0].0..=ranges[0].1).collect();
    let shards = map_collect(par, &slabs, |&i0| {
        let mut shard = Shard { per_acr: BTreeMap::new(), scanned: 0 };
        let mut idx = [i0, 0, 0, 0, 0, 0];
        scan_axis(sys, grid, &ranges, 1, &mut idx, &inner, filter, &mut shard);
        shard
    });
    let mut out = BaselineGrid {
        grid: grid.clone(),
        per_acr: BTreeMap::new(),
        scanned: 0,
        feasible: 0,
    };
    for shard in shards {
        out.scanned += shard.scanned;
        for (acr, keys) in shard.per_acr {
            out.per_acr.entry(acr).or_default().extend(keys);
        }
    }
    out.feasible = out.total_points();
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn scan_axis(
    sys: &AssemblySystem,
    grid: &GridSpec,
    ranges: &[(i64, i64); 6],
    axis: usize,
    idx: &mut [i64; 6],
    inner: &dyn Fn(f64) -> f64,
    filter: Option<&AcrDescriptor>,
    shard: &mut Shard,
) {
    if axis == 6 {
        shard.scanned += 1;
        let key = CubeKey(*idx);
        let pose = cube_center(grid, &key);
        let config = sys.configuration(pose);
        if check_c1(sys, &config).expect("scan uses only stored points") != C1Outcome::Ok {
            return;
        }
        if !check_axis_restraint(sys, &config).expect("scan uses only stored points") {
            return;
        }
        match partition_by_inner(sys, &pose, inner) {
            Ok(InnerPartition::Assigned(acr)) => {
                if filter.map_or(true, |f| *f == acr) {
                    shard.per_acr.entry(acr).or_default().insert(key);
                }
            }
            // No pair inside its well: free space, not part of any region.
            Ok(InnerPartition::EmptyClose { .. }) => {}
            // Collisions were already rejected above.
            Err(_) => unreachable!("collision floor checked before partitioning"),
        }
    } else {
        for i in ranges[axis].0..=ranges[axis].1 {
            idx[axis] = i;
            scan_axis(sys, grid, ranges, axis + 1, idx, inner, filter, shard);
        }
    }
}

/// Volume of a basin from its per-level volumes `V_k`, k = 1..5 (index
/// k − 1), weighted by the level factor: `Σ_k B^(5−k) · V_k`.  Level here is
/// the region dimension, so deeper (lower-energy) levels weigh more when
/// B > 1.
pub fn weighted_basin_volume(per_level: &[f64; 5], b: f64) -> f64 {
    (1..=5).map(|k| b.powi(5 - k as i32) * per_level[k - 1]).sum()
}

/// Sum per-region cube counts into per-level volumes, k = 1..5.  Rigid
/// bottoms (level 0) and the ambient region (level 6) carry no volume term.
pub fn level_volumes(per_acr: &BTreeMap<AcrDescriptor, u64>) -> [f64; 5] {
    let mut v = [0.0f64; 5];
    for (acr, &count) in per_acr {
        let level = acr.energy_level();
        if (1..=5).contains(&level) {
            v[level - 1] += count as f64;
        }
    }
    v
}

#[derive(Debug, Clone)]
pub struct BasinVolume {
    pub bottom: AcrDescriptor,
    pub per_level: [f64; 5],
    pub weighted: f64,
    pub relative_to_sum: f64,
    pub relative_to_union: f64,
}

/// Weighted volumes of several basins plus their relative shares against
/// the volume sum and against the deduplicated union.
#[derive(Debug, Clone)]
pub struct VolumeReport {
    pub factor: f64,
    pub basins: Vec<BasinVolume>,
    pub sum_volume: f64,
    /// Volume of the union: every region's cubes counted once even when
    /// basins share it.
    pub union_volume: f64,
}

pub fn volume_report(
    basins: &[(AcrDescriptor, BTreeMap<AcrDescriptor, u64>)],
    b: f64,
) -> Result<VolumeReport, MeasureError> {
    let mut union: BTreeMap<AcrDescriptor, u64> = BTreeMap::new();
    for (_, per_acr) in basins {
        for (acr, &count) in per_acr {
            union.entry(acr.clone()).or_insert(count);
        }
    }
    let union_volume = weighted_basin_volume(&level_volumes(&union), b);
    let weighted: Vec<(AcrDescriptor, [f64; 5], f64)> = basins
        .iter()
        .map(|(bottom, per_acr)| {
            let per_level = level_volumes(per_acr);
            (bottom.clone(), per_level, weighted_basin_volume(&per_level, b))
        })
        .collect();
    let sum_volume: f64 = weighted.iter().map(|(_, _, v)| v).sum();
    if sum_volume == 0.0 || union_volume == 0.0 {
        return Err(MeasureError::ZeroVolume);
    }
    let basins = weighted
        .into_iter()
        .map(|(bottom, per_level, w)| BasinVolume {
            bottom,
            per_level,
            weighted: w,
            relative_to_sum: w / sum_volume,
            relative_to_union: w / union_volume,
        })
        .collect();
    Ok(VolumeReport { factor: b, basins, sum_volume, union_volume })
}

/// Which per-level measure a shape distribution reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShapeMeasure {
    /// Raw level volumes of the basin.
    Weighted,
    /// Basin level volume over the same level's volume in the union of all
    /// basins.
    VsUnion,
    /// Basin level volume over the average per-region volume at that level
    /// across all basins.
    VsAcrAverage,
    /// Basin level volume over the average basin volume at that level.
    VsBasinAverage,
}

impl ShapeMeasure {
    pub fn index(self) -> u8 {
        match self {
            ShapeMeasure::Weighted => 1,
            ShapeMeasure::VsUnion => 2,
            ShapeMeasure::VsAcrAverage => 3,
            ShapeMeasure::VsBasinAverage => 4,
        }
    }

    pub fn from_index(i: u8) -> Option<Self> {
        match i {
            1 => Some(ShapeMeasure::Weighted),
            2 => Some(ShapeMeasure::VsUnion),
            3 => Some(ShapeMeasure::VsAcrAverage),
            4 => Some(ShapeMeasure::VsBasinAverage),
            _ => None,
        }
    }
}

/// How cross-basin aggregates treat a region shared by several basins.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UnionCounting {
    /// Count it once per containing basin (the literal disjoint union).
    #[default]
    Disjoint,
    /// Count it once globally.
    Deduped,
}

#[derive(Debug, Clone)]
pub struct ShapeReport {
    pub measure: ShapeMeasure,
    /// Per-level measure values, k = 1..5 at index k − 1; `None` where the
    /// level's denominator vanished.
    pub values: [Option<f64>; 5],
    /// Level-factor-weighted fractions over the defined levels; they sum to
    /// 1, or are all `None` when every defined value is zero.
    pub fractions: [Option<f64>; 5],
    /// Levels (1..5) omitted for a zero denominator.
    pub undefined_levels: Vec<usize>,
}

pub fn shape_distribution(
    basin: &BTreeMap<AcrDescriptor, u64>,
    all_basins: &[BTreeMap<AcrDescriptor, u64>],
    b: f64,
    measure: ShapeMeasure,
    counting: UnionCounting,
) -> ShapeReport {
    let m = level_volumes(basin);
    // Cross-basin level volumes and region counts, per counting mode.
    let mut union_levels = [0.0f64; 5];
    let mut union_regions = [0u64; 5];
    match counting {
        UnionCounting::Disjoint => {
            for per_acr in all_basins {
                let v = level_volumes(per_acr);
                for k in 0..5 {
                    union_levels[k] += v[k];
                }
                for (acr, _) in per_acr.iter() {
                    let level = acr.energy_level();
                    if (1..=5).contains(&level) {
                        union_regions[level - 1] += 1;
                    }
                }
            }
        }
        UnionCounting::Deduped => {
            let mut merged: BTreeMap<AcrDescriptor, u64> = BTreeMap::new();
            for per_acr in all_basins {
                for (acr, &count) in per_acr {
                    merged.entry(acr.clone()).or_insert(count);
                }
            }
            union_levels = level_volumes(&merged);
            for (acr, _) in merged.iter() {
                let level = acr.energy_level();
                if (1..=5).contains(&level) {
                    union_regions[level - 1] += 1;
                }
            }
        }
    }
    let basin_count = all_basins.len() as f64;
    let mut values = [None; 5];
    let mut undefined = Vec::new();
    for k in 0..5 {
        let denom = match measure {
            ShapeMeasure::Weighted => 1.0,
            ShapeMeasure::VsUnion => union_levels[k],
            ShapeMeasure::VsAcrAverage => {
                if union_regions[k] == 0 {
                    0.0
                } else {
                    union_levels[k] / union_regions[k] as f64
                }
            }
            ShapeMeasure::VsBasinAverage => {
                if basin_count == 0.0 {
                    0.0
                } else {
                    union_levels[k] / basin_count
                }
            }
        };
        if denom == 0.0 {
            undefined.push(k + 1);
        } else {
            values[k] = Some(m[k] / denom);
        }
    }
    let weighted: Vec<Option<f64>> = values
        .iter()
        .enumerate()
        .map(|(k, v)| v.map(|v| v * b.powi(5 - (k + 1) as i32)))
        .collect();
    let total: f64 = weighted.iter().flatten().sum();
    let mut fractions = [None; 5];
    if total > 0.0 {
        for k in 0..5 {
            fractions[k] = weighted[k].map(|w| w / total);
        }
    }
    ShapeReport { measure, values, fractions, undefined_levels: undefined }
}

/// Coverage cell size exponent: the sixth root of reference points per
/// sample, in units of the reference grid step on every axis.
pub fn gamma(baseline_points: u64, samples: u64) -> f64 {
    assert!(baseline_points > 0 && samples > 0, "coverage needs points on both sides");
    // sqrt then cbrt is the sixth root, exact on perfect sixth powers.
    (baseline_points as f64 / samples as f64).sqrt().cbrt()
}

/// Per reference point: how many samples land within the γ-box around it
/// (per-axis half-width γ in step units, rotation axes wrapped).  Points
/// never hit are absent from the map.
pub fn coverage_counts(
    baseline: &BTreeSet<CubeKey>,
    samples: &[Pose],
    grid: &GridSpec,
    gamma: f64,
) -> BTreeMap<CubeKey, u64> {
    let mut counts: BTreeMap<CubeKey, u64> = BTreeMap::new();
    let mut axis_indices: [Vec<i64>; 6] = Default::default();
    for pose in samples {
        let coords = pose.coords();
        for axis in 0..6 {
            let step = grid.step(axis);
            let u = (coords[axis] - grid.origin[axis]) / step - 0.5;
            let lo = (u - gamma).ceil() as i64;
            let hi = (u + gamma).floor() as i64;
            let list = &mut axis_indices[axis];
            list.clear();
            match grid.period(axis) {
                Some(n) => {
                    for i in lo..=hi {
                        list.push(i.rem_euclid(n));
                    }
                    list.sort_unstable();
                    list.dedup();
                }
                None => list.extend(lo..=hi),
            }
        }
        let mut key = [0i64; 6];
        visit_boxes(&axis_indices, 0, &mut key, &mut |k| {
            let cube = CubeKey(*k);
            if baseline.contains(&cube) {
                *counts.entry(cube).or_default() += 1;
            }
        });
    }
    counts
}

fn visit_boxes(
    axis_indices: &[Vec<i64>; 6],
    axis: usize,
    key: &mut [i64; 6],
    f: &mut impl FnMut(&[i64; 6]),
) {
    if axis == 6 {
        f(key);
        return;
    }
    for &i in &axis_indices[axis] {
        key[axis] = i;
        visit_boxes(axis_indices, axis + 1, key, f);
    }
}

#[derive(Debug, Clone)]
pub struct CoverageReport {
    pub gamma: f64,
    pub baseline_points: u64,
    pub sample_count: u64,
    pub missed: u64,
    pub missed_ratio: f64,
    /// Number of reference γ-boxes holding exactly ν samples, ν ≥ 1.
    pub histogram: BTreeMap<u64, u64>,
    /// Fractions of the ν ≥ 1 histogram over hit boxes; sum to 1 when any.
    pub fractions: BTreeMap<u64, f64>,
}

pub fn coverage_report(
    baseline: &BTreeSet<CubeKey>,
    samples: &[Pose],
    grid: &GridSpec,
    gamma: f64,
) -> CoverageReport {
    let counts = coverage_counts(baseline, samples, grid, gamma);
    let total = baseline.len() as u64;
    let hit = counts.len() as u64;
    let missed = total - hit;
    let mut histogram: BTreeMap<u64, u64> = BTreeMap::new();
    for &n in counts.values() {
        *histogram.entry(n).or_default() += 1;
    }
    let fractions = histogram
        .iter()
        .map(|(&n, &cubes)| (n, cubes as f64 / hit.max(1) as f64))
        .collect();
    CoverageReport {
        gamma,
        baseline_points: total,
        sample_count: samples.len() as u64,
        missed,
        missed_ratio: if total == 0 { 0.0 } else { missed as f64 / total as f64 },
        histogram,
        fractions,
    }
}

/// Fraction of reference points with no sample in their γ-box.
pub fn coverage_error(
    baseline: &BTreeSet<CubeKey>,
    samples: &[Pose],
    grid: &GridSpec,
    gamma: f64,
) -> f64 {
    coverage_report(baseline, samples, grid, gamma).missed_ratio
}

#[derive(Debug, Clone)]
pub struct EfficiencyRow {
    pub label: String,
    /// Useful samples: distinct counted cubes.
    pub counted: u64,
    pub wall_ms: f64,
    pub rate_per_ms: f64,
    pub peak_frontier: u64,
    /// Peak frontier size over counted cubes — the space-sublinearity
    /// diagnostic; should shrink as regions grow.
    pub frontier_to_counted: f64,
    /// Set when the run produced nothing useful.
    pub flagged: bool,
}

pub fn efficiency_row(label: &str, counted: u64, wall_ms: f64, peak_frontier: u64) -> EfficiencyRow {
    let flagged = counted == 0;
    EfficiencyRow {
        label: label.to_string(),
        counted,
        wall_ms,
        rate_per_ms: if wall_ms > 0.0 { counted as f64 / wall_ms } else { 0.0 },
        peak_frontier,
        frontier_to_counted: if counted == 0 {
            0.0
        } else {
            peak_frontier as f64 / counted as f64
        },
        flagged,
    }
}
