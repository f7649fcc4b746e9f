//! Region sampling: seed the base space, traverse grid cubes with the
//! frontier store, cut surface elements against the target slice, and count
//! cubes certified by admitted witnesses: the cube holding each surviving
//! configuration, plus the processed cube whose elements produced it (its
//! cut crosses that cube's chart box even when the witness realizes just
//! across a face).
//!
//! The traversal runs once per flip; flip results merge in flip order, so
//! the first flip to reach a cube supplies its stored representative.  Both
//! Euler tuples of every surviving rotation are registered, since the pose
//! extraction returns only the canonical one.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::atlas::AcrDescriptor;
use crate::cayley::{
    build_acg, cayley_bounds, enumerate_base_grid, enumerate_flips, find_complete_3tree, flip_of,
    realize, AcgError, BaseGridStats, CayleyPoint, CompleteThreeTree, FlipSignature, TreeError,
};
use crate::constraint::{
    check_axis_restraint, check_c1, ActiveTarget, AssemblySystem, C1Outcome,
};
use crate::decomp::{
    decompose_basis, decompose_face_center, decompose_simplicial, divide_mapped_edge,
    intersect_parallelepiped_slice, intersect_simplex_slice, thick_edges, DecompositionVariant,
    ParallelepipedElement, SimplexElement,
};
use crate::frontier::{traverse, FaceLabel, FaceLabels, Frontier, Topology, WorklistOrder};
use crate::geom::{Pose, Vec3};
use crate::grid::{cube_lower, cube_of, dual_cube, CubeKey, GridSpec};

#[derive(Debug, Error)]
pub enum SampleError {
    #[error(transparent)]
    Graph(#[from] AcgError),
    #[error(transparent)]
    Chart(#[from] TreeError),
    #[error("thick decomposition needs exactly one active pair, got {0}")]
    ThickNeedsSinglePair(usize),
}

/// Whether heavy loops fan out over a thread pool or stay sequential.
/// Results are identical either way; order-preserving collection keeps the
/// merge deterministic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parallelism {
    Sequential,
    #[cfg(feature = "parallel")]
    Rayon,
}

impl Default for Parallelism {
    fn default() -> Self {
        #[cfg(feature = "parallel")]
        {
            Parallelism::Rayon
        }
        #[cfg(not(feature = "parallel"))]
        {
            Parallelism::Sequential
        }
    }
}

pub(crate) fn map_collect<T, U, F>(par: Parallelism, items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    match par {
        Parallelism::Sequential => items.iter().map(f).collect(),
        #[cfg(feature = "parallel")]
        Parallelism::Rayon => {
            use rayon::prelude::*;
            items.par_iter().map(f).collect()
        }
    }
}

#[derive(Debug, Clone)]
pub struct SampleSettings {
    pub variant: DecompositionVariant,
    pub grid: GridSpec,
    /// Base-space grid spacing, in length units.
    pub cayley_step: f64,
    pub target: ActiveTarget,
    pub order: WorklistOrder,
    /// Edge subdivisions for the thick variant; `None` derives one per edge
    /// from the mapped edge length and `cayley_step`.
    pub thick_subdivisions: Option<usize>,
    pub parallelism: Parallelism,
}

impl SampleSettings {
    pub fn new(variant: DecompositionVariant, grid: GridSpec, cayley_step: f64) -> Self {
        SampleSettings {
            variant,
            grid,
            cayley_step,
            target: ActiveTarget::Midpoint,
            order: WorklistOrder::default(),
            thick_subdivisions: None,
            parallelism: Parallelism::default(),
        }
    }
}

/// One stored representative configuration for a counted cube.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleConfig {
    /// Flip signature bits of the traversal that found it.
    pub flip: u32,
    pub pose: Pose,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct SampleCounters {
    pub base_candidates: u64,
    pub base_realizable: u64,
    pub seed_cubes: u64,
    pub cubes_processed: u64,
    pub solves: u64,
    pub intersections_found: u64,
    pub intersections_discarded: u64,
    /// Largest stored frontier over all per-flip traversals.
    pub peak_frontier: u64,
    pub promotions: u64,
}

#[derive(Debug, Clone)]
pub struct AcrSampleResult {
    pub acr: AcrDescriptor,
    pub variant: DecompositionVariant,
    /// Counted cubes with one stored configuration each; global across
    /// flips, first discovering flip wins.  A representative admitted from a
    /// cube's own element cuts may realize outside the cube, but its own
    /// cube is then always counted as well.
    pub counted: BTreeMap<CubeKey, SampleConfig>,
    /// Processed cube keys per flip signature bits.
    pub per_flip_visited: BTreeMap<u32, BTreeSet<CubeKey>>,
    pub counters: SampleCounters,
    /// True when no realizable seed existed: either the region is empty or
    /// the base grid was too coarse to land in it.
    pub empty: bool,
}

impl AcrSampleResult {
    pub fn counted_cubes(&self) -> impl Iterator<Item = &CubeKey> {
        self.counted.keys()
    }
}

/// A configuration that passed every filter, keyed under both Euler tuples.
struct Survivor {
    cube: CubeKey,
    pose: Pose,
}

/// Run every filter a counted configuration must pass; returns the two
/// keyed survivors (canonical and dual Euler tuple) when it does.
fn admit(
    sys: &AssemblySystem,
    tree: &CompleteThreeTree,
    grid: &GridSpec,
    point: &CayleyPoint,
    flip: &FlipSignature,
) -> Option<[Survivor; 2]> {
    let pose = realize(tree, point, flip).ok()?;
    let config = sys.configuration(pose);
    match flip_of(tree, &config) {
        Ok(sig) if sig == *flip => {}
        _ => return None,
    }
    if check_c1(sys, &config).ok()? != C1Outcome::Ok {
        return None;
    }
    if !check_axis_restraint(sys, &config).ok()? {
        return None;
    }
    let dual = pose.euler_dual();
    Some([
        Survivor { cube: cube_of(grid, &pose), pose },
        Survivor { cube: cube_of(grid, &dual), pose: dual },
    ])
}

/// Per-flip seed cube sets from the base-space grid: every realizable,
/// collision-free pre-image seeds the cube containing it (and its dual).
pub struct SeedOutcome {
    pub per_flip: BTreeMap<u32, BTreeSet<CubeKey>>,
    /// Seed configurations, already merged across flips in flip order.
    pub counted: BTreeMap<CubeKey, SampleConfig>,
    pub stats: BaseGridStats,
}

pub fn seed_cubes(
    sys: &AssemblySystem,
    tree: &CompleteThreeTree,
    grid: &GridSpec,
    cayley_step: f64,
) -> SeedOutcome {
    let bounds = cayley_bounds(tree);
    let (candidates, stats) = enumerate_base_grid(tree, &bounds, cayley_step);
    let flips = enumerate_flips(tree);
    let mut per_flip = BTreeMap::new();
    let mut counted = BTreeMap::new();
    for flip in &flips {
        let cubes: &mut BTreeSet<CubeKey> = per_flip.entry(flip.bits()).or_default();
        for cand in &candidates {
            if let Some(survivors) = admit(sys, tree, grid, cand, flip) {
                for s in survivors {
                    cubes.insert(s.cube);
                    counted
                        .entry(s.cube)
                        .or_insert(SampleConfig { flip: flip.bits(), pose: s.pose });
                }
            }
        }
    }
    SeedOutcome { per_flip, counted, stats }
}

/// Surface elements prepared once per traversal.
enum Plan {
    Simplex(Vec<SimplexElement>),
    /// Primary elements plus the per-cube fallback used when the primary
    /// pass finds nothing.
    WithRetry(Vec<SimplexElement>, Vec<SimplexElement>),
    Parallelepiped(Vec<ParallelepipedElement>),
    /// Edges plus the active pair's well interval.
    Edges(Vec<SimplexElement>, (f64, f64)),
}

fn build_plan(
    variant: DecompositionVariant,
    q: usize,
    sys: &AssemblySystem,
    tree: &CompleteThreeTree,
) -> Result<Plan, SampleError> {
    Ok(match variant {
        DecompositionVariant::Simplicial => Plan::Simplex(decompose_simplicial(q)),
        DecompositionVariant::FaceCenter => Plan::Simplex(decompose_face_center(q)),
        DecompositionVariant::Hybrid => {
            Plan::WithRetry(decompose_simplicial(q), decompose_face_center(q))
        }
        DecompositionVariant::Basis => Plan::Parallelepiped(decompose_basis(q)),
        DecompositionVariant::Thick => {
            if q != 1 {
                return Err(SampleError::ThickNeedsSinglePair(q));
            }
            let (a, b) = tree.active_id_pairs()[0];
            let radii = sys.radii_sum(a, b).expect("active pair ids come from the system");
            let lo = sys.constraints.active_lower.bound(radii);
            let hi = sys.constraints.active_upper.bound(radii);
            Plan::Edges(thick_edges(), (lo, hi))
        }
    })
}

/// Everything read-only a per-cube pass needs, plus the cube's precomputed
/// corner and face-center images.
struct CubeCtx<'a> {
    sys: &'a AssemblySystem,
    tree: &'a CompleteThreeTree,
    grid: &'a GridSpec,
    lower: [f64; 6],
    corner_images: Vec<CayleyPoint>,
    face_center_images: Vec<CayleyPoint>,
}

impl<'a> CubeCtx<'a> {
    fn new(
        sys: &'a AssemblySystem,
        tree: &'a CompleteThreeTree,
        grid: &'a GridSpec,
        key: &CubeKey,
        with_face_centers: bool,
    ) -> Self {
        let lower = cube_lower(grid, key);
        let mut ctx = CubeCtx {
            sys,
            tree,
            grid,
            lower,
            corner_images: Vec::with_capacity(64),
            face_center_images: Vec::new(),
        };
        for idx in 0u32..64 {
            let mut rel = [0.0f64; 6];
            for (axis, r) in rel.iter_mut().enumerate() {
                if idx & (1 << axis) != 0 {
                    *r = 1.0;
                }
            }
            ctx.corner_images.push(ctx.compute_image(&rel));
        }
        if with_face_centers {
            for axis in 0..6 {
                for upper in [false, true] {
                    let mut rel = [0.5f64; 6];
                    rel[axis] = if upper { 1.0 } else { 0.0 };
                    ctx.face_center_images.push(ctx.compute_image(&rel));
                }
            }
        }
        ctx
    }

    fn pose_at(&self, rel: &[f64; 6]) -> Pose {
        let mut c = [0.0f64; 6];
        for axis in 0..6 {
            c[axis] = self.lower[axis] + rel[axis] * self.grid.step(axis);
        }
        Pose::new(Vec3::new(c[0], c[1], c[2]), [c[3], c[4], c[5]])
    }

    fn compute_image(&self, rel: &[f64; 6]) -> CayleyPoint {
        let config = self.sys.configuration(self.pose_at(rel));
        crate::cayley::forward_map(self.tree, &config)
    }

    /// Image lookup: corners and face centers come from the caches.
    fn image(&self, rel: &[f64; 6]) -> CayleyPoint {
        let mut corner_idx = 0usize;
        let mut is_corner = true;
        for (axis, &r) in rel.iter().enumerate() {
            if r == 1.0 {
                corner_idx |= 1 << axis;
            } else if r != 0.0 {
                is_corner = false;
                break;
            }
        }
        if is_corner {
            return self.corner_images[corner_idx];
        }
        if !self.face_center_images.is_empty() {
            let off: Vec<usize> = (0..6).filter(|&a| rel[a] != 0.5).collect();
            if off.len() == 1 && (rel[off[0]] == 0.0 || rel[off[0]] == 1.0) {
                let face = 2 * off[0] + (rel[off[0]] == 1.0) as usize;
                return self.face_center_images[face];
            }
        }
        self.compute_image(rel)
    }

    /// Span vectors for the basis variant: half the difference between
    /// opposite face-center images, per axis.
    fn basis_vectors(&self) -> [[f64; 6]; 6] {
        let mut out = [[0.0f64; 6]; 6];
        for axis in 0..6 {
            let lo = self.face_center_images[2 * axis].coords();
            let hi = self.face_center_images[2 * axis + 1].coords();
            for k in 0..6 {
                out[axis][k] = 0.5 * (hi[k] - lo[k]);
            }
        }
        out
    }
}

#[derive(Default)]
struct ElementOutcome {
    face_mask: u16,
    solves: u64,
    found: u64,
    discarded: u64,
    survivors: Vec<Survivor>,
}

fn run_simplex_element(
    e: &SimplexElement,
    ctx: &CubeCtx,
    targets: &[f64],
    flip: &FlipSignature,
) -> ElementOutcome {
    let mut out = ElementOutcome { face_mask: e.face_mask, ..Default::default() };
    let images: Vec<CayleyPoint> = (0..e.n).map(|i| ctx.image(&e.corners[i])).collect();
    out.solves = 1;
    if let Some(point) = intersect_simplex_slice(&images, targets) {
        out.found = 1;
        match admit(ctx.sys, ctx.tree, ctx.grid, &point, flip) {
            Some(survivors) => out.survivors.extend(survivors),
            None => out.discarded = 1,
        }
    }
    out
}

fn run_ppd_element(
    e: &ParallelepipedElement,
    ctx: &CubeCtx,
    basis: &[[f64; 6]; 6],
    targets: &[f64],
    flip: &FlipSignature,
) -> ElementOutcome {
    let mut out = ElementOutcome { face_mask: e.face_mask, ..Default::default() };
    let center = ctx.image(&e.center);
    let vecs: Vec<[f64; 6]> = e.axes[..e.n_axes].iter().map(|&a| basis[a]).collect();
    out.solves = 1;
    if let Some(point) = intersect_parallelepiped_slice(&center, &vecs, targets) {
        out.found = 1;
        match admit(ctx.sys, ctx.tree, ctx.grid, &point, flip) {
            Some(survivors) => out.survivors.extend(survivors),
            None => out.discarded = 1,
        }
    }
    out
}

fn run_edge_element(
    e: &SimplexElement,
    ctx: &CubeCtx,
    interval: (f64, f64),
    subdivisions: Option<usize>,
    cayley_step: f64,
    flip: &FlipSignature,
) -> ElementOutcome {
    let mut out = ElementOutcome { face_mask: e.face_mask, ..Default::default() };
    let a = ctx.image(&e.corners[0]);
    let b = ctx.image(&e.corners[1]);
    let s = subdivisions.unwrap_or_else(|| {
        let len: f64 = a
            .coords()
            .iter()
            .zip(b.coords())
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt();
        ((len / cayley_step).ceil() as usize).max(1)
    });
    for point in divide_mapped_edge(&a, &b, s, interval.0, interval.1) {
        out.found += 1;
        match admit(ctx.sys, ctx.tree, ctx.grid, &point, flip) {
            Some(survivors) => out.survivors.extend(survivors),
            None => out.discarded += 1,
        }
    }
    out
}

struct FlipOutcome {
    flip_bits: u32,
    visited: BTreeSet<CubeKey>,
    /// (cube, config) in discovery order.
    counted: Vec<(CubeKey, SampleConfig)>,
    processed: u64,
    solves: u64,
    found: u64,
    discarded: u64,
    peak: u64,
    promotions: u64,
}

fn processed_face_mask(labels: &FaceLabels) -> u16 {
    let mut mask = 0u16;
    for (i, &l) in labels.iter().enumerate() {
        if l == FaceLabel::SharedWithProcessed {
            mask |= 1 << i;
        }
    }
    mask
}

#[allow(clippy::too_many_arguments)]
fn run_flip(
    sys: &AssemblySystem,
    tree: &CompleteThreeTree,
    settings: &SampleSettings,
    plan: &Plan,
    targets: &[f64],
    flip: &FlipSignature,
    seeds: &BTreeSet<CubeKey>,
) -> FlipOutcome {
    let mut out = FlipOutcome {
        flip_bits: flip.bits(),
        visited: BTreeSet::new(),
        counted: Vec::new(),
        processed: 0,
        solves: 0,
        found: 0,
        discarded: 0,
        peak: 0,
        promotions: 0,
    };
    let mut frontier = Frontier::with_order(Topology::from_grid(&settings.grid), settings.order);
    for &seed in seeds {
        frontier.seed(seed);
    }
    let with_face_centers = !matches!(settings.variant, DecompositionVariant::Simplicial);
    traverse(&mut frontier, |key, labels| {
        out.visited.insert(*key);
        out.processed += 1;
        let before = out.counted.len();
        let skip = processed_face_mask(labels);
        let ctx = CubeCtx::new(sys, tree, &settings.grid, key, with_face_centers);
        let run_simplex_pass = |elements: &[SimplexElement], out: &mut FlipOutcome| -> u16 {
            let live: Vec<&SimplexElement> =
                elements.iter().filter(|e| e.face_mask & skip == 0).collect();
            let outcomes = map_collect(settings.parallelism, &live, |e| {
                run_simplex_element(e, &ctx, targets, flip)
            });
            merge_outcomes(outcomes, out, flip.bits())
        };
        let mut feasible = match plan {
            Plan::Simplex(elements) => run_simplex_pass(elements, &mut out),
            Plan::WithRetry(primary, fallback) => {
                let before = out.counted.len();
                let mask = run_simplex_pass(primary, &mut out);
                if out.counted.len() == before {
                    mask | run_simplex_pass(fallback, &mut out)
                } else {
                    mask
                }
            }
            Plan::Parallelepiped(elements) => {
                let basis = ctx.basis_vectors();
                let live: Vec<&ParallelepipedElement> =
                    elements.iter().filter(|e| e.face_mask & skip == 0).collect();
                let outcomes = map_collect(settings.parallelism, &live, |e| {
                    run_ppd_element(e, &ctx, &basis, targets, flip)
                });
                merge_outcomes(outcomes, &mut out, flip.bits())
            }
            Plan::Edges(edges, interval) => {
                let live: Vec<&SimplexElement> =
                    edges.iter().filter(|e| e.face_mask & skip == 0).collect();
                let outcomes = map_collect(settings.parallelism, &live, |e| {
                    run_edge_element(
                        e,
                        &ctx,
                        *interval,
                        settings.thick_subdivisions,
                        settings.cayley_step,
                        flip,
                    )
                });
                merge_outcomes(outcomes, &mut out, flip.bits())
            }
        };
        // Any admitted witness from this cube's elements certifies that the
        // slice crosses its chart box, so tally the cube itself — witnesses
        // realized near a face may land in a neighbouring cube — and, when
        // the rotation grid carries cells onto cells, its dual-chart mate.
        if out.counted.len() > before {
            let witness = out.counted[before].1;
            out.counted.push((*key, witness));
            if let Some(mate) = dual_cube(&settings.grid, key) {
                out.counted.push((
                    mate,
                    SampleConfig { flip: witness.flip, pose: witness.pose.euler_dual() },
                ));
            }
        }
        // Faces already shared with processed cubes need no re-admission.
        feasible &= !skip;
        feasible
    });
    out.peak = frontier.peak() as u64;
    out.promotions = frontier.promotions() as u64;
    out
}

/// Fold element outcomes in element order; returns the continuation-face
/// mask (faces of elements whose cut found a point, admitted or not, so the
/// traversal follows the geometric surface and admission gates counting).
fn merge_outcomes(outcomes: Vec<ElementOutcome>, out: &mut FlipOutcome, flip_bits: u32) -> u16 {
    let mut feasible = 0u16;
    for o in outcomes {
        out.solves += o.solves;
        out.found += o.found;
        out.discarded += o.discarded;
        if o.found > 0 {
            feasible |= o.face_mask;
        }
        for s in o.survivors {
            out.counted.push((s.cube, SampleConfig { flip: flip_bits, pose: s.pose }));
        }
    }
    feasible
}

/// Sample one region: seed from the base space, then traverse each flip's
/// feasible cubes, cutting surface elements against the active targets.
pub fn sample_acr(
    sys: &AssemblySystem,
    acr: &AcrDescriptor,
    settings: &SampleSettings,
) -> Result<AcrSampleResult, SampleError> {
    let acg = build_acg(sys, acr.pairs(), settings.target)?;
    let tree = find_complete_3tree(&acg)?;
    let targets = tree.active_targets.clone();
    let plan = build_plan(settings.variant, targets.len(), sys, &tree)?;
    let seeds = seed_cubes(sys, &tree, &settings.grid, settings.cayley_step);
    let mut counters = SampleCounters {
        base_candidates: seeds.stats.candidates,
        base_realizable: seeds.stats.realizable,
        seed_cubes: seeds.per_flip.values().map(|s| s.len() as u64).sum(),
        ..Default::default()
    };
    if seeds.counted.is_empty() {
        return Ok(AcrSampleResult {
            acr: acr.clone(),
            variant: settings.variant,
            counted: BTreeMap::new(),
            per_flip_visited: BTreeMap::new(),
            counters,
            empty: true,
        });
    }
    let flips = enumerate_flips(&tree);
    let outcomes = map_collect(settings.parallelism, &flips, |flip| {
        let empty = BTreeSet::new();
        let flip_seeds = seeds.per_flip.get(&flip.bits()).unwrap_or(&empty);
        run_flip(sys, &tree, settings, &plan, &targets, flip, flip_seeds)
    });
    let mut counted = seeds.counted;
    let mut per_flip_visited = BTreeMap::new();
    for o in outcomes {
        counters.cubes_processed += o.processed;
        counters.solves += o.solves;
        counters.intersections_found += o.found;
        counters.intersections_discarded += o.discarded;
        counters.peak_frontier = counters.peak_frontier.max(o.peak);
        counters.promotions += o.promotions;
        for (cube, config) in o.counted {
            counted.entry(cube).or_insert(config);
        }
        per_flip_visited.insert(o.flip_bits, o.visited);
    }
    Ok(AcrSampleResult {
        acr: acr.clone(),
        variant: settings.variant,
        counted,
        per_flip_visited,
        counters,
        empty: false,
    })
}

/// Census of the base-space grid alone: how many pre-images pass the
/// filters, and how many distinct pose cubes they occupy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CayleyCensus {
    pub preimages: u64,
    pub occupied_cubes: u64,
}

pub fn cayley_census(
    sys: &AssemblySystem,
    acr: &AcrDescriptor,
    grid: &GridSpec,
    cayley_step: f64,
    target: ActiveTarget,
) -> Result<CayleyCensus, SampleError> {
    let acg = build_acg(sys, acr.pairs(), target)?;
    let tree = find_complete_3tree(&acg)?;
    let bounds = cayley_bounds(&tree);
    let (candidates, _) = enumerate_base_grid(&tree, &bounds, cayley_step);
    let flips = enumerate_flips(&tree);
    let mut preimages = 0u64;
    let mut occupied = BTreeSet::new();
    for flip in &flips {
        for cand in &candidates {
            if let Some(survivors) = admit(sys, &tree, grid, cand, flip) {
                preimages += 1;
                for s in survivors {
                    occupied.insert(s.cube);
                }
            }
        }
    }
    Ok(CayleyCensus { preimages, occupied_cubes: occupied.len() as u64 })
}
