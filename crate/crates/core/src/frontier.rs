//! Frontier traversal over grid hypercubes.
//!
//! The traversal keeps only the boundary between the processed region and
//! the rest of the grid: a processed cube is dropped immediately, and its
//! former neighbors remember it through per-face labels.  Stored cubes live
//! in one of two containers — `P` for promising cubes awaiting processing
//! and `NP` for cubes that were inspected through an infeasible face and
//! are parked until some other neighbor vouches for them.  With the default
//! breadth-first worklist, space usage is proportional to the boundary, not
//! the volume, of the traversed region.

use std::collections::{BinaryHeap, HashMap, VecDeque};

use crate::grid::{CubeKey, GridSpec};

/// What lies on the other side of a stored cube's face.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FaceLabel {
    /// The neighbor was processed and removed; nothing to revisit there.
    SharedWithProcessed,
    /// The neighbor has never been stored or processed.
    SharedWithUninspected,
    /// The neighbor is currently stored in `P` or `NP`.
    SharedWithInspectedUnprocessed,
}

/// One label per face neighbor; only the first `2 * dims` entries are used.
pub type FaceLabels = [FaceLabel; 12];

/// Index of the face crossing `axis` in the negative (`positive = false`)
/// or positive direction.
pub fn face_index(axis: usize, positive: bool) -> usize {
    2 * axis + positive as usize
}

/// Axis layout of the traversed grid: how many axes are live and which of
/// them wrap around.
#[derive(Debug, Clone)]
pub struct Topology {
    dims: usize,
    periods: [Option<i64>; 6],
}

impl Topology {
    /// Unbounded grid on the first `dims` axes.
    pub fn open(dims: usize) -> Self {
        assert!((1..=6).contains(&dims), "dims must be 1..=6");
        Topology { dims, periods: [None; 6] }
    }

    /// Fully periodic grid, `counts[i]` cubes around axis `i`.
    pub fn torus(counts: &[i64]) -> Self {
        assert!((1..=6).contains(&counts.len()));
        let mut periods = [None; 6];
        for (i, &c) in counts.iter().enumerate() {
            assert!(c >= 1);
            periods[i] = Some(c);
        }
        Topology { dims: counts.len(), periods }
    }

    /// The pose-space layout: three unbounded translation axes followed by
    /// three periodic rotation axes.
    pub fn from_grid(spec: &GridSpec) -> Self {
        let mut periods = [None; 6];
        for (i, &c) in spec.rotation_counts.iter().enumerate() {
            periods[3 + i] = Some(c);
        }
        Topology { dims: 6, periods }
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn neighbor(&self, key: &CubeKey, axis: usize, positive: bool) -> CubeKey {
        debug_assert!(axis < self.dims);
        let mut idx = key.0;
        idx[axis] += if positive { 1 } else { -1 };
        if let Some(p) = self.periods[axis] {
            idx[axis] = idx[axis].rem_euclid(p);
        }
        CubeKey(idx)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Container {
    P,
    Np,
}

/// Which promising cube to process next.
///
/// The order determines how large the stored boundary grows.  Breadth-first
/// keeps the processed region a compact wavefront whose boundary scales like
/// the region's surface; depth-first snakes through the region and can keep
/// nearly the whole visited volume on the boundary (measured exponents on a
/// ball family: ~0.5 of volume growth for Fifo vs ~0.9 for Lifo in 2-D).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WorklistOrder {
    /// Breadth-first: oldest admission first.  The default; space stays
    /// proportional to the region surface.
    #[default]
    Fifo,
    /// Depth-first: most recently admitted first.  Cheapest bookkeeping but
    /// the stored boundary can approach the visited volume.
    Lifo,
    /// Process the cube with the most already-processed face neighbors,
    /// ties broken by key; keeps the processed region maximally compact.
    MostProcessedNeighbors,
}

#[derive(Debug)]
enum Worklist {
    Fifo(VecDeque<CubeKey>),
    Lifo(Vec<CubeKey>),
    /// Lazy max-heap of (processed-neighbor count at push time, key);
    /// stale entries are skipped at pop by recounting from live labels.
    Best(BinaryHeap<(u8, CubeKey)>),
}

impl Worklist {
    fn push(&mut self, key: CubeKey, processed_neighbors: u8) {
        match self {
            Worklist::Fifo(q) => q.push_back(key),
            Worklist::Lifo(v) => v.push(key),
            Worklist::Best(h) => h.push((processed_neighbors, key)),
        }
    }
}

fn processed_neighbor_count(labels: &FaceLabels) -> u8 {
    labels
        .iter()
        .filter(|&&l| l == FaceLabel::SharedWithProcessed)
        .count() as u8
}

/// Boundary store for the traversal: worklist `P`, parking set `NP`, and
/// the face labels that stand in for a processed-cube set.
#[derive(Debug)]
pub struct Frontier {
    topo: Topology,
    worklist: Worklist,
    index: HashMap<CubeKey, (Container, FaceLabels)>,
    p_len: usize,
    processed: usize,
    promotions: usize,
    peak: usize,
}

impl Frontier {
    pub fn new(topo: Topology) -> Self {
        Self::with_order(topo, WorklistOrder::default())
    }

    pub fn with_order(topo: Topology, order: WorklistOrder) -> Self {
        let worklist = match order {
            WorklistOrder::Fifo => Worklist::Fifo(VecDeque::new()),
            WorklistOrder::Lifo => Worklist::Lifo(Vec::new()),
            WorklistOrder::MostProcessedNeighbors => Worklist::Best(BinaryHeap::new()),
        };
        Frontier {
            topo,
            worklist,
            index: HashMap::new(),
            p_len: 0,
            processed: 0,
            promotions: 0,
            peak: 0,
        }
    }

    pub fn topology(&self) -> &Topology {
        &self.topo
    }

    /// Cubes currently awaiting processing.
    pub fn p_len(&self) -> usize {
        self.p_len
    }

    /// Cubes inspected but parked as not yet promising.
    pub fn np_len(&self) -> usize {
        self.index.len() - self.p_len
    }

    pub fn processed_count(&self) -> usize {
        self.processed
    }

    /// How many cubes moved from `NP` to `P` after a later neighbor found a
    /// feasible shared face.
    pub fn promotions(&self) -> usize {
        self.promotions
    }

    /// Largest number of cubes stored at any one time.
    pub fn peak(&self) -> usize {
        self.peak
    }

    pub fn is_stored(&self, key: &CubeKey) -> bool {
        self.index.contains_key(key)
    }

    /// Admit a starting cube into `P`.  Duplicates are ignored; adjacent
    /// seeds label each other as inspected.
    pub fn seed(&mut self, key: CubeKey) {
        if self.index.contains_key(&key) {
            return;
        }
        self.insert_new(key, true, None);
    }

    /// Take the next cube to process.  The caller must follow up with
    /// [`Frontier::step`] for the same cube.  The returned labels tell the
    /// caller which faces were already handled from the processed side.
    pub fn pop(&mut self) -> Option<(CubeKey, FaceLabels)> {
        loop {
            let key = match &mut self.worklist {
                Worklist::Lifo(v) => v.pop()?,
                Worklist::Fifo(q) => q.pop_front()?,
                Worklist::Best(h) => {
                    let (count, key) = h.pop()?;
                    // Lazy deletion: each neighbor-processed increment pushed
                    // a fresh entry, so accept only the current one.
                    match self.index.get(&key) {
                        Some((Container::P, labels))
                            if processed_neighbor_count(labels) == count =>
                        {
                            key
                        }
                        _ => continue,
                    }
                }
            };
            let (container, labels) = self.index.remove(&key).expect("worklist key not stored");
            debug_assert_eq!(container, Container::P);
            self.p_len -= 1;
            return Some((key, labels));
        }
    }

    /// Finish processing `key`: record which of its faces carried a feasible
    /// intersection (`feasible` bit `i` = face `i`), update every neighbor's
    /// labels, admit fresh neighbors, and drop the cube itself.
    ///
    /// `labels` must be the array returned by the matching [`Frontier::pop`].
    pub fn step(&mut self, key: &CubeKey, labels: &FaceLabels, feasible: u16) {
        for axis in 0..self.topo.dims {
            for positive in [false, true] {
                let face = face_index(axis, positive);
                let nk = self.topo.neighbor(key, axis, positive);
                if nk == *key {
                    // One-cube periodic axis: no neighbor there at all.
                    continue;
                }
                if labels[face] == FaceLabel::SharedWithProcessed {
                    // Neighbor long gone; nothing to update.
                    continue;
                }
                let promising = feasible & (1 << face) != 0;
                // Consult the live store, not the label snapshot: on a
                // two-cube periodic axis both faces reach the same neighbor,
                // and the first face may have inserted it already.
                if let Some(entry) = self.index.get_mut(&nk) {
                    entry.1[face_index(axis, !positive)] = FaceLabel::SharedWithProcessed;
                    let count = processed_neighbor_count(&entry.1);
                    if promising && entry.0 == Container::Np {
                        entry.0 = Container::P;
                        self.p_len += 1;
                        self.promotions += 1;
                        self.worklist.push(nk, count);
                    } else if entry.0 == Container::P {
                        // Keep the priority order current; a no-op for the
                        // sequential worklists.
                        if let Worklist::Best(h) = &mut self.worklist {
                            h.push((count, nk));
                        }
                    }
                } else {
                    // A never-stored cube can have no processed neighbor
                    // other than `key` itself: every other processed cube
                    // stored all its neighbors when it was finished.
                    self.insert_new(nk, promising, Some(face_index(axis, !positive)));
                }
            }
        }
        self.processed += 1;
    }

    fn insert_new(&mut self, key: CubeKey, promising: bool, processed_face: Option<usize>) {
        let mut labels = [FaceLabel::SharedWithUninspected; 12];
        for axis in 0..self.topo.dims {
            for positive in [false, true] {
                let nk = self.topo.neighbor(&key, axis, positive);
                if let Some(entry) = self.index.get_mut(&nk) {
                    entry.1[face_index(axis, !positive)] =
                        FaceLabel::SharedWithInspectedUnprocessed;
                    labels[face_index(axis, positive)] =
                        FaceLabel::SharedWithInspectedUnprocessed;
                }
            }
        }
        if let Some(face) = processed_face {
            labels[face] = FaceLabel::SharedWithProcessed;
        }
        let container = if promising { Container::P } else { Container::Np };
        if promising {
            self.worklist.push(key, processed_neighbor_count(&labels));
            self.p_len += 1;
        }
        self.index.insert(key, (container, labels));
        self.peak = self.peak.max(self.index.len());
    }
}

/// Run a traversal to completion: pop, process, step, until `P` drains.
///
/// `process` receives each cube with its face labels and returns the bitmask
/// of faces through which the region feasibly continues.
pub fn traverse<F>(frontier: &mut Frontier, mut process: F)
where
    F: FnMut(&CubeKey, &FaceLabels) -> u16,
{
    while let Some((key, labels)) = frontier.pop() {
        let feasible = process(&key, &labels);
        frontier.step(&key, &labels, feasible);
    }
}
