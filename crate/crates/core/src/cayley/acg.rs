//! Active constraint graph construction.

use crate::constraint::{ActiveTarget, AssemblySystem};
use crate::geom::Vec3;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum AcgError {
    #[error("active pair set must contain between 1 and 6 pairs (got {0})")]
    BadPairCount(usize),
    #[error("duplicate active pair ({0}, {1})")]
    DuplicatePair(u32, u32),
    #[error("active pair references unknown point ({set}{id})")]
    UnknownEndpoint { set: char, id: u32 },
    #[error("set {set} cannot be augmented to three non-collinear vertices")]
    CannotAugment { set: char },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SetLabel {
    A,
    B,
}

impl SetLabel {
    pub fn letter(&self) -> char {
        match self {
            SetLabel::A => 'A',
            SetLabel::B => 'B',
        }
    }
}

/// Graph vertex: a point of one of the sets, with its template position
/// copied in so later stages need no set lookups.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcgVertex {
    pub set: SetLabel,
    pub point_id: u32,
    pub template: Vec3,
    pub radius: f64,
}

/// Active constraint graph for a pair set Q: endpoint vertices (augmented),
/// implicit complete intra-set edges, and the active cross edges with their
/// pinned target lengths.
#[derive(Debug, Clone)]
pub struct ActiveConstraintGraph {
    /// Set A vertices first (ascending point id), then set B vertices.
    pub vertices: Vec<AcgVertex>,
    /// Active pairs as vertex indices `(a_idx, b_idx)`, sorted by point ids.
    pub active_pairs: Vec<(usize, usize)>,
    /// Pinned length per active pair, same order as `active_pairs`.
    pub active_targets: Vec<f64>,
    /// Residual degrees of freedom: `6 - |Q|`.
    pub dimension: usize,
}

impl ActiveConstraintGraph {
    pub fn vertex_index(&self, set: SetLabel, point_id: u32) -> Option<usize> {
        self.vertices
            .iter()
            .position(|v| v.set == set && v.point_id == point_id)
    }

    pub fn set_indices(&self, set: SetLabel) -> Vec<usize> {
        (0..self.vertices.len())
            .filter(|&i| self.vertices[i].set == set)
            .collect()
    }

    /// Template distance between two same-set vertices.
    pub fn intra_distance(&self, i: usize, j: usize) -> f64 {
        (self.vertices[i].template - self.vertices[j].template).norm()
    }

    /// Active pairs as point-id pairs `(a, b)`, in storage order.
    pub fn active_id_pairs(&self) -> Vec<(u32, u32)> {
        self.active_pairs
            .iter()
            .map(|&(i, j)| (self.vertices[i].point_id, self.vertices[j].point_id))
            .collect()
    }
}

fn collinear(points: &[Vec3]) -> bool {
    if points.len() < 3 {
        return true;
    }
    // Any triple with a non-vanishing cross product certifies spread.
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            for k in (j + 1)..points.len() {
                let u = points[j] - points[i];
                let v = points[k] - points[i];
                if u.cross(&v).norm() > 1e-9 {
                    return false;
                }
            }
        }
    }
    true
}

/// Pick the vertices of one side: the endpoints of Q in that set, augmented
/// by the remaining template points in ascending distance from the endpoint
/// centroid (ties by id) until the side has at least three vertices and is
/// not collinear.
fn side_vertices(
    set: &crate::geom::PointSet,
    label: SetLabel,
    endpoint_ids: &[u32],
) -> Result<Vec<AcgVertex>, AcgError> {
    let mut ids: Vec<u32> = endpoint_ids.to_vec();
    ids.sort_unstable();
    ids.dedup();

    let centroid = {
        let mut c = Vec3::zeros();
        for &id in &ids {
            c += set.get(id).unwrap().pos;
        }
        c / ids.len() as f64
    };

    let mut candidates: Vec<&crate::geom::Point> = set
        .points()
        .iter()
        .filter(|p| !ids.contains(&p.id))
        .collect();
    candidates.sort_by(|p, q| {
        let dp = (p.pos - centroid).norm();
        let dq = (q.pos - centroid).norm();
        dp.partial_cmp(&dq).unwrap().then(p.id.cmp(&q.id))
    });

    let mut chosen = ids;
    let mut pool = candidates.into_iter();
    loop {
        let pts: Vec<Vec3> = chosen.iter().map(|&id| set.get(id).unwrap().pos).collect();
        if chosen.len() >= 3 && !collinear(&pts) {
            break;
        }
        match pool.next() {
            Some(p) => chosen.push(p.id),
            None => return Err(AcgError::CannotAugment { set: label.letter() }),
        }
    }
    chosen.sort_unstable();
    Ok(chosen
        .into_iter()
        .map(|id| {
            let p = set.get(id).unwrap();
            AcgVertex { set: label, point_id: id, template: p.pos, radius: p.radius }
        })
        .collect())
}

/// Build the active constraint graph for pair set `q` (pairs of point ids,
/// `(a, b)`).  Targets are taken from the constraint system's active well
/// per `target_choice`.
pub fn build_acg(
    system: &AssemblySystem,
    q: &[(u32, u32)],
    target_choice: ActiveTarget,
) -> Result<ActiveConstraintGraph, AcgError> {
    if q.is_empty() || q.len() > 6 {
        return Err(AcgError::BadPairCount(q.len()));
    }
    let mut sorted: Vec<(u32, u32)> = q.to_vec();
    sorted.sort_unstable();
    for w in sorted.windows(2) {
        if w[0] == w[1] {
            return Err(AcgError::DuplicatePair(w[0].0, w[0].1));
        }
    }
    for &(a, b) in &sorted {
        if system.set_a.get(a).is_none() {
            return Err(AcgError::UnknownEndpoint { set: 'A', id: a });
        }
        if system.set_b.get(b).is_none() {
            return Err(AcgError::UnknownEndpoint { set: 'B', id: b });
        }
    }

    let a_ids: Vec<u32> = sorted.iter().map(|p| p.0).collect();
    let b_ids: Vec<u32> = sorted.iter().map(|p| p.1).collect();
    let mut vertices = side_vertices(&system.set_a, SetLabel::A, &a_ids)?;
    vertices.extend(side_vertices(&system.set_b, SetLabel::B, &b_ids)?);

    let find = |set: SetLabel, id: u32| {
        vertices
            .iter()
            .position(|v| v.set == set && v.point_id == id)
            .unwrap()
    };
    let active_pairs: Vec<(usize, usize)> = sorted
        .iter()
        .map(|&(a, b)| (find(SetLabel::A, a), find(SetLabel::B, b)))
        .collect();
    let active_targets: Vec<f64> = sorted
        .iter()
        .map(|&(a, b)| {
            let rs = system.radii_sum(a, b).unwrap();
            system.constraints.active_target(rs, target_choice)
        })
        .collect();

    Ok(ActiveConstraintGraph {
        dimension: 6 - sorted.len(),
        vertices,
        active_pairs,
        active_targets,
    })
}
