//! Realization: from a Cayley point and a flip signature back to a pose.
//!
//! The base triangle is placed canonically (first vertex at the origin,
//! second on +x, third in the upper xy half-plane), every later vertex is
//! trilaterated from its three parents, and the resulting coordinates are
//! aligned back onto the rigid templates: a proper superposition carries
//! set A to its identity placement and a second one reads off set B's pose.

use super::point::{CayleyPoint, FlipSignature};
use super::tree::CompleteThreeTree;
use crate::geom::{Configuration, Mat3, Pose, Vec3};
use thiserror::Error;

/// Discriminants this far below zero are treated as out of reach; anything
/// in `(-DISC_TOL, 0)` is clamped to a grazing (zero-height) solution.
pub const DISC_TOL: f64 = 1e-12;

/// Residual above which a superposition onto the rigid template is rejected.
pub const SUPERPOSE_TOL: f64 = 1e-6;

/// Signed volumes within this of zero make a flip bit undefined.
pub const VOLUME_TOL: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum RealizeError {
    #[error("no real trilateration solution for vertex slot {slot} (discriminant {discriminant:.3e})")]
    NoRealPreimage { slot: usize, discriminant: f64 },
    #[error("parent triple for vertex slot {slot} is degenerate")]
    DegenerateParents { slot: usize },
    #[error("superposition of set {set} onto its template failed (residual {residual:.3e})")]
    SuperpositionFailure { set: char, residual: f64 },
    #[error("signed volume for trilaterated vertex slot {slot} is within tolerance of zero")]
    ZeroVolume { slot: usize },
    #[error("flip signature has {got} bits, chart needs {want}")]
    BitCountMismatch { got: usize, want: usize },
}

/// Place a fourth point at distances `(d1, d2, d3)` from `(p1, p2, p3)`.
/// `negative` selects the mirror solution below the parent plane (negative
/// signed volume of the tetrahedron `(p1, p2, p3, x)`).
pub fn trilaterate(
    p1: Vec3,
    p2: Vec3,
    p3: Vec3,
    d1: f64,
    d2: f64,
    d3: f64,
    negative: bool,
    slot: usize,
) -> Result<Vec3, RealizeError> {
    let ex_raw = p2 - p1;
    let dv = ex_raw.norm();
    if dv < 1e-12 {
        return Err(RealizeError::DegenerateParents { slot });
    }
    let ex = ex_raw / dv;
    let rel3 = p3 - p1;
    let i = ex.dot(&rel3);
    let ey_raw = rel3 - i * ex;
    let j = ey_raw.norm();
    if j < 1e-12 {
        return Err(RealizeError::DegenerateParents { slot });
    }
    let ey = ey_raw / j;
    let ez = ex.cross(&ey);

    let x = (d1 * d1 - d2 * d2 + dv * dv) / (2.0 * dv);
    let y = (d1 * d1 - d3 * d3 + i * i + j * j - 2.0 * i * x) / (2.0 * j);
    let z2 = d1 * d1 - x * x - y * y;
    if z2 < -DISC_TOL {
        return Err(RealizeError::NoRealPreimage { slot, discriminant: z2 });
    }
    let z = z2.max(0.0).sqrt();
    let z = if negative { -z } else { z };
    Ok(p1 + x * ex + y * ey + z * ez)
}

/// Proper-rotation least-squares superposition mapping `from` onto `to`.
/// Returns `(rot, trans, max point residual)`.
fn superpose(from: &[Vec3], to: &[Vec3]) -> (Mat3, Vec3, f64) {
    let n = from.len() as f64;
    let mut cf = Vec3::zeros();
    let mut ct = Vec3::zeros();
    for k in 0..from.len() {
        cf += from[k];
        ct += to[k];
    }
    cf /= n;
    ct /= n;
    let mut h = Mat3::zeros();
    for k in 0..from.len() {
        h += (from[k] - cf) * (to[k] - ct).transpose();
    }
    let svd = h.svd(true, true);
    let u = svd.u.unwrap();
    let vt = svd.v_t.unwrap();
    let mut r = vt.transpose() * u.transpose();
    if r.determinant() < 0.0 {
        // Flip the weakest singular direction to stay in SO(3).
        let mut v = vt.transpose();
        v.column_mut(2).scale_mut(-1.0);
        r = v * u.transpose();
    }
    let t = ct - r * cf;
    let mut worst = 0.0f64;
    for k in 0..from.len() {
        worst = worst.max((r * from[k] + t - to[k]).norm());
    }
    (r, t, worst)
}

/// Raw tree-frame coordinates for every vertex (indexed like
/// `tree.vertices`), produced by the trilateration chain.
fn realize_raw(
    tree: &CompleteThreeTree,
    point: &CayleyPoint,
    flip: &FlipSignature,
) -> Result<Vec<Vec3>, RealizeError> {
    if flip.len() != tree.bit_count() {
        return Err(RealizeError::BitCountMismatch { got: flip.len(), want: tree.bit_count() });
    }
    let mut pos = vec![Vec3::zeros(); tree.vertices.len()];

    // Canonical base triangle.
    let l01 = tree.edge_length(&tree.base_edges[0], point);
    let l02 = tree.edge_length(&tree.base_edges[1], point);
    let l12 = tree.edge_length(&tree.base_edges[2], point);
    if l01 < 1e-12 {
        return Err(RealizeError::DegenerateParents { slot: 1 });
    }
    let x3 = (l02 * l02 + l01 * l01 - l12 * l12) / (2.0 * l01);
    let y3sq = l02 * l02 - x3 * x3;
    if y3sq < -DISC_TOL {
        return Err(RealizeError::NoRealPreimage { slot: 2, discriminant: y3sq });
    }
    pos[tree.order[0]] = Vec3::zeros();
    pos[tree.order[1]] = Vec3::new(l01, 0.0, 0.0);
    pos[tree.order[2]] = Vec3::new(x3, y3sq.max(0.0).sqrt(), 0.0);

    for k in 0..tree.parents.len() {
        let v = tree.order[3 + k];
        let p = tree.parents[k];
        let e = tree.parent_edges[k];
        pos[v] = trilaterate(
            pos[p[0]],
            pos[p[1]],
            pos[p[2]],
            tree.edge_length(&e[0], point),
            tree.edge_length(&e[1], point),
            tree.edge_length(&e[2], point),
            flip.negative(k),
            k,
        )?;
    }
    Ok(pos)
}

/// Realize a Cayley point under a flip signature as a pose of set B.
///
/// Fails when the trilateration chain leaves the reals, or when the raw
/// coordinates cannot be carried onto the rigid templates by proper
/// isometries (which signals an inconsistent chart, e.g. a flip fighting a
/// rigid set's chirality).
pub fn realize(
    tree: &CompleteThreeTree,
    point: &CayleyPoint,
    flip: &FlipSignature,
) -> Result<Pose, RealizeError> {
    let raw = realize_raw(tree, point, flip)?;

    let mut a_raw = Vec::new();
    let mut a_tpl = Vec::new();
    let mut b_raw = Vec::new();
    let mut b_tpl = Vec::new();
    for (i, v) in tree.vertices.iter().enumerate() {
        match v.set {
            super::acg::SetLabel::A => {
                a_raw.push(raw[i]);
                a_tpl.push(v.template);
            }
            super::acg::SetLabel::B => {
                b_raw.push(raw[i]);
                b_tpl.push(v.template);
            }
        }
    }

    // Carry the whole frame so that set A sits on its template.
    let (ra, ta, res_a) = superpose(&a_raw, &a_tpl);
    if res_a > SUPERPOSE_TOL {
        return Err(RealizeError::SuperpositionFailure { set: 'A', residual: res_a });
    }
    let b_world: Vec<Vec3> = b_raw.iter().map(|p| ra * p + ta).collect();

    // Read set B's pose off its template correspondence.
    let (rb, tb, res_b) = superpose(&b_tpl, &b_world);
    if res_b > SUPERPOSE_TOL {
        return Err(RealizeError::SuperpositionFailure { set: 'B', residual: res_b });
    }
    Ok(Pose::from_rotation_translation(&rb, tb))
}

/// Measure every chart coordinate in a configuration: active distances
/// first, then the free parameters.
pub fn forward_map(tree: &CompleteThreeTree, config: &Configuration) -> CayleyPoint {
    let mut active = [0.0f64; 6];
    let mut free = [0.0f64; 6];
    let dist = |i: usize, j: usize| {
        let vi = &tree.vertices[i];
        let vj = &tree.vertices[j];
        let pi = vertex_pos(vi, config);
        let pj = vertex_pos(vj, config);
        (pi - pj).norm()
    };
    for (k, &(a, b)) in tree.active_pairs.iter().enumerate() {
        active[k] = dist(a, b);
    }
    for (k, &(a, b)) in tree.free_pairs.iter().enumerate() {
        free[k] = dist(a, b);
    }
    CayleyPoint::new(
        &active[..tree.active_count()],
        &free[..tree.free_count()],
    )
}

fn vertex_pos(v: &super::acg::AcgVertex, config: &Configuration) -> Vec3 {
    match v.set {
        super::acg::SetLabel::A => v.template,
        super::acg::SetLabel::B => config.pose.apply(v.template),
    }
}

/// Orientation observation per trilaterated vertex; `None` marks a signed
/// volume too close to zero to call.
#[derive(Debug, Clone, PartialEq)]
pub struct FlipObservation {
    pub signs: Vec<Option<bool>>,
}

impl FlipObservation {
    /// Does this observation admit the given signature (undefined bits
    /// match either sign)?
    pub fn admits(&self, flip: &FlipSignature) -> bool {
        self.signs.len() == flip.len()
            && self
                .signs
                .iter()
                .enumerate()
                .all(|(k, s)| s.map_or(true, |neg| neg == flip.negative(k)))
    }

    /// Strict signature, if every bit is defined.
    pub fn signature(&self) -> Option<FlipSignature> {
        let mut bits = 0u32;
        for (k, s) in self.signs.iter().enumerate() {
            match s {
                None => return None,
                Some(true) => bits |= 1 << k,
                Some(false) => {}
            }
        }
        Some(FlipSignature::new(bits, self.signs.len()))
    }
}

/// Per-vertex orientation signs of a configuration, tolerating boundary
/// (zero-volume) vertices.
pub fn flip_observation(tree: &CompleteThreeTree, config: &Configuration) -> FlipObservation {
    let mut signs = Vec::with_capacity(tree.bit_count());
    for k in 0..tree.parents.len() {
        let v = tree.order[3 + k];
        let p = tree.parents[k];
        let p0 = vertex_pos(&tree.vertices[p[0]], config);
        let p1 = vertex_pos(&tree.vertices[p[1]], config);
        let p2 = vertex_pos(&tree.vertices[p[2]], config);
        let pv = vertex_pos(&tree.vertices[v], config);
        let vol = (p1 - p0).cross(&(p2 - p0)).dot(&(pv - p0));
        if vol.abs() <= VOLUME_TOL {
            signs.push(None);
        } else {
            signs.push(Some(vol < 0.0));
        }
    }
    FlipObservation { signs }
}

/// Flip signature of a configuration; errors on any zero-volume vertex.
pub fn flip_of(
    tree: &CompleteThreeTree,
    config: &Configuration,
) -> Result<FlipSignature, RealizeError> {
    let obs = flip_observation(tree, config);
    match obs.signature() {
        Some(sig) => Ok(sig),
        None => {
            let slot = obs.signs.iter().position(|s| s.is_none()).unwrap();
            Err(RealizeError::ZeroVolume { slot })
        }
    }
}
