//! Rigid-body geometry: labelled point sets, poses, and assembly configurations.
//!
//! A configuration of a two-body assembly keeps set A fixed in its template
//! placement and moves set B by a [`Pose`] (translation plus three rotation
//! angles).  All downstream machinery — constraint checks, Cayley maps, grid
//! assignment — works through the small vocabulary defined here.

use nalgebra::{Matrix3, Vector3};
use thiserror::Error;

pub type Vec3 = Vector3<f64>;
pub type Mat3 = Matrix3<f64>;

/// Full turn; rotation coordinates live in `[0, TAU)`.
pub const TAU: f64 = std::f64::consts::TAU;

/// Eigenvalue gap below which a point set has no single dominant axis.
pub const AXIS_GAP_TOL: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum GeomError {
    #[error("point id {id} not present in set {set}")]
    UnknownPoint { set: char, id: u32 },
    #[error("set {set} has no dominant principal axis (eigenvalue gap {gap:.3e})")]
    DegenerateSet { set: char, gap: f64 },
    #[error("duplicate point id {id} in set definition")]
    DuplicateId { id: u32 },
    #[error("point set must contain at least one point")]
    Empty,
}

/// A sphere with an identity: centre position in the set's template frame
/// plus an interaction radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub id: u32,
    pub pos: Vec3,
    pub radius: f64,
}

impl Point {
    pub fn new(id: u32, x: f64, y: f64, z: f64, radius: f64) -> Self {
        Point { id, pos: Vec3::new(x, y, z), radius }
    }
}

/// An ordered collection of points with unique ids.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    points: Vec<Point>,
}

impl PointSet {
    pub fn new(points: Vec<Point>) -> Result<Self, GeomError> {
        if points.is_empty() {
            return Err(GeomError::Empty);
        }
        let mut seen = std::collections::BTreeSet::new();
        for p in &points {
            if !seen.insert(p.id) {
                return Err(GeomError::DuplicateId { id: p.id });
            }
        }
        Ok(PointSet { points })
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn get(&self, id: u32) -> Option<&Point> {
        self.points.iter().find(|p| p.id == id)
    }

    pub fn centroid(&self) -> Vec3 {
        let mut c = Vec3::zeros();
        for p in &self.points {
            c += p.pos;
        }
        c / self.points.len() as f64
    }

    /// Largest spread of any coordinate around the centroid; used to size
    /// translation search boxes.
    pub fn extent(&self) -> f64 {
        let c = self.centroid();
        self.points
            .iter()
            .map(|p| (p.pos - c).norm())
            .fold(0.0, f64::max)
    }
}

/// Rigid motion applied to set B: translation `t` followed by (or rather,
/// after) the rotation `Rz(rz) * Ry(ry) * Rx(rx)`.  Angles are kept wrapped
/// to `[0, TAU)` so each rotation coordinate is a periodic grid axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub t: Vec3,
    pub r: [f64; 3],
}

pub fn wrap_angle(a: f64) -> f64 {
    let w = a.rem_euclid(TAU);
    // rem_euclid can return TAU itself when `a` is a tiny negative number.
    if w >= TAU {
        0.0
    } else {
        w
    }
}

impl Pose {
    pub fn new(t: Vec3, r: [f64; 3]) -> Self {
        Pose { t, r: [wrap_angle(r[0]), wrap_angle(r[1]), wrap_angle(r[2])] }
    }

    pub fn identity() -> Self {
        Pose { t: Vec3::zeros(), r: [0.0; 3] }
    }

    pub fn from_coords(c: &[f64; 6]) -> Self {
        Pose::new(Vec3::new(c[0], c[1], c[2]), [c[3], c[4], c[5]])
    }

    pub fn coords(&self) -> [f64; 6] {
        [self.t.x, self.t.y, self.t.z, self.r[0], self.r[1], self.r[2]]
    }

    pub fn rotation(&self) -> Mat3 {
        let (sa, ca) = self.r[0].sin_cos();
        let (sb, cb) = self.r[1].sin_cos();
        let (sc, cc) = self.r[2].sin_cos();
        // Rz(rz) * Ry(ry) * Rx(rx), written out.
        Mat3::new(
            cb * cc,
            sa * sb * cc - ca * sc,
            ca * sb * cc + sa * sc,
            cb * sc,
            sa * sb * sc + ca * cc,
            ca * sb * sc - sa * cc,
            -sb,
            sa * cb,
            ca * cb,
        )
    }

    pub fn apply(&self, p: Vec3) -> Vec3 {
        self.rotation() * p + self.t
    }

    /// Recover angles from a rotation matrix (assumed orthonormal, det +1).
    pub fn from_rotation_translation(rot: &Mat3, t: Vec3) -> Self {
        let sb = (-rot[(2, 0)]).clamp(-1.0, 1.0);
        let b = sb.asin();
        let (a, c);
        if sb.abs() < 1.0 - 1e-12 {
            a = rot[(2, 1)].atan2(rot[(2, 2)]);
            c = rot[(1, 0)].atan2(rot[(0, 0)]);
        } else if sb > 0.0 {
            // Gimbal singularity: only a - c is determined; fix a = 0.
            a = 0.0;
            c = -rot[(0, 1)].atan2(rot[(0, 2)]);
        } else {
            a = 0.0;
            c = (-rot[(0, 1)]).atan2(-rot[(0, 2)]);
        }
        Pose::new(t, [a, b, c])
    }

    /// The second Tait-Bryan angle triple producing the same rotation matrix.
    ///
    /// The three-angle chart covers each rotation twice; the feasible region
    /// in coordinate space therefore carries every configuration at two
    /// points, and volume counting registers both.
    pub fn euler_dual(&self) -> Pose {
        Pose::new(
            self.t,
            [
                self.r[0] + std::f64::consts::PI,
                std::f64::consts::PI - self.r[1],
                self.r[2] + std::f64::consts::PI,
            ],
        )
    }
}

/// Set A in its template placement, set B moved by `pose`.
#[derive(Debug, Clone, Copy)]
pub struct Configuration<'a> {
    pub set_a: &'a PointSet,
    pub set_b: &'a PointSet,
    pub pose: Pose,
}

impl<'a> Configuration<'a> {
    pub fn new(set_a: &'a PointSet, set_b: &'a PointSet, pose: Pose) -> Self {
        Configuration { set_a, set_b, pose }
    }

    /// Position of a point of set A (identity placement).
    pub fn pos_a(&self, id: u32) -> Result<Vec3, GeomError> {
        self.set_a
            .get(id)
            .map(|p| p.pos)
            .ok_or(GeomError::UnknownPoint { set: 'A', id })
    }

    /// Position of a point of set B after the pose is applied.
    pub fn pos_b(&self, id: u32) -> Result<Vec3, GeomError> {
        self.set_b
            .get(id)
            .map(|p| self.pose.apply(p.pos))
            .ok_or(GeomError::UnknownPoint { set: 'B', id })
    }
}

/// Apply a pose to a bare template position.
pub fn apply_pose(pose: &Pose, p: Vec3) -> Vec3 {
    pose.apply(p)
}

/// Euclidean distance between point `a` of set A and point `b` of set B
/// in the given configuration.
pub fn pair_distance(config: &Configuration, a: u32, b: u32) -> Result<f64, GeomError> {
    Ok((config.pos_a(a)? - config.pos_b(b)?).norm())
}

fn dominant_axis(points: &[Vec3], set: char) -> Result<Vec3, GeomError> {
    let n = points.len() as f64;
    let mut c = Vec3::zeros();
    for p in points {
        c += p;
    }
    c /= n;
    let mut cov = Mat3::zeros();
    for p in points {
        let d = p - c;
        cov += d * d.transpose();
    }
    cov /= n;
    let eig = nalgebra::SymmetricEigen::new(cov);
    // SymmetricEigen does not order its eigenvalues; find the top two.
    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| eig.eigenvalues[j].partial_cmp(&eig.eigenvalues[i]).unwrap());
    let gap = eig.eigenvalues[order[0]] - eig.eigenvalues[order[1]];
    if gap < AXIS_GAP_TOL {
        return Err(GeomError::DegenerateSet { set, gap });
    }
    Ok(eig.eigenvectors.column(order[0]).into_owned())
}

/// Angle in `[0, pi/2]` between the dominant principal axes of the two sets
/// in their configured placements.  Axes are unsigned, so the angle is taken
/// against whichever orientation is closer.
pub fn principal_axis_angle(config: &Configuration) -> Result<f64, GeomError> {
    let a_pts: Vec<Vec3> = config.set_a.points().iter().map(|p| p.pos).collect();
    let b_pts: Vec<Vec3> = config
        .set_b
        .points()
        .iter()
        .map(|p| config.pose.apply(p.pos))
        .collect();
    let ua = dominant_axis(&a_pts, 'A')?;
    let ub = dominant_axis(&b_pts, 'B')?;
    Ok(ua.dot(&ub).abs().clamp(0.0, 1.0).acos())
}
