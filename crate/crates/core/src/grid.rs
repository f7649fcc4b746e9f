//! The six-axis Cartesian grid over pose coordinates.
//!
//! Axes 0..3 are translations (arbitrary step lengths, unbounded index
//! range); axes 3..6 are rotations, where the step is an exact divisor of a
//! full turn and indices wrap.  Cube assignment is a per-axis floor against
//! a shared origin offset, so a pose maps to exactly one key and keys are
//! stable across runs.

use crate::geom::{Pose, TAU};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GridError {
    #[error("translation step must be positive (axis {axis}: {step})")]
    BadTranslationStep { axis: usize, step: f64 },
    #[error("rotation axis {axis} needs at least one step per turn (got {count})")]
    BadRotationCount { axis: usize, count: i64 },
}

/// Anisotropic grid specification: three translation step lengths, three
/// rotation step counts per full turn, and a six-axis origin offset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub translation_steps: [f64; 3],
    pub rotation_counts: [i64; 3],
    pub origin: [f64; 6],
}

impl GridSpec {
    pub fn new(
        translation_steps: [f64; 3],
        rotation_counts: [i64; 3],
        origin: [f64; 6],
    ) -> Result<Self, GridError> {
        for (axis, &s) in translation_steps.iter().enumerate() {
            if !(s > 0.0) || !s.is_finite() {
                return Err(GridError::BadTranslationStep { axis, step: s });
            }
        }
        for (axis, &c) in rotation_counts.iter().enumerate() {
            if c < 1 {
                return Err(GridError::BadRotationCount { axis: axis + 3, count: c });
            }
        }
        Ok(GridSpec { translation_steps, rotation_counts, origin })
    }

    /// Uniform spec: one translation step and one rotation count for all axes.
    pub fn uniform(translation_step: f64, rotation_count: i64) -> Result<Self, GridError> {
        GridSpec::new(
            [translation_step; 3],
            [rotation_count; 3],
            [0.0; 6],
        )
    }

    pub fn with_origin(mut self, origin: [f64; 6]) -> Self {
        self.origin = origin;
        self
    }

    /// Step length along an axis (rotation steps derived from the count, so
    /// the step divides a full turn exactly).
    pub fn step(&self, axis: usize) -> f64 {
        if axis < 3 {
            self.translation_steps[axis]
        } else {
            TAU / self.rotation_counts[axis - 3] as f64
        }
    }

    /// Number of cells around a rotation axis; `None` for translations.
    pub fn period(&self, axis: usize) -> Option<i64> {
        if axis < 3 {
            None
        } else {
            Some(self.rotation_counts[axis - 3])
        }
    }

    fn wrap_index(&self, axis: usize, idx: i64) -> i64 {
        match self.period(axis) {
            None => idx,
            Some(p) => idx.rem_euclid(p),
        }
    }
}

/// Index tuple naming one grid cube.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CubeKey(pub [i64; 6]);

impl CubeKey {
    /// Neighbouring key across the given face (axis, +1/-1), with rotation
    /// axes wrapping across the seam.
    pub fn neighbor(&self, spec: &GridSpec, axis: usize, dir: i64) -> CubeKey {
        let mut k = self.0;
        k[axis] = spec.wrap_index(axis, k[axis] + dir);
        CubeKey(k)
    }
}

/// Cube containing a pose: per-axis `floor((coord - origin) / step)`, with
/// rotation indices reduced modulo the period.
pub fn cube_of(spec: &GridSpec, pose: &Pose) -> CubeKey {
    let c = pose.coords();
    let mut k = [0i64; 6];
    for axis in 0..6 {
        let idx = ((c[axis] - spec.origin[axis]) / spec.step(axis)).floor() as i64;
        k[axis] = spec.wrap_index(axis, idx);
    }
    CubeKey(k)
}

/// Centre pose of a cube: `origin + (index + 1/2) * step` per axis.
pub fn cube_center(spec: &GridSpec, key: &CubeKey) -> Pose {
    let mut c = [0.0f64; 6];
    for axis in 0..6 {
        c[axis] = spec.origin[axis] + (key.0[axis] as f64 + 0.5) * spec.step(axis);
    }
    Pose::from_coords(&c)
}

/// Lower corner coordinate of a cube along each axis.
pub fn cube_lower(spec: &GridSpec, key: &CubeKey) -> [f64; 6] {
    let mut c = [0.0f64; 6];
    for axis in 0..6 {
        c[axis] = spec.origin[axis] + key.0[axis] as f64 * spec.step(axis);
    }
    c
}

/// Cube containing the Euler-dual copies of this cube's poses: translation
/// unchanged, first and third rotation axes shifted by a half turn, the
/// second reflected about the half turn.  `None` when the rotation grid
/// does not carry cells onto cells under that map (odd counts, or an origin
/// that misaligns the reflection).
pub fn dual_cube(spec: &GridSpec, key: &CubeKey) -> Option<CubeKey> {
    let mut k = key.0;
    for axis in [3usize, 5] {
        let n = spec.rotation_counts[axis - 3];
        let shift = std::f64::consts::PI / spec.step(axis);
        let rounded = shift.round();
        if (shift - rounded).abs() > 1e-9 {
            return None;
        }
        k[axis] = (key.0[axis] + rounded as i64).rem_euclid(n);
    }
    let n = spec.rotation_counts[1];
    let m = (std::f64::consts::PI - 2.0 * spec.origin[4]) / spec.step(4);
    let rounded = m.round();
    if (m - rounded).abs() > 1e-9 {
        return None;
    }
    k[4] = (rounded as i64 - 1 - key.0[4]).rem_euclid(n);
    Some(CubeKey(k))
}

/// All 64 corner coordinate tuples of a cube, in lexicographic bit order
/// over axes (bit i of `corner` selects the upper end of axis i).
pub fn cube_corners(spec: &GridSpec, key: &CubeKey) -> Vec<[f64; 6]> {
    let lo = cube_lower(spec, key);
    let mut out = Vec::with_capacity(64);
    for mask in 0u32..64 {
        let mut c = lo;
        for axis in 0..6 {
            if mask & (1 << axis) != 0 {
                c[axis] += spec.step(axis);
            }
        }
        out.push(c);
    }
    out
}
