//! Decomposition of grid hypercubes into boundary elements, and the linear
//! solves that intersect those elements with a target distance slice.
//!
//! A traversal cube is decomposed into low-dimensional elements sitting on
//! its surface; each element's corners are mapped through the distance
//! parametrization and the resulting linearized element is cut with the
//! hyperplane of target distances.  Elements are described in cube-relative
//! coordinates (fractions of one grid step per axis), so one plan serves
//! every cube of a traversal.

use crate::cayley::CayleyPoint;

/// Barycentric acceptance slack for simplex cuts.
pub const LAMBDA_TOL: f64 = 1e-9;
/// Span acceptance slack for parallelepiped cuts (|alpha| <= 1 + this).
pub const ALPHA_TOL: f64 = 1e-9;
/// Pivots below this make a system singular; the cut reports no point.
pub const PIVOT_TOL: f64 = 1e-12;

/// How cube surfaces are decomposed and cut.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecompositionVariant {
    /// Triangulate every matching-dimension facet into simplices.
    Simplicial,
    /// One parallelepiped per facet, spanned by face-center image
    /// differences; fastest, least accurate.
    Basis,
    /// Divide mapped edges into interval-tested sample points; only valid
    /// when a single pair carries the active constraint.
    Thick,
    /// Cone each face's lower-dimensional facets from the face center.
    FaceCenter,
    /// Simplicial first; retry a cube with the face-center elements when no
    /// simplicial element yields a feasible intersection.
    Hybrid,
}

/// A simplex element: `n = q + 1` corners in cube-relative coordinates and
/// the set of cube faces containing it (bit `i` per `frontier::face_index`).
#[derive(Debug, Clone)]
pub struct SimplexElement {
    pub corners: [[f64; 6]; 7],
    pub n: usize,
    pub face_mask: u16,
}

/// A parallelepiped element: the facet center plus the facet's free axes;
/// span vectors come from the per-cube face-center images.
#[derive(Debug, Clone)]
pub struct ParallelepipedElement {
    pub center: [f64; 6],
    pub axes: [usize; 6],
    pub n_axes: usize,
    pub face_mask: u16,
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut items: Vec<usize> = (0..k).collect();
    fn heap(n: usize, items: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if n <= 1 {
            out.push(items.clone());
            return;
        }
        for i in 0..n - 1 {
            heap(n - 1, items, out);
            if n % 2 == 0 {
                items.swap(i, n - 1);
            } else {
                items.swap(0, n - 1);
            }
        }
        heap(n - 1, items, out);
    }
    heap(k, &mut items, &mut out);
    out
}

/// Axis subsets of size `q`, ascending by bitmask for a stable order.
fn axis_subsets(q: usize) -> Vec<Vec<usize>> {
    (0u32..64)
        .filter(|m| m.count_ones() as usize == q)
        .map(|m| (0..6).filter(|a| m & (1 << a) != 0).collect())
        .collect()
}

fn face_bit(axis: usize, upper: bool) -> u16 {
    1 << (2 * axis + upper as usize)
}

/// All `q`-dimensional facets of the 6-cube, each triangulated into `q!`
/// simplices by walking the free axes in permutation order.
pub fn decompose_simplicial(q: usize) -> Vec<SimplexElement> {
    assert!((1..=6).contains(&q));
    let perms = permutations(q);
    let mut out = Vec::new();
    for free in axis_subsets(q) {
        let fixed: Vec<usize> = (0..6).filter(|a| !free.contains(a)).collect();
        for assignment in 0u32..(1 << fixed.len()) {
            let mut base = [0.0f64; 6];
            let mut face_mask = 0u16;
            for (i, &a) in fixed.iter().enumerate() {
                let upper = assignment & (1 << i) != 0;
                base[a] = if upper { 1.0 } else { 0.0 };
                face_mask |= face_bit(a, upper);
            }
            for perm in &perms {
                let mut corners = [[0.0f64; 6]; 7];
                corners[0] = base;
                for step in 0..q {
                    corners[step + 1] = corners[step];
                    corners[step + 1][free[perm[step]]] = 1.0;
                }
                out.push(SimplexElement { corners, n: q + 1, face_mask });
            }
        }
    }
    out
}

/// Per 5-face: triangulate its `(q-1)`-facets, then cone each simplex from
/// the face center.  Every element carries exactly one face tag.
pub fn decompose_face_center(q: usize) -> Vec<SimplexElement> {
    assert!((1..=6).contains(&q));
    let perms = permutations(q - 1);
    let mut out = Vec::new();
    for face_axis in 0..6 {
        for upper in [false, true] {
            let face_val = if upper { 1.0 } else { 0.0 };
            let in_face: Vec<usize> = (0..6).filter(|&a| a != face_axis).collect();
            let mut center = [0.5f64; 6];
            center[face_axis] = face_val;
            let face_mask = face_bit(face_axis, upper);
            // (q-1)-facets of the 5-face: q-1 free axes among the face's 5.
            for free_sel in subsets_of(&in_face, q - 1) {
                let fixed: Vec<usize> = in_face
                    .iter()
                    .copied()
                    .filter(|a| !free_sel.contains(a))
                    .collect();
                for assignment in 0u32..(1 << fixed.len()) {
                    let mut base = [0.0f64; 6];
                    base[face_axis] = face_val;
                    for (i, &a) in fixed.iter().enumerate() {
                        base[a] = if assignment & (1 << i) != 0 { 1.0 } else { 0.0 };
                    }
                    for perm in &perms {
                        let mut corners = [[0.0f64; 6]; 7];
                        corners[0] = base;
                        for step in 0..q - 1 {
                            corners[step + 1] = corners[step];
                            corners[step + 1][free_sel[perm[step]]] = 1.0;
                        }
                        corners[q] = center;
                        out.push(SimplexElement { corners, n: q + 1, face_mask });
                    }
                }
            }
        }
    }
    out
}

fn subsets_of(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    (0u32..(1 << items.len()))
        .filter(|m| m.count_ones() as usize == k)
        .map(|m| {
            items
                .iter()
                .enumerate()
                .filter(|(i, _)| m & (1 << i) != 0)
                .map(|(_, &a)| a)
                .collect()
        })
        .collect()
}

/// One parallelepiped per `q`-facet, centered on the facet midpoint and
/// spanned by the facet's free axes.
pub fn decompose_basis(q: usize) -> Vec<ParallelepipedElement> {
    assert!((1..=6).contains(&q));
    let mut out = Vec::new();
    for free in axis_subsets(q) {
        let fixed: Vec<usize> = (0..6).filter(|a| !free.contains(a)).collect();
        for assignment in 0u32..(1 << fixed.len()) {
            let mut center = [0.5f64; 6];
            let mut face_mask = 0u16;
            for (i, &a) in fixed.iter().enumerate() {
                let upper = assignment & (1 << i) != 0;
                center[a] = if upper { 1.0 } else { 0.0 };
                face_mask |= face_bit(a, upper);
            }
            let mut axes = [0usize; 6];
            axes[..q].copy_from_slice(&free);
            out.push(ParallelepipedElement { center, axes, n_axes: q, face_mask });
        }
    }
    out
}

/// The edges used by the thick variant: the one-dimensional face-center
/// cone (face center to each face vertex).
pub fn thick_edges() -> Vec<SimplexElement> {
    decompose_face_center(1)
}

/// Dividing points of a mapped edge, keeping those whose active coordinate
/// lies inside `[lo, hi]`.  `s` sub-segments produce `s + 1` candidates.
pub fn divide_mapped_edge(
    a: &CayleyPoint,
    b: &CayleyPoint,
    s: usize,
    lo: f64,
    hi: f64,
) -> Vec<CayleyPoint> {
    debug_assert_eq!(a.q(), 1);
    let s = s.max(1);
    (0..=s)
        .filter_map(|i| {
            let p = a.lerp(b, i as f64 / s as f64);
            let d = p.active()[0];
            (d >= lo && d <= hi).then_some(p)
        })
        .collect()
}

/// Solve `A x = b` in place by Gaussian elimination with partial pivoting.
/// Returns `None` when the largest available pivot drops below
/// [`PIVOT_TOL`].
fn solve(a: &mut [[f64; 7]; 7], b: &mut [f64; 7], n: usize) -> Option<()> {
    for col in 0..n {
        let mut pivot_row = col;
        let mut pivot_abs = a[col][col].abs();
        for row in col + 1..n {
            let v = a[row][col].abs();
            if v > pivot_abs {
                pivot_abs = v;
                pivot_row = row;
            }
        }
        if pivot_abs < PIVOT_TOL {
            return None;
        }
        if pivot_row != col {
            a.swap(pivot_row, col);
            b.swap(pivot_row, col);
        }
        let inv = 1.0 / a[col][col];
        for row in col + 1..n {
            let factor = a[row][col] * inv;
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    for col in (0..n).rev() {
        let mut v = b[col];
        for k in col + 1..n {
            v -= a[col][k] * b[k];
        }
        b[col] = v / a[col][col];
    }
    Some(())
}

/// Cut a mapped simplex with the target slice: find the convex combination
/// of the corner images whose active block equals `targets`.
///
/// Returns the interpolated point (active block set to the targets exactly)
/// or `None` when the system is singular or the combination leaves the
/// simplex.
pub fn intersect_simplex_slice(images: &[CayleyPoint], targets: &[f64]) -> Option<CayleyPoint> {
    let q = targets.len();
    let n = q + 1;
    debug_assert_eq!(images.len(), n);
    debug_assert!(images.iter().all(|p| p.q() == q));
    let mut a = [[0.0f64; 7]; 7];
    let mut b = [0.0f64; 7];
    for j in 0..n {
        a[0][j] = 1.0;
    }
    b[0] = 1.0;
    for i in 0..q {
        for j in 0..n {
            a[i + 1][j] = images[j].active()[i];
        }
        b[i + 1] = targets[i];
    }
    solve(&mut a, &mut b, n)?;
    if b[..n].iter().any(|&l| l < -LAMBDA_TOL) {
        return None;
    }
    let mut free = [0.0f64; 6];
    for (j, img) in images.iter().enumerate() {
        for (k, f) in img.free().iter().enumerate() {
            free[k] += b[j] * f;
        }
    }
    Some(CayleyPoint::new(targets, &free[..6 - q]))
}

/// Cut a mapped parallelepiped with the target slice: solve for the span
/// coefficients that land the active block on `targets`, accepting only
/// points inside the spanned region.
pub fn intersect_parallelepiped_slice(
    center: &CayleyPoint,
    basis: &[[f64; 6]],
    targets: &[f64],
) -> Option<CayleyPoint> {
    let q = targets.len();
    debug_assert_eq!(basis.len(), q);
    debug_assert_eq!(center.q(), q);
    let mut a = [[0.0f64; 7]; 7];
    let mut b = [0.0f64; 7];
    for i in 0..q {
        for (j, vec) in basis.iter().enumerate() {
            a[i][j] = vec[i];
        }
        b[i] = targets[i] - center.active()[i];
    }
    solve(&mut a, &mut b, q)?;
    if b[..q].iter().any(|&alpha| alpha.abs() > 1.0 + ALPHA_TOL) {
        return None;
    }
    let mut free = [0.0f64; 6];
    free[..6 - q].copy_from_slice(center.free());
    for (j, vec) in basis.iter().enumerate() {
        for k in 0..6 - q {
            free[k] += b[j] * vec[q + k];
        }
    }
    Some(CayleyPoint::new(targets, &free[..6 - q]))
}
