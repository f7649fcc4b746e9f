//! Complete 3-tree search over an active constraint graph.
//!
//! A complete 3-tree is built by fixing a base triangle and then attaching
//! each further vertex to three earlier, mutually adjacent vertices.  For a
//! two-set graph whose intra-set subgraphs must each span their set as a
//! complete 3-tree, a counting argument pins the cross-set tree edges down
//! to exactly six, arranged as a nested "staircase": an ordered anchor
//! triple per side `(x1, x2, x3)` / `(w1, w2, w3)` with cross edges
//! `{(xi, wj) : i + j <= 4}`.  The search therefore enumerates anchor
//! triples on both sides (both set orders, lexicographic, first hit wins)
//! and checks that every active pair lands on the staircase.  Graphs with
//! no covering staircase have no valid chart and are reported as not nice.

use super::acg::{ActiveConstraintGraph, AcgVertex, SetLabel};
use super::point::{CayleyPoint, FlipSignature};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum TreeError {
    #[error("no complete 3-tree covers the active pairs {pairs:?}; the graph is not nice")]
    NotNice { pairs: Vec<(u32, u32)> },
}

/// Classification of a tree edge, which decides where its length comes from
/// during realization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EdgeClass {
    /// Same-set pair; length fixed by the rigid template.
    Intra { length: f64 },
    /// Active cross pair, pinned to its target; index into the active block.
    Active { index: usize },
    /// Cayley parameter; index into the free block.
    Free { index: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeEdge {
    pub u: usize,
    pub v: usize,
    pub class: EdgeClass,
}

/// Whether a trilateration sign bit is genuinely free or forced by the
/// chirality of a rigid set (a vertex whose three parents live in its own
/// set can only take the template's orientation).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BitKind {
    Free,
    Forced(bool),
}

/// The Cayley chart: vertex insertion order, parent triples, and the
/// classified edge set (3n - 6 edges in total).
#[derive(Debug, Clone)]
pub struct CompleteThreeTree {
    pub vertices: Vec<AcgVertex>,
    /// Insertion order; `order[0..3]` is the base triangle.
    pub order: Vec<usize>,
    /// Parent triple for `order[3 + k]`.
    pub parents: Vec<[usize; 3]>,
    /// Parent edge classes aligned with `parents`.
    pub parent_edges: Vec<[EdgeClass; 3]>,
    /// Base triangle edges `(0-1, 0-2, 1-2)` in order.
    pub base_edges: [EdgeClass; 3],
    pub edges: Vec<TreeEdge>,
    /// Active pairs (vertex indices, A side first), ascending id order.
    pub active_pairs: Vec<(usize, usize)>,
    pub active_targets: Vec<f64>,
    /// Free pairs (vertex indices, A side first), ascending id order.
    pub free_pairs: Vec<(usize, usize)>,
    /// Sign-bit nature per trilaterated vertex (`order[3..]`).
    pub bits: Vec<BitKind>,
}

impl CompleteThreeTree {
    pub fn active_count(&self) -> usize {
        self.active_pairs.len()
    }

    pub fn free_count(&self) -> usize {
        self.free_pairs.len()
    }

    pub fn bit_count(&self) -> usize {
        self.order.len() - 3
    }

    /// Resolve an edge length against a Cayley point.
    pub fn edge_length(&self, class: &EdgeClass, point: &CayleyPoint) -> f64 {
        match *class {
            EdgeClass::Intra { length } => length,
            EdgeClass::Active { index } => point.active()[index],
            EdgeClass::Free { index } => point.free()[index],
        }
    }

    /// Point-id form `(a, b)` of the active pairs.
    pub fn active_id_pairs(&self) -> Vec<(u32, u32)> {
        self.active_pairs
            .iter()
            .map(|&(i, j)| (self.vertices[i].point_id, self.vertices[j].point_id))
            .collect()
    }

    /// Point-id form `(a, b)` of the free pairs.
    pub fn free_id_pairs(&self) -> Vec<(u32, u32)> {
        self.free_pairs
            .iter()
            .map(|&(i, j)| (self.vertices[i].point_id, self.vertices[j].point_id))
            .collect()
    }
}

impl fmt::Display for CompleteThreeTree {
    /// Text form for debugging: one line for the base triangle, then one
    /// per inserted vertex with its parents and edge classes.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = |i: usize| {
            let v = &self.vertices[i];
            format!("{}{}", v.set.letter(), v.point_id)
        };
        let class_str = |c: &EdgeClass| match *c {
            EdgeClass::Intra { length } => format!("intra({length:.6})"),
            EdgeClass::Active { index } => {
                format!("active[{index}]={:.6}", self.active_targets[index])
            }
            EdgeClass::Free { index } => format!("free[{index}]"),
        };
        writeln!(
            f,
            "base: {} {} {} [{} {} {}]",
            name(self.order[0]),
            name(self.order[1]),
            name(self.order[2]),
            class_str(&self.base_edges[0]),
            class_str(&self.base_edges[1]),
            class_str(&self.base_edges[2]),
        )?;
        for k in 0..self.parents.len() {
            let v = self.order[3 + k];
            let p = self.parents[k];
            let e = self.parent_edges[k];
            let bit = match self.bits[k] {
                BitKind::Free => "free-bit".to_string(),
                BitKind::Forced(neg) => format!("forced-bit({})", if neg { '-' } else { '+' }),
            };
            writeln!(
                f,
                "insert {} <- {} {} {} [{} {} {}] {}",
                name(v),
                name(p[0]),
                name(p[1]),
                name(p[2]),
                class_str(&e[0]),
                class_str(&e[1]),
                class_str(&e[2]),
                bit,
            )?;
        }
        Ok(())
    }
}

fn norm_pair(u: usize, v: usize) -> (usize, usize) {
    if u < v {
        (u, v)
    } else {
        (v, u)
    }
}

fn template_collinear(acg: &ActiveConstraintGraph, tri: [usize; 3]) -> bool {
    let a = acg.vertices[tri[0]].template;
    let b = acg.vertices[tri[1]].template;
    let c = acg.vertices[tri[2]].template;
    (b - a).cross(&(c - a)).norm() <= 1e-9
}

/// Search for a complete 3-tree chart.  Deterministic: set order (A-base
/// first), then lexicographic anchor triples; the first covering staircase
/// is returned.
pub fn find_complete_3tree(
    acg: &ActiveConstraintGraph,
) -> Result<CompleteThreeTree, TreeError> {
    let active_norm: Vec<(usize, usize)> = acg
        .active_pairs
        .iter()
        .map(|&(a, b)| norm_pair(a, b))
        .collect();

    for first in [SetLabel::A, SetLabel::B] {
        let second = if first == SetLabel::A { SetLabel::B } else { SetLabel::A };
        let fs = acg.set_indices(first);
        let ss = acg.set_indices(second);
        if fs.len() < 3 || ss.len() < 3 {
            continue;
        }
        for &x1 in &fs {
            for &x2 in &fs {
                if x2 == x1 {
                    continue;
                }
                for &x3 in &fs {
                    if x3 == x1 || x3 == x2 {
                        continue;
                    }
                    if template_collinear(acg, [x1, x2, x3]) {
                        continue;
                    }
                    for &w1 in &ss {
                        for &w2 in &ss {
                            if w2 == w1 {
                                continue;
                            }
                            for &w3 in &ss {
                                if w3 == w1 || w3 == w2 {
                                    continue;
                                }
                                let stair = [
                                    norm_pair(x1, w1),
                                    norm_pair(x1, w2),
                                    norm_pair(x1, w3),
                                    norm_pair(x2, w1),
                                    norm_pair(x2, w2),
                                    norm_pair(x3, w1),
                                ];
                                if active_norm.iter().all(|p| stair.contains(p)) {
                                    return Ok(build_tree(
                                        acg,
                                        first,
                                        [x1, x2, x3],
                                        [w1, w2, w3],
                                    ));
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    Err(TreeError::NotNice { pairs: acg.active_id_pairs() })
}

fn build_tree(
    acg: &ActiveConstraintGraph,
    first: SetLabel,
    x: [usize; 3],
    w: [usize; 3],
) -> CompleteThreeTree {
    let second = if first == SetLabel::A { SetLabel::B } else { SetLabel::A };
    let first_rest: Vec<usize> = acg
        .set_indices(first)
        .into_iter()
        .filter(|i| !x.contains(i))
        .collect();
    let second_rest: Vec<usize> = acg
        .set_indices(second)
        .into_iter()
        .filter(|i| !w.contains(i))
        .collect();

    let mut order: Vec<usize> = x.to_vec();
    order.extend(&first_rest);
    order.extend(w);
    order.extend(&second_rest);

    let mut parents: Vec<[usize; 3]> = Vec::new();
    for _ in &first_rest {
        parents.push(x);
    }
    parents.push(x); // w1
    parents.push([w[0], x[0], x[1]]); // w2
    parents.push([w[0], w[1], x[0]]); // w3
    for _ in &second_rest {
        parents.push(w);
    }

    // Classify the six cross edges: actives keep their graph order, the
    // rest become free parameters ordered by (a id, b id).
    let active_norm: Vec<(usize, usize)> = acg
        .active_pairs
        .iter()
        .map(|&(a, b)| norm_pair(a, b))
        .collect();
    let stair = [
        norm_pair(x[0], w[0]),
        norm_pair(x[0], w[1]),
        norm_pair(x[0], w[2]),
        norm_pair(x[1], w[0]),
        norm_pair(x[1], w[1]),
        norm_pair(x[2], w[0]),
    ];
    let mut free_pairs: Vec<(usize, usize)> = stair
        .iter()
        .copied()
        .filter(|p| !active_norm.contains(p))
        .collect();
    // Cross pairs always have the A vertex at the lower index (A block comes
    // first in the vertex list), so norm order is already (a, b); sort by ids.
    free_pairs.sort_by_key(|&(a, b)| (acg.vertices[a].point_id, acg.vertices[b].point_id));

    let classify = |u: usize, v: usize| -> EdgeClass {
        let p = norm_pair(u, v);
        if acg.vertices[u].set == acg.vertices[v].set {
            EdgeClass::Intra { length: acg.intra_distance(u, v) }
        } else if let Some(i) = active_norm.iter().position(|&q| q == p) {
            EdgeClass::Active { index: i }
        } else {
            let i = free_pairs.iter().position(|&q| q == p).unwrap();
            EdgeClass::Free { index: i }
        }
    };

    let base_edges = [
        classify(order[0], order[1]),
        classify(order[0], order[2]),
        classify(order[1], order[2]),
    ];
    let mut edges = vec![
        TreeEdge { u: order[0], v: order[1], class: base_edges[0] },
        TreeEdge { u: order[0], v: order[2], class: base_edges[1] },
        TreeEdge { u: order[1], v: order[2], class: base_edges[2] },
    ];
    let mut parent_edges: Vec<[EdgeClass; 3]> = Vec::new();
    for (k, &p) in parents.iter().enumerate() {
        let v = order[3 + k];
        let mut cls = [EdgeClass::Intra { length: 0.0 }; 3];
        for (slot, &pu) in p.iter().enumerate() {
            cls[slot] = classify(v, pu);
            edges.push(TreeEdge { u: v, v: pu, class: cls[slot] });
        }
        parent_edges.push(cls);
    }

    // Sign bits: vertices attached entirely within their own set are forced
    // to the template's orientation.
    let mut bits = Vec::new();
    for (k, &p) in parents.iter().enumerate() {
        let v = order[3 + k];
        let same_set = p.iter().all(|&pu| acg.vertices[pu].set == acg.vertices[v].set);
        if same_set {
            let t0 = acg.vertices[p[0]].template;
            let vol = (acg.vertices[p[1]].template - t0)
                .cross(&(acg.vertices[p[2]].template - t0))
                .dot(&(acg.vertices[v].template - t0));
            bits.push(BitKind::Forced(vol < 0.0));
        } else {
            bits.push(BitKind::Free);
        }
    }

    CompleteThreeTree {
        vertices: acg.vertices.clone(),
        order,
        parents,
        parent_edges,
        base_edges,
        edges,
        active_pairs: acg.active_pairs.clone(),
        active_targets: acg.active_targets.clone(),
        free_pairs,
        bits,
    }
}

/// All flip signatures that can realize: free bits range over both signs,
/// forced bits are pinned.  Enumeration order is by the free-bit counter,
/// least-significant free bit first, so results are reproducible.
pub fn enumerate_flips(tree: &CompleteThreeTree) -> Vec<FlipSignature> {
    let free_positions: Vec<usize> = tree
        .bits
        .iter()
        .enumerate()
        .filter(|(_, b)| matches!(b, BitKind::Free))
        .map(|(i, _)| i)
        .collect();
    let mut base = 0u32;
    for (i, b) in tree.bits.iter().enumerate() {
        if let BitKind::Forced(true) = b {
            base |= 1 << i;
        }
    }
    let n = tree.bit_count();
    (0..(1u32 << free_positions.len()))
        .map(|mask| {
            let mut bits = base;
            for (j, &pos) in free_positions.iter().enumerate() {
                if mask & (1 << j) != 0 {
                    bits |= 1 << pos;
                }
            }
            FlipSignature::new(bits, n)
        })
        .collect()
}
