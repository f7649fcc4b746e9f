//! Bounding box of the Cayley base space.
//!
//! Every same-set pair has a fixed template distance and every active pair
//! a pinned target, so the chart's free parameters are constrained by
//! triangle inequalities through that fixed-length graph.  Upper bounds are
//! shortest fixed paths; lower bounds come from a fixed leg minus the
//! shortest way back, floored at zero.  The box is a superset of the true
//! base space: realizability inside it is decided later, point by point.

use super::tree::CompleteThreeTree;

#[derive(Debug, Clone, PartialEq)]
pub struct CayleyBounds {
    /// One `(lower, upper)` interval per free parameter, chart order.
    pub intervals: Vec<(f64, f64)>,
}

impl CayleyBounds {
    pub fn contains(&self, free: &[f64]) -> bool {
        free.len() == self.intervals.len()
            && free
                .iter()
                .zip(&self.intervals)
                .all(|(&v, &(lo, hi))| v >= lo && v <= hi)
    }

    pub fn widths(&self) -> Vec<f64> {
        self.intervals.iter().map(|&(lo, hi)| hi - lo).collect()
    }
}

/// Compute per-parameter bounds for the chart's free pairs.
pub fn cayley_bounds(tree: &CompleteThreeTree) -> CayleyBounds {
    let n = tree.vertices.len();
    const INF: f64 = f64::INFINITY;

    // Fixed-length graph: all intra pairs plus the pinned active pairs.
    let mut fixed = vec![vec![INF; n]; n];
    for i in 0..n {
        fixed[i][i] = 0.0;
        for j in (i + 1)..n {
            if tree.vertices[i].set == tree.vertices[j].set {
                let d = (tree.vertices[i].template - tree.vertices[j].template).norm();
                fixed[i][j] = d;
                fixed[j][i] = d;
            }
        }
    }
    for (k, &(a, b)) in tree.active_pairs.iter().enumerate() {
        let d = tree.active_targets[k];
        fixed[a][b] = fixed[a][b].min(d);
        fixed[b][a] = fixed[a][b];
    }

    // All-pairs shortest fixed paths (vertex count is at most a dozen).
    let mut short = fixed.clone();
    for m in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = short[i][m] + short[m][j];
                if via < short[i][j] {
                    short[i][j] = via;
                }
            }
        }
    }

    let intervals = tree
        .free_pairs
        .iter()
        .map(|&(u, v)| {
            let hi = short[u][v];
            let mut lo = 0.0f64;
            for w in 0..n {
                if w == u || w == v {
                    continue;
                }
                if fixed[u][w].is_finite() && short[w][v].is_finite() {
                    lo = lo.max(fixed[u][w] - short[w][v]);
                }
                if fixed[v][w].is_finite() && short[w][u].is_finite() {
                    lo = lo.max(fixed[v][w] - short[w][u]);
                }
            }
            (lo, hi)
        })
        .collect();
    CayleyBounds { intervals }
}
