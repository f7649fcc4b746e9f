//! Uniform grid over the Cayley base space's bounding box.

use super::bounds::CayleyBounds;
use super::point::CayleyPoint;
use super::realize::realize;
use super::tree::{enumerate_flips, CompleteThreeTree};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BaseGridStats {
    pub candidates: u64,
    pub realizable: u64,
}

/// Lay a uniform grid at `step` spacing over the bounds box and keep the
/// candidates for which at least one flip realizes.  Candidates are emitted
/// in lexicographic axis order; each grid axis is centred in its interval
/// so spacing is exactly `step` (a degenerate or narrow axis contributes a
/// single midpoint value).  With no free parameters there is exactly one
/// candidate: the pinned active block.
pub fn enumerate_base_grid(
    tree: &CompleteThreeTree,
    bounds: &CayleyBounds,
    step: f64,
) -> (Vec<CayleyPoint>, BaseGridStats) {
    assert!(step > 0.0, "grid step must be positive");
    let targets: Vec<f64> = tree.active_targets.clone();
    let flips = enumerate_flips(tree);

    let axes: Vec<Vec<f64>> = bounds
        .intervals
        .iter()
        .map(|&(lo, hi)| {
            let width = (hi - lo).max(0.0);
            let n = ((width / step).floor() as usize).max(1);
            let offset = (width - (n - 1) as f64 * step) / 2.0;
            (0..n).map(|i| lo + offset + i as f64 * step).collect()
        })
        .collect();

    let mut stats = BaseGridStats::default();
    let mut out = Vec::new();
    let mut idx = vec![0usize; axes.len()];
    loop {
        let free: Vec<f64> = idx.iter().zip(&axes).map(|(&i, ax)| ax[i]).collect();
        let c = CayleyPoint::new(&targets, &free);
        stats.candidates += 1;
        if flips.iter().any(|f| realize(tree, &c, f).is_ok()) {
            stats.realizable += 1;
            out.push(c);
        }
        // Odometer increment, last axis fastest; an empty axis list means
        // the single pinned candidate was just emitted.
        let mut k = axes.len();
        loop {
            if k == 0 {
                return (out, stats);
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < axes[k].len() {
                break;
            }
            idx[k] = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cayley::{build_acg, cayley_bounds, find_complete_3tree};
    use crate::constraint::{ActiveTarget, AssemblySystem, ConstraintSystem, PairRule};
    use crate::geom::{Point, PointSet};

    fn sys33() -> AssemblySystem {
        let a = PointSet::new(vec![
            Point::new(1, 0.0, 0.0, 0.0, 1.0),
            Point::new(2, 1.6, 0.0, 0.0, 1.0),
            Point::new(3, 0.7, 1.3, 0.0, 1.0),
        ])
        .unwrap();
        let b = PointSet::new(vec![
            Point::new(1, 0.0, 0.0, 0.0, 1.1),
            Point::new(2, 1.5, 0.0, 0.0, 0.9),
            Point::new(3, 0.5, 1.2, 0.3, 1.0),
        ])
        .unwrap();
        AssemblySystem::new(
            a,
            b,
            ConstraintSystem::new(PairRule::new(0.75, 0.0), PairRule::new(1.0, 0.9)),
        )
    }

    /// The emitted set must equal a direct scan of the same grid.
    #[test]
    fn matches_direct_realizability_scan() {
        let sys = sys33();
        let g = build_acg(&sys, &[(1, 1), (2, 2)], ActiveTarget::Midpoint).unwrap();
        let tree = find_complete_3tree(&g).unwrap();
        let bounds = cayley_bounds(&tree);
        let step = 0.9;
        let (points, stats) = enumerate_base_grid(&tree, &bounds, step);
        assert_eq!(points.len() as u64, stats.realizable);
        assert!(stats.candidates >= stats.realizable);
        assert!(stats.realizable > 0, "fixture produced an empty base grid");

        // Independent scan: rebuild the axis values and test every candidate.
        let flips = crate::cayley::enumerate_flips(&tree);
        let axes: Vec<Vec<f64>> = bounds
            .intervals
            .iter()
            .map(|&(lo, hi)| {
                let width = (hi - lo).max(0.0);
                let n = ((width / step).floor() as usize).max(1);
                let offset = (width - (n - 1) as f64 * step) / 2.0;
                (0..n).map(|i| lo + offset + i as f64 * step).collect()
            })
            .collect();
        let mut expect = Vec::new();
        let mut idx = [0usize; 4];
        'outer: loop {
            let free: Vec<f64> = idx.iter().zip(&axes).map(|(&i, ax)| ax[i]).collect();
            let c = CayleyPoint::new(&tree.active_targets, &free);
            if flips.iter().any(|f| realize(&tree, &c, f).is_ok()) {
                expect.push(c);
            }
            let mut k = 4;
            loop {
                if k == 0 {
                    break 'outer;
                }
                k -= 1;
                idx[k] += 1;
                if idx[k] < axes[k].len() {
                    break;
                }
                idx[k] = 0;
            }
        }
        assert_eq!(points.len(), expect.len());
        for (p, e) in points.iter().zip(&expect) {
            assert_eq!(p.coords(), e.coords());
        }
    }

    /// Axis spacing is exactly the requested step, centred in each interval.
    #[test]
    fn axis_values_use_exact_step() {
        let sys = sys33();
        let g = build_acg(&sys, &[(1, 1)], ActiveTarget::Midpoint).unwrap();
        let tree = find_complete_3tree(&g).unwrap();
        let bounds = cayley_bounds(&tree);
        let (points, _) = enumerate_base_grid(&tree, &bounds, 0.5);
        assert!(!points.is_empty());
        // Collect distinct values on the first free axis and check spacing.
        let mut vals: Vec<f64> = points.iter().map(|p| p.free()[0]).collect();
        vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        vals.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        for w in vals.windows(2) {
            let gap = w[1] - w[0];
            let steps = (gap / 0.5).round();
            assert!((gap - steps * 0.5).abs() < 1e-9, "gap {gap} not a step multiple");
        }
    }
}
