//! Cayley (distance) parametrization of active constraint regions.
//!
//! A region with active pair set Q is described by an active constraint
//! graph whose vertices are the endpoints of Q (augmented per set to at
//! least three non-collinear points).  A complete 3-tree over that graph
//! yields the Cayley chart: active edges are pinned to their target
//! lengths, the remaining tree edges are the free parameters, and
//! realization is a chain of trilaterations, one sign bit per placed
//! vertex.

mod acg;
mod basegrid;
mod bounds;
mod point;
mod realize;
mod tree;

pub use acg::{build_acg, AcgError, AcgVertex, ActiveConstraintGraph, SetLabel};
pub use basegrid::{enumerate_base_grid, BaseGridStats};
pub use bounds::{cayley_bounds, CayleyBounds};
pub use point::{CayleyPoint, FlipSignature};
pub use realize::{
    flip_of, flip_observation, forward_map, realize, trilaterate, FlipObservation, RealizeError,
};
pub use tree::{enumerate_flips, find_complete_3tree, CompleteThreeTree, EdgeClass, TreeError};
