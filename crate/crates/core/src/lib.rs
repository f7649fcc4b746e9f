//! Core engine: geometry, constraint graphs, Cayley parametrization, grid
//! traversal, and measurement statistics for two-body assembly spaces.

pub mod atlas;
pub mod cayley;
pub mod constraint;
pub mod decomp;
pub mod frontier;
pub mod geom;
pub mod grid;
pub mod measure;
pub mod sampler;
