//! Deletion problems on planar permutation CSPs: treewidth dynamic programs,
//! planar contraction decompositions, segment/body guessing, problem
//! reductions, Subset-FVS kernelization and a hardness-instance generator.

pub mod csp;
pub mod decomp;
pub mod dp;
pub mod error;
pub mod flow;
pub mod gen;
pub mod graph;
pub mod hardness;
pub mod kernel;
pub mod oracle;
pub mod reductions;
pub mod segments;
pub mod solvers;
pub mod treewidth;

pub use error::{Error, Result};
pub use graph::Graph;
