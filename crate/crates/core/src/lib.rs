//! Decide whether real numbers indexed by the 2- or 3-subsets of a label
//! set are the pairwise distances or triple weights of an edge-weighted
//! tree, reconstruct that tree, and run neighbor-joining variants.

pub mod error;
pub mod fixtures;
pub mod linalg;
pub mod nj;
pub mod oracle;
pub mod reconstruct;
pub mod scalar;
pub mod tree;
pub mod weights;

pub use error::{Error, Result};
pub use scalar::{Rational, Scalar};
pub use tree::{random_tree, tree_equal, Bell, Edge, TreeBuilder, WeightedTree};
pub use weights::{DoubleWeights, TripleWeights};
