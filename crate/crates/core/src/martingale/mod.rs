//! Simple dyadic martingales as finite binary trees: difference sequences,
//! square functions, `±1` transforms, splicing, sampling, and leaf folds.

mod io;
mod process;
mod random;
mod tree;

pub use io::{from_json, to_json};
pub use process::{exp_moment, expectation, expectation_from, lp_ratio, LeafProcess, LeafState, DEPTH_CAP};
pub use random::{random_martingale, IncrementLaw};
pub use tree::{DyadicMartingale, IncrementTree, SignSequence, INVARIANT_TOL, MAX_MATERIALIZED_DEPTH};
