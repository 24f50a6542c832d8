//! Numerical laboratory for dyadic martingales and the Bellman-function
//! approach to the sharp inequality `𝔼 e^{f_n} ≤ 𝔼 e^{2 (Sf_n)²}`.
//!
//! * [`martingale`]: trees, increments, square functions, transforms, splicing.
//! * [`candidates`]: the value function, analytic Bellman candidates, and
//!   property checkers.
//! * [`solver`]: value iteration for the Bellman function in reduced 1-D
//!   and direct 2-D form.
//! * [`lab`]: inequality checks, the `log₂ e` counterexample family, and
//!   the extremal-martingale search.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod candidates;
pub mod error;
pub mod grid;
pub mod lab;
pub mod martingale;
pub mod numeric;
pub mod solver;

#[cfg(test)]
mod properties;

pub use error::{Error, Result};
pub use grid::{BoundaryPolicy, Grid1D};
pub use martingale::{DyadicMartingale, IncrementLaw, IncrementTree, LeafProcess, SignSequence};
pub use solver::{IterationReport, SolverConfig};
pub use lab::{ExampleFamilySpec, InequalityReport, SearchConfig};
