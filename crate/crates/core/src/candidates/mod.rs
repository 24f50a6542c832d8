//! The value function `V`, analytic Bellman candidates, and checkers for
//! majorization, parabolic concavity, and the initial condition.

mod checks;
mod diagnostics;
mod spec;

pub use checks::{
    check_initial, check_majorization, check_parabolic_concavity, is_non_increasing, standard_deltas,
    supermartingale_check, AxisRange, Property, PropertyReport, ScanGrid, Witness, EQUALITY_TOL, INEQUALITY_TOL,
    SUPERMARTINGALE_TOL,
};
pub use diagnostics::{heat_residual, ode_residual, zero_crossing_bound, ZeroCrossing, FD_STEP, ZERO_CROSSING_TOL};
pub use spec::{CandidateKind, CandidateSpec, ExpPolyTerm, ValueFunction, MAX_EXPONENT};
