use serde::{Deserialize, Serialize};

use crate::candidates::{CandidateSpec, ValueFunction};
use crate::error::{Error, Result};
use crate::grid::Grid1D;

/// Something with an `x`-axis profile `g(x) = G(x, 0)`.
pub trait Profile {
    fn profile_at(&self, x: f64) -> Result<f64>;
}

impl Profile for CandidateSpec {
    fn profile_at(&self, x: f64) -> Result<f64> {
        self.try_eval(x, 0.0)
    }
}

impl Profile for ValueFunction {
    fn profile_at(&self, x: f64) -> Result<f64> {
        self.try_eval(x, 0.0)
    }
}

impl Profile for Grid1D {
    fn profile_at(&self, x: f64) -> Result<f64> {
        if !self.contains(x) {
            return Err(Error::Range { x, y: 0.0 });
        }
        Ok(self.interpolate(x).expect("x inside grid"))
    }
}

/// Signed gaps between a numerical solution and a reference profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    /// `max_x (solution - reference)`; positive means the reference fails
    /// to dominate somewhere.
    pub max_above_reference: f64,
    pub at_above_reference: f64,
    /// `max_x (V(x,0) - solution)`; positive means the solution dips
    /// below the obstacle.
    pub max_below_obstacle: f64,
    pub at_below_obstacle: f64,
}

impl GapReport {
    /// Whether `V <= solution <= reference` holds up to `tol`.
    pub fn sandwiched(&self, tol: f64) -> bool {
        self.max_above_reference <= tol && self.max_below_obstacle <= tol
    }
}

/// Compares a solved profile with a reference on the solution's grid.
pub fn compare_with_candidate(solution: &Grid1D, reference: &dyn Profile) -> Result<GapReport> {
    let mut rep = GapReport {
        max_above_reference: f64::NEG_INFINITY,
        at_above_reference: solution.x_min,
        max_below_obstacle: f64::NEG_INFINITY,
        at_below_obstacle: solution.x_min,
    };
    for (x, &s) in solution.xs().zip(&solution.values) {
        let r = reference.profile_at(x)?;
        if s - r > rep.max_above_reference {
            rep.max_above_reference = s - r;
            rep.at_above_reference = x;
        }
        let v = x.exp() - 1.0;
        if v - s > rep.max_below_obstacle {
            rep.max_below_obstacle = v - s;
            rep.at_below_obstacle = x;
        }
    }
    Ok(rep)
}
