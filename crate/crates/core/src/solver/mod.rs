//! Value iteration for the Bellman function.
//!
//! The reduced form iterates on `f(x) = 𝓑(x, 0)` using the homogeneity
//! `𝓑(x, y) = e^{αy} f(x - αy)`; the direct form runs backward induction
//! on an `(x, y)` table. Both start from `V` and only ever increase.
//!
//! Off-grid reads interpolate `e^{-αx} f` linearly rather than `f` itself.
//! Plain linear interpolation overestimates the convex iterates, and at the
//! critical `α = 2` that bias alone is enough to push the iteration past
//! the analytic supersolution.

mod compare;
mod one_d;
mod two_d;

use serde::{Deserialize, Serialize};

use crate::candidates::AxisRange;
use crate::error::{Error, Result};
use crate::grid::BoundaryPolicy;

pub use compare::{compare_with_candidate, GapReport, Profile};
pub use one_d::{bellman_step_1d, default_initial, solve_1d, solve_1d_observed, StepOutcome};
pub use two_d::{backward_induction_2d, Table2D};

/// Parameters for both solvers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub alpha: f64,
    pub x_min: f64,
    pub x_max: f64,
    pub x_step: f64,
    pub delta_min: f64,
    pub delta_max: f64,
    pub delta_step: f64,
    pub max_iterations: usize,
    pub convergence_tol: f64,
    pub divergence_threshold: f64,
    pub boundary_policy: BoundaryPolicy,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            alpha: 2.0,
            x_min: -10.0,
            x_max: 2.0,
            x_step: 0.005,
            delta_min: -3.0,
            delta_max: 3.0,
            delta_step: 0.005,
            max_iterations: 10_000,
            convergence_tol: 1e-8,
            divergence_threshold: 1e6,
            boundary_policy: BoundaryPolicy::ValueFunctionExtension,
        }
    }
}

impl SolverConfig {
    pub fn with_alpha(alpha: f64) -> Self {
        Self {
            alpha,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if !(self.alpha > 0.0) || !self.alpha.is_finite() {
            return bad(format!("alpha must be positive, got {}", self.alpha));
        }
        if !(self.x_step > 0.0) || !(self.x_max > self.x_min) {
            return bad(format!(
                "bad x grid [{}, {}] step {}",
                self.x_min, self.x_max, self.x_step
            ));
        }
        if !(self.delta_step > 0.0) || self.delta_min > 0.0 || self.delta_max < 0.0 {
            return bad(format!(
                "delta grid [{}, {}] step {} must include 0",
                self.delta_min, self.delta_max, self.delta_step
            ));
        }
        if !(self.convergence_tol > 0.0) {
            return bad(format!("convergence_tol must be positive, got {}", self.convergence_tol));
        }
        let sup_initial = self.x_max.exp() - 1.0;
        if !(self.divergence_threshold > sup_initial) {
            return bad(format!(
                "divergence_threshold {} must exceed the initial sup {}",
                self.divergence_threshold, sup_initial
            ));
        }
        Ok(())
    }

    /// Distinct positive `|δ|` values of the probe grid. `δ = 0` is the
    /// identity move and `±δ` give the same average.
    pub fn delta_magnitudes(&self) -> Vec<f64> {
        let lo = (self.delta_min / self.delta_step).round() as i64;
        let hi = (self.delta_max / self.delta_step).round() as i64;
        let top = lo.unsigned_abs().max(hi.unsigned_abs());
        (1..=top)
            .filter(|&k| -(k as i64) >= lo || k as i64 <= hi)
            .map(|k| k as f64 * self.delta_step)
            .collect()
    }

    pub fn x_axis(&self) -> AxisRange {
        AxisRange::new(self.x_min, self.x_max, self.x_step)
    }

    /// `V(x, 0) = e^x - 1`, the off-grid extension.
    pub fn extension(&self, x: f64) -> f64 {
        x.exp() - 1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DivergenceWitness {
    pub x: f64,
    pub y: Option<f64>,
    pub iteration: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationReport {
    pub iterations_run: usize,
    pub final_sup_change: f64,
    pub converged: bool,
    pub diverged: bool,
    pub divergence_witness: Option<DivergenceWitness>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid() {
        SolverConfig::default().validate().unwrap();
        let cfg = SolverConfig {
            delta_min: 0.5,
            ..SolverConfig::default()
        };
        assert!(cfg.validate().is_err());
        let cfg = SolverConfig {
            divergence_threshold: 1.0,
            ..SolverConfig::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn delta_magnitudes_cover_asymmetric_ranges() {
        let cfg = SolverConfig {
            delta_min: -0.02,
            delta_max: 0.04,
            delta_step: 0.01,
            ..SolverConfig::default()
        };
        let d = cfg.delta_magnitudes();
        assert_eq!(d.len(), 4);
        assert!((d[3] - 0.04).abs() < 1e-15);
    }
}
