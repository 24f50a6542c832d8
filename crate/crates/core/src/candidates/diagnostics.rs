//! Finite-difference diagnostics from the candidate search: the reverse
//! heat inequality, the reduced ODE residual, and the zero-crossing bound
//! for `g'' <= -b g`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid1D;

use super::spec::CandidateSpec;

/// Default central-difference step.
pub const FD_STEP: f64 = 1e-4;

/// Slack for the numerical check of `g'' + b g <= 0`, scaled by
/// `1 + b·max|g|` over the window.
pub const ZERO_CROSSING_TOL: f64 = 1e-6;

/// Central-difference estimate of `B_xx + 2 B_y` at `(x, y)`.
pub fn heat_residual(c: &CandidateSpec, x: f64, y: f64, h: f64) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::InvalidParameter(format!("step must be positive, got {h}")));
    }
    if !(y > 0.0) || y - h < 0.0 {
        return Err(Error::Precondition(format!(
            "stencil at y = {y} with step {h} leaves the half plane"
        )));
    }
    let b = c.try_eval(x, y)?;
    let bxx = (c.try_eval(x + h, y)? - 2.0 * b + c.try_eval(x - h, y)?) / (h * h);
    let by = (c.try_eval(x, y + h)? - c.try_eval(x, y - h)?) / (2.0 * h);
    Ok(bxx + 2.0 * by)
}

/// `f'' - 2α f' + 2α f` at the interior points of a uniform grid.
pub fn ode_residual(f: &Grid1D, alpha: f64) -> Result<Grid1D> {
    if f.len() < 3 {
        return Err(Error::GridTooSmall { have: f.len(), need: 3 });
    }
    if !(alpha > 0.0) {
        return Err(Error::InvalidParameter(format!("alpha must be positive, got {alpha}")));
    }
    let h = f.step;
    let v = &f.values;
    let residual = (1..v.len() - 1)
        .map(|i| {
            let d2 = (v[i + 1] - 2.0 * v[i] + v[i - 1]) / (h * h);
            let d1 = (v[i + 1] - v[i - 1]) / (2.0 * h);
            d2 - 2.0 * alpha * d1 + 2.0 * alpha * v[i]
        })
        .collect();
    Grid1D::new(f.x_min + h, h, residual, f.boundary_policy)
}

/// Outcome of [`zero_crossing_bound`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum ZeroCrossing {
    /// First sign change at `at`; the lemma guarantees `at <= bound`.
    Crossed { at: f64, bound: f64 },
    /// The samples stay positive up to the end of the grid.
    NoCrossing { bound: f64 },
    /// `g'' + b g <= 0` fails numerically, so no bound is implied.
    NotApplicable { worst_residual: f64, at: f64 },
}

/// First zero of sampled `g` to the right of `x0`, after checking that
/// `g'' <= -b g` holds on `[x0, x0 + π/√b]`.
pub fn zero_crossing_bound(g: &Grid1D, b: f64, x0: f64) -> Result<ZeroCrossing> {
    if !(b > 0.0) || !b.is_finite() {
        return Err(Error::InvalidParameter(format!("b must be positive, got {b}")));
    }
    if g.len() < 3 {
        return Err(Error::GridTooSmall { have: g.len(), need: 3 });
    }
    let bound = x0 + PI / b.sqrt();
    if !(g.x_min <= x0 && g.x_max >= bound) {
        return Err(Error::Coverage {
            lo: g.x_min,
            hi: g.x_max,
            need_lo: x0,
            need_hi: bound,
        });
    }
    let g0 = g.interpolate(x0).expect("x0 inside grid");
    if !(g0 > 0.0) {
        return Err(Error::Precondition(format!("g(x0) = {g0} is not positive")));
    }

    // numerical check of the differential inequality on the lemma's window
    let h = g.step;
    let v = &g.values;
    let window: Vec<usize> = (1..v.len() - 1)
        .filter(|&i| {
            let x = g.x(i);
            x >= x0 - h && x <= bound + h
        })
        .collect();
    let g_max = window.iter().map(|&i| v[i].abs()).fold(0.0, f64::max);
    let tol = ZERO_CROSSING_TOL * (1.0 + b * g_max);
    let mut worst = (f64::NEG_INFINITY, x0);
    for &i in &window {
        let r = (v[i + 1] - 2.0 * v[i] + v[i - 1]) / (h * h) + b * v[i];
        if r > worst.0 {
            worst = (r, g.x(i));
        }
    }
    if worst.0 > tol {
        return Ok(ZeroCrossing::NotApplicable {
            worst_residual: worst.0,
            at: worst.1,
        });
    }

    let mut prev = (x0, g0);
    let first = ((x0 - g.x_min) / h).floor() as usize + 1;
    for (i, &y) in v.iter().enumerate().skip(first) {
        let x = g.x(i);
        if y <= 0.0 {
            let at = if y == 0.0 {
                x
            } else {
                prev.0 + (x - prev.0) * prev.1 / (prev.1 - y)
            };
            return Ok(ZeroCrossing::Crossed { at, bound });
        }
        prev = (x, y);
    }
    Ok(ZeroCrossing::NoCrossing { bound })
}
