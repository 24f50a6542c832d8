use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// What an off-grid read returns beyond `[x_min, x_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryPolicy {
    /// Repeat the nearest end value.
    Clamp,
    /// Defer to an analytic extension supplied by the caller.
    ValueFunctionExtension,
}

/// A function sampled on a uniform grid `x_min, x_min + step, ..., x_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    pub x_min: f64,
    pub x_max: f64,
    pub step: f64,
    pub values: Vec<f64>,
    pub boundary_policy: BoundaryPolicy,
}

impl Grid1D {
    pub fn new(x_min: f64, step: f64, values: Vec<f64>, boundary_policy: BoundaryPolicy) -> Result<Self> {
        if !(step > 0.0) || !step.is_finite() || !x_min.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "grid needs finite x_min and positive step, got {x_min}, {step}"
            )));
        }
        if values.is_empty() {
            return Err(Error::GridTooSmall { have: 0, need: 1 });
        }
        let x_max = x_min + step * (values.len() - 1) as f64;
        Ok(Self {
            x_min,
            x_max,
            step,
            values,
            boundary_policy,
        })
    }

    /// Number of points on `[x_min, x_max]` at spacing `step`.
    pub fn point_count(x_min: f64, x_max: f64, step: f64) -> Result<usize> {
        if !(step > 0.0) || !(x_max >= x_min) || !x_min.is_finite() || !x_max.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "bad grid range [{x_min}, {x_max}] step {step}"
            )));
        }
        Ok(((x_max - x_min) / step).round() as usize + 1)
    }

    pub fn from_fn<F: Fn(f64) -> f64>(
        x_min: f64,
        x_max: f64,
        step: f64,
        boundary_policy: BoundaryPolicy,
        f: F,
    ) -> Result<Self> {
        let n = Self::point_count(x_min, x_max, step)?;
        let values = (0..n).map(|i| f(x_min + step * i as f64)).collect();
        Self::new(x_min, step, values, boundary_policy)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + self.step * i as f64
    }

    pub fn xs(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(move |i| self.x(i))
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.x_min && x <= self.x_max
    }

    /// Same layout as `self` with new values.
    pub fn with_values(&self, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), self.values.len());
        Self {
            values,
            ..self.clone()
        }
    }

    /// Linear interpolation inside the grid; `None` outside unless the
    /// policy is [`BoundaryPolicy::Clamp`].
    pub fn interpolate(&self, x: f64) -> Option<f64> {
        if !self.contains(x) {
            return match self.boundary_policy {
                BoundaryPolicy::Clamp if x < self.x_min => self.values.first().copied(),
                BoundaryPolicy::Clamp if x > self.x_max => self.values.last().copied(),
                _ => None,
            };
        }
        if self.len() == 1 {
            return Some(self.values[0]);
        }
        let s = (x - self.x_min) / self.step;
        let i = (s.floor() as usize).min(self.len() - 2);
        let t = s - i as f64;
        Some(self.values[i] * (1.0 - t) + self.values[i + 1] * t)
    }

    pub fn sup_distance(&self, other: &Self) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn from_fn_layout() {
        let g = Grid1D::from_fn(-1.0, 1.0, 0.5, BoundaryPolicy::Clamp, |x| x * x).unwrap();
        assert_eq!(g.len(), 5);
        assert_eq!(g.x_max, 1.0);
        assert_eq!(g.values, vec![1.0, 0.25, 0.0, 0.25, 1.0]);
    }

    #[test]
    fn interpolation_and_policies() {
        let g = Grid1D::new(0.0, 1.0, vec![0.0, 2.0, 4.0], BoundaryPolicy::Clamp).unwrap();
        assert_eq!(g.interpolate(0.5), Some(1.0));
        assert_eq!(g.interpolate(2.0), Some(4.0));
        assert_eq!(g.interpolate(-3.0), Some(0.0));
        assert_eq!(g.interpolate(9.0), Some(4.0));
        let e = Grid1D {
            boundary_policy: BoundaryPolicy::ValueFunctionExtension,
            ..g
        };
        assert_eq!(e.interpolate(9.0), None);
    }

    #[test]
    fn rejects_bad_step() {
        assert!(Grid1D::new(0.0, 0.0, vec![1.0], BoundaryPolicy::Clamp).is_err());
        assert!(Grid1D::point_count(1.0, 0.0, 0.1).is_err());
    }
}
