use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest exponent accepted before an evaluation is reported out of range.
pub const MAX_EXPONENT: f64 = 700.0;

/// Payoff `V(x, y) = e^x - e^{αy}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValueFunction {
    alpha: f64,
}

impl ValueFunction {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::InvalidParameter(format!("alpha must be positive, got {alpha}")));
        }
        Ok(Self { alpha })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        x.exp() - (self.alpha * y).exp()
    }

    pub fn try_eval(&self, x: f64, y: f64) -> Result<f64> {
        if x.abs() > MAX_EXPONENT || (self.alpha * y).abs() > MAX_EXPONENT {
            return Err(Error::Range { x, y });
        }
        Ok(self.eval(x, y))
    }
}

/// The named Bellman candidate families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CandidateKind {
    /// `e^{2x-2y} - e^x`.
    Main,
    /// `(x - 2y) e^{2x-2y}`, the ODE guess that fails concavity.
    Rejected,
    /// `e^{αy} f(x - αy)` with `f(x) = c1·x·e^{2x} + c2·e^{2x}`.
    OdeLift { c1: f64, c2: f64 },
}

/// One summand `coef · (p0 + px·x + py·y) · e^{a·x + b·y}` of a candidate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpPolyTerm {
    pub coef: f64,
    pub p0: f64,
    pub px: f64,
    pub py: f64,
    pub a: f64,
    pub b: f64,
}

impl ExpPolyTerm {
    fn exp_only(coef: f64, a: f64, b: f64) -> Self {
        Self {
            coef,
            p0: 1.0,
            px: 0.0,
            py: 0.0,
            a,
            b,
        }
    }
}

/// A candidate Bellman function together with the `α` it is paired with.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CandidateSpec {
    #[serde(flatten)]
    pub kind: CandidateKind,
    pub alpha: f64,
}

impl CandidateSpec {
    pub fn new(kind: CandidateKind, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::InvalidParameter(format!("alpha must be positive, got {alpha}")));
        }
        if let CandidateKind::OdeLift { c1, c2 } = kind {
            if alpha != 2.0 {
                return Err(Error::InvalidParameter(format!(
                    "ode lift is only defined at the double characteristic root alpha = 2, got {alpha}"
                )));
            }
            if !c1.is_finite() || !c2.is_finite() {
                return Err(Error::InvalidParameter("ode lift constants must be finite".into()));
            }
        }
        Ok(Self { kind, alpha })
    }

    pub fn main() -> Self {
        Self {
            kind: CandidateKind::Main,
            alpha: 2.0,
        }
    }

    pub fn rejected() -> Self {
        Self {
            kind: CandidateKind::Rejected,
            alpha: 2.0,
        }
    }

    pub fn ode_lift(c1: f64, c2: f64) -> Self {
        Self {
            kind: CandidateKind::OdeLift { c1, c2 },
            alpha: 2.0,
        }
    }

    /// `B(x, 0)`, the profile along the x axis.
    pub fn profile(&self, x: f64) -> f64 {
        self.eval(x, 0.0)
    }

    /// Direct formula evaluation without range checks.
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        match self.kind {
            CandidateKind::Main => (2.0 * x - 2.0 * y).exp() - x.exp(),
            CandidateKind::Rejected => (x - 2.0 * y) * (2.0 * x - 2.0 * y).exp(),
            CandidateKind::OdeLift { c1, c2 } => {
                let s = x - self.alpha * y;
                (self.alpha * y).exp() * (c1 * s * (2.0 * s).exp() + c2 * (2.0 * s).exp())
            }
        }
    }

    /// Evaluation with the exponent range checked up front.
    pub fn try_eval(&self, x: f64, y: f64) -> Result<f64> {
        let worst = self
            .terms()
            .iter()
            .map(|t| (t.a * x + t.b * y).abs())
            .chain(std::iter::once((self.alpha * y).abs()))
            .fold(0.0, f64::max);
        if worst > MAX_EXPONENT || !x.is_finite() || !y.is_finite() {
            return Err(Error::Range { x, y });
        }
        let v = self.eval(x, y);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Range { x, y })
        }
    }

    /// Exponential-polynomial decomposition used by the grid scanners.
    pub fn terms(&self) -> Vec<ExpPolyTerm> {
        match self.kind {
            CandidateKind::Main => vec![
                ExpPolyTerm::exp_only(1.0, 2.0, -2.0),
                ExpPolyTerm::exp_only(-1.0, 1.0, 0.0),
            ],
            CandidateKind::Rejected => vec![ExpPolyTerm {
                coef: 1.0,
                p0: 0.0,
                px: 1.0,
                py: -2.0,
                a: 2.0,
                b: -2.0,
            }],
            CandidateKind::OdeLift { c1, c2 } => vec![ExpPolyTerm {
                coef: 1.0,
                p0: c2,
                px: c1,
                py: -c1 * self.alpha,
                a: 2.0,
                b: self.alpha - 2.0 * self.alpha,
            }],
        }
    }

    pub fn name(&self) -> String {
        match self.kind {
            CandidateKind::Main => "main".into(),
            CandidateKind::Rejected => "rejected".into(),
            CandidateKind::OdeLift { c1, c2 } => format!("ode_lift({c1},{c2})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn documented_values() {
        assert_eq!(CandidateSpec::main().try_eval(0.0, 0.0).unwrap(), 0.0);
        assert_eq!(CandidateSpec::rejected().try_eval(1.0, 1.0).unwrap(), -1.0);
        let e = 1f64.exp();
        assert!((CandidateSpec::main().try_eval(1.0, 0.0).unwrap() - (e * e - e)).abs() < 1e-14);
    }

    #[test]
    fn ode_lift_special_cases() {
        // c1 = 1, c2 = 0 reproduces the rejected candidate
        let lift = CandidateSpec::ode_lift(1.0, 0.0);
        for &(x, y) in &[(0.3, 0.1), (-1.0, 2.0), (2.0, 0.5)] {
            let a = lift.eval(x, y);
            let b = CandidateSpec::rejected().eval(x, y);
            assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
        }
        assert_eq!(CandidateSpec::ode_lift(0.0, 1.0).eval(0.0, 0.0), 1.0);
        assert!(CandidateSpec::new(CandidateKind::OdeLift { c1: 1.0, c2: 0.0 }, 1.5).is_err());
    }

    #[test]
    fn terms_agree_with_direct_formula() {
        for spec in [
            CandidateSpec::main(),
            CandidateSpec::rejected(),
            CandidateSpec::ode_lift(0.5, -0.25),
        ] {
            for &(x, y) in &[(0.0, 0.0), (1.5, 0.25), (-3.0, 4.0), (5.0, 7.5)] {
                let via_terms: f64 = spec
                    .terms()
                    .iter()
                    .map(|t| t.coef * (t.p0 + t.px * x + t.py * y) * (t.a * x + t.b * y).exp())
                    .sum();
                let direct = spec.eval(x, y);
                assert!(
                    (via_terms - direct).abs() <= 1e-12 * (1.0 + direct.abs()),
                    "{spec:?} at ({x}, {y})"
                );
            }
        }
    }

    #[test]
    fn out_of_range_is_reported() {
        assert_eq!(
            CandidateSpec::main().try_eval(400.0, 0.0),
            Err(Error::Range { x: 400.0, y: 0.0 })
        );
        let v = ValueFunction::new(2.0).unwrap();
        assert!(v.try_eval(0.0, 400.0).is_err());
        assert!(ValueFunction::new(0.0).is_err());
    }
}
