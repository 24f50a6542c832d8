use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::martingale::{DyadicMartingale, LeafProcess, LeafState, DEPTH_CAP, MAX_MATERIALIZED_DEPTH};

use super::{main_inequality_check, InequalityReport};

/// Deepest family the streaming folds accept.
pub const MAX_FAMILY_DEPTH: usize = DEPTH_CAP;

/// `λ·f_N` where `f = Σ_{n≥0} χ_{[0, 2^{-n})}` and `f_N = 𝔼[f | 𝒟_N]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExampleFamilySpec {
    pub depth: usize,
    pub lambda: f64,
}

impl ExampleFamilySpec {
    pub fn new(depth: usize, lambda: f64) -> Result<Self> {
        let spec = Self { depth, lambda };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.depth == 0 {
            return Err(Error::InvalidParameter("family depth must be at least 1".into()));
        }
        if self.depth > MAX_FAMILY_DEPTH {
            return Err(Error::DepthTooLarge {
                depth: self.depth,
                max: MAX_FAMILY_DEPTH,
            });
        }
        if !(self.lambda > 0.0) || !self.lambda.is_finite() {
            return Err(Error::InvalidParameter(format!("lambda must be positive, got {}", self.lambda)));
        }
        Ok(())
    }
}

/// The family as a leaf stream; nothing is stored.
///
/// Leaf 0 is `[0, 2^{-N})` with value `λ(N+2)` and square `λ²N`. The
/// leaves of `I_n^1 = [2^{-n}, 2^{-n+1})` carry `λn` and `λ²n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FamilyProcess {
    spec: ExampleFamilySpec,
}

impl FamilyProcess {
    pub fn new(spec: ExampleFamilySpec) -> Result<Self> {
        spec.validate()?;
        Ok(Self { spec })
    }

    /// `n` with leaf `index` in `I_n^1`, or `None` for the leftmost leaf.
    fn interval(&self, index: usize) -> Option<usize> {
        if index == 0 {
            return None;
        }
        let log2 = (usize::BITS - 1 - index.leading_zeros()) as usize;
        Some(self.spec.depth - log2)
    }
}

impl LeafProcess for FamilyProcess {
    fn depth(&self) -> usize {
        self.spec.depth
    }

    fn root(&self) -> f64 {
        2.0 * self.spec.lambda
    }

    fn leaf(&self, index: usize, y0: f64) -> LeafState {
        let l = self.spec.lambda;
        let (value, steps) = match self.interval(index) {
            None => ((self.spec.depth + 2) as f64, self.spec.depth as f64),
            Some(n) => (n as f64, n as f64),
        };
        LeafState {
            value: l * value,
            square: y0 + l * l * steps,
        }
    }
}

/// The family as a materialized tree, for depths up to
/// [`MAX_MATERIALIZED_DEPTH`].
pub fn counterexample_family(spec: ExampleFamilySpec) -> Result<DyadicMartingale> {
    let p = FamilyProcess::new(spec)?;
    if spec.depth > MAX_MATERIALIZED_DEPTH {
        return Err(Error::DepthTooLarge {
            depth: spec.depth,
            max: MAX_MATERIALIZED_DEPTH,
        });
    }
    let leaves: Vec<f64> = (0..p.leaf_count()).map(|i| p.leaf(i, 0.0).value).collect();
    DyadicMartingale::from_leaf_values(&leaves)
}

/// Closed-form `(𝔼 e^{λ(f_N - f_0)}, 𝔼 e^{α(Sf_N)²})` by geometric sums.
pub fn family_closed_form(spec: ExampleFamilySpec, alpha: f64) -> Result<(f64, f64)> {
    spec.validate()?;
    let (n, l) = (spec.depth as i32, spec.lambda);
    let q = alpha * l * l;
    let mut lhs = 0.0;
    let mut rhs = 0.0;
    for k in 1..=n {
        let w = 0.5f64.powi(k);
        lhs += w * (l * k as f64).exp();
        rhs += w * (q * k as f64).exp();
    }
    let w = 0.5f64.powi(n);
    lhs += w * (l * (n + 2) as f64).exp();
    rhs += w * (q * n as f64).exp();
    Ok((lhs * (-2.0 * l).exp(), rhs))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub depth: usize,
    pub alpha: f64,
    pub report: InequalityReport,
}

/// [`main_inequality_check`] on the family for every `(depth, α)` pair,
/// depth-major.
pub fn scan_alpha(depths: &[usize], lambda: f64, alphas: &[f64]) -> Result<Vec<ScanRow>> {
    let jobs: Vec<(usize, f64)> = depths
        .iter()
        .flat_map(|&d| alphas.iter().map(move |&a| (d, a)))
        .collect();
    jobs.par_iter()
        .map(|&(depth, alpha)| {
            let p = FamilyProcess::new(ExampleFamilySpec::new(depth, lambda)?)?;
            let mut report = main_inequality_check(&p, alpha)?;
            report.lambda = Some(lambda);
            Ok(ScanRow { depth, alpha, report })
        })
        .collect()
}
