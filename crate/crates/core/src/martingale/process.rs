use crate::error::{Error, Result};
use crate::numeric::{pairwise_mean, ExpMoment};

use super::tree::{DyadicMartingale, SignSequence};

/// Largest depth any leaf fold will attempt.
pub const DEPTH_CAP: usize = 30;

/// Terminal state of one leaf: `f_N` and `(Sf)²_N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeafState {
    pub value: f64,
    pub square: f64,
}

/// Anything whose `2^N` terminal leaves can be enumerated one at a time.
///
/// Materialized trees implement this by table lookup; closed-form
/// families compute each leaf on demand so deep towers never need to be
/// stored.
pub trait LeafProcess: Sync {
    fn depth(&self) -> usize;

    /// `f_0`.
    fn root(&self) -> f64;

    /// Leaf `index` in left-to-right order, with the square process
    /// started at `y0`.
    fn leaf(&self, index: usize, y0: f64) -> LeafState;

    fn leaf_count(&self) -> usize {
        1 << self.depth()
    }
}

impl LeafProcess for DyadicMartingale {
    fn depth(&self) -> usize {
        DyadicMartingale::depth(self)
    }

    fn root(&self) -> f64 {
        DyadicMartingale::root(self)
    }

    fn leaf(&self, index: usize, y0: f64) -> LeafState {
        let n = DyadicMartingale::depth(self);
        let mut square = y0;
        for (k, gaps) in self.deltas().iter().enumerate() {
            let d = gaps[index >> (n - k)];
            square += d * d;
        }
        LeafState {
            value: self.leaves()[index],
            square,
        }
    }
}

fn check_fold_depth<M: LeafProcess + ?Sized>(m: &M) -> Result<()> {
    if m.depth() > DEPTH_CAP {
        return Err(Error::DepthTooLarge {
            depth: m.depth(),
            max: DEPTH_CAP,
        });
    }
    Ok(())
}

/// `2^{-N} Σ_leaves payoff(f_N, (Sf)²_N)` with the square process started at zero.
pub fn expectation<M, P>(m: &M, payoff: P) -> Result<f64>
where
    M: LeafProcess + ?Sized,
    P: Fn(f64, f64) -> f64 + Sync,
{
    expectation_from(m, 0.0, payoff)
}

/// Like [`expectation`] but with the square process started at `y0`.
pub fn expectation_from<M, P>(m: &M, y0: f64, payoff: P) -> Result<f64>
where
    M: LeafProcess + ?Sized,
    P: Fn(f64, f64) -> f64 + Sync,
{
    check_fold_depth(m)?;
    if !(y0 >= 0.0) {
        return Err(Error::NegativeVariation(y0));
    }
    let mean = pairwise_mean(m.leaf_count(), &|i| {
        let s = m.leaf(i, y0);
        payoff(s.value, s.square)
    });
    if mean.is_finite() {
        return Ok(mean);
    }
    // locate the first offending leaf for the report
    for i in 0..m.leaf_count() {
        let s = m.leaf(i, y0);
        let v = payoff(s.value, s.square);
        if !v.is_finite() {
            return Err(Error::Overflow { leaf: i, value: v });
        }
    }
    Err(Error::Overflow {
        leaf: m.leaf_count(),
        value: mean,
    })
}

/// `𝔼 e^{exponent(f_N, (Sf)²_N)}`, max-shifted when any exponent exceeds 500.
pub fn exp_moment<M, E>(m: &M, exponent: E) -> Result<ExpMoment>
where
    M: LeafProcess + ?Sized,
    E: Fn(f64, f64) -> f64 + Sync,
{
    check_fold_depth(m)?;
    let moment = ExpMoment::mean_exp(m.leaf_count(), &|i| {
        let s = m.leaf(i, 0.0);
        exponent(s.value, s.square)
    });
    if moment.mantissa.is_finite() && moment.shift.is_finite() {
        Ok(moment)
    } else {
        Err(Error::Overflow {
            leaf: 0,
            value: moment.mantissa,
        })
    }
}

/// `‖g_N‖_p / ‖f_N‖_p` for the `±1` transform `g` of `m`, uniform leaf measure.
pub fn lp_ratio(m: &DyadicMartingale, signs: &SignSequence, p: f64) -> Result<f64> {
    if !(p > 0.0) || !p.is_finite() {
        return Err(Error::InvalidParameter(format!("p must be positive, got {p}")));
    }
    let g = m.transform(signs)?;
    let norm = |leaves: &[f64]| pairwise_mean(leaves.len(), &|i| leaves[i].abs().powf(p)).powf(1.0 / p);
    let denom = norm(m.leaves());
    if denom == 0.0 {
        return Err(Error::ZeroNorm);
    }
    let ratio = norm(g.leaves()) / denom;
    if ratio.is_finite() {
        Ok(ratio)
    } else {
        Err(Error::Overflow {
            leaf: 0,
            value: ratio,
        })
    }
}
