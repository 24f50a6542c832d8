//! End-to-end inequality checks on dyadic martingales.

mod family;
mod search;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::martingale::{exp_moment, LeafProcess};
use crate::numeric::{ExpMoment, SHIFT_THRESHOLD};

pub use family::{
    counterexample_family, family_closed_form, scan_alpha, ExampleFamilySpec, FamilyProcess, ScanRow,
    MAX_FAMILY_DEPTH,
};
pub use search::{extremal_search, gap, SearchConfig, SearchOutcome};

/// Relative slack in `lhs <= rhs·(1 + SLACK)`.
pub const SLACK: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InequalityName {
    Cww,
    Main,
    Rubin,
    CsChain,
}

/// Both sides of one inequality, compared in the log domain so that
/// max-shifted moments never have to be exponentiated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub name: InequalityName,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub link: Option<String>,
    pub lhs: f64,
    pub rhs: f64,
    pub ln_lhs: f64,
    pub ln_rhs: f64,
    pub ratio: f64,
    pub satisfied: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl InequalityReport {
    fn new(name: InequalityName, lhs: ExpMoment, rhs: ExpMoment) -> Self {
        let (ln_lhs, ln_rhs) = (lhs.ln(), rhs.ln());
        Self {
            name,
            link: None,
            lhs: lhs.value(),
            rhs: rhs.value(),
            ln_lhs,
            ln_rhs,
            ratio: (ln_lhs - ln_rhs).exp(),
            satisfied: ln_lhs <= ln_rhs + SLACK.ln_1p(),
            alpha: None,
            lambda: None,
            note: None,
        }
    }
}

/// `e^x` as a moment, shifted like the leaf folds.
fn exp_of(x: f64) -> ExpMoment {
    if x <= SHIFT_THRESHOLD {
        ExpMoment::from_value(x.exp())
    } else {
        ExpMoment {
            mantissa: 1.0,
            shift: x,
        }
    }
}

fn one() -> ExpMoment {
    ExpMoment::from_value(1.0)
}

fn max_square<M: LeafProcess + ?Sized>(m: &M) -> f64 {
    (0..m.leaf_count())
        .map(|i| m.leaf(i, 0.0).square)
        .fold(0.0, f64::max)
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidParameter(format!("lambda must be non-negative, got {lambda}")));
    }
    Ok(())
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidParameter(format!("alpha must be positive, got {alpha}")));
    }
    Ok(())
}

/// `𝔼 e^{f_N - f_0} <= exp(½ max (Sf)²)`.
pub fn cww_check<M: LeafProcess + ?Sized>(m: &M) -> Result<InequalityReport> {
    let r = m.root();
    let lhs = exp_moment(m, |v, _| v - r)?;
    let rhs = exp_of(0.5 * max_square(m));
    Ok(InequalityReport::new(InequalityName::Cww, lhs, rhs))
}

/// `𝔼 e^{f_N} <= 𝔼 e^{α(Sf_N)²}` for `f_0 = 0`. A nonzero root is
/// subtracted first and the shift is noted in the report.
pub fn main_inequality_check<M: LeafProcess + ?Sized>(m: &M, alpha: f64) -> Result<InequalityReport> {
    check_alpha(alpha)?;
    let r = m.root();
    let lhs = exp_moment(m, |v, _| v - r)?;
    let rhs = exp_moment(m, |_, s| alpha * s)?;
    let mut rep = InequalityReport::new(InequalityName::Main, lhs, rhs);
    rep.alpha = Some(alpha);
    if r != 0.0 {
        rep.note = Some(format!("shifted by root {r}"));
    }
    Ok(rep)
}

/// `𝔼 e^{λ(f_N - f_0) - (λ²/2)(Sf_N)²} <= 1`.
pub fn rubin_check<M: LeafProcess + ?Sized>(m: &M, lambda: f64) -> Result<InequalityReport> {
    check_lambda(lambda)?;
    let r = m.root();
    let half = 0.5 * lambda * lambda;
    let lhs = exp_moment(m, |v, s| lambda * (v - r) - half * s)?;
    let mut rep = InequalityReport::new(InequalityName::Rubin, lhs, one());
    rep.lambda = Some(lambda);
    Ok(rep)
}

/// The three links of the Cauchy–Schwarz derivation of
/// `𝔼 e^{f - f_0} <= 𝔼 e^{2(Sf)²}`:
///
/// 1. `𝔼 e^{f-f_0} <= √(𝔼 e^{2(f-f_0) - 2(Sf)²}) · √(𝔼 e^{2(Sf)²})`
/// 2. the first factor is at most 1 (Rubin at `λ = 2`)
/// 3. `√t <= t` for `t = 𝔼 e^{2(Sf)²} >= 1`
pub fn cs_chain_check<M: LeafProcess + ?Sized>(m: &M) -> Result<Vec<InequalityReport>> {
    let r = m.root();
    let base = exp_moment(m, |v, _| v - r)?;
    let rubin = exp_moment(m, |v, s| 2.0 * (v - r) - 2.0 * s)?;
    let square = exp_moment(m, |_, s| 2.0 * s)?;
    let split = rubin.mul(&square).sqrt();
    let links = [
        ("cauchy_schwarz", base, split),
        ("rubin", split, square.sqrt()),
        ("sqrt", square.sqrt(), square),
    ];
    Ok(links
        .into_iter()
        .map(|(link, lhs, rhs)| {
            let mut rep = InequalityReport::new(InequalityName::CsChain, lhs, rhs);
            rep.link = Some(link.into());
            rep
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::martingale::{random_martingale, DyadicMartingale, IncrementLaw, IncrementTree};

    fn one_step(delta: f64) -> DyadicMartingale {
        DyadicMartingale::from_increments(IncrementTree {
            root: 0.0,
            deltas: vec![vec![delta]],
        })
        .unwrap()
    }

    #[test]
    fn constant_martingale_gives_equalities() {
        let m = DyadicMartingale::constant(4, 0.0).unwrap();
        for rep in [
            cww_check(&m).unwrap(),
            main_inequality_check(&m, 2.0).unwrap(),
            rubin_check(&m, 0.0).unwrap(),
        ] {
            assert_eq!(rep.lhs, 1.0);
            assert_eq!(rep.rhs, 1.0);
            assert!(rep.satisfied);
        }
        for rep in cs_chain_check(&m).unwrap() {
            assert_eq!(rep.ratio, 1.0, "{rep:?}");
            assert!(rep.satisfied);
        }
    }

    #[test]
    fn one_step_closed_forms() {
        let d = 0.7_f64;
        let m = one_step(d);
        let cww = cww_check(&m).unwrap();
        assert!((cww.lhs - d.cosh()).abs() < 1e-15);
        assert!((cww.rhs - (d * d / 2.0).exp()).abs() < 1e-15);
        assert!(cww.satisfied);

        let main = main_inequality_check(&m, 2.0).unwrap();
        assert!((main.rhs - (2.0 * d * d).exp()).abs() < 1e-14);
        assert!(main.satisfied && main.note.is_none());

        for lambda in [0.0, 0.5, 1.0, 3.0] {
            let rub = rubin_check(&m, lambda).unwrap();
            let want = (lambda * d).cosh() * (-lambda * lambda * d * d / 2.0).exp();
            assert!((rub.lhs - want).abs() < 1e-14);
            assert!(rub.satisfied);
        }

        let chain = cs_chain_check(&m).unwrap();
        assert_eq!(chain.len(), 3);
        let a = (2.0 * d).cosh() * (-2.0 * d * d).exp();
        let b = (2.0 * d * d).exp();
        assert!((chain[0].rhs - (a * b).sqrt()).abs() < 1e-14);
        assert!(chain.iter().all(|r| r.satisfied && r.ratio < 1.0));
    }

    #[test]
    fn nonzero_root_is_shifted_and_noted() {
        let m = DyadicMartingale::from_leaf_values(&[3.0, 1.0]).unwrap();
        let rep = main_inequality_check(&m, 2.0).unwrap();
        assert!((rep.lhs - 1f64.cosh()).abs() < 1e-15);
        assert_eq!(rep.note.as_deref(), Some("shifted by root 2"));
    }

    #[test]
    fn huge_increments_use_shifted_moments() {
        let m = one_step(40.0);
        let rep = main_inequality_check(&m, 2.0).unwrap();
        assert!(rep.rhs.is_infinite());
        assert!((rep.ln_rhs - 3200.0).abs() < 1e-9);
        assert!(rep.satisfied);
        assert!(cww_check(&m).unwrap().satisfied);
    }

    #[test]
    fn random_trees_satisfy_the_theorems() {
        for i in 0..40 {
            let m = random_martingale(1 + i % 8, IncrementLaw::Gaussian { sigma: 0.8 }, i as u64).unwrap();
            assert!(cww_check(&m).unwrap().satisfied);
            assert!(main_inequality_check(&m, 2.0).unwrap().satisfied);
            for lambda in [0.5, 1.0, 2.0, 4.0] {
                assert!(rubin_check(&m, lambda).unwrap().satisfied);
            }
            assert!(cs_chain_check(&m).unwrap().iter().all(|r| r.satisfied));
        }
    }

    #[test]
    fn parameter_validation() {
        let m = one_step(1.0);
        assert!(rubin_check(&m, -1.0).is_err());
        assert!(main_inequality_check(&m, 0.0).is_err());
    }

    #[test]
    fn report_json_shape() {
        let rep = rubin_check(&one_step(0.0), 1.0).unwrap();
        let v: serde_json::Value = serde_json::to_value(&rep).unwrap();
        assert_eq!(v["name"], "rubin");
        assert_eq!(v["lambda"], 1.0);
        assert!(v.get("alpha").is_none());
    }
}
