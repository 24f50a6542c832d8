use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::martingale::DyadicMartingale;
use crate::numeric::pairwise_mean;

use super::spec::{CandidateSpec, ExpPolyTerm, ValueFunction};

/// Relative slack for the analytic inequality checks.
pub const INEQUALITY_TOL: f64 = 1e-9;
/// Slack for equality-type checks such as `B(0,0) <= 0`.
pub const EQUALITY_TOL: f64 = 1e-12;
/// Relative slack for the supermartingale monotonicity.
pub const SUPERMARTINGALE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Property {
    Majorization,
    Concavity,
    Initial,
}

impl Property {
    pub fn tolerance(self) -> f64 {
        match self {
            Self::Majorization | Self::Concavity => INEQUALITY_TOL,
            Self::Initial => EQUALITY_TOL,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub x: f64,
    pub y: f64,
    pub delta: f64,
}

/// Outcome of one property scan.
///
/// `worst_violation` is normalized by `1 + |B|` at the offending point for
/// majorization and concavity, and is the raw `B(0,0)` for the initial
/// condition, so `passed` is exactly `worst_violation <= tolerance`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyReport {
    pub property: Property,
    pub passed: bool,
    pub worst_violation: f64,
    pub witness: Option<Witness>,
}

impl PropertyReport {
    fn from_worst(property: Property, worst: f64, at: Witness) -> Self {
        let passed = worst <= property.tolerance();
        Self {
            property,
            passed,
            worst_violation: worst,
            witness: if passed { None } else { Some(at) },
        }
    }
}

/// Closed sample range `min, min + step, ..., max`. `min == max` is a
/// single point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisRange {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl AxisRange {
    pub fn new(min: f64, max: f64, step: f64) -> Self {
        Self { min, max, step }
    }

    pub fn point(v: f64) -> Self {
        Self {
            min: v,
            max: v,
            step: 1.0,
        }
    }

    pub fn count(&self) -> Result<usize> {
        if !self.min.is_finite() || !self.max.is_finite() || self.max < self.min || !(self.step > 0.0) {
            return Err(Error::InvalidParameter(format!("bad axis range {self:?}")));
        }
        Ok(((self.max - self.min) / self.step).round() as usize + 1)
    }

    pub fn at(&self, i: usize) -> f64 {
        self.min + self.step * i as f64
    }

    pub fn values(&self) -> Result<Vec<f64>> {
        Ok((0..self.count()?).map(|i| self.at(i)).collect())
    }
}

/// Rectangle of `(x, y)` sample points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanGrid {
    pub x: AxisRange,
    pub y: AxisRange,
}

impl ScanGrid {
    /// `x ∈ [-20, 6]` step 0.01, `y ∈ [0, 8]` step 0.02.
    pub fn standard() -> Self {
        Self {
            x: AxisRange::new(-20.0, 6.0, 0.01),
            y: AxisRange::new(0.0, 8.0, 0.02),
        }
    }
}

/// `δ ∈ [-6, 6]` step 0.01.
pub fn standard_deltas() -> AxisRange {
    AxisRange::new(-6.0, 6.0, 0.01)
}

struct Worst {
    value: f64,
    at: Witness,
}

impl Worst {
    fn none() -> Self {
        Self {
            value: f64::NEG_INFINITY,
            at: Witness {
                x: f64::NAN,
                y: f64::NAN,
                delta: f64::NAN,
            },
        }
    }

    fn offer(&mut self, value: f64, at: Witness) {
        if value > self.value {
            self.value = value;
            self.at = at;
        }
    }

    /// Deterministic max-reduction: earlier scan order wins ties.
    fn merge(parts: Vec<Result<Worst>>) -> Result<Worst> {
        let mut best = Worst::none();
        for part in parts {
            let part = part?;
            best.offer(part.value, part.at);
        }
        Ok(best)
    }
}

/// Per-point base values of each term: `coef · e^{ax+by}` and `p0 + px x + py y`.
fn term_bases(terms: &[ExpPolyTerm], x: f64, y: f64, out: &mut Vec<(f64, f64)>) {
    out.clear();
    out.extend(
        terms
            .iter()
            .map(|t| (t.coef * (t.a * x + t.b * y).exp(), t.p0 + t.px * x + t.py * y)),
    );
}

/// `sup_grid (V - B) / (1 + |B|)`.
pub fn check_majorization(c: &CandidateSpec, v: &ValueFunction, grid: &ScanGrid) -> Result<PropertyReport> {
    let xs = grid.x.values()?;
    let ys = grid.y.values()?;
    let parts: Vec<Result<Worst>> = xs
        .par_iter()
        .map(|&x| {
            let mut worst = Worst::none();
            for &y in &ys {
                let b = c.try_eval(x, y)?;
                let vv = v.try_eval(x, y)?;
                worst.offer((vv - b) / (1.0 + b.abs()), Witness { x, y, delta: 0.0 });
            }
            Ok(worst)
        })
        .collect();
    let worst = Worst::merge(parts)?;
    Ok(PropertyReport::from_worst(Property::Majorization, worst.value, worst.at))
}

/// Multipliers for one `|δ|`, per term: the symmetric part
/// `e^{bδ²} cosh(aδ)`, the antisymmetric part `e^{bδ²} sinh(aδ)`, and the
/// shift of the polynomial factor common to both probes.
struct DeltaFactors {
    delta: f64,
    per_term: Vec<(f64, f64, f64, f64)>,
}

fn delta_factors(terms: &[ExpPolyTerm], delta: f64) -> DeltaFactors {
    let d2 = delta * delta;
    DeltaFactors {
        delta,
        per_term: terms
            .iter()
            .map(|t| {
                let plus = (t.a * delta + t.b * d2).exp();
                let minus = (-t.a * delta + t.b * d2).exp();
                let sym = 0.5 * (plus + minus);
                let anti = 0.5 * (plus - minus);
                (sym, anti, t.py * d2, t.px * delta)
            })
            .collect(),
    }
}

/// `sup (½[B(x+δ, y+δ²) + B(x-δ, y+δ²)] - B(x,y)) / (1 + |B(x,y)|)`
/// over the grid and the `δ` range.
///
/// Both probes are folded into one exponential-polynomial evaluation, so
/// `δ` and `-δ` are the same probe and only `|δ|` is scanned.
pub fn check_parabolic_concavity(c: &CandidateSpec, grid: &ScanGrid, deltas: &AxisRange) -> Result<PropertyReport> {
    let terms = c.terms();
    let mut mags: Vec<f64> = deltas.values()?.into_iter().map(f64::abs).collect();
    mags.sort_by(f64::total_cmp);
    mags.dedup();
    let factors: Vec<DeltaFactors> = mags.iter().map(|&d| delta_factors(&terms, d)).collect();
    if factors
        .iter()
        .flat_map(|f| &f.per_term)
        .any(|&(s, a, _, _)| !s.is_finite() || !a.is_finite())
    {
        return Err(Error::Range {
            x: f64::NAN,
            y: mags.last().copied().unwrap_or(0.0),
        });
    }

    let xs = grid.x.values()?;
    let ys = grid.y.values()?;
    let parts: Vec<Result<Worst>> = xs
        .par_iter()
        .map(|&x| {
            let mut worst = Worst::none();
            let mut bases = Vec::with_capacity(terms.len());
            for &y in &ys {
                term_bases(&terms, x, y, &mut bases);
                let b: f64 = bases.iter().map(|&(e, p)| e * p).sum();
                if !b.is_finite() {
                    return Err(Error::Range { x, y });
                }
                let scale = 1.0 + b.abs();
                for f in &factors {
                    let avg: f64 = bases
                        .iter()
                        .zip(&f.per_term)
                        .map(|(&(e, p), &(sym, anti, dp, slope))| e * ((p + dp) * sym + slope * anti))
                        .sum();
                    if !avg.is_finite() {
                        return Err(Error::Range { x, y: y + f.delta * f.delta });
                    }
                    worst.offer((avg - b) / scale, Witness { x, y, delta: f.delta });
                }
            }
            Ok(worst)
        })
        .collect();
    let worst = Worst::merge(parts)?;
    Ok(PropertyReport::from_worst(Property::Concavity, worst.value, worst.at))
}

/// `B(0, 0) <= 1e-12`.
pub fn check_initial(c: &CandidateSpec) -> Result<PropertyReport> {
    let b = c.try_eval(0.0, 0.0)?;
    Ok(PropertyReport::from_worst(
        Property::Initial,
        b,
        Witness {
            x: 0.0,
            y: 0.0,
            delta: 0.0,
        },
    ))
}

/// `n ↦ 𝔼 B(f_n, (Sf)²_n)` for `n = 0..=N`.
pub fn supermartingale_check(c: &CandidateSpec, m: &DyadicMartingale) -> Result<Vec<f64>> {
    if m.root() != 0.0 {
        return Err(Error::Precondition(format!(
            "supermartingale check needs f_0 = 0, got {}",
            m.root()
        )));
    }
    (0..=m.depth())
        .map(|n| {
            let values = m.level(n);
            let squares = m.square_process(n, 0.0)?;
            let evals = values
                .iter()
                .zip(&squares)
                .map(|(&x, &y)| c.try_eval(x, y))
                .collect::<Result<Vec<f64>>>()?;
            Ok(pairwise_mean(evals.len(), &|i| evals[i]))
        })
        .collect()
}

/// Whether a sequence is non-increasing up to relative slack `tol`.
pub fn is_non_increasing(seq: &[f64], tol: f64) -> bool {
    seq.windows(2).all(|w| w[1] <= w[0] + tol * (1.0 + w[0].abs()))
}
