use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Deepest tree that is stored level by level. Deeper processes must be
/// folded leafwise through [`LeafProcess`](super::LeafProcess).
pub const MAX_MATERIALIZED_DEPTH: usize = 20;

/// Slack for the conditional-expectation invariant, scaled by `1 + |parent|`.
pub const INVARIANT_TOL: f64 = 1e-12;

/// Root value plus one half-gap per internal node.
///
/// `deltas[k - 1]` holds the `2^(k-1)` increments that produce level `k`:
/// the left child of node `j` is `parent + deltas[k-1][j]` and the right
/// child is `parent - deltas[k-1][j]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IncrementTree {
    pub root: f64,
    pub deltas: Vec<Vec<f64>>,
}

impl IncrementTree {
    pub fn depth(&self) -> usize {
        self.deltas.len()
    }

    fn check_shape(&self) -> Result<()> {
        if !self.root.is_finite() {
            return Err(Error::NonFinite {
                location: "root".into(),
                value: self.root,
            });
        }
        for (k, level) in self.deltas.iter().enumerate() {
            let expected = 1usize << k;
            if level.len() != expected {
                return Err(Error::LevelShape {
                    level: k + 1,
                    have: level.len(),
                    expected,
                });
            }
            if let Some((j, &d)) = level.iter().enumerate().find(|(_, d)| !d.is_finite()) {
                return Err(Error::NonFinite {
                    location: format!("delta level {} node {}", k + 1, j),
                    value: d,
                });
            }
        }
        Ok(())
    }
}

/// Deterministic level-dependent signs `ε_1, ε_2, ...`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<i64>", into = "Vec<i64>")]
pub struct SignSequence(Vec<i8>);

impl SignSequence {
    pub fn new(signs: Vec<i64>) -> Result<Self> {
        signs
            .into_iter()
            .map(|s| match s {
                1 => Ok(1i8),
                -1 => Ok(-1i8),
                other => Err(Error::InvalidSign(other)),
            })
            .collect::<Result<Vec<_>>>()
            .map(Self)
    }

    pub fn all_plus(len: usize) -> Self {
        Self(vec![1; len])
    }

    pub fn alternating(len: usize) -> Self {
        Self((0..len).map(|k| if k % 2 == 0 { 1 } else { -1 }).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Sign applied to level `k >= 1`.
    pub fn at(&self, k: usize) -> i8 {
        self.0[k - 1]
    }
}

impl TryFrom<Vec<i64>> for SignSequence {
    type Error = Error;

    fn try_from(v: Vec<i64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<SignSequence> for Vec<i64> {
    fn from(s: SignSequence) -> Self {
        s.0.into_iter().map(i64::from).collect()
    }
}

/// A simple dyadic martingale on `[0, 1)` stored as a full binary tree.
///
/// `levels[n]` holds the `2^n` values of `f_n`, one per dyadic interval of
/// generation `n`, and every parent is the mean of its two children. The
/// half-gap increments are kept alongside so that decomposition and sign
/// transforms never re-derive them through rounding arithmetic.
#[derive(Debug, Clone, PartialEq)]
pub struct DyadicMartingale {
    levels: Vec<Vec<f64>>,
    deltas: Vec<Vec<f64>>,
}

impl DyadicMartingale {
    /// Conditional-expectation tower of the given terminal values.
    pub fn from_leaf_values(leaves: &[f64]) -> Result<Self> {
        let len = leaves.len();
        if len == 0 || !len.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(len));
        }
        if let Some((i, &v)) = leaves.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite {
                location: format!("leaf {i}"),
                value: v,
            });
        }
        let depth = len.trailing_zeros() as usize;
        check_depth(depth)?;

        let mut levels = vec![leaves.to_vec()];
        let mut deltas = Vec::with_capacity(depth);
        while levels.last().map_or(0, Vec::len) > 1 {
            let children = levels.last().unwrap();
            let parents: Vec<f64> = children.chunks_exact(2).map(|c| (c[0] + c[1]) / 2.0).collect();
            let gaps: Vec<f64> = children.chunks_exact(2).map(|c| (c[0] - c[1]) / 2.0).collect();
            deltas.push(gaps);
            levels.push(parents);
        }
        levels.reverse();
        deltas.reverse();
        Ok(Self { levels, deltas })
    }

    /// Builds the tree from its root and half-gap increments.
    pub fn from_increments(inc: IncrementTree) -> Result<Self> {
        inc.check_shape()?;
        check_depth(inc.depth())?;
        let mut levels = Vec::with_capacity(inc.depth() + 1);
        levels.push(vec![inc.root]);
        for gaps in &inc.deltas {
            let parents = levels.last().unwrap();
            let mut next = Vec::with_capacity(parents.len() * 2);
            for (&p, &d) in parents.iter().zip(gaps) {
                next.push(p + d);
                next.push(p - d);
            }
            if let Some((i, &v)) = next.iter().enumerate().find(|(_, v)| !v.is_finite()) {
                return Err(Error::NonFinite {
                    location: format!("level {} node {}", levels.len(), i),
                    value: v,
                });
            }
            levels.push(next);
        }
        Ok(Self {
            levels,
            deltas: inc.deltas,
        })
    }

    /// Constant martingale of the given depth.
    pub fn constant(depth: usize, value: f64) -> Result<Self> {
        Self::from_increments(IncrementTree {
            root: value,
            deltas: (0..depth).map(|k| vec![0.0; 1 << k]).collect(),
        })
    }

    pub fn depth(&self) -> usize {
        self.deltas.len()
    }

    pub fn root(&self) -> f64 {
        self.levels[0][0]
    }

    pub fn levels(&self) -> &[Vec<f64>] {
        &self.levels
    }

    pub fn level(&self, n: usize) -> &[f64] {
        &self.levels[n]
    }

    pub fn leaves(&self) -> &[f64] {
        &self.levels[self.depth()]
    }

    /// Half-gap increments for levels `1..=depth`.
    pub fn deltas(&self) -> &[Vec<f64>] {
        &self.deltas
    }

    /// Difference sequence as an [`IncrementTree`]; `df_0 = 0`.
    pub fn increments(&self) -> IncrementTree {
        IncrementTree {
            root: self.root(),
            deltas: self.deltas.clone(),
        }
    }

    /// Checks level shapes, finiteness, and the parent-is-mean invariant.
    pub fn validate(&self) -> Result<()> {
        for (n, level) in self.levels.iter().enumerate() {
            if level.len() != 1 << n {
                return Err(Error::LevelShape {
                    level: n,
                    have: level.len(),
                    expected: 1 << n,
                });
            }
            if let Some((i, &v)) = level.iter().enumerate().find(|(_, v)| !v.is_finite()) {
                return Err(Error::NonFinite {
                    location: format!("level {n} node {i}"),
                    value: v,
                });
            }
        }
        for n in 0..self.depth() {
            let parents = &self.levels[n];
            let children = &self.levels[n + 1];
            for (j, &p) in parents.iter().enumerate() {
                let (l, r) = (children[2 * j], children[2 * j + 1]);
                let tol = INVARIANT_TOL * (1.0 + p.abs());
                let gap = (p - (l + r) / 2.0).abs();
                let split = (l - (p + self.deltas[n][j])).abs();
                if gap > tol || split > tol {
                    return Err(Error::InvariantViolation {
                        level: n,
                        node: j,
                        gap: gap.max(split),
                    });
                }
            }
        }
        Ok(())
    }

    /// Per-leaf `y0 + Σ_k (df_k)²` along each root-to-leaf path.
    pub fn square_function(&self, y0: f64) -> Result<Vec<f64>> {
        self.square_process(self.depth(), y0)
    }

    /// `(Sf)²_n` on each node of level `n`, started from `y0`.
    pub fn square_process(&self, n: usize, y0: f64) -> Result<Vec<f64>> {
        if !(y0 >= 0.0) {
            return Err(Error::NegativeVariation(y0));
        }
        let mut acc = vec![y0];
        for gaps in &self.deltas[..n] {
            let mut next = Vec::with_capacity(acc.len() * 2);
            for (&s, &d) in acc.iter().zip(gaps) {
                let v = s + d * d;
                next.push(v);
                next.push(v);
            }
            acc = next;
        }
        Ok(acc)
    }

    /// `±1` transform `g_n = f_0 + Σ ε_k df_k`.
    pub fn transform(&self, signs: &SignSequence) -> Result<Self> {
        if signs.len() < self.depth() {
            return Err(Error::SignsTooShort {
                needed: self.depth(),
                have: signs.len(),
            });
        }
        let deltas = self
            .deltas
            .iter()
            .enumerate()
            .map(|(k, gaps)| {
                if signs.at(k + 1) == 1 {
                    gaps.clone()
                } else {
                    gaps.iter().map(|d| -d).collect()
                }
            })
            .collect();
        Self::from_increments(IncrementTree {
            root: self.root(),
            deltas,
        })
    }

    /// Glues `left` and `right` under a new root with weight one half each.
    pub fn splice(left: &Self, right: &Self, root: f64) -> Result<Self> {
        if left.depth() != right.depth() {
            return Err(Error::DepthMismatch {
                left: left.depth(),
                right: right.depth(),
            });
        }
        check_depth(left.depth() + 1)?;
        let midpoint = (left.root() + right.root()) / 2.0;
        if !root.is_finite() || (root - midpoint).abs() > INVARIANT_TOL * (1.0 + midpoint.abs()) {
            return Err(Error::SpliceRoot { root, midpoint });
        }
        let mut levels = vec![vec![root]];
        for (a, b) in left.levels.iter().zip(&right.levels) {
            levels.push(a.iter().chain(b).copied().collect());
        }
        let mut deltas = vec![vec![(left.root() - right.root()) / 2.0]];
        for (a, b) in left.deltas.iter().zip(&right.deltas) {
            deltas.push(a.iter().chain(b).copied().collect());
        }
        Ok(Self { levels, deltas })
    }

    /// Stops the martingale at time `n <= depth`.
    pub fn truncate(&self, n: usize) -> Self {
        let n = n.min(self.depth());
        Self {
            levels: self.levels[..=n].to_vec(),
            deltas: self.deltas[..n].to_vec(),
        }
    }

    /// Same martingale shifted so that `f_0 = 0`.
    pub fn centered(&self) -> Self {
        let r = self.root();
        if r == 0.0 {
            return self.clone();
        }
        Self {
            levels: self
                .levels
                .iter()
                .map(|l| l.iter().map(|v| v - r).collect())
                .collect(),
            deltas: self.deltas.clone(),
        }
    }
}

fn check_depth(depth: usize) -> Result<()> {
    if depth > MAX_MATERIALIZED_DEPTH {
        Err(Error::DepthTooLarge {
            depth,
            max: MAX_MATERIALIZED_DEPTH,
        })
    } else {
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn split(x: f64, d: f64) -> DyadicMartingale {
        DyadicMartingale::from_leaf_values(&[x + d, x - d]).unwrap()
    }

    #[test]
    fn constant_leaves() {
        let m = DyadicMartingale::from_leaf_values(&[5.0, 5.0]).unwrap();
        assert_eq!(m.depth(), 1);
        assert_eq!(m.root(), 5.0);
        assert_eq!(m.leaves(), &[5.0, 5.0]);
        assert_eq!(m.increments().deltas, vec![vec![0.0]]);
    }

    #[test]
    fn symmetric_split() {
        let m = split(1.5, 0.25);
        assert_eq!(m.root(), 1.5);
        assert_eq!(m.increments().deltas, vec![vec![0.25]]);
        assert_eq!(m.square_function(0.0).unwrap(), vec![0.0625, 0.0625]);
    }

    #[test]
    fn family_truncation_by_hand() {
        let m = DyadicMartingale::from_leaf_values(&[5.0, 3.0, 2.0, 2.0, 1.0, 1.0, 1.0, 1.0]).unwrap();
        assert_eq!(m.root(), 2.0);
        assert_eq!(m.level(1), &[3.0, 1.0]);
        assert_eq!(m.level(2), &[4.0, 2.0, 1.0, 1.0]);
        // leftmost chain: 2 -> 3 -> 4 -> 5, each a unit step
        for k in 0..3 {
            assert_eq!(m.deltas()[k][0].abs(), 1.0);
        }
        assert_eq!(
            m.square_function(0.0).unwrap(),
            vec![3.0, 3.0, 2.0, 2.0, 1.0, 1.0, 1.0, 1.0]
        );
    }

    #[test]
    fn rejects_bad_leaf_input() {
        assert_eq!(
            DyadicMartingale::from_leaf_values(&[1.0, 2.0, 3.0]),
            Err(Error::NotPowerOfTwo(3))
        );
        assert!(matches!(
            DyadicMartingale::from_leaf_values(&[1.0, f64::NAN]),
            Err(Error::NonFinite { .. })
        ));
        assert!(matches!(
            DyadicMartingale::from_leaf_values(&[]),
            Err(Error::NotPowerOfTwo(0))
        ));
    }

    #[test]
    fn rejects_negative_variation() {
        let m = split(0.0, 1.0);
        assert_eq!(m.square_function(-1.0), Err(Error::NegativeVariation(-1.0)));
    }

    #[test]
    fn rejects_malformed_increments() {
        let bad = IncrementTree {
            root: 0.0,
            deltas: vec![vec![1.0], vec![1.0]],
        };
        assert!(matches!(
            DyadicMartingale::from_increments(bad),
            Err(Error::LevelShape { level: 2, .. })
        ));
    }

    #[test]
    fn constant_martingale_has_zero_increments() {
        let m = DyadicMartingale::constant(4, 2.5).unwrap();
        assert!(m.deltas().iter().flatten().all(|&d| d == 0.0));
        assert!(m.square_function(0.0).unwrap().iter().all(|&s| s == 0.0));
    }

    #[test]
    fn transform_examples() {
        let m = split(2.0, 0.5);
        let flipped = m.transform(&SignSequence::new(vec![-1]).unwrap()).unwrap();
        assert_eq!(flipped.leaves(), &[1.5, 2.5]);
        assert_eq!(m.transform(&SignSequence::all_plus(1)).unwrap(), m);
        assert_eq!(
            m.transform(&SignSequence::new(vec![]).unwrap()),
            Err(Error::SignsTooShort { needed: 1, have: 0 })
        );
        assert_eq!(SignSequence::new(vec![1, 0]), Err(Error::InvalidSign(0)));
    }

    #[test]
    fn splice_of_constants_is_one_step_split() {
        let a = DyadicMartingale::constant(0, 1.25).unwrap();
        let b = DyadicMartingale::constant(0, 0.75).unwrap();
        let s = DyadicMartingale::splice(&a, &b, 1.0).unwrap();
        assert_eq!(s, split(1.0, 0.25));
        assert!(matches!(
            DyadicMartingale::splice(&a, &b, 2.0),
            Err(Error::SpliceRoot { .. })
        ));
        let c = DyadicMartingale::constant(1, 0.0).unwrap();
        assert_eq!(
            DyadicMartingale::splice(&a, &c, 0.5),
            Err(Error::DepthMismatch { left: 0, right: 1 })
        );
    }

    #[test]
    fn validate_catches_tampering() {
        let mut m = split(0.0, 1.0);
        m.levels[1][0] += 1e-6;
        assert!(matches!(m.validate(), Err(Error::InvariantViolation { .. })));
    }

    #[test]
    fn depth_cap_enforced() {
        let inc = IncrementTree {
            root: 0.0,
            deltas: (0..21).map(|k| vec![0.0; 1 << k]).collect(),
        };
        assert!(matches!(
            DyadicMartingale::from_increments(inc),
            Err(Error::DepthTooLarge { depth: 21, .. })
        ));
    }
}
