use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::LN_2;

use crate::error::{Error, Result};
use crate::martingale::{expectation, DyadicMartingale, IncrementTree};
use crate::numeric::{derive_seed, pairwise_sum};

use super::family::{counterexample_family, ExampleFamilySpec};

/// Deepest tree the search will optimize.
pub const MAX_SEARCH_DEPTH: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchConfig {
    pub depth: usize,
    pub alpha: f64,
    pub restarts: usize,
    pub steps: usize,
    pub proposal_scale: f64,
    pub seed: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            depth: 8,
            alpha: 2.0,
            restarts: 8,
            steps: 20_000,
            proposal_scale: 0.25,
            seed: 0,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.depth == 0 || self.restarts == 0 || self.steps == 0 {
            return Err(Error::InvalidParameter(
                "depth, restarts and steps must all be positive".into(),
            ));
        }
        if self.depth > MAX_SEARCH_DEPTH {
            return Err(Error::DepthTooLarge {
                depth: self.depth,
                max: MAX_SEARCH_DEPTH,
            });
        }
        if !(self.alpha > 0.0) || !(self.proposal_scale > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "alpha and proposal_scale must be positive, got {} and {}",
                self.alpha, self.proposal_scale
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    pub tree: DyadicMartingale,
    /// `𝔼 e^{f} - 𝔼 e^{α(Sf)²}` of `tree`.
    pub gap: f64,
    /// Restart that produced `tree`.
    pub restart: usize,
    /// Objective after each accepted move of the winning restart.
    pub accepted: Vec<f64>,
}

/// `𝔼 e^{f_N - f_0} - 𝔼 e^{α(Sf_N)²}`.
pub fn gap(m: &DyadicMartingale, alpha: f64) -> Result<f64> {
    let r = m.root();
    expectation(m, |v, s| (v - r).exp() - (alpha * s).exp())
}

/// Leaf values, squares and payoff contributions under coordinate moves.
struct State {
    alpha: f64,
    depth: usize,
    deltas: Vec<Vec<f64>>,
    value: Vec<f64>,
    square: Vec<f64>,
    contrib: Vec<f64>,
    total: f64,
}

impl State {
    fn new(deltas: Vec<Vec<f64>>, alpha: f64) -> Self {
        let depth = deltas.len();
        let leaves = 1usize << depth;
        let mut value = vec![0.0; leaves];
        let mut square = vec![0.0; leaves];
        for (k, level) in deltas.iter().enumerate() {
            let span = leaves >> k;
            for (j, &d) in level.iter().enumerate() {
                let start = j * span;
                for i in start..start + span {
                    value[i] += if i < start + span / 2 { d } else { -d };
                    square[i] += d * d;
                }
            }
        }
        let contrib: Vec<f64> = value
            .iter()
            .zip(&square)
            .map(|(v, s)| v.exp() - (alpha * s).exp())
            .collect();
        let total = pairwise_sum(0, leaves, &|i| contrib[i]);
        Self {
            alpha,
            depth,
            deltas,
            value,
            square,
            contrib,
            total,
        }
    }

    fn leaves(&self) -> f64 {
        (1usize << self.depth) as f64
    }

    /// Moves `δ` at node `(level, j)` to `new` if that raises the total.
    fn try_move(&mut self, level: usize, j: usize, new: f64) -> bool {
        let old = self.deltas[level][j];
        let shift = new - old;
        let dsq = new * new - old * old;
        let span = (1usize << self.depth) >> level;
        let start = j * span;
        let half = span / 2;
        let fresh: Vec<f64> = (start..start + span)
            .map(|i| {
                let v = self.value[i] + if i < start + half { shift } else { -shift };
                v.exp() - (self.alpha * (self.square[i] + dsq)).exp()
            })
            .collect();
        let before = pairwise_sum(start, start + span, &|i| self.contrib[i]);
        let after = pairwise_sum(0, span, &|i| fresh[i]);
        let diff = after - before;
        if !(diff > 0.0) || !after.is_finite() {
            return false;
        }
        for (off, c) in fresh.into_iter().enumerate() {
            let i = start + off;
            self.value[i] += if off < half { shift } else { -shift };
            self.square[i] += dsq;
            self.contrib[i] = c;
        }
        self.deltas[level][j] = new;
        self.total += diff;
        true
    }
}

fn initial_deltas(cfg: &SearchConfig, restart: usize, rng: &mut ChaCha8Rng) -> Result<Vec<Vec<f64>>> {
    let n = cfg.depth;
    Ok(match restart {
        0 => (0..n).map(|k| vec![0.0; 1 << k]).collect(),
        1 => counterexample_family(ExampleFamilySpec::new(n, LN_2)?)?
            .increments()
            .deltas,
        _ => (0..n)
            .map(|k| {
                (0..1 << k)
                    .map(|_| rng.random_range(-cfg.proposal_scale..cfg.proposal_scale))
                    .collect()
            })
            .collect(),
    })
}

fn run_restart(cfg: &SearchConfig, restart: usize) -> Result<(State, Vec<f64>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, "search", restart as u64));
    let normal = Normal::new(0.0, cfg.proposal_scale)
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let mut state = State::new(initial_deltas(cfg, restart, &mut rng)?, cfg.alpha);
    let mut accepted = Vec::new();
    for _ in 0..cfg.steps {
        let level = rng.random_range(0..cfg.depth);
        let j = rng.random_range(0..1usize << level);
        let proposal = state.deltas[level][j] + normal.sample(&mut rng);
        if state.try_move(level, j, proposal) {
            accepted.push(state.total / state.leaves());
        }
    }
    Ok((state, accepted))
}

/// Coordinate ascent on the half-gaps of a root-0 tree, maximizing the
/// gap at fixed `α`.
///
/// Restart 0 starts from the zero tree and restart 1 from the centered
/// `λ = ln 2` family; later restarts draw every `δ` uniformly from
/// `(-scale, scale)`. A move perturbs one `δ` by a normal step and is kept
/// only if the gap increases. Restarts run in parallel and the best gap
/// wins, ties going to the lower restart index.
pub fn extremal_search(cfg: &SearchConfig) -> Result<SearchOutcome> {
    cfg.validate()?;
    let runs: Vec<(State, Vec<f64>)> = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| run_restart(cfg, r))
        .collect::<Result<_>>()?;
    let mut best: Option<SearchOutcome> = None;
    for (restart, (state, accepted)) in runs.into_iter().enumerate() {
        let tree = DyadicMartingale::from_increments(IncrementTree {
            root: 0.0,
            deltas: state.deltas,
        })?;
        let g = gap(&tree, cfg.alpha)?;
        if best.as_ref().is_none_or(|b| g > b.gap) {
            best = Some(SearchOutcome {
                tree,
                gap: g,
                restart,
                accepted,
            });
        }
    }
    Ok(best.expect("at least one restart"))
}
