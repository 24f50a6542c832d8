use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::tree::{DyadicMartingale, IncrementTree};

/// Law of the i.i.d. half-gap increments of a random martingale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "lowercase")]
pub enum IncrementLaw {
    /// Uniform on `(-c, c)`.
    Uniform { c: f64 },
    /// Centered normal with standard deviation `sigma`.
    Gaussian { sigma: f64 },
    /// `±c` with equal probability.
    Rademacher { c: f64 },
}

impl IncrementLaw {
    pub const ALL_NAMES: [&'static str; 3] = ["uniform", "gaussian", "rademacher"];

    fn scale(&self) -> f64 {
        match *self {
            Self::Uniform { c } | Self::Rademacher { c } => c,
            Self::Gaussian { sigma } => sigma,
        }
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        match *self {
            Self::Uniform { c } => {
                if c == 0.0 {
                    0.0
                } else {
                    rng.random_range(-c..c)
                }
            }
            Self::Gaussian { sigma } => Normal::new(0.0, sigma).map(|n| n.sample(rng)).unwrap_or(0.0),
            Self::Rademacher { c } => {
                if rng.random::<bool>() {
                    c
                } else {
                    -c
                }
            }
        }
    }
}

impl fmt::Display for IncrementLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Uniform { c } => write!(f, "uniform({c})"),
            Self::Gaussian { sigma } => write!(f, "gaussian({sigma})"),
            Self::Rademacher { c } => write!(f, "rademacher({c})"),
        }
    }
}

/// Parses `uniform(c)`, `gaussian(sigma)` or `rademacher(c)`.
impl FromStr for IncrementLaw {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, arg) = match s.find('(') {
            Some(open) if s.ends_with(')') => (&s[..open], &s[open + 1..s.len() - 1]),
            _ => return Err(Error::UnknownLaw(s.to_string())),
        };
        let value: f64 = arg
            .trim()
            .parse()
            .map_err(|_| Error::InvalidParameter(format!("bad law parameter in `{s}`")))?;
        let law = match name.trim().to_ascii_lowercase().as_str() {
            "uniform" => Self::Uniform { c: value },
            "gaussian" => Self::Gaussian { sigma: value },
            "rademacher" => Self::Rademacher { c: value },
            _ => return Err(Error::UnknownLaw(name.trim().to_string())),
        };
        if !(law.scale() >= 0.0) || !law.scale().is_finite() {
            return Err(Error::InvalidParameter(format!("law scale must be finite and non-negative in `{s}`")));
        }
        Ok(law)
    }
}

/// Seeded random martingale with root 0 and i.i.d. increments.
pub fn random_martingale(depth: usize, law: IncrementLaw, seed: u64) -> Result<DyadicMartingale> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let deltas = (0..depth)
        .map(|k| (0..1usize << k).map(|_| law.sample(&mut rng)).collect())
        .collect();
    DyadicMartingale::from_increments(IncrementTree { root: 0.0, deltas })
}
