//! JSON file format for martingales.
//!
//! Written as `{ "depth": N, "root": x, "deltas": [[...], ...] }`; the
//! leaf form `{ "leaves": [...] }` is accepted on input. Floats are written
//! in shortest round-trip decimal form, so read-then-write is byte stable.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::tree::{DyadicMartingale, IncrementTree};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct IncrementForm {
    depth: usize,
    root: f64,
    deltas: Vec<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct LeafForm {
    leaves: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum AnyForm {
    Increments(IncrementForm),
    Leaves(LeafForm),
}

pub fn to_json(m: &DyadicMartingale) -> String {
    let form = IncrementForm {
        depth: m.depth(),
        root: m.root(),
        deltas: m.deltas().to_vec(),
    };
    serde_json::to_string(&form).expect("finite floats always serialize")
}

pub fn from_json(text: &str) -> Result<DyadicMartingale> {
    let form: AnyForm = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
    match form {
        AnyForm::Increments(f) => {
            if f.deltas.len() != f.depth {
                return Err(Error::Format(format!(
                    "depth {} but {} delta levels",
                    f.depth,
                    f.deltas.len()
                )));
            }
            DyadicMartingale::from_increments(IncrementTree {
                root: f.root,
                deltas: f.deltas,
            })
        }
        AnyForm::Leaves(f) => DyadicMartingale::from_leaf_values(&f.leaves),
    }
}
