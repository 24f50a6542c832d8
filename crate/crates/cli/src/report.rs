use std::io::Write;
use std::path::PathBuf;

use anyhow::{Context, Result};
use bellman_lab::lab::ScanRow;
use bellman_lab::Grid1D;
use serde::Serialize;

/// A file path, or stdout when absent.
pub struct Sink {
    path: Option<PathBuf>,
}

impl Sink {
    pub fn new(path: Option<PathBuf>) -> Self {
        Self { path }
    }

    pub fn write_bytes(&self, bytes: &[u8]) -> Result<()> {
        match &self.path {
            Some(p) => std::fs::write(p, bytes).with_context(|| format!("writing {}", p.display())),
            None => {
                let mut out = std::io::stdout().lock();
                out.write_all(bytes).and_then(|_| out.flush()).context("writing to stdout")
            }
        }
    }
}

pub fn write_json<T: Serialize + ?Sized>(sink: &Sink, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    sink.write_bytes(&bytes)
}

#[derive(Serialize)]
struct ScanCsvRow {
    #[serde(rename = "N")]
    n: usize,
    alpha: f64,
    lhs: f64,
    rhs: f64,
    ratio: f64,
    satisfied: bool,
}

pub fn write_scan_csv(sink: &Sink, rows: &[ScanRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(ScanCsvRow {
            n: r.depth,
            alpha: r.alpha,
            lhs: r.report.lhs,
            rhs: r.report.rhs,
            ratio: r.report.ratio,
            satisfied: r.report.satisfied,
        })?;
    }
    sink.write_bytes(&w.into_inner()?)
}

pub fn write_solution_csv(sink: &Sink, grid: &Grid1D) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["x", "f"])?;
    for (x, f) in grid.xs().zip(&grid.values) {
        w.serialize((x, f))?;
    }
    sink.write_bytes(&w.into_inner()?)
}
