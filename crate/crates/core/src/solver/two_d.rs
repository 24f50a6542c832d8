use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::candidates::AxisRange;
use crate::error::{Error, Result};
use crate::grid::{BoundaryPolicy, Grid1D};

use super::{DivergenceWitness, IterationReport, SolverConfig};

const SNAP: f64 = 1e-9;

/// Values on an `(x, y)` grid, stored row by row in `y`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table2D {
    pub x: AxisRange,
    pub y: AxisRange,
    pub nx: usize,
    pub ny: usize,
    pub values: Vec<f64>,
}

impl Table2D {
    pub fn get(&self, ix: usize, iy: usize) -> f64 {
        self.values[iy * self.nx + ix]
    }

    pub fn row(&self, iy: usize) -> &[f64] {
        &self.values[iy * self.nx..(iy + 1) * self.nx]
    }

    /// The row at `y = y.min + iy·step` as a 1-D grid.
    pub fn row_grid(&self, iy: usize, policy: BoundaryPolicy) -> Result<Grid1D> {
        Grid1D::new(self.x.min, self.x.step, self.row(iy).to_vec(), policy)
    }
}

/// Weights for reading at `i + offset` along one axis, where the
/// interpolated quantity is `e^{-rate·s} f(s)`.
#[derive(Debug, Clone, Copy)]
struct AxisProbe {
    k: i64,
    exact: bool,
    c0: f64,
    c1: f64,
}

impl AxisProbe {
    fn new(offset: f64, step: f64, rate: f64) -> Self {
        let near = offset.round();
        let offset = if (offset - near).abs() < SNAP { near } else { offset };
        let k = offset.floor();
        let t = offset - k;
        Self {
            k: k as i64,
            exact: t == 0.0,
            c0: (rate * t * step).exp() * (1.0 - t),
            c1: (-rate * (1.0 - t) * step).exp() * t,
        }
    }

    /// `(i0, i1, c0, c1)` when the probe from `i` stays inside `0..n`.
    #[inline]
    fn locate(&self, i: usize, n: usize) -> Option<(usize, usize, f64, f64)> {
        let idx = i as i64 + self.k;
        if idx < 0 {
            return None;
        }
        let idx = idx as usize;
        if idx + 1 < n {
            Some((idx, idx + 1, self.c0, self.c1))
        } else if idx + 1 == n && self.exact {
            Some((idx, idx, self.c0, 0.0))
        } else {
            None
        }
    }
}

struct DeltaStencil {
    lo: AxisProbe,
    hi: AxisProbe,
    y: AxisProbe,
    /// `e^{∓δ}` and `e^{αδ²}` for exact extension reads.
    ex_lo: f64,
    ex_hi: f64,
    ey: f64,
}

/// `n_steps` rounds of backward induction
/// `B_k(x,y) = max(B_{k-1}(x,y), sup_δ ½[B_{k-1}(x+δ, y+δ²) + B_{k-1}(x-δ, y+δ²)])`
/// from `B_0 = V` on the grid `cfg.x × y_axis`.
///
/// Reads outside the table use `V` itself. Bilinear reads interpolate
/// `e^{-α(x-y)} B`, the two-dimensional analogue of the 1-D weighting.
pub fn backward_induction_2d(
    cfg: &SolverConfig,
    y_axis: AxisRange,
    n_steps: usize,
) -> Result<(Table2D, IterationReport)> {
    cfg.validate()?;
    if y_axis.min < 0.0 {
        return Err(Error::InvalidParameter(format!("y grid starts below 0 at {}", y_axis.min)));
    }
    let x_axis = cfg.x_axis();
    let nx = x_axis.count()?;
    let ny = y_axis.count()?;
    if nx < 2 || ny < 2 {
        return Err(Error::GridTooSmall { have: nx.min(ny), need: 2 });
    }
    let alpha = cfg.alpha;
    let (hx, hy) = (x_axis.step, y_axis.step);

    let ex: Vec<f64> = (0..nx).map(|i| x_axis.at(i).exp()).collect();
    let ey: Vec<f64> = (0..ny).map(|j| (alpha * y_axis.at(j)).exp()).collect();
    let stencils: Vec<DeltaStencil> = cfg
        .delta_magnitudes()
        .into_iter()
        .map(|d| DeltaStencil {
            lo: AxisProbe::new(-d / hx, hx, alpha),
            hi: AxisProbe::new(d / hx, hx, alpha),
            y: AxisProbe::new(d * d / hy, hy, -alpha),
            ex_lo: (-d).exp(),
            ex_hi: d.exp(),
            ey: (alpha * d * d).exp(),
        })
        .collect();

    let mut cur: Vec<f64> = (0..ny)
        .flat_map(|j| ex.iter().map(move |e| (e, j)))
        .map(|(e, j)| e - ey[j])
        .collect();
    let mut next = vec![0.0; cur.len()];
    let mut report = IterationReport {
        iterations_run: 0,
        final_sup_change: 0.0,
        converged: false,
        diverged: false,
        divergence_witness: None,
    };

    for step in 1..=n_steps {
        let prev = &cur;
        let change = next
            .par_chunks_mut(nx)
            .enumerate()
            .map(|(j, row)| {
                row.copy_from_slice(&prev[j * nx..(j + 1) * nx]);
                for s in &stencils {
                    let yl = s.y.locate(j, ny);
                    for (i, o) in row.iter_mut().enumerate() {
                        let read = |p: &AxisProbe, ext: f64| match (p.locate(i, nx), yl) {
                            (Some((i0, i1, a0, a1)), Some((j0, j1, b0, b1))) => {
                                b0 * (a0 * prev[j0 * nx + i0] + a1 * prev[j0 * nx + i1])
                                    + b1 * (a0 * prev[j1 * nx + i0] + a1 * prev[j1 * nx + i1])
                            }
                            _ => ex[i] * ext - ey[j] * s.ey,
                        };
                        let v = 0.5 * (read(&s.lo, s.ex_lo) + read(&s.hi, s.ex_hi));
                        if v > *o {
                            *o = v;
                        }
                    }
                }
                row.iter()
                    .zip(&prev[j * nx..(j + 1) * nx])
                    .map(|(a, b)| if (a - b).is_nan() { f64::INFINITY } else { a - b })
                    .fold(0.0, f64::max)
            })
            .reduce(|| 0.0, f64::max);
        std::mem::swap(&mut cur, &mut next);
        report.iterations_run = step;
        report.final_sup_change = change;
        if let Some(p) = cur.iter().position(|&v| !(v <= cfg.divergence_threshold)) {
            report.diverged = true;
            report.divergence_witness = Some(DivergenceWitness {
                x: x_axis.at(p % nx),
                y: Some(y_axis.at(p / nx)),
                iteration: step,
            });
            break;
        }
    }
    report.converged = !report.diverged && report.final_sup_change < cfg.convergence_tol;

    Ok((
        Table2D {
            x: x_axis,
            y: y_axis,
            nx,
            ny,
            values: cur,
        },
        report,
    ))
}
