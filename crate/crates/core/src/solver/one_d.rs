use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{BoundaryPolicy, Grid1D};

use super::{DivergenceWitness, IterationReport, SolverConfig};

const CHUNK: usize = 256;

/// Offsets closer than this to an integer are snapped onto the grid.
const SNAP: f64 = 1e-9;

/// Result of a single Bellman step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub grid: Grid1D,
    /// `max_i (new_i - old_i)`; never negative.
    pub sup_change: f64,
    /// Smallest `x` whose new value exceeds the divergence threshold.
    pub exceeded_at: Option<f64>,
}

/// One off-grid probe at `x_j + offset·h`, pre-scaled by `e^{αδ²}/2`.
#[derive(Debug, Clone, Copy)]
struct Probe {
    k: i64,
    exact: bool,
    c0: f64,
    c1: f64,
    /// `w · e^{offset·h}` and `w · e^{2·offset·h}` for the analytic extension.
    ext_scale: f64,
    ext_scale2: f64,
    w: f64,
}

impl Probe {
    fn new(offset: f64, h: f64, alpha: f64, w: f64) -> Self {
        let near = offset.round();
        let offset = if (offset - near).abs() < SNAP { near } else { offset };
        let k = offset.floor();
        let t = offset - k;
        Self {
            k: k as i64,
            exact: t == 0.0,
            c0: w * (alpha * t * h).exp() * (1.0 - t),
            c1: w * (-alpha * (1.0 - t) * h).exp() * t,
            ext_scale: w * (offset * h).exp(),
            ext_scale2: w * (2.0 * offset * h).exp(),
            w,
        }
    }

    #[cfg(test)]
    fn read(&self, f: &[f64], ex: &[f64], j: usize, tail: Tail) -> f64 {
        let n = f.len() as i64;
        let idx = j as i64 + self.k;
        if idx >= 0 && idx + 1 < n {
            let i = idx as usize;
            self.c0 * f[i] + self.c1 * f[i + 1]
        } else if idx == n - 1 && self.exact {
            self.c0 * f[idx as usize]
        } else {
            match tail {
                Tail::Obstacle => ex[j] * self.ext_scale - self.w,
                Tail::Candidate if idx < 0 => ex[j] * self.ext_scale - self.w,
                Tail::Candidate => {
                    let e = ex[j];
                    e * e * self.ext_scale2 - e * self.ext_scale
                }
                Tail::Clamp if idx < 0 => self.w * f[0],
                Tail::Clamp => self.w * f[f.len() - 1],
            }
        }
    }
}

/// What a read beyond the grid returns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Tail {
    /// `V(x, 0)` on both sides.
    Obstacle,
    /// `V(x, 0)` below the grid, `e^{2x} - e^x` above it.
    Candidate,
    Clamp,
}

impl Tail {
    fn for_config(cfg: &SolverConfig) -> Self {
        match cfg.boundary_policy {
            BoundaryPolicy::Clamp => Tail::Clamp,
            BoundaryPolicy::ValueFunctionExtension if cfg.alpha == 2.0 => Tail::Candidate,
            BoundaryPolicy::ValueFunctionExtension => Tail::Obstacle,
        }
    }
}

/// How one probe reads over a run of consecutive grid points.
#[derive(Debug, Clone, Copy)]
enum Reader {
    /// Weighted interpolation at `j + k`.
    Inside { k: i64, c0: f64, c1: f64 },
    /// `a·e^{2x_j} + b·e^{x_j} + c`, covering every tail.
    Tail { a: f64, b: f64, c: f64 },
}

impl Probe {
    /// `j` with an interior read form the half-open range `[lo, hi)`.
    fn inside_range(&self, n: usize) -> (i64, i64) {
        let extra = i64::from(self.exact);
        (-self.k, n as i64 - 1 - self.k + extra)
    }

    fn reader(&self, region: Region, tail: Tail, f: &[f64]) -> Reader {
        let obstacle = Reader::Tail {
            a: 0.0,
            b: self.ext_scale,
            c: -self.w,
        };
        match (region, tail) {
            (Region::Inside, _) => Reader::Inside {
                k: self.k,
                c0: self.c0,
                c1: self.c1,
            },
            (_, Tail::Obstacle) | (Region::Below, Tail::Candidate) => obstacle,
            (Region::Above, Tail::Candidate) => Reader::Tail {
                a: self.ext_scale2,
                b: -self.ext_scale,
                c: 0.0,
            },
            (Region::Below, Tail::Clamp) => Reader::Tail {
                a: 0.0,
                b: 0.0,
                c: self.w * f[0],
            },
            (Region::Above, Tail::Clamp) => Reader::Tail {
                a: 0.0,
                b: 0.0,
                c: self.w * f[f.len() - 1],
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Region {
    Below,
    Inside,
    Above,
}

fn region(j: i64, (lo, hi): (i64, i64)) -> Region {
    if j < lo {
        Region::Below
    } else if j < hi {
        Region::Inside
    } else {
        Region::Above
    }
}

/// `out[j] = max(out[j], lo(j) + hi(j))` for `j` in `s..e`; `out` starts at
/// `s`. `fp` carries one trailing pad so exact end reads stay in bounds.
#[inline]
fn fill(out: &mut [f64], s: usize, e: usize, lo: Reader, hi: Reader, fp: &[f64], ex: &[f64]) {
    let slice = |k: i64, shift: usize| {
        let a = (s as i64 + k) as usize + shift;
        &fp[a..a + (e - s)]
    };
    let ex = &ex[s..e];
    match (lo, hi) {
        (Reader::Inside { k: k0, c0: a0, c1: a1 }, Reader::Inside { k: k1, c0: b0, c1: b1 }) => {
            let (p0, p1, q0, q1) = (slice(k0, 0), slice(k0, 1), slice(k1, 0), slice(k1, 1));
            for i in 0..out.len() {
                let v = a0 * p0[i] + a1 * p1[i] + b0 * q0[i] + b1 * q1[i];
                out[i] = out[i].max(v);
            }
        }
        (Reader::Inside { k, c0, c1 }, Reader::Tail { a, b, c })
        | (Reader::Tail { a, b, c }, Reader::Inside { k, c0, c1 }) => {
            let (p0, p1) = (slice(k, 0), slice(k, 1));
            for i in 0..out.len() {
                let x = ex[i];
                let v = c0 * p0[i] + c1 * p1[i] + (a * x + b) * x + c;
                out[i] = out[i].max(v);
            }
        }
        (Reader::Tail { a, b, c }, Reader::Tail { a: a2, b: b2, c: c2 }) => {
            let (a, b, c) = (a + a2, b + b2, c + c2);
            for i in 0..out.len() {
                let x = ex[i];
                out[i] = out[i].max((a * x + b) * x + c);
            }
        }
    }
}

/// Precomputed stencil for a fixed grid and configuration.
pub(crate) struct Stepper {
    pairs: Vec<(Probe, Probe)>,
    /// `e^{x_j}`, shared by every extension read.
    ex: Vec<f64>,
    /// `V(x_j, 0)`.
    obstacle: Vec<f64>,
    tail: Tail,
}

impl Stepper {
    pub(crate) fn new(x_min: f64, h: f64, n: usize, cfg: &SolverConfig) -> Self {
        let alpha = cfg.alpha;
        let pairs = cfg
            .delta_magnitudes()
            .into_iter()
            .map(|d| {
                let w = 0.5 * (alpha * d * d).exp();
                let drift = alpha * d * d;
                (
                    Probe::new((-d - drift) / h, h, alpha, w),
                    Probe::new((d - drift) / h, h, alpha, w),
                )
            })
            .collect();
        let ex: Vec<f64> = (0..n).map(|j| (x_min + h * j as f64).exp()).collect();
        let obstacle = ex.iter().map(|e| e - 1.0).collect();
        Self {
            pairs,
            ex,
            obstacle,
            tail: Tail::for_config(cfg),
        }
    }

    /// Writes `T f` into `out` and returns the sup of the change.
    pub(crate) fn apply(&self, f: &[f64], out: &mut [f64]) -> f64 {
        let n = f.len();
        let mut fp = Vec::with_capacity(n + 1);
        fp.extend_from_slice(f);
        fp.push(0.0);
        out.par_chunks_mut(CHUNK)
            .enumerate()
            .map(|(c, chunk)| {
                let base = c * CHUNK;
                let end = base + chunk.len();
                chunk.copy_from_slice(&f[base..end]);
                for (lo, hi) in &self.pairs {
                    let (rl, rh) = (lo.inside_range(n), hi.inside_range(n));
                    let mut cuts = [base as i64, end as i64, rl.0, rl.1, rh.0, rh.1]
                        .map(|v| v.clamp(base as i64, end as i64));
                    cuts.sort_unstable();
                    for w in cuts.windows(2) {
                        let (s, e) = (w[0], w[1]);
                        if s == e {
                            continue;
                        }
                        let a = lo.reader(region(s, rl), self.tail, f);
                        let b = hi.reader(region(s, rh), self.tail, f);
                        let (s, e) = (s as usize, e as usize);
                        fill(&mut chunk[s - base..e - base], s, e, a, b, &fp, &self.ex);
                    }
                }
                let mut change: f64 = 0.0;
                for (off, o) in chunk.iter_mut().enumerate() {
                    let j = base + off;
                    if self.obstacle[j] > *o {
                        *o = self.obstacle[j];
                    }
                    let d = *o - f[j];
                    if d > change || d.is_nan() {
                        change = if d.is_nan() { f64::INFINITY } else { d };
                    }
                }
                change
            })
            .reduce(|| 0.0, f64::max)
    }

    /// Probe-by-probe version of [`Stepper::apply`], kept as a reference.
    #[cfg(test)]
    fn apply_reference(&self, f: &[f64]) -> Vec<f64> {
        (0..f.len())
            .map(|j| {
                let best = self
                    .pairs
                    .iter()
                    .map(|(lo, hi)| lo.read(f, &self.ex, j, self.tail) + hi.read(f, &self.ex, j, self.tail))
                    .fold(f[j], f64::max);
                best.max(self.obstacle[j])
            })
            .collect()
    }
}

/// `V(x, 0) = e^x - 1` sampled on the configured grid.
pub fn default_initial(cfg: &SolverConfig) -> Result<Grid1D> {
    cfg.validate()?;
    Grid1D::from_fn(cfg.x_min, cfg.x_max, cfg.x_step, cfg.boundary_policy, |x| x.exp() - 1.0)
}

fn check_finite(f: &Grid1D) -> Result<()> {
    match f.values.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(Error::NonFinite {
            location: format!("initial grid at x = {}", f.x(i)),
            value: f.values[i],
        }),
        None => Ok(()),
    }
}

fn first_exceeding(f: &Grid1D, threshold: f64) -> Option<f64> {
    f.values
        .iter()
        .position(|&v| !(v <= threshold))
        .map(|i| f.x(i))
}

/// One application of the reduced Bellman operator
/// `f ↦ max(V(·,0), sup_δ e^{αδ²}·½[f(x-δ-αδ²) + f(x+δ-αδ²)])`.
pub fn bellman_step_1d(f: &Grid1D, cfg: &SolverConfig) -> Result<StepOutcome> {
    cfg.validate()?;
    check_finite(f)?;
    let stepper = Stepper::new(f.x_min, f.step, f.len(), cfg);
    let mut out = vec![0.0; f.len()];
    let sup_change = stepper.apply(&f.values, &mut out);
    let mut grid = f.with_values(out);
    grid.boundary_policy = cfg.boundary_policy;
    let exceeded_at = first_exceeding(&grid, cfg.divergence_threshold);
    Ok(StepOutcome {
        grid,
        sup_change,
        exceeded_at,
    })
}

/// Iterates [`bellman_step_1d`] from `initial` (default `V(·,0)`) until the
/// sup change drops below the tolerance, the threshold is crossed, or the
/// iteration budget runs out.
pub fn solve_1d(cfg: &SolverConfig, initial: Option<&Grid1D>) -> Result<(Grid1D, IterationReport)> {
    solve_1d_observed(cfg, initial, |_, _, _| {})
}

/// [`solve_1d`] with a callback `(iteration, values, sup_change)` after
/// every step.
pub fn solve_1d_observed<F>(
    cfg: &SolverConfig,
    initial: Option<&Grid1D>,
    mut observe: F,
) -> Result<(Grid1D, IterationReport)>
where
    F: FnMut(usize, &[f64], f64),
{
    cfg.validate()?;
    let start = match initial {
        Some(g) => g.clone(),
        None => default_initial(cfg)?,
    };
    check_finite(&start)?;
    let stepper = Stepper::new(start.x_min, start.step, start.len(), cfg);
    let mut cur = start.values.clone();
    let mut next = vec![0.0; cur.len()];
    let mut report = IterationReport {
        iterations_run: 0,
        final_sup_change: f64::INFINITY,
        converged: false,
        diverged: false,
        divergence_witness: None,
    };
    for it in 1..=cfg.max_iterations {
        let change = stepper.apply(&cur, &mut next);
        std::mem::swap(&mut cur, &mut next);
        report.iterations_run = it;
        report.final_sup_change = change;
        observe(it, &cur, change);
        if let Some(i) = cur.iter().position(|&v| !(v <= cfg.divergence_threshold)) {
            report.diverged = true;
            report.divergence_witness = Some(DivergenceWitness {
                x: start.x(i),
                y: None,
                iteration: it,
            });
            break;
        }
        if change < cfg.convergence_tol {
            report.converged = true;
            break;
        }
    }
    let mut grid = start.with_values(cur);
    grid.boundary_policy = cfg.boundary_policy;
    Ok((grid, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(alpha: f64) -> SolverConfig {
        SolverConfig {
            alpha,
            x_min: -6.0,
            x_max: 2.0,
            x_step: 0.02,
            delta_min: -2.0,
            delta_max: 2.0,
            delta_step: 0.02,
            max_iterations: 400,
            ..SolverConfig::default()
        }
    }

    #[test]
    fn step_never_decreases() {
        let cfg = small(2.0);
        let f = default_initial(&cfg).unwrap();
        let out = bellman_step_1d(&f, &cfg).unwrap();
        assert!(out.sup_change > 0.0);
        for (a, b) in out.grid.values.iter().zip(&f.values) {
            assert!(a >= b);
        }
    }

    #[test]
    fn candidate_profile_is_a_fixed_point_at_critical_alpha() {
        let cfg = small(2.0);
        let f = Grid1D::from_fn(cfg.x_min, cfg.x_max, cfg.x_step, cfg.boundary_policy, |x| {
            (2.0 * x).exp() - x.exp()
        })
        .unwrap();
        let out = bellman_step_1d(&f, &cfg).unwrap();
        assert!(out.sup_change <= 1e-6, "{}", out.sup_change);
    }

    #[test]
    fn strict_growth_below_critical_alpha() {
        let mut cfg = small(1.0);
        let mut f = default_initial(&cfg).unwrap();
        cfg.divergence_threshold = 1e300;
        for _ in 0..10 {
            let out = bellman_step_1d(&f, &cfg).unwrap();
            assert!(out.sup_change > 0.0);
            f = out.grid;
        }
    }

    #[test]
    fn offsets_on_grid_read_exact_values() {
        let p = Probe::new(-2.0 + 1e-12, 0.1, 2.0, 1.0);
        assert!(p.exact);
        assert_eq!(p.k, -2);
        assert_eq!(p.c0, 1.0);
        assert_eq!(p.c1, 0.0);
        let f = [1.0, 2.0, 3.0, 4.0];
        let ex = [1.0; 4];
        assert_eq!(p.read(&f, &ex, 3, Tail::Clamp), 2.0);
        assert_eq!(p.read(&f, &ex, 0, Tail::Clamp), 1.0);
    }

    #[test]
    fn weighted_read_is_exact_on_critical_exponentials() {
        // e^{αx} is reproduced exactly by interpolating e^{-αx} f
        let (h, alpha) = (0.1, 2.0);
        let f: Vec<f64> = (0..10).map(|i| (alpha * h * i as f64).exp()).collect();
        let ex = vec![1.0; 10];
        let p = Probe::new(2.37, h, alpha, 1.0);
        let got = p.read(&f, &ex, 3, Tail::Clamp);
        let want = (alpha * h * 5.37).exp();
        assert!((got - want).abs() < 1e-12 * want);
    }

    #[test]
    fn converges_at_alpha_two_and_stays_below_candidate() {
        let cfg = SolverConfig {
            max_iterations: 20_000,
            convergence_tol: 1e-7,
            ..small(2.0)
        };
        let (sol, rep) = solve_1d(&cfg, None).unwrap();
        assert!(rep.converged && !rep.diverged, "{rep:?}");
        for (x, v) in sol.xs().zip(&sol.values) {
            assert!(*v <= (2.0 * x).exp() - x.exp() + 1e-9, "{x}: {v}");
            assert!(*v >= x.exp() - 1.0);
        }
    }

    #[test]
    fn diverges_below_critical_alpha() {
        for alpha in [1.0, 1.5] {
            let cfg = SolverConfig {
                max_iterations: 2_000,
                ..small(alpha)
            };
            let (_, rep) = solve_1d(&cfg, None).unwrap();
            assert!(rep.diverged, "alpha {alpha}: {rep:?}");
            assert!(rep.divergence_witness.is_some());
        }
    }

    #[test]
    fn segmented_sweep_matches_probe_by_probe() {
        for (alpha, policy) in [
            (2.0, BoundaryPolicy::ValueFunctionExtension),
            (1.5, BoundaryPolicy::ValueFunctionExtension),
            (2.0, BoundaryPolicy::Clamp),
        ] {
            let cfg = SolverConfig {
                boundary_policy: policy,
                ..small(alpha)
            };
            let f = Grid1D::from_fn(cfg.x_min, cfg.x_max, cfg.x_step, policy, |x| {
                x.exp() - 1.0 + 0.3 * (x + 6.0).sin().powi(2)
            })
            .unwrap();
            let st = Stepper::new(f.x_min, f.step, f.len(), &cfg);
            let mut fast = vec![0.0; f.len()];
            st.apply(&f.values, &mut fast);
            let slow = st.apply_reference(&f.values);
            for (a, b) in fast.iter().zip(&slow) {
                assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()), "{a} vs {b}");
            }
        }
    }

    #[test]
    fn rejects_non_finite_input() {
        let cfg = small(2.0);
        let mut f = default_initial(&cfg).unwrap();
        f.values[3] = f64::NAN;
        assert!(matches!(bellman_step_1d(&f, &cfg), Err(Error::NonFinite { .. })));
    }
}
