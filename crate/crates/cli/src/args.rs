use std::path::PathBuf;
use std::str::FromStr;

use bellman_lab::candidates::AxisRange;
use bellman_lab::BoundaryPolicy;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

#[derive(Debug, Parser)]
#[command(name = "bellman-lab", version, about = "Numerical laboratory for dyadic martingale exponential inequalities")]
pub struct Cli {
    /// TOML file with a section per subcommand; flags win over file values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Root seed for every random draw.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Worker threads (default: available parallelism).
    #[arg(long, global = true, env = "BELLMAN_LAB_THREADS")]
    pub threads: Option<usize>,

    /// Where to write the main artifact (default: stdout).
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a Bellman candidate for majorization, concavity and the initial condition.
    Verify(VerifyArgs),
    /// Run value iteration for the reduced Bellman function.
    Solve(SolveArgs),
    /// Evaluate one inequality on a tree read from JSON.
    Check(CheckArgs),
    /// Tabulate the main inequality on the counterexample family.
    Scan(ScanArgs),
    /// Search for martingales that maximize the gap at fixed alpha.
    Search(SearchArgs),
    /// Write a member of the counterexample family as tree JSON.
    Example(ExampleArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CandidateArg {
    Main,
    Rejected,
    OdeLift,
}

/// `min:max:step`, or a single number for one point.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(try_from = "String")]
pub struct RangeArg(pub AxisRange);

impl FromStr for RangeArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<f64> = s
            .split(':')
            .map(|p| p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}")))
            .collect::<Result<_, _>>()?;
        let range = match parts[..] {
            [v] => AxisRange::point(v),
            [min, max, step] => AxisRange::new(min, max, step),
            _ => return Err(format!("expected min:max:step, got {s:?}")),
        };
        range.count().map_err(|e| e.to_string())?;
        Ok(Self(range))
    }
}

impl TryFrom<String> for RangeArg {
    type Error = String;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

/// A single concavity probe `x,y,delta`.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(try_from = "String")]
pub struct ProbeArg {
    pub x: f64,
    pub y: f64,
    pub delta: f64,
}

impl FromStr for ProbeArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let v: Vec<f64> = s
            .split(',')
            .map(|p| p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}")))
            .collect::<Result<_, _>>()?;
        match v[..] {
            [x, y, delta] => Ok(Self { x, y, delta }),
            _ => Err(format!("expected x,y,delta, got {s:?}")),
        }
    }
}

impl TryFrom<String> for ProbeArg {
    type Error = String;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyArgs {
    #[arg(long, value_enum)]
    pub candidate: Option<CandidateArg>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// `c1` for the ode-lift candidate.
    #[arg(long, allow_hyphen_values = true)]
    pub c1: Option<f64>,
    /// `c2` for the ode-lift candidate.
    #[arg(long, allow_hyphen_values = true)]
    pub c2: Option<f64>,
    /// x grid as `min:max:step` (default -20:6:0.01).
    #[arg(long, allow_hyphen_values = true)]
    pub x_range: Option<RangeArg>,
    /// y grid as `min:max:step` (default 0:8:0.02).
    #[arg(long)]
    pub y_range: Option<RangeArg>,
    /// delta grid as `min:max:step` (default -6:6:0.01).
    #[arg(long, allow_hyphen_values = true)]
    pub delta_range: Option<RangeArg>,
    /// Extra single-point concavity probes `x,y,delta` (default 1,1,10).
    #[arg(long = "probe", allow_hyphen_values = true)]
    #[serde(rename = "probe")]
    pub probes: Option<Vec<ProbeArg>>,
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveArgs {
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub x_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub x_max: Option<f64>,
    #[arg(long)]
    pub x_step: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub delta_min: Option<f64>,
    #[arg(long)]
    pub delta_max: Option<f64>,
    #[arg(long)]
    pub delta_step: Option<f64>,
    #[arg(long)]
    pub max_iterations: Option<usize>,
    /// Stop once the sup change of an iteration drops below this.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Flag divergence once any value exceeds this.
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long, value_enum)]
    pub boundary_policy: Option<PolicyArg>,
    /// Also write the iterate every this many iterations.
    #[arg(long)]
    pub checkpoint_every: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum PolicyArg {
    Clamp,
    ValueFunctionExtension,
}

impl From<PolicyArg> for BoundaryPolicy {
    fn from(p: PolicyArg) -> Self {
        match p {
            PolicyArg::Clamp => BoundaryPolicy::Clamp,
            PolicyArg::ValueFunctionExtension => BoundaryPolicy::ValueFunctionExtension,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IneqArg {
    Cww,
    Main,
    Rubin,
    Cs,
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckArgs {
    #[arg(long, value_enum)]
    pub ineq: Option<IneqArg>,
    /// Tree JSON, either `{"depth","root","deltas"}` or `{"leaves"}`.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyArg {
    CwwExample,
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanArgs {
    #[arg(long, value_enum)]
    pub family: Option<FamilyArg>,
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Comma-separated alphas.
    #[arg(long, value_delimiter = ',')]
    pub alphas: Option<Vec<f64>>,
    /// Comma-separated depths; `a..b` includes both ends.
    #[arg(long)]
    pub depths: Option<DepthList>,
}

/// Depths as `1,2,5` or `1..25`.
#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(try_from = "DepthListRepr")]
pub struct DepthList(pub Vec<usize>);

#[derive(Deserialize)]
#[serde(untagged)]
enum DepthListRepr {
    Text(String),
    List(Vec<usize>),
}

impl TryFrom<DepthListRepr> for DepthList {
    type Error = String;

    fn try_from(r: DepthListRepr) -> Result<Self, Self::Error> {
        match r {
            DepthListRepr::Text(s) => s.parse(),
            DepthListRepr::List(v) => Ok(Self(v)),
        }
    }
}

impl FromStr for DepthList {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut out = Vec::new();
        for part in s.split(',') {
            let part = part.trim();
            let num = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("{t:?}: {e}"));
            match part.split_once("..") {
                Some((a, b)) => {
                    let (a, b) = (num(a)?, num(b.trim_start_matches('='))?);
                    if b < a {
                        return Err(format!("empty depth range {part:?}"));
                    }
                    out.extend(a..=b);
                }
                None => out.push(num(part)?),
            }
        }
        Ok(Self(out))
    }
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchArgs {
    #[arg(long)]
    pub depth: Option<usize>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub restarts: Option<usize>,
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub proposal_scale: Option<f64>,
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExampleArgs {
    #[arg(long)]
    pub depth: Option<usize>,
    #[arg(long)]
    pub lambda: Option<f64>,
}
