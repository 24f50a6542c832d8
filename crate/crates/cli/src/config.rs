use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Deserialize;

use crate::args::{CheckArgs, ExampleArgs, ScanArgs, SearchArgs, SolveArgs, VerifyArgs};

/// Contents of a `--config` file. Every key mirrors a flag.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub output: Option<PathBuf>,
    pub verify: Option<VerifyArgs>,
    pub solver: Option<SolveArgs>,
    pub check: Option<CheckArgs>,
    pub scan: Option<ScanArgs>,
    pub search: Option<SearchArgs>,
    pub example: Option<ExampleArgs>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }
}

/// Field-wise `flag.or(file)`.
pub trait Overlay {
    fn overlay(self, file: Option<Self>) -> Self
    where
        Self: Sized;
}

macro_rules! overlay {
    ($ty:ty { $($field:ident),* $(,)? }) => {
        impl Overlay for $ty {
            fn overlay(self, file: Option<Self>) -> Self {
                let file = file.unwrap_or_default();
                Self { $($field: self.$field.or(file.$field)),* }
            }
        }
    };
}

overlay!(VerifyArgs { candidate, alpha, c1, c2, x_range, y_range, delta_range, probes });
overlay!(SolveArgs {
    alpha,
    x_min,
    x_max,
    x_step,
    delta_min,
    delta_max,
    delta_step,
    max_iterations,
    tol,
    threshold,
    boundary_policy,
    checkpoint_every,
});
overlay!(CheckArgs { ineq, input, alpha, lambda });
overlay!(ScanArgs { family, lambda, alphas, depths });
overlay!(SearchArgs { depth, alpha, restarts, steps, proposal_scale });
overlay!(ExampleArgs { depth, lambda });

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let file: FileConfig = toml::from_str(
            r#"
            seed = 3
            [solver]
            alpha = 1.5
            x_step = 0.01
            tol = 1e-6
            "#,
        )
        .unwrap();
        let flags = SolveArgs {
            alpha: Some(2.0),
            ..SolveArgs::default()
        };
        let merged = flags.overlay(file.solver);
        assert_eq!(merged.alpha, Some(2.0));
        assert_eq!(merged.x_step, Some(0.01));
        assert_eq!(merged.tol, Some(1e-6));
        assert_eq!(file.seed, Some(3));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<FileConfig>("[solver]\nalfa = 2.0\n").is_err());
        assert!(toml::from_str::<FileConfig>("verbose = true\n").is_err());
    }

    #[test]
    fn structured_values_parse_from_toml() {
        let file: FileConfig = toml::from_str(
            r#"
            [verify]
            candidate = "ode-lift"
            x_range = "-2:2:0.5"
            probe = ["1,1,10"]
            [scan]
            depths = "1..3"
            alphas = [1.0, 2.0]
            "#,
        )
        .unwrap_or_else(|e| panic!("{e}"));
        let v = file.verify.unwrap();
        assert_eq!(v.x_range.unwrap().0.count().unwrap(), 9);
        assert_eq!(file.scan.unwrap().depths.unwrap().0, vec![1, 2, 3]);
    }
}
