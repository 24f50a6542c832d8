mod args;
mod commands;
mod config;
mod report;

use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command};
use commands::{Outcome, RunContext};
use config::{FileConfig, Overlay};

fn run(cli: Cli) -> Result<Outcome> {
    let file = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    if let Some(n) = cli.threads.or(file.threads) {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the worker pool")?;
    }
    let ctx = RunContext {
        seed: cli.seed.or(file.seed).unwrap_or(0),
        output: cli.output.or(file.output),
    };
    match cli.command {
        Command::Verify(a) => commands::verify(&ctx, a.overlay(file.verify)),
        Command::Solve(a) => commands::solve(&ctx, a.overlay(file.solver)),
        Command::Check(a) => commands::check(&ctx, a.overlay(file.check)),
        Command::Scan(a) => commands::scan(&ctx, a.overlay(file.scan)),
        Command::Search(a) => commands::search(&ctx, a.overlay(file.search)),
        Command::Example(a) => commands::example(&ctx, a.overlay(file.example)),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(cli) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Fail) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
