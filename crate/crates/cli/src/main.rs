//! `thinns`: configured runs, thickness sweeps, inequality-lab campaigns
//! and Gronwall checks, with artifacts written under one output directory.

mod artifacts;
mod config;
mod lab;
mod outcome;
mod simulate;
mod tables;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{CommandFactory, Parser, Subcommand};

use artifacts::Artifacts;
use config::{ConfigError, ExperimentConfig, Scenario};
use outcome::{Outcome, RunError, EXIT_CONFIG};

#[derive(Parser)]
#[command(name = "thinns", version, about = "Navier-Stokes experiments on thin periodic domains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Debug)]
struct Common {
    /// Configuration file of `key = value` lines.
    config: Option<PathBuf>,
    /// Override one key, e.g. `-s eps=0.0625`; repeatable, applied after the file.
    #[arg(short = 's', long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Shorthand for `-s seed=N`.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory [default: $THINNS_OUT/<scenario> or thinns-out/<scenario>].
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Integrate one run and write its diagnostics.
    Simulate(Common),
    /// Estimate a thin-domain constant across thicknesses and fit its power law.
    Sweep(Common),
    /// Estimate the best constant of one functional inequality.
    EstimateConstants(Common),
    /// Fit the differential inequalities of a run and check its envelopes.
    VerifyInequalities(Common),
    /// Check the unit-box rescaling identities on random fields.
    RescaleCheck(Common),
    /// Tabulate the literature smallness thresholds against eps.
    Thresholds(Common),
}

impl Command {
    fn split(&self) -> (Scenario, &Common) {
        match self {
            Command::Simulate(c) => (Scenario::Simulate, c),
            Command::Sweep(c) => (Scenario::Sweep, c),
            Command::EstimateConstants(c) => (Scenario::EstimateConstants, c),
            Command::VerifyInequalities(c) => (Scenario::VerifyInequalities, c),
            Command::RescaleCheck(c) => (Scenario::RescaleCheck, c),
            Command::Thresholds(c) => (Scenario::Thresholds, c),
        }
    }
}

fn usage(scenario: Scenario) -> String {
    let mut cmd = Cli::command();
    let help = cmd
        .find_subcommand_mut(scenario.name())
        .map(|c| c.render_long_help().to_string())
        .unwrap_or_default();
    format!(
        "{help}\nNo configuration given. Pass a config file or at least one -s KEY=VALUE.\nKeys for {}: {}\n",
        scenario.name(),
        scenario.keys().join(", ")
    )
}

fn execute(cfg: &ExperimentConfig, out_flag: Option<&std::path::Path>) -> Result<(Outcome, PathBuf), RunError> {
    let scenario = cfg.scenario;
    let dir = artifacts::output_dir(out_flag, scenario.name());
    macro_rules! go {
        ($canonical:expr, $run:expr) => {{
            let mut out = Artifacts::create(dir, scenario.name(), $canonical.to_canonical())?;
            let outcome = $run(&mut out)?;
            let dir = out.dir().to_path_buf();
            out.finish(outcome.status(), outcome.exit_code())?;
            (outcome, dir)
        }};
    }
    Ok(match scenario {
        Scenario::Simulate => {
            let p = simulate::prepare(cfg)?;
            go!(p.canonical, |o: &mut Artifacts| simulate::simulate(&p, o))
        }
        Scenario::VerifyInequalities => {
            let mut p = simulate::prepare(cfg)?;
            let v = simulate::verify_settings(cfg, &mut p)?;
            go!(p.canonical, |o: &mut Artifacts| simulate::verify(&p, &v, o))
        }
        Scenario::EstimateConstants => {
            let p = lab::plan_estimate(cfg)?;
            go!(p.canonical, |o: &mut Artifacts| lab::estimate(&p, o))
        }
        Scenario::Sweep => {
            let p = lab::plan_sweep(cfg)?;
            go!(p.canonical, |o: &mut Artifacts| lab::sweep(&p, o))
        }
        Scenario::RescaleCheck => {
            let p = tables::plan_rescale(cfg)?;
            go!(p.canonical, |o: &mut Artifacts| tables::rescale_check(&p, o))
        }
        Scenario::Thresholds => {
            let p = tables::plan_thresholds(cfg)?;
            go!(p.canonical, |o: &mut Artifacts| tables::thresholds(&p, o))
        }
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (scenario, common) = cli.command.split();
    let cfg = match ExperimentConfig::load(scenario, common.config.as_deref(), &common.set, common.seed) {
        Ok(c) => c,
        Err(ConfigError::Empty) => {
            eprint!("{}", usage(scenario));
            return ExitCode::from(EXIT_CONFIG as u8);
        }
        Err(e) => {
            eprintln!("config error: {e}");
            return ExitCode::from(EXIT_CONFIG as u8);
        }
    };
    match execute(&cfg, common.out.as_deref()) {
        Ok((outcome, dir)) => {
            let stream = format!("{}: {} ({})", scenario.name(), outcome.message(), dir.display());
            if outcome.exit_code() == 0 {
                println!("{stream}");
            } else {
                eprintln!("{stream}");
            }
            ExitCode::from(outcome.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
