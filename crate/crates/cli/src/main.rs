//! `ppdl`: public-private distribution learning from the command line.
//!
//! Configs and distributions are JSON, reports are CSV. Every randomized
//! subcommand takes an explicit `--seed`; nothing is seeded from the clock.
//! Exit codes: 0 success, 2 configuration error, 3 numerical failure.

mod commands;
mod io;

use clap::{Parser, Subcommand};

use commands::{ExperimentArgs, LearnArgs, LowerboundArgs, SuggestArgs, TvArgs, YatracosArgs};

#[derive(Debug, Parser)]
#[command(name = "ppdl", version, about = "Public-private distribution learning")]
struct Cli {
    /// More log output on stderr (repeatable).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build candidates from public data and select one privately.
    Learn(LearnArgs),
    /// Run a seeded sweep over public size, private size and epsilon.
    Experiment(ExperimentArgs),
    /// Estimate the no-free-lunch quantities of the flat-Gaussian family.
    Lowerbound(LowerboundArgs),
    /// Repeated finite-domain runs of the Yatracos/SmallDB learner.
    YatracosDemo(YatracosArgs),
    /// Total variation distance between two distributions.
    Tv(TvArgs),
    /// Private sample size suggested by the reduction's bound.
    SuggestN(SuggestArgs),
}

fn main() {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new()
        .filter_level(level)
        .parse_default_env()
        .init();

    let result = commands::configure_threads().and_then(|()| match &cli.command {
        Command::Learn(a) => commands::learn(a),
        Command::Experiment(a) => commands::experiment(a),
        Command::Lowerbound(a) => commands::lowerbound(a),
        Command::YatracosDemo(a) => commands::yatracos_demo(a),
        Command::Tv(a) => commands::tv(a),
        Command::SuggestN(a) => commands::suggest(a),
    });
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
