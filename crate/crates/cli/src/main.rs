use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod construct;
mod decode;
mod fail;
mod overlay;
mod policies;
mod report;
mod sweep;
mod train;

/// Generalized LDPC code toolkit: construction, decoding, policy training,
/// and frame-error-rate sweeps.
#[derive(Parser)]
#[command(name = "gldpc", version, about)]
struct Cli {
    #[command(flatten)]
    common: overlay::Common,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a code and write its graph, plan, and rate report
    Construct(construct::ConstructArgs),
    /// Train decoding-order policies and save the Q-tables
    Train(train::TrainArgs),
    /// Decode one LLR frame and print the result
    Decode(decode::DecodeArgs),
    /// Run the full construct/train/compare pipeline into an output directory
    Sweep(sweep::SweepArgs),
    /// Summarize sweep results as tables and a plot script
    Report(report::ReportArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Construct(args) => construct::run(&cli.common, args),
        Command::Train(args) => train::run(&cli.common, args),
        Command::Decode(args) => decode::run(&cli.common, args),
        Command::Sweep(args) => sweep::run(&cli.common, args),
        Command::Report(args) => report::run(&cli.common, args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {:#}", failure.error);
            ExitCode::from(failure.code)
        }
    }
}
