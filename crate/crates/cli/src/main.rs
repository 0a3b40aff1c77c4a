//! `raf`: sample random analytic functions, predict their limiting zero
//! distributions and compare the two.
//!
//! Exit codes: 0 on success, 2 for rejected input, 3 when a numerical
//! procedure fails (root finder or series truncation).

mod commands;
mod config;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{CompareArgs, ConstructArgs, DemoArgs, PredictArgs, SampleArgs};

#[derive(Parser)]
#[command(
    name = "raf",
    version,
    about = "Zeros of random analytic functions and their predicted limits"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a function and write its normalized zeros as CSV.
    Sample(SampleArgs),
    /// Write the predicted radial mass and density on a grid.
    Predict(PredictArgs),
    /// Compare zero files with the predicted limit.
    Compare(CompareArgs),
    /// Run a packaged demonstration.
    Demo(DemoArgs),
    /// Build a coefficient schedule whose zeros approach a given measure.
    Construct(ConstructArgs),
}

fn exit_code(err: &anyhow::Error) -> u8 {
    let numeric = err.chain().any(|e| {
        e.downcast_ref::<raf_core::Error>()
            .is_some_and(raf_core::Error::is_numeric)
    });
    if numeric {
        3
    } else {
        2
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Sample(a) => commands::sample(a),
        Command::Predict(a) => commands::predict(a),
        Command::Compare(a) => commands::compare_cmd(a),
        Command::Demo(a) => commands::demo(a),
        Command::Construct(a) => commands::construct(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
