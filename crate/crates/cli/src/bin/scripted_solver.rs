//! Solver that replays a schedule fixture: waits out each delay and publishes
//! the listed prediction files into `$PREDICTION_DIR`.

use std::path::PathBuf;
use std::process::ExitCode;

use anytime_bench::orchestrator::{play_schedule, ENV_PREDICTION_DIR};
use clap::Parser;

#[derive(Parser, Debug)]
#[command(name = "scripted-solver", about = "Replay a prediction schedule")]
struct Args {
    /// Schedule file: `<delay seconds> <prediction file>` per line, optional `linger`
    #[arg(long)]
    schedule: PathBuf,

    #[arg(long, env = ENV_PREDICTION_DIR)]
    prediction_dir: PathBuf,
}

fn main() -> ExitCode {
    let args = Args::parse();
    match play_schedule(&args.schedule, &args.prediction_dir) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("scripted-solver: {e}");
            ExitCode::FAILURE
        }
    }
}
