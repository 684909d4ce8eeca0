use std::path::PathBuf;
use std::process::ExitCode;

use anytime_bench::metrics::DEFAULT_T0;
use anytime_bench::orchestrator::RunConfig;
use anytime_bench::studies::DEFAULT_NAUC_THRESHOLD;
use anytime_bench_cli::{
    cmd_compare_budgets, cmd_correlate, cmd_leaderboard, cmd_portfolio, cmd_run, cmd_score,
    cmd_sweep_t0, CliConfig, CliError, RunOptions, ENV_OUT,
};
use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(
    name = "anytime-bench",
    version,
    about = "Run, score and rank any-time learning solvers"
)]
struct Cli {
    #[command(flatten)]
    global: Global,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Time budget in seconds (default: the task's own budget, else 1200)
    #[arg(long, global = true)]
    budget: Option<f64>,

    /// Time-transform scale in seconds
    #[arg(long, global = true, default_value_t = DEFAULT_T0)]
    t0: f64,

    /// Number of runs per solver
    #[arg(long, global = true, default_value_t = 1)]
    repeats: usize,

    /// Report directory
    #[arg(long, global = true, env = ENV_OUT)]
    out: Option<PathBuf>,

    /// Seed for permutation p-values
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Maximum concurrent solver runs
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a solver on a task and score every run
    Run {
        #[arg(long)]
        task: PathBuf,
        /// Method id used in reports
        #[arg(long)]
        method: Option<String>,
        /// Seconds between scans of the prediction directory
        #[arg(long, default_value_t = RunConfig::DEFAULT_POLL_INTERVAL)]
        poll: f64,
        /// Seconds between SIGTERM and SIGKILL
        #[arg(long, default_value_t = RunConfig::DEFAULT_GRACE_PERIOD)]
        grace: f64,
        /// Solver command line
        #[arg(last = true, required = true)]
        solver: Vec<String>,
    },
    /// Rescore an events file
    Score {
        #[arg(long)]
        events: PathBuf,
        #[arg(long)]
        task: PathBuf,
    },
    /// Average-rank leaderboard from results.csv
    Leaderboard {
        #[arg(long)]
        results: PathBuf,
    },
    /// Rescore archived curves over a grid of t0 values
    SweepT0 {
        #[arg(long)]
        archive: PathBuf,
        /// Comma-separated t0 values
        #[arg(long, value_delimiter = ',')]
        grid: Option<Vec<f64>>,
    },
    /// Compare final NAUC between archives recorded under two budgets
    CompareBudgets {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long, default_value_t = DEFAULT_NAUC_THRESHOLD)]
        threshold: f64,
    },
    /// Correlate the average ranks of two result sets
    Correlate {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
    },
    /// Greedy portfolio and per-dataset configuration selection
    Portfolio {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        features: Option<PathBuf>,
        #[arg(long)]
        k: usize,
    },
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    let g = cli.global;
    let config = CliConfig {
        budget: g.budget,
        t0: g.t0,
        repeats: g.repeats,
        out: g.out,
        seed: g.seed,
        jobs: g.jobs,
    };
    match cli.command {
        Command::Run {
            task,
            method,
            poll,
            grace,
            solver,
        } => {
            let opts = RunOptions {
                method,
                poll_interval: poll,
                grace_period: grace,
            };
            let report = cmd_run(&task, &solver, &opts, &config)?;
            for r in &report.runs {
                println!(
                    "run {} exit={} events={} alc={} final_nauc={}",
                    r.repeat, r.exit, r.events, r.alc, r.final_nauc
                );
            }
            println!("alc mean={} std={}", report.alc_mean, report.alc_std);
        }
        Command::Score { events, task } => print!("{}", cmd_score(&events, &task, &config)?.text()),
        Command::Leaderboard { results } => {
            print!("{}", cmd_leaderboard(&results, &config)?.to_csv())
        }
        Command::SweepT0 { archive, grid } => {
            let sweep = cmd_sweep_t0(&archive, grid.as_deref(), &config)?;
            print!("{}", sweep.flips_csv());
        }
        Command::CompareBudgets { a, b, threshold } => {
            print!(
                "{}",
                cmd_compare_budgets(&a, &b, threshold, &config)?.to_csv()
            );
        }
        Command::Correlate { a, b } => {
            let c = cmd_correlate(&a, &b, &config)?;
            println!(
                "rho={} p={} permutations={}",
                c.rho, c.p_value, c.permutations
            );
        }
        Command::Portfolio {
            matrix,
            features,
            k,
        } => {
            let report = cmd_portfolio(&matrix, features.as_deref(), k, &config)?;
            println!("portfolio {}", report.portfolio.configs.join(","));
            println!("generalist {}", report.generalist);
            for (d, s) in &report.selections {
                println!(
                    "{d} -> {} (nearest {}, distance {})",
                    s.config, s.nearest_dataset, s.distance
                );
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("anytime-bench: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
