//! Command-line front end.

use clap::{Parser, Subcommand};

use crate::pipeline::{
    run_eval, run_gen, run_partition, run_roc, run_thresholds, run_train, EvalArgs, GenArgs,
    PartitionArgs, RocArgs, ThresholdArgs, TrainArgs,
};

const EXIT_CODES: &str = "\
Exit codes:
  0  success
  2  usage error
  3  data error (parse failure, dimension mismatch, missing class, digest mismatch)
  4  numeric precondition (range, saturation, search size, parameters)
  5  I/O error

Set ICASCADE_THREADS to cap worker threads.";

#[derive(Debug, Parser)]
#[command(name = "icascade", version, about = "Cost-minimal early-rejection cascades from AdaBoost classifiers", after_help = EXIT_CODES)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic labelled dataset as CSV.
    Gen(GenArgs),
    /// Train an AdaBoost strong classifier.
    Train(TrainArgs),
    /// Choose partition points for a trained model.
    Partition(PartitionArgs),
    /// Set stage thresholds for a partitioned cascade.
    Thresholds(ThresholdArgs),
    /// Evaluate a cascade on a dataset.
    Eval(EvalArgs),
    /// Emit ROC points for a cascade and its strong classifier.
    Roc(RocArgs),
}

impl Cli {
    pub fn execute(&self) -> crate::Result<String> {
        match &self.command {
            Command::Gen(a) => run_gen(a),
            Command::Train(a) => run_train(a),
            Command::Partition(a) => run_partition(a),
            Command::Thresholds(a) => run_thresholds(a),
            Command::Eval(a) => run_eval(a),
            Command::Roc(a) => run_roc(a),
        }
    }
}

/// Parses the process arguments, runs the command and returns the exit code.
pub fn main() -> i32 {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(n) = std::env::var("ICASCADE_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n > 0)
    {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            log::warn!("could not set thread count: {e}");
        }
    }
    match cli.execute() {
        Ok(summary) => {
            println!("{summary}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
