use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use latentgraph_cli::{
    commands, AblateArgs, BenchArgs, CompareArgs, EvalArgs, PrepareArgs, SearchArgs, TrainArgs,
};

#[derive(Parser)]
#[command(
    name = "latentgraph",
    version,
    about = "Self-supervised node embeddings by masked latent prediction"
)]
struct Cli {
    /// Root directory holding one subdirectory per dataset.
    #[arg(long, global = true, env = "LATENTGRAPH_DATA", default_value = "data")]
    data_dir: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a dataset directory and write its manifest.
    Prepare(PrepareArgs),
    /// Train one model per seed and save checkpoints and loss logs.
    Train(TrainArgs),
    /// Linear-probe and/or k-means evaluation of trained checkpoints.
    Eval(EvalArgs),
    /// Component ablations and the exploitation-ratio sweep.
    Ablate(AblateArgs),
    /// Paired teacher-student vs encoder-decoder convergence comparison.
    CompareEd(CompareArgs),
    /// Seconds per epoch, time to best validation accuracy and peak memory.
    Bench(BenchArgs),
    /// Random search over the hyperparameter grid.
    Search(SearchArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Prepare(a) => commands::prepare(&cli.data_dir, &a.dataset, a.row_normalize),
        Command::Train(a) => commands::train(&cli.data_dir, a),
        Command::Eval(a) => commands::eval(&cli.data_dir, a),
        Command::Ablate(a) => commands::ablate(&cli.data_dir, a),
        Command::CompareEd(a) => commands::compare_ed(&cli.data_dir, a),
        Command::Bench(a) => commands::bench(&cli.data_dir, a),
        Command::Search(a) => commands::search(&cli.data_dir, a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
