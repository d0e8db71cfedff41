use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use rcm_cli::{run, CliError, ExperimentConfig, Overrides, Task};

/// Simulation and Fourier-space numerics for the Poisson random connection model.
#[derive(Debug, Parser)]
#[command(name = "rcm", version)]
struct Args {
    /// What to compute.
    #[arg(value_enum)]
    task: Task,
    /// TOML experiment configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed; overrides the file.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads.
    #[arg(long, env = "RCM_THREADS")]
    threads: Option<usize>,
    /// Output directory; overrides the file.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Reduced budgets for a quick run.
    #[arg(long)]
    smoke: bool,
}

fn main() -> ExitCode {
    let args = Args::parse();
    match execute(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("rcm {}: {e}", args.task);
            ExitCode::from(e.exit_code())
        }
    }
}

fn execute(args: &Args) -> Result<(), CliError> {
    if let Some(n) = args.threads {
        if n == 0 {
            return Err(CliError::Config("threads: must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("threads: {e}")))?;
    }
    let config = match &args.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    let over = Overrides { seed: args.seed, out_dir: args.out_dir.clone(), smoke: args.smoke };
    let summary = run(args.task, config, &over)?;
    println!("{}", summary.message);
    for f in &summary.files {
        println!("wrote {}", f.display());
    }
    Ok(())
}
