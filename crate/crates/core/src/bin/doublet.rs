use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use doublet::cli::{run_file, Overrides};

/// Run a measurement experiment described by a configuration file.
#[derive(Parser, Debug)]
#[command(name = "doublet", version)]
struct Args {
    /// Experiment configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory, overriding `output_path`.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Omit the generation timestamp line from tables.
    #[arg(long)]
    no_timestamp: bool,
    /// Override the RNG seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the number of simulated events.
    #[arg(long)]
    events: Option<u64>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let overrides = Overrides {
        seed: args.seed,
        n_events: args.events,
        output_path: args.output.map(|p| p.to_string_lossy().into_owned()),
    };
    match run_file(&args.config, &overrides, !args.no_timestamp) {
        Ok((parsed, report)) => {
            for w in &parsed.warnings {
                eprintln!("warning: {w}");
            }
            println!("{}", report.summary);
            for f in &report.files {
                println!("wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
