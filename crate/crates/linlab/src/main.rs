use clap::Parser;
use linlab::cli::{self, parse_config};
use std::path::PathBuf;
use std::process::ExitCode;

/// Linearizer laboratory: construct linearizers of planar polynomials at
/// repelling fixed points and verify their growth and escaping-set geometry.
#[derive(Parser, Debug)]
#[command(name = "linlab", version, about)]
struct Args {
    /// Subcommand; must match the "command" field of the config document.
    command: String,
    /// Path to the JSON configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory for artifacts (default: current directory).
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

fn run() -> Result<i32, String> {
    // LINLAB_THREADS caps the worker pool.
    if let Ok(threads) = std::env::var("LINLAB_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global();
        }
    }
    let args = Args::parse();
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| format!("cannot read config {}: {e}", args.config.display()))?;
    let cfg = parse_config(&text).map_err(|e| e.to_string())?;
    let given = args.command.as_str();
    let expected = cfg.command.to_string();
    if given != expected {
        return Err(cli::CliError::CommandMismatch {
            given: given.to_string(),
            config: expected,
        }
        .to_string());
    }
    let outcome = cli::dispatch(&cfg, &args.out).map_err(|e| e.to_string())?;
    Ok(outcome.exit_code())
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code as u8),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
