use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use rns_cli::commands::{dispatch, Command, EXIT_CONFIG, EXIT_IO};
use rns_cli::config::parse_config;
use rns_cli::output::resolve_out_dir;

/// Randomized-data Navier-Stokes laboratory on the periodic torus.
#[derive(Parser)]
#[command(name = "rns", version, about)]
struct Cli {
    /// TOML run configuration (required by every command except `verify`)
    #[arg(short, long, global = true)]
    config: Option<PathBuf>,
    /// Output root; defaults to the config's `output_dir`, then $RNS_OUT_DIR, then ./rns-out
    #[arg(short, long, global = true)]
    out_dir: Option<PathBuf>,
    /// Repeat for more log output
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let cfg = match &cli.config {
        Some(path) => {
            let text = match fs::read_to_string(path) {
                Ok(t) => t,
                Err(e) => {
                    eprintln!("error: cannot read {}: {e}", path.display());
                    return ExitCode::from(EXIT_IO as u8);
                }
            };
            match parse_config(&text) {
                Ok(c) => Some(c),
                Err(e) => {
                    eprintln!("error: {}: {e}", path.display());
                    return ExitCode::from(EXIT_CONFIG as u8);
                }
            }
        }
        None => None,
    };
    let root = resolve_out_dir(cli.out_dir.as_deref(), cfg.as_ref());
    match dispatch(cli.command, cfg.as_ref(), &root) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
