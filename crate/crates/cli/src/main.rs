//! `stadisc`: stationary disc experiments from the command line.
//!
//! Exit codes: 0 on success, 1 on usage errors, 2 on numerical failure.

mod commands;
mod manifest;
mod parse;

use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::Parser;

use commands::Command;
use manifest::Run;

#[derive(Debug, Parser)]
#[command(name = "stadisc", version, about = "Stationary holomorphic discs and 2-jet determination")]
struct Cli {
    /// Seed for every random choice a command makes
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Where to write the run manifest (default: stadisc-<command>.manifest.json)
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            std::process::exit(code);
        }
    };
    let name = cli.command.name();
    let mut run = Run::default();
    let outcome = cli.command.run(&mut run, cli.seed);
    let status = outcome.as_ref().map(|_| ()).map_err(Clone::clone);
    let options = serde_json::to_value(&cli.command).expect("options serialize");
    let record = run.manifest(name, cli.seed, options, &status);
    let path = cli.manifest.unwrap_or_else(|| PathBuf::from(format!("stadisc-{name}.manifest.json")));
    let mut text = serde_json::to_string_pretty(&record).expect("manifest serializes");
    text.push('\n');
    if let Err(e) = std::fs::write(&path, text) {
        eprintln!("cannot write manifest {}: {e}", path.display());
    }
    match outcome {
        Ok(summary) => println!("{}", serde_json::to_string(&summary).expect("summary serializes")),
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(e.exit_code());
        }
    }
}
