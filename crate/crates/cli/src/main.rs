//! `blfq-vqe` command-line driver.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use serde_json::json;

use config::RunConfig;

#[derive(Parser)]
#[command(
    name = "blfq-vqe",
    version,
    about = "Variational eigensolvers for light-front meson Hamiltonians"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// Run configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Overrides the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the configured output directory.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Write the qubit operator of the configured Hamiltonian.
    Encode(Common),
    /// Exact diagonalization, plus classical observables when enabled.
    Exact(Common),
    /// Run VQE or SSVQE as configured.
    Solve(Common),
    /// Measure the PDF of the exact eigenstates at the configured tier.
    PdfScan(Common),
    /// Compute decay-constant prefactors and the readout calibration.
    Calibrate(Common),
}

fn load(common: &Common) -> Result<RunConfig> {
    let mut cfg = RunConfig::load(&common.config)?;
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if let Some(o) = &common.output {
        cfg.output_dir = o.clone();
    }
    Ok(cfg)
}

fn init_threads() -> Result<()> {
    if let Ok(v) = std::env::var("BLFQ_VQE_THREADS") {
        let n: usize = v
            .parse()
            .with_context(|| format!("BLFQ_VQE_THREADS={v:?} is not a thread count"))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<serde_json::Value> {
    init_threads()?;
    match &cli.command {
        Command::Encode(c) => commands::encode(&load(c)?),
        Command::Exact(c) => commands::exact(&load(c)?),
        Command::Solve(c) => commands::solve(&load(c)?),
        Command::PdfScan(c) => commands::pdf_scan_cmd(&load(c)?),
        Command::Calibrate(c) => commands::calibrate(&load(c)?),
    }
}

fn error_kind(err: &anyhow::Error) -> &'static str {
    if err.downcast_ref::<blfq_vqe::Error>().is_some() {
        "model"
    } else if err.chain().any(|e| e.is::<toml::de::Error>()) {
        "config"
    } else if err.chain().any(|e| e.is::<std::io::Error>()) {
        "io"
    } else {
        "invalid_input"
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(summary) => {
            println!(
                "{}",
                serde_json::to_string_pretty(&summary).expect("summary serializes")
            );
            ExitCode::SUCCESS
        }
        Err(err) => {
            let body =
                json!({ "error": { "kind": error_kind(&err), "message": format!("{err:#}") } });
            eprintln!("{body}");
            ExitCode::FAILURE
        }
    }
}
