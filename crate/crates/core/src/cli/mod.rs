//! Batch front-end behind the `tori` binary.
//!
//! ```text
//! tori <check-resonance|solve|verify|sweep> --config PATH [--out DIR] [--seed N] [--threads N]
//! ```
//!
//! Exit status: 0 if every requested stage passed, 1 if a stage ran but
//! failed its checks, 2 on usage, configuration or I/O errors.

pub mod commands;
pub mod config;
pub mod records;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use config::{ModelConfig, ResolvedModel, RunConfig};

use crate::error::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "tori", version, about = "Invariant tori of commuting Hamiltonian systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Overrides the configured sampling seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Diophantine check of the unperturbed frequencies and sampling of shifts.
    CheckResonance,
    /// Solve the configured tori.
    Solve,
    /// Verify stored tori by integration.
    Verify {
        /// Torus records (default: OUT/tori.jsonl).
        #[arg(long)]
        record: Option<PathBuf>,
    },
    /// Solve over the coupling sweep and fit the scaling in `mu`.
    Sweep,
}

fn execute(cli: &Cli) -> Result<bool> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| Error::InvalidConfig("--config PATH is required".into()))?;
    let mut cfg = RunConfig::load(path)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    // Everything that can fail on the inputs is checked before output exists.
    cfg.resolve()?;
    let record = match &cli.command {
        Command::Verify { record } => {
            let p = record.clone().unwrap_or_else(|| cli.out.join(commands::TORI_FILE));
            if !p.is_file() {
                return Err(Error::InvalidConfig(format!("missing torus record {}", p.display())));
            }
            Some(p)
        }
        _ => None,
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| Error::InvalidConfig(e.to_string()))?;
    std::fs::create_dir_all(&cli.out)?;
    pool.install(|| match &cli.command {
        Command::CheckResonance => commands::check_resonance(&cfg, &cli.out),
        Command::Solve => commands::solve(&cfg, &cli.out),
        Command::Verify { .. } => commands::verify(&cfg, record.as_deref().unwrap(), &cli.out),
        Command::Sweep => commands::sweep(&cfg, &cli.out),
    })
}

/// Runs the front-end on `args` (including the program name) and returns the
/// exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(true) => 0,
        Ok(false) => {
            eprintln!("tori: some checks failed; see the records in {}", cli.out.display());
            1
        }
        Err(e) => {
            eprintln!("tori: {e}");
            2
        }
    }
}
