//! `kwell` — Floquet states of a periodically kicked particle in a finite
//! square well: spectra, decay profiles, matrix-element decay, participation
//! ratios, spacing statistics, the tight-binding check, classical sections
//! and (k, V0) sweeps.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod cache;
mod commands;
mod config;
mod error;
mod io;
mod pipeline;
mod sweep;

use config::Config;
use error::{AppError, ErrorClass};
use pipeline::RunContext;

#[derive(Parser)]
#[command(name = "kwell", version, about, disable_help_subcommand = true)]
struct Cli {
    /// Flat key-value parameter file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Spectrum cache directory (default: KWELL_CACHE_DIR or `<out>/cache`).
    #[arg(long, global = true)]
    cache: Option<PathBuf>,

    /// Seed for every stochastic ingredient (classical ensembles).
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,

    /// Worker threads for the sweep (0 = number of cores).
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the unperturbed spectrum and dump (n, E_n, parity) as CSV.
    Spectrum,
    /// Diagonalize the Floquet operator; emit quasi-energies and optionally
    /// the |c_rn|² matrix as a binary container with a JSON sidecar.
    Floquet {
        #[arg(long)]
        dump_states: bool,
    },
    /// Shifted-and-averaged decay profile with exponential/power-law fits.
    Profiles {
        #[arg(long)]
        mu_min: Option<f64>,
        #[arg(long)]
        mu_max: Option<f64>,
        /// positive | negative | symmetrized
        #[arg(long)]
        side: Option<String>,
        /// Fit window `lo:hi` overriding the defaults for both laws.
        #[arg(long)]
        window: Option<String>,
    },
    /// Averaged matrix-element decay M_m and its crossover.
    Melements,
    /// Participation ratio of every Floquet state.
    Pr,
    /// Parity-resolved quasi-energy spacings with Brody and Poisson checks.
    Spacing {
        /// even | odd | both
        #[arg(long)]
        parity: Option<String>,
        #[arg(long)]
        mu_min: Option<f64>,
        #[arg(long)]
        mu_max: Option<f64>,
        /// Include a unit-area histogram with this many bins in the report.
        #[arg(long)]
        bins: Option<usize>,
    },
    /// Certify the tight-binding equation on interior states.
    Tightbinding {
        /// Number of states to certify (lowest peaks first).
        #[arg(long, default_value_t = 32)]
        max_states: usize,
    },
    /// Classical stroboscopic section and coverage.
    Classical {
        #[arg(long)]
        trajectories: Option<usize>,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        p_max: Option<f64>,
        /// Coverage grid per axis (≥ 32).
        #[arg(long)]
        grid: Option<usize>,
    },
    /// (k, V0) phase-diagram sweep with per-cell outputs.
    Sweep {
        /// Comma-separated kick strengths (default: config sweep_k).
        #[arg(long)]
        k_list: Option<String>,
        /// Comma-separated barrier heights (default: config sweep_v0).
        #[arg(long)]
        v0_list: Option<String>,
        /// Recompute cells that already have outputs.
        #[arg(long)]
        force: bool,
    },
}

fn parse_list(s: &str) -> Result<Vec<f64>, AppError> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| AppError::new(ErrorClass::Config, format!("bad number `{p}`")))
        })
        .collect()
}

fn run(cli: Cli) -> Result<(), AppError> {
    let config_path = cli
        .config
        .ok_or_else(|| AppError::new(ErrorClass::Config, "--config is required"))?;
    let config = Config::load(&config_path)?;
    let cache_dir = cli
        .cache
        .or_else(|| std::env::var_os("KWELL_CACHE_DIR").map(PathBuf::from))
        .unwrap_or_else(|| cli.out.join("cache"));
    let mut ctx = RunContext::new(config, cli.out, cache_dir, cli.seed)?;

    match cli.command {
        Command::Spectrum => commands::cmd_spectrum(&mut ctx),
        Command::Floquet { dump_states } => commands::cmd_floquet(&mut ctx, dump_states),
        Command::Profiles { mu_min, mu_max, side, window } => {
            commands::cmd_profiles(&mut ctx, mu_min, mu_max, side.as_deref(), window.as_deref())
        }
        Command::Melements => commands::cmd_melements(&mut ctx),
        Command::Pr => commands::cmd_pr(&mut ctx),
        Command::Spacing { parity, mu_min, mu_max, bins } => {
            commands::cmd_spacing(&mut ctx, parity.as_deref(), mu_min, mu_max, bins)
        }
        Command::Tightbinding { max_states } => commands::cmd_tightbinding(&mut ctx, max_states),
        Command::Classical { trajectories, steps, p_max, grid } => {
            commands::cmd_classical(&mut ctx, trajectories, steps, p_max, grid)
        }
        Command::Sweep { k_list, v0_list, force } => {
            let ks = k_list.as_deref().map(parse_list).transpose()?;
            let v0s = v0_list.as_deref().map(parse_list).transpose()?;
            sweep::cmd_sweep(&mut ctx, ks, v0s, cli.workers, force)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.class.exit_code() as u8)
        }
    }
}
