//! `mrrecon`: spiral MR reconstruction experiments from the command line.

mod commands;
mod config;
mod exports;
mod sweep;

use std::path::PathBuf;

use anyhow::Result;
use clap::{Parser, Subcommand};

use config::FileConfig;

#[derive(Parser)]
#[command(
    name = "mrrecon",
    about = "Reconstruct MR images from non-Cartesian k-space samples",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the simulated vessel phantom and export it.
    Phantom {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate an interleaved spiral trajectory CSV.
    Traj {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simulate an acquisition: phantom -> forward model -> noise.
    Simulate {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Precompute and cache the trajectory kernel.
    Precompute {
        #[arg(long)]
        traj: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Regularized reconstruction (conjugate gradient).
    ReconReg {
        #[arg(long)]
        traj: PathBuf,
        #[arg(long)]
        samples: PathBuf,
        /// Cached trajectory kernel from `precompute`; verified by hash.
        #[arg(long)]
        kernel: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Gridding reconstruction (baseline).
    ReconGrid {
        #[arg(long)]
        traj: PathBuf,
        #[arg(long)]
        samples: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also export the density compensation weights as CSV.
        #[arg(long)]
        weights_csv: bool,
    },
    /// Quality metrics of a reconstruction, appended to a results CSV.
    Metrics {
        #[arg(long)]
        recon: PathBuf,
        /// Reference image file; defaults to the config phantom.
        #[arg(long)]
        reference: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "results.csv")]
        out: PathBuf,
        #[arg(long, default_value = "run")]
        run_id: String,
        #[arg(long, default_value = "unspecified")]
        method: String,
        #[arg(long)]
        arms: Option<usize>,
        #[arg(long)]
        samples_per_arm: Option<usize>,
        #[arg(long)]
        snr: Option<f64>,
        /// Write |recon - reference| as a PGM to this path.
        #[arg(long)]
        diff: Option<PathBuf>,
    },
    /// Export the trajectory kernel magnitude as a PSF image with profiles.
    Psf {
        #[arg(long)]
        traj: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "out/psf.pgm")]
        out: PathBuf,
        /// Log10 scale.
        #[arg(long)]
        log: bool,
    },
    /// Run the full experiment matrix (arms x samples x SNR, both methods).
    Sweep {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn resolve_out(cli_out: Option<PathBuf>, cfg: &FileConfig) -> PathBuf {
    cli_out
        .or_else(|| cfg.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Phantom { config, out } => {
            let cfg = FileConfig::load(config.as_deref())?;
            let out = resolve_out(out, &cfg);
            commands::cmd_phantom(&cfg, &out)
        }
        Command::Traj { config, out } => {
            let cfg = FileConfig::load(config.as_deref())?;
            let out = resolve_out(out, &cfg);
            commands::cmd_traj(&cfg, &out)
        }
        Command::Simulate { config, out, seed } => {
            let cfg = FileConfig::load(config.as_deref())?;
            let out = resolve_out(out, &cfg);
            commands::cmd_simulate(&cfg, &out, seed)
        }
        Command::Precompute { traj, config, out } => {
            let cfg = FileConfig::load(config.as_deref())?;
            let out = resolve_out(out, &cfg);
            commands::cmd_precompute(&cfg, &traj, &out)
        }
        Command::ReconReg {
            traj,
            samples,
            kernel,
            config,
            out,
        } => {
            let cfg = FileConfig::load(config.as_deref())?;
            let out = resolve_out(out, &cfg);
            commands::cmd_recon_reg(&cfg, &traj, &samples, kernel.as_deref(), &out)
        }
        Command::ReconGrid {
            traj,
            samples,
            config,
            out,
            weights_csv,
        } => {
            let cfg = FileConfig::load(config.as_deref())?;
            let out = resolve_out(out, &cfg);
            commands::cmd_recon_grid(&cfg, &traj, &samples, &out, weights_csv)
        }
        Command::Metrics {
            recon,
            reference,
            config,
            out,
            run_id,
            method,
            arms,
            samples_per_arm,
            snr,
            diff,
        } => {
            let cfg = FileConfig::load(config.as_deref())?;
            commands::cmd_metrics(
                &cfg,
                &recon,
                reference.as_deref(),
                &out,
                &run_id,
                &method,
                arms,
                samples_per_arm,
                snr,
                diff.as_deref(),
            )
        }
        Command::Psf {
            traj,
            config,
            out,
            log,
        } => {
            let cfg = FileConfig::load(config.as_deref())?;
            commands::cmd_psf(&cfg, &traj, &out, log)
        }
        Command::Sweep { config, out, seed } => {
            let cfg = FileConfig::load(config.as_deref())?;
            let out = resolve_out(out, &cfg);
            sweep::cmd_sweep(&cfg, &out, seed)
        }
    }
}
