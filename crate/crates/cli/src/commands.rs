//! Subcommand implementations.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};

use mrrecon_core::forward::{add_noise, nudft_forward, NoiseSpec};
use mrrecon_core::gridding::{
    grid_reconstruct, radial_spiral_weights, uniform_weights, voronoi_weights, DensityMethod,
};
use mrrecon_core::image::{ComplexImage, KSpaceSamples};
use mrrecon_core::io;
use mrrecon_core::kernels::{
    cached_gram_hash, compute_gram_kernel, export_psf, load_gram_cache, save_gram_cache,
    trajectory_fingerprint, PrecomputedKernels,
};
use mrrecon_core::metrics::{quad_error, roi_variance};
use mrrecon_core::objective::ObjectiveContext;
use mrrecon_core::optimizer::minimize;
use mrrecon_core::phantom::{make_phantom, Roi};
use mrrecon_core::trajectory::{generate_spiral, load_trajectory, save_trajectory, Trajectory};

use crate::config::{snr_tag, FileConfig};
use crate::exports;

pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

/// Trajectory from the config: external CSV when `trajectory.file` is set,
/// otherwise the configured spiral.
pub fn resolve_trajectory(config: &FileConfig) -> Result<(Trajectory, usize)> {
    let arms = config.spiral_arms();
    match &config.trajectory.file {
        Some(path) => {
            let traj = load_trajectory(path)?;
            Ok((traj, arms))
        }
        None => {
            let traj = generate_spiral(arms, config.spiral_samples(), config.spiral_turns(arms))?;
            Ok((traj, arms))
        }
    }
}

fn load_aligned(traj_path: &Path, samples_path: &Path) -> Result<(Trajectory, KSpaceSamples)> {
    let traj = load_trajectory(traj_path)?;
    let samples = io::read_samples(samples_path)?;
    if samples.len() != traj.len() {
        bail!(
            "trajectory {} has {} points but samples {} has {} values",
            traj_path.display(),
            traj.len(),
            samples_path.display(),
            samples.len()
        );
    }
    Ok((traj, samples))
}

pub fn cmd_phantom(config: &FileConfig, out: &Path) -> Result<()> {
    ensure_dir(out)?;
    let spec = config.phantom_spec()?;
    let (reference, roi1, roi2) = make_phantom(&spec)?;
    io::write_image(&out.join("reference.bin"), &reference)?;
    exports::write_magnitude_pgm(&reference, &out.join("reference_mag.pgm"))?;
    exports::write_phase_pgm(&reference, &out.join("reference_phase.pgm"))?;
    println!(
        "phantom: {}x{0} image, {} px in {}, {} px in {} -> {}",
        spec.n_grid,
        roi1.pixel_count(),
        roi1.name,
        roi2.pixel_count(),
        roi2.name,
        out.display()
    );
    Ok(())
}

pub fn cmd_traj(config: &FileConfig, out: &Path) -> Result<()> {
    ensure_dir(out)?;
    let arms = config.spiral_arms();
    let traj = generate_spiral(arms, config.spiral_samples(), config.spiral_turns(arms))?;
    traj.validate()?;
    let path = out.join("trajectory.csv");
    save_trajectory(&traj, &path)?;
    println!(
        "trajectory: {} arms x {} samples ({} points) -> {}",
        arms,
        config.spiral_samples(),
        traj.len(),
        path.display()
    );
    Ok(())
}

pub fn cmd_simulate(config: &FileConfig, out: &Path, seed: Option<u64>) -> Result<()> {
    ensure_dir(out)?;
    let spec = config.phantom_spec()?;
    let (reference, _, _) = make_phantom(&spec)?;
    let (traj, _) = resolve_trajectory(config)?;
    traj.validate()?;

    let clean = nudft_forward(&reference, &traj)?;
    let noise = NoiseSpec {
        snr_db: config.noise.snr_db,
        seed: config.seed(seed),
    };
    let samples = add_noise(&clean, &noise)?;

    io::write_image(&out.join("reference.bin"), &reference)?;
    save_trajectory(&traj, &out.join("trajectory.csv"))?;
    io::write_samples(&out.join("samples.bin"), &samples)?;
    println!(
        "simulate: {} samples at snr {} -> {}",
        samples.len(),
        snr_tag(config.noise.snr_db),
        out.display()
    );
    Ok(())
}

pub fn cmd_precompute(config: &FileConfig, traj_path: &Path, out: &Path) -> Result<()> {
    ensure_dir(out)?;
    let traj = load_trajectory(traj_path)?;
    traj.validate()?;
    let n = config.n_grid();
    let hash = trajectory_fingerprint(&traj);
    let bin = out.join("gram.bin");
    if cached_gram_hash(&bin).as_deref() == Some(hash.as_str()) {
        println!(
            "precompute: cache hit for {} -> {}",
            traj_path.display(),
            bin.display()
        );
        return Ok(());
    }
    let gram = compute_gram_kernel(&traj, n)?;
    save_gram_cache(&bin, &gram, &hash)?;
    println!(
        "precompute: {}x{0} trajectory kernel (N = {n}) -> {}",
        2 * n - 1,
        bin.display()
    );
    Ok(())
}

pub fn cmd_recon_reg(
    config: &FileConfig,
    traj_path: &Path,
    samples_path: &Path,
    kernel: Option<&Path>,
    out: &Path,
) -> Result<()> {
    ensure_dir(out)?;
    let (traj, samples) = load_aligned(traj_path, samples_path)?;
    traj.validate()?;
    let n = config.n_grid();

    let kernels = match kernel {
        Some(path) => {
            let hash = trajectory_fingerprint(&traj);
            let gram = load_gram_cache(path, &hash)?;
            PrecomputedKernels::from_parts(gram, &traj, &samples, n)?
        }
        None => PrecomputedKernels::compute(&traj, &samples, n)?,
    };
    let ctx = ObjectiveContext::new(kernels, samples.energy(), config.hyperparameters())?;
    let (recon, report) = minimize(&ctx, &config.optim_config()?)?;

    io::write_image(&out.join("recon_reg.bin"), &recon)?;
    exports::write_magnitude_pgm(&recon, &out.join("recon_reg_mag.pgm"))?;
    exports::write_phase_pgm(&recon, &out.join("recon_reg_phase.pgm"))?;
    report.write_trace_csv(&out.join("trace.csv"))?;
    println!(
        "recon-reg: {} iterations, stop {}, criterion {:.6e} -> {}",
        report.iterations,
        report.stop.as_str(),
        report.trace.last().map(|r| r.j_reg).unwrap_or(f64::NAN),
        out.display()
    );
    Ok(())
}

pub fn cmd_recon_grid(
    config: &FileConfig,
    traj_path: &Path,
    samples_path: &Path,
    out: &Path,
    weights_csv: bool,
) -> Result<()> {
    ensure_dir(out)?;
    let (traj, samples) = load_aligned(traj_path, samples_path)?;
    traj.validate()?;
    let n = config.n_grid();
    let gridding = config.gridding_config(config.spiral_arms())?;

    let recon = grid_reconstruct(&samples, &traj, n, &gridding)?;
    io::write_image(&out.join("recon_grid.bin"), &recon)?;
    exports::write_magnitude_pgm(&recon, &out.join("recon_grid_mag.pgm"))?;
    exports::write_phase_pgm(&recon, &out.join("recon_grid_phase.pgm"))?;

    if weights_csv {
        let weights = match &gridding.density {
            DensityMethod::Voronoi => voronoi_weights(&traj)?,
            DensityMethod::RadialSpiral { arms } => radial_spiral_weights(&traj, *arms)?,
            DensityMethod::Uniform => uniform_weights(traj.len())?,
            DensityMethod::User(w) => w.clone(),
        };
        weights.write_csv(&out.join("weights.csv"))?;
    }
    println!(
        "recon-grid: {} samples onto {n}x{n} -> {}",
        traj.len(),
        out.display()
    );
    Ok(())
}

/// One row of the results table.
pub struct MetricRow {
    pub run_id: String,
    pub arms: Option<usize>,
    pub samples: Option<usize>,
    pub snr: String,
    pub method: String,
    pub roi: String,
    pub absolute: f64,
    pub normalized: Option<f64>,
    pub variance: f64,
}

pub const RESULTS_HEADER: &str =
    "run_id,arms,samples,snr_db,method,roi,absolute,normalized,variance";

impl MetricRow {
    pub fn to_csv_line(&self) -> String {
        let opt_usize = |v: &Option<usize>| v.map(|x| x.to_string()).unwrap_or_default();
        let normalized = self
            .normalized
            .map(|v| format!("{v:.16e}"))
            .unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{:.16e},{},{:.16e}",
            self.run_id,
            opt_usize(&self.arms),
            opt_usize(&self.samples),
            self.snr,
            self.method,
            self.roi,
            self.absolute,
            normalized,
            self.variance
        )
    }
}

/// Appends rows to a results CSV, writing the header first if the file does
/// not exist yet.
pub fn append_metric_rows(path: &Path, rows: &[MetricRow]) -> Result<()> {
    let mut text = if path.exists() {
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?
    } else {
        format!("{RESULTS_HEADER}\n")
    };
    for row in rows {
        text.push_str(&row.to_csv_line());
        text.push('\n');
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// Computes the ROI metrics of a reconstruction against a reference.
#[allow(clippy::too_many_arguments)]
pub fn metric_rows_for(
    recon: &ComplexImage,
    reference: &ComplexImage,
    roi1: &Roi,
    roi2: &Roi,
    run_id: &str,
    method: &str,
    arms: Option<usize>,
    samples: Option<usize>,
    snr: &str,
) -> Result<Vec<MetricRow>> {
    let mut rows = Vec::new();
    for roi in [roi1, roi2] {
        let (absolute, normalized) = quad_error(recon, reference, roi)?;
        let variance = roi_variance(recon, roi)?;
        rows.push(MetricRow {
            run_id: run_id.to_string(),
            arms,
            samples,
            snr: snr.to_string(),
            method: method.to_string(),
            roi: roi.name.clone(),
            absolute,
            normalized,
            variance,
        });
    }
    Ok(rows)
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_metrics(
    config: &FileConfig,
    recon_path: &Path,
    reference_path: Option<&Path>,
    out_csv: &Path,
    run_id: &str,
    method: &str,
    arms: Option<usize>,
    samples: Option<usize>,
    snr: Option<f64>,
    diff: Option<&Path>,
) -> Result<()> {
    let recon = io::read_image(recon_path)?;
    let spec = config.phantom_spec()?;
    let (phantom_ref, roi1, roi2) = make_phantom(&spec)?;
    let reference = match reference_path {
        Some(p) => io::read_image(p)?,
        None => phantom_ref,
    };
    if reference.n_grid() != recon.n_grid() {
        bail!(
            "reconstruction is {}x{0} but reference is {1}x{1}",
            recon.n_grid(),
            reference.n_grid()
        );
    }
    let rows = metric_rows_for(
        &recon,
        &reference,
        &roi1,
        &roi2,
        run_id,
        method,
        arms,
        samples,
        &snr_tag(snr),
    )?;
    if let Some(parent) = out_csv.parent() {
        if !parent.as_os_str().is_empty() {
            ensure_dir(parent)?;
        }
    }
    append_metric_rows(out_csv, &rows)?;
    if let Some(diff_path) = diff {
        exports::write_difference_pgm(&recon, &reference, diff_path)?;
    }
    println!(
        "metrics: appended {} rows to {}",
        rows.len(),
        out_csv.display()
    );
    Ok(())
}

pub fn cmd_psf(config: &FileConfig, traj_path: &Path, out: &Path, log_scale: bool) -> Result<()> {
    if let Some(parent) = out.parent() {
        if !parent.as_os_str().is_empty() {
            ensure_dir(parent)?;
        }
    }
    let traj = load_trajectory(traj_path)?;
    traj.validate()?;
    let gram = compute_gram_kernel(&traj, config.n_grid())?;
    export_psf(&gram, out, log_scale)?;
    println!("psf: {} (log_scale={log_scale})", out.display());
    Ok(())
}

/// Deterministic per-cell seed derivation (SplitMix64 over master ^ counter).
pub fn split_seed(master: u64, counter: u64) -> u64 {
    let mut z = master ^ counter.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn run_id_for(arms: usize, samples: usize, snr: &str) -> String {
    format!("a{arms}_s{samples}_snr{snr}")
}
