//! Full experiment matrix: arms x samples x SNR, both reconstruction methods,
//! metrics table plus per-run images.

use std::path::Path;

use anyhow::{Context, Result};
use rayon::prelude::*;

use mrrecon_core::forward::{add_noise, nudft_forward, NoiseSpec};
use mrrecon_core::gridding::grid_reconstruct;
use mrrecon_core::io;
use mrrecon_core::kernels::{compute_gram_kernel, PrecomputedKernels};
use mrrecon_core::objective::ObjectiveContext;
use mrrecon_core::optimizer::minimize;
use mrrecon_core::phantom::make_phantom;
use mrrecon_core::trajectory::{default_turns, generate_spiral};

use crate::commands::{
    append_metric_rows, ensure_dir, metric_rows_for, run_id_for, split_seed, MetricRow,
};
use crate::config::{snr_tag, FileConfig};
use crate::exports;

pub fn cmd_sweep(config: &FileConfig, out: &Path, seed: Option<u64>) -> Result<()> {
    ensure_dir(out)?;
    let n = config.n_grid();
    let master = config.seed(seed);
    let (arms_list, samples_list, snr_list) = config.sweep_lists()?;
    let hyper = config.hyperparameters();
    let optim = config.optim_config()?;

    let spec = config.phantom_spec()?;
    let (reference, roi1, roi2) = make_phantom(&spec)?;
    io::write_image(&out.join("reference.bin"), &reference)?;
    exports::write_magnitude_pgm(&reference, &out.join("reference_mag.pgm"))?;
    exports::write_phase_pgm(&reference, &out.join("reference_phase.pgm"))?;

    let pairs: Vec<(usize, usize)> = (0..arms_list.len())
        .flat_map(|ai| (0..samples_list.len()).map(move |si| (ai, si)))
        .collect();

    // Cells are independent; trajectory-level work (kernel, forward model,
    // density weights) is shared across the SNR axis of each pair.
    let per_pair: Vec<Vec<MetricRow>> = pairs
        .par_iter()
        .map(|&(ai, si)| -> Result<Vec<MetricRow>> {
            let arms = arms_list[ai];
            let samples_per_arm = samples_list[si];
            let turns = config
                .trajectory
                .turns
                .unwrap_or_else(|| default_turns(n, arms));
            let traj = generate_spiral(arms, samples_per_arm, turns)?;
            let clean = nudft_forward(&reference, &traj)?;
            let gram = compute_gram_kernel(&traj, n)?;
            let gridding = config.gridding_config(arms)?;

            let mut rows = Vec::new();
            for (ni, &snr) in snr_list.iter().enumerate() {
                let ordinal = ((ai * samples_list.len() + si) * snr_list.len() + ni) as u64;
                let cell_seed = split_seed(master, ordinal);
                let data = add_noise(
                    &clean,
                    &NoiseSpec {
                        snr_db: snr,
                        seed: cell_seed,
                    },
                )?;
                let run_id = run_id_for(arms, samples_per_arm, &snr_tag(snr));

                let kernels = PrecomputedKernels::from_parts(gram.clone(), &traj, &data, n)?;
                let ctx = ObjectiveContext::new(kernels, data.energy(), hyper)?;
                let (reg, report) = minimize(&ctx, &optim)?;
                let grid = grid_reconstruct(&data, &traj, n, &gridding)?;

                io::write_image(&out.join(format!("{run_id}_reg.bin")), &reg)?;
                io::write_image(&out.join(format!("{run_id}_grid.bin")), &grid)?;
                for (tag, image) in [("reg", &reg), ("grid", &grid)] {
                    exports::write_magnitude_pgm(
                        image,
                        &out.join(format!("{run_id}_{tag}_mag.pgm")),
                    )?;
                    exports::write_phase_pgm(
                        image,
                        &out.join(format!("{run_id}_{tag}_phase.pgm")),
                    )?;
                    exports::write_difference_pgm(
                        image,
                        &reference,
                        &out.join(format!("{run_id}_{tag}_diff.pgm")),
                    )?;
                }
                report.write_trace_csv(&out.join(format!("{run_id}_trace.csv")))?;

                rows.extend(metric_rows_for(
                    &reg,
                    &reference,
                    &roi1,
                    &roi2,
                    &run_id,
                    "regularized",
                    Some(arms),
                    Some(samples_per_arm),
                    &snr_tag(snr),
                )?);
                rows.extend(metric_rows_for(
                    &grid,
                    &reference,
                    &roi1,
                    &roi2,
                    &run_id,
                    "gridding",
                    Some(arms),
                    Some(samples_per_arm),
                    &snr_tag(snr),
                )?);
                println!(
                    "sweep cell {run_id}: regularized stop {} after {} iterations",
                    report.stop.as_str(),
                    report.iterations
                );
            }
            Ok(rows)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut rows: Vec<MetricRow> = per_pair.into_iter().flatten().collect();
    rows.sort_by(|a, b| {
        let key = |r: &MetricRow| {
            (
                r.arms.unwrap_or(0),
                r.samples.unwrap_or(0),
                r.snr.parse::<f64>().unwrap_or(f64::NEG_INFINITY),
                r.method.clone(),
                r.roi.clone(),
            )
        };
        let (ka, kb) = (key(a), key(b));
        ka.0.cmp(&kb.0)
            .then(ka.1.cmp(&kb.1))
            .then(ka.2.total_cmp(&kb.2))
            .then(ka.3.cmp(&kb.3))
            .then(ka.4.cmp(&kb.4))
    });

    let results = out.join("results.csv");
    if results.exists() {
        std::fs::remove_file(&results)
            .with_context(|| format!("removing stale {}", results.display()))?;
    }
    append_metric_rows(&results, &rows)?;
    println!(
        "sweep: {} cells, {} result rows -> {}",
        pairs.len() * snr_list.len(),
        rows.len(),
        results.display()
    );
    Ok(())
}
