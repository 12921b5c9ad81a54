//! Precomputed kernels that make criterion and gradient evaluation FFT-only.
//!
//! The trajectory kernel is the (2N-1)x(2N-1) matrix
//!   G[u][v] = (1/N^2) sum_l e^{+i2pi(kx_l*u + ky_l*v)}
//! stored with array index [u + N-1][v + N-1]; the first index pairs with
//! k_x, the second with k_y. The data kernel is the N x N adjoint image
//! D[n][m] = (1/N) sum_l s_l e^{-i2pi(kx_l*m + ky_l*n)}.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use ndarray::Array2;
use num_complex::Complex64;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::forward::nudft_adjoint;
use crate::image::{ComplexImage, KSpaceSamples};
use crate::io;
use crate::trajectory::Trajectory;

/// Trajectory kernel and data kernel for one trajectory / data set.
#[derive(Debug, Clone)]
pub struct PrecomputedKernels {
    pub gram: Array2<Complex64>,
    pub data: ComplexImage,
    pub n_grid: usize,
    pub trajectory_hash: String,
}

impl PrecomputedKernels {
    pub fn compute(traj: &Trajectory, samples: &KSpaceSamples, n_grid: usize) -> Result<Self> {
        let gram = compute_gram_kernel(traj, n_grid)?;
        let data = compute_data_kernel(samples, traj, n_grid)?;
        Ok(PrecomputedKernels {
            gram,
            data,
            n_grid,
            trajectory_hash: trajectory_fingerprint(traj),
        })
    }

    /// Builds the pair from an already-computed trajectory kernel.
    pub fn from_parts(
        gram: Array2<Complex64>,
        traj: &Trajectory,
        samples: &KSpaceSamples,
        n_grid: usize,
    ) -> Result<Self> {
        let side = 2 * n_grid - 1;
        if gram.dim() != (side, side) {
            return Err(Error::SizeMismatch(format!(
                "trajectory kernel is {:?}, expected {side}x{side}",
                gram.dim()
            )));
        }
        let data = compute_data_kernel(samples, traj, n_grid)?;
        Ok(PrecomputedKernels {
            gram,
            data,
            n_grid,
            trajectory_hash: trajectory_fingerprint(traj),
        })
    }
}

/// SHA-256 over the trajectory contents, hex encoded.
pub fn trajectory_fingerprint(traj: &Trajectory) -> String {
    let mut hasher = Sha256::new();
    hasher.update(b"MRRECON-TRAJ-1");
    hasher.update((traj.len() as u64).to_le_bytes());
    for p in traj.points() {
        hasher.update(p[0].to_le_bytes());
        hasher.update(p[1].to_le_bytes());
    }
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Computes the trajectory kernel. The closed half-plane u >= 0 is evaluated
/// directly; u < 0 is filled by Hermitian symmetry G[-u][-v] = conj(G[u][v]).
pub fn compute_gram_kernel(traj: &Trajectory, n_grid: usize) -> Result<Array2<Complex64>> {
    if n_grid == 0 {
        return Err(Error::InvalidArgument("n_grid must be >= 1".into()));
    }
    traj.validate()?;
    let n = n_grid;
    let side = 2 * n - 1;
    let points = traj.points();
    let scale = 1.0 / (n * n) as f64;

    // One row per nonnegative u; each row covers all v in [1-N, N-1].
    let rows: Vec<(usize, Vec<Complex64>)> = (0..n)
        .into_par_iter()
        .map(|u| {
            let mut acc = vec![Complex64::ZERO; side];
            for &[kx, ky] in points {
                let ax = Complex64::cis(2.0 * PI * kx * u as f64);
                let step = Complex64::cis(2.0 * PI * ky);
                // v = 0, 1, ..., N-1
                let mut pv = Complex64::ONE;
                for slot in acc.iter_mut().skip(n - 1) {
                    *slot += ax * pv;
                    pv *= step;
                }
                // v = -1, ..., 1-N
                let step_c = step.conj();
                let mut pv = step_c;
                for v in 1..n {
                    acc[n - 1 - v] += ax * pv;
                    pv *= step_c;
                }
            }
            acc.iter_mut().for_each(|z| *z *= scale);
            (u, acc)
        })
        .collect();

    let mut gram = Array2::<Complex64>::zeros((side, side));
    for (u, row) in rows {
        for (jv, &val) in row.iter().enumerate() {
            gram[[n - 1 + u, jv]] = val;
            if u > 0 {
                gram[[n - 1 - u, side - 1 - jv]] = val.conj();
            }
        }
    }
    Ok(gram)
}

/// Data kernel: identical to the adjoint NUDFT of the samples.
pub fn compute_data_kernel(
    samples: &KSpaceSamples,
    traj: &Trajectory,
    n_grid: usize,
) -> Result<ComplexImage> {
    nudft_adjoint(samples, traj, n_grid)
}

fn sidecar_path(bin_path: &Path) -> PathBuf {
    let mut name = bin_path
        .file_name()
        .map(|s| s.to_os_string())
        .unwrap_or_default();
    name.push(".hash");
    bin_path.with_file_name(name)
}

/// Writes the trajectory kernel plus a sidecar text file with the trajectory
/// hash.
pub fn save_gram_cache(bin_path: &Path, gram: &Array2<Complex64>, hash: &str) -> Result<()> {
    io::write_complex_matrix(bin_path, gram)?;
    let sidecar = sidecar_path(bin_path);
    std::fs::write(&sidecar, format!("{hash}\n")).map_err(|e| Error::io(&sidecar, e))
}

/// Returns the cached hash if both cache files exist.
pub fn cached_gram_hash(bin_path: &Path) -> Option<String> {
    let sidecar = sidecar_path(bin_path);
    if !bin_path.exists() {
        return None;
    }
    std::fs::read_to_string(&sidecar)
        .ok()
        .map(|s| s.trim().to_string())
}

/// Loads a cached trajectory kernel, requiring hash equality.
pub fn load_gram_cache(bin_path: &Path, expected_hash: &str) -> Result<Array2<Complex64>> {
    let sidecar = sidecar_path(bin_path);
    let cached = std::fs::read_to_string(&sidecar)
        .map_err(|e| Error::io(&sidecar, e))?
        .trim()
        .to_string();
    if cached != expected_hash {
        return Err(Error::CacheHashMismatch {
            cached,
            actual: expected_hash.to_string(),
        });
    }
    io::read_complex_matrix(bin_path)
}

/// Writes |G| (optionally log10(|G| + 1e-12)) as a 16-bit PGM, plus the
/// central row and central column as CSV profiles of the raw magnitudes.
/// The profiles go to `<stem>_row.csv` and `<stem>_col.csv` next to `path`.
pub fn export_psf(gram: &Array2<Complex64>, path: &Path, log_scale: bool) -> Result<()> {
    let mag = gram.mapv(|z| z.norm());
    let pixels = if log_scale {
        let logged = mag.mapv(|v| (v + 1e-12).log10());
        let lo = logged.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = logged.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if hi > lo {
            io::scale_range_to_u16(&logged, lo, hi)
        } else {
            Array2::from_elem(logged.dim(), 65535u16)
        }
    } else {
        let max = mag.iter().cloned().fold(0.0, f64::max);
        if max > 0.0 {
            io::scale_to_u16(&mag)
        } else {
            Array2::zeros(mag.dim())
        }
    };
    io::write_pgm16(path, &pixels)?;

    let side = mag.nrows();
    let center = (side - 1) / 2;
    let offset_of = |i: usize| i as i64 - center as i64;
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("psf");
    let dir = path.parent().unwrap_or_else(|| Path::new("."));

    let rows: Vec<(i64, f64)> = (0..side)
        .map(|j| (offset_of(j), mag[[center, j]]))
        .collect();
    write_profile_csv(&dir.join(format!("{stem}_row.csv")), &rows)?;
    let cols: Vec<(i64, f64)> = (0..side)
        .map(|i| (offset_of(i), mag[[i, center]]))
        .collect();
    write_profile_csv(&dir.join(format!("{stem}_col.csv")), &cols)
}

fn write_profile_csv(path: &Path, rows: &[(i64, f64)]) -> Result<()> {
    let mut out = String::from("offset,magnitude\n");
    for (off, v) in rows {
        out.push_str(&format!("{off},{v:.16e}\n"));
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// |G| along the central row, from the center outward (offset 0..N-1).
pub fn central_row_half_profile(gram: &Array2<Complex64>) -> Vec<f64> {
    let side = gram.nrows();
    let center = (side - 1) / 2;
    (center..side).map(|j| gram[[center, j]].norm()).collect()
}

/// Offset of the first off-center ring of local maxima in a half profile
/// (center value at index 0).
///
/// Spiral kernels decay from the central lobe through an oscillating tail
/// before the first aliasing ring rises above it, so a plain local-maximum
/// scan latches onto tail ripple. A ring is declared at the first local
/// maximum that (a) reaches at least 2% of the center value and (b) stands at
/// least twice above the median of the preceding 8 samples.
pub fn first_ring_offset(profile: &[f64]) -> Option<usize> {
    const WINDOW: usize = 8;
    const RISE: f64 = 2.0;
    const FLOOR: f64 = 0.02;
    if profile.len() < WINDOW + 3 {
        return None;
    }
    let floor = FLOOR * profile[0];
    for d in WINDOW + 1..profile.len() - 1 {
        if profile[d] < profile[d - 1] || profile[d] < profile[d + 1] || profile[d] < floor {
            continue;
        }
        let mut window: Vec<f64> = profile[d - WINDOW..d].to_vec();
        window.sort_by(f64::total_cmp);
        let median = (window[WINDOW / 2 - 1] + window[WINDOW / 2]) / 2.0;
        if profile[d] >= RISE * median {
            return Some(d);
        }
    }
    None
}
