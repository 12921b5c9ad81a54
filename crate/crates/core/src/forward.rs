//! Exact non-uniform DFT acquisition model and its adjoint, plus noise.

use std::f64::consts::PI;

use ndarray::Array2;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::image::{ComplexImage, KSpaceSamples};
use crate::trajectory::Trajectory;

/// Simulates the acquisition: s_l = (1/N) sum_{n,m} f[n][m] e^{+i2pi(kx*m + ky*n)}.
///
/// Direct summation, no gridding or interpolation. Parallel over samples;
/// the summation order per sample is fixed, so results do not depend on the
/// thread schedule.
pub fn nudft_forward(image: &ComplexImage, traj: &Trajectory) -> Result<KSpaceSamples> {
    if !image.all_finite() {
        return Err(Error::InvalidArgument(
            "image contains non-finite entries".into(),
        ));
    }
    traj.validate()?;
    let n = image.n_grid();
    let f = image.as_array();
    let scale = 1.0 / n as f64;
    let values: Vec<Complex64> = traj
        .points()
        .par_iter()
        .map(|&[kx, ky]| {
            let step_x = Complex64::cis(2.0 * PI * kx);
            let step_y = Complex64::cis(2.0 * PI * ky);
            let mut acc = Complex64::ZERO;
            let mut py = Complex64::ONE; // e^{i2pi*ky*n}
            for row in f.rows() {
                let mut px = Complex64::ONE; // e^{i2pi*kx*m}
                let mut row_acc = Complex64::ZERO;
                for &v in row {
                    row_acc += v * px;
                    px *= step_x;
                }
                acc += row_acc * py;
                py *= step_y;
            }
            acc * scale
        })
        .collect();
    KSpaceSamples::new(values)
}

/// Adjoint of [`nudft_forward`]:
/// result[n][m] = (1/N) sum_l s_l e^{-i2pi(kx*m + ky*n)}.
///
/// Parallel over image rows with a fixed per-row summation order.
pub fn nudft_adjoint(
    samples: &KSpaceSamples,
    traj: &Trajectory,
    n_grid: usize,
) -> Result<ComplexImage> {
    if samples.len() != traj.len() {
        return Err(Error::SizeMismatch(format!(
            "samples ({}) vs trajectory ({})",
            samples.len(),
            traj.len()
        )));
    }
    traj.validate()?;
    let points = traj.points();
    let values = samples.values();
    let scale = 1.0 / n_grid as f64;
    let rows: Vec<Vec<Complex64>> = (0..n_grid)
        .into_par_iter()
        .map(|n| {
            let mut row = vec![Complex64::ZERO; n_grid];
            for (&[kx, ky], &s) in points.iter().zip(values) {
                let w = s * Complex64::cis(-2.0 * PI * ky * n as f64);
                let step_x = Complex64::cis(-2.0 * PI * kx);
                let mut px = Complex64::ONE;
                for out in row.iter_mut() {
                    *out += w * px;
                    px *= step_x;
                }
            }
            row.iter_mut().for_each(|z| *z *= scale);
            row
        })
        .collect();
    let flat: Vec<Complex64> = rows.into_iter().flatten().collect();
    let arr =
        Array2::from_shape_vec((n_grid, n_grid), flat).expect("row collection matches grid shape");
    ComplexImage::from_array(arr)
}

/// Additive noise description. `snr_db = None` means noise-free.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub snr_db: Option<f64>,
    pub seed: u64,
}

/// Adds i.i.d. circular complex Gaussian noise at the requested SNR.
///
/// The per-sample noise variance is sigma^2 = mean(|s_l|^2) * 10^(-snr/10),
/// split equally between real and imaginary parts. Deterministic given the
/// seed.
pub fn add_noise(samples: &KSpaceSamples, spec: &NoiseSpec) -> Result<KSpaceSamples> {
    let snr_db = match spec.snr_db {
        None => return Ok(samples.clone()),
        Some(v) => v,
    };
    if !snr_db.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "snr_db must be finite, got {snr_db}"
        )));
    }
    let power = samples.energy() / samples.len() as f64;
    if power == 0.0 {
        return Err(Error::InvalidArgument(
            "all-zero samples: signal power undefined for finite SNR".into(),
        ));
    }
    let sigma2 = power * 10f64.powf(-snr_db / 10.0);
    let component_std = (sigma2 / 2.0).sqrt();
    let normal = Normal::new(0.0, component_std)
        .map_err(|e| Error::InvalidArgument(format!("noise std: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let noisy = samples
        .values()
        .iter()
        .map(|&s| s + Complex64::new(normal.sample(&mut rng), normal.sample(&mut rng)))
        .collect();
    KSpaceSamples::new(noisy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trajectory::{generate_cartesian, generate_spiral};

    fn ones(n: usize) -> ComplexImage {
        ComplexImage::from_array(Array2::from_elem((n, n), Complex64::ONE)).unwrap()
    }

    #[test]
    fn forward_dc_of_ones_is_n() {
        let n = 6;
        let traj = Trajectory::new(vec![[0.0, 0.0]]).unwrap();
        let s = nudft_forward(&ones(n), &traj).unwrap();
        assert!((s.values()[0] - Complex64::new(n as f64, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn forward_delta_gives_constant() {
        let n = 5;
        let mut img = ComplexImage::zeros(n);
        img.as_array_mut()[[0, 0]] = Complex64::ONE;
        let traj = generate_spiral(2, 7, 1.5).unwrap();
        let s = nudft_forward(&img, &traj).unwrap();
        for v in s.values() {
            assert!((v - Complex64::new(1.0 / n as f64, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn adjoint_of_dc_sample_is_ones() {
        let n = 4;
        let traj = Trajectory::new(vec![[0.0, 0.0]]).unwrap();
        let s = KSpaceSamples::new(vec![Complex64::new(n as f64, 0.0)]).unwrap();
        let img = nudft_adjoint(&s, &traj, n).unwrap();
        for v in img.as_array().iter() {
            assert!((v - Complex64::ONE).norm() < 1e-13);
        }
    }

    #[test]
    fn adjoint_of_zero_is_zero() {
        let traj = generate_spiral(1, 5, 1.0).unwrap();
        let s = KSpaceSamples::new(vec![Complex64::new(0.0, 0.0); 5]).unwrap();
        let img = nudft_adjoint(&s, &traj, 4).unwrap();
        assert!(img.as_array().iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn cartesian_adjoint_inverts_forward() {
        let n = 8;
        let img = crate::test_util::random_image(n, 7);
        let traj = generate_cartesian(n).unwrap();
        let s = nudft_forward(&img, &traj).unwrap();
        let back = nudft_adjoint(&s, &traj, n).unwrap();
        let num: f64 = back
            .as_array()
            .iter()
            .zip(img.as_array().iter())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        let den = img.norm();
        assert!(num / den < 1e-10, "relative deviation {}", num / den);
    }

    #[test]
    fn results_independent_of_thread_count() {
        let n = 8;
        let img = crate::test_util::random_image(n, 3);
        let traj = generate_spiral(3, 17, 2.0).unwrap();
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let single = pool.install(|| nudft_forward(&img, &traj).unwrap());
        let multi = nudft_forward(&img, &traj).unwrap();
        assert_eq!(single, multi);
    }

    #[test]
    fn noise_none_is_identity() {
        let s = KSpaceSamples::new(vec![Complex64::new(1.0, -2.0); 10]).unwrap();
        let out = add_noise(
            &s,
            &NoiseSpec {
                snr_db: None,
                seed: 1,
            },
        )
        .unwrap();
        assert_eq!(out, s);
    }

    #[test]
    fn noise_is_deterministic_per_seed() {
        let s = KSpaceSamples::new(vec![Complex64::new(1.0, 0.5); 64]).unwrap();
        let spec = NoiseSpec {
            snr_db: Some(20.0),
            seed: 42,
        };
        let a = add_noise(&s, &spec).unwrap();
        let b = add_noise(&s, &spec).unwrap();
        assert_eq!(a, b);
        let c = add_noise(
            &s,
            &NoiseSpec {
                snr_db: Some(20.0),
                seed: 43,
            },
        )
        .unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn noise_rejects_zero_signal() {
        let s = KSpaceSamples::new(vec![Complex64::ZERO; 8]).unwrap();
        assert!(add_noise(
            &s,
            &NoiseSpec {
                snr_db: Some(30.0),
                seed: 0
            }
        )
        .is_err());
    }

    #[test]
    fn empirical_snr_matches_request() {
        let l = 100_000;
        let values: Vec<Complex64> = (0..l)
            .map(|i| {
                let t = i as f64 * 0.001;
                Complex64::new((1.3 * t).sin() + 0.2, (0.7 * t).cos())
            })
            .collect();
        let s = KSpaceSamples::new(values).unwrap();
        let out = add_noise(
            &s,
            &NoiseSpec {
                snr_db: Some(30.0),
                seed: 7,
            },
        )
        .unwrap();
        let noise_power: f64 = out
            .values()
            .iter()
            .zip(s.values())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            / l as f64;
        let signal_power = s.energy() / l as f64;
        let snr = 10.0 * (signal_power / noise_power).log10();
        assert!((snr - 30.0).abs() < 0.5, "empirical SNR {snr}");
    }
}
