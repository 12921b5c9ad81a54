//! Gridding baseline: density compensation, Kaiser-Bessel spreading onto an
//! oversampled Cartesian grid, FFT, deapodization, crop.

use std::collections::HashMap;
use std::f64::consts::PI;

use ndarray::Array2;
use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::fft::{fftshift1, fftshift2, ifftshift2, Fft2};
use crate::image::{ComplexImage, KSpaceSamples};
use crate::trajectory::Trajectory;
use crate::voronoi;

/// Per-sample density compensation weights aligned with a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityWeights {
    weights: Vec<f64>,
}

impl DensityWeights {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidArgument("weights must be non-empty".into()));
        }
        if !weights.iter().all(|w| w.is_finite() && *w >= 0.0) {
            return Err(Error::InvalidArgument(
                "weights must be finite and nonnegative".into(),
            ));
        }
        if weights.iter().all(|&w| w == 0.0) {
            return Err(Error::InvalidArgument(
                "weights must not all be zero".into(),
            ));
        }
        Ok(DensityWeights { weights })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.weights
    }

    /// Writes `index,weight` rows as CSV.
    pub fn write_csv(&self, path: &std::path::Path) -> Result<()> {
        let mut out = String::from("index,weight\n");
        for (i, w) in self.weights.iter().enumerate() {
            out.push_str(&format!("{i},{w:.16e}\n"));
        }
        std::fs::write(path, out).map_err(|e| Error::io(path, e))
    }
}

/// Density estimator used before spreading.
#[derive(Debug, Clone, PartialEq)]
pub enum DensityMethod {
    /// Area of the (clipped) Voronoi cell around each sample.
    Voronoi,
    /// Analytic |k| * arc-length fallback for spirals with equal-length arms.
    RadialSpiral {
        arms: usize,
    },
    /// Equal weights 1/L.
    Uniform,
    User(DensityWeights),
}

#[derive(Debug, Clone, PartialEq)]
pub enum KernelBeta {
    Auto,
    Value(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GriddingConfig {
    /// Kernel width in (oversampled) grid cells; odd.
    pub kernel_width: usize,
    pub oversampling: f64,
    pub beta: KernelBeta,
    pub density: DensityMethod,
}

impl Default for GriddingConfig {
    fn default() -> Self {
        GriddingConfig {
            kernel_width: 7,
            oversampling: 2.0,
            beta: KernelBeta::Auto,
            density: DensityMethod::Voronoi,
        }
    }
}

impl GriddingConfig {
    pub fn validate(&self) -> Result<()> {
        if self.kernel_width == 0 || self.kernel_width.is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!(
                "kernel_width must be odd and positive, got {}",
                self.kernel_width
            )));
        }
        if !self.oversampling.is_finite() || self.oversampling < 1.0 {
            return Err(Error::InvalidArgument(format!(
                "oversampling must be >= 1, got {}",
                self.oversampling
            )));
        }
        if let KernelBeta::Value(b) = self.beta {
            if !b.is_finite() || b <= 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "beta must be positive and finite, got {b}"
                )));
            }
        }
        Ok(())
    }

    pub fn resolved_beta(&self) -> f64 {
        match self.beta {
            KernelBeta::Auto => kb_beta_auto(self.kernel_width, self.oversampling),
            KernelBeta::Value(b) => b,
        }
    }
}

fn bessel_i0(x: f64) -> f64 {
    let q = x * x / 4.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200 {
        term *= q / ((k * k) as f64);
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    sum
}

/// Standard beta choice for a width-W kernel at the given oversampling.
pub fn kb_beta_auto(kernel_width: usize, oversampling: f64) -> f64 {
    let w = kernel_width as f64;
    let a = oversampling;
    PI * ((w / a).powi(2) * (a - 0.5).powi(2) - 0.8).max(0.0).sqrt()
}

/// Kaiser-Bessel window at grid-cell offset `u`; zero outside |u| <= W/2,
/// normalized to 1 at u = 0. Used separably in 2-D.
pub fn kaiser_bessel(u: f64, kernel_width: usize, beta: f64) -> f64 {
    let half = kernel_width as f64 / 2.0;
    if u.abs() > half {
        return 0.0;
    }
    let arg = 1.0 - (u / half).powi(2);
    bessel_i0(beta * arg.max(0.0).sqrt()) / bessel_i0(beta)
}

/// Voronoi-cell-area density weights, cells clipped to [-0.5, 0.5]^2.
/// Exact duplicate locations share their cell's area equally.
pub fn voronoi_weights(traj: &Trajectory) -> Result<DensityWeights> {
    traj.validate()?;
    // Canonicalize -0.0 so duplicates at the origin dedupe regardless of the
    // sign their coordinates were computed with.
    let pts: Vec<[f64; 2]> = traj
        .points()
        .iter()
        .map(|p| [p[0] + 0.0, p[1] + 0.0])
        .collect();

    let mut groups: HashMap<(u64, u64), Vec<usize>> = HashMap::new();
    for (i, p) in pts.iter().enumerate() {
        groups
            .entry((p[0].to_bits(), p[1].to_bits()))
            .or_default()
            .push(i);
    }
    let mut unique: Vec<[f64; 2]> = Vec::with_capacity(groups.len());
    let mut members: Vec<Vec<usize>> = Vec::with_capacity(groups.len());
    let mut seen: HashMap<(u64, u64), ()> = HashMap::new();
    for p in &pts {
        let key = (p[0].to_bits(), p[1].to_bits());
        if seen.insert(key, ()).is_none() {
            unique.push(*p);
            members.push(groups[&key].clone());
        }
    }

    if unique.len() < 3 {
        return Err(Error::DegeneratePoints(format!(
            "{} distinct point(s); Voronoi weighting needs >= 3 non-collinear \
             points — use radial-spiral or uniform density",
            unique.len()
        )));
    }
    let p0 = unique[0];
    let p1 = unique[1];
    let dir = [p1[0] - p0[0], p1[1] - p0[1]];
    let dir_norm = (dir[0] * dir[0] + dir[1] * dir[1]).sqrt();
    let collinear = unique.iter().all(|p| {
        let v = [p[0] - p0[0], p[1] - p0[1]];
        let cross = dir[0] * v[1] - dir[1] * v[0];
        let vnorm = (v[0] * v[0] + v[1] * v[1]).sqrt();
        cross.abs() <= 1e-12 * dir_norm * vnorm.max(1.0)
    });
    if collinear {
        return Err(Error::DegeneratePoints(
            "all points collinear; use radial-spiral or uniform density".into(),
        ));
    }

    let areas = voronoi::cell_areas_unit_square(&unique);
    let mut weights = vec![0.0f64; pts.len()];
    for (area, group) in areas.iter().zip(&members) {
        let share = area / group.len() as f64;
        for &idx in group {
            weights[idx] = share;
        }
    }
    DensityWeights::new(weights)
}

/// Equal weights summing to one.
pub fn uniform_weights(len: usize) -> Result<DensityWeights> {
    if len == 0 {
        return Err(Error::InvalidArgument("empty trajectory".into()));
    }
    DensityWeights::new(vec![1.0 / len as f64; len])
}

/// Analytic density fallback for trajectories made of `arms` equal-length
/// arms: weight proportional to |k| times the radial increment |d|k|| along
/// the arm (the polar-area Jacobian for interleaved arms), with the first
/// sample of each arm given the area of a disk of radius half the first
/// increment. Weights are normalized to sum 1.
pub fn radial_spiral_weights(traj: &Trajectory, arms: usize) -> Result<DensityWeights> {
    if arms == 0 || !traj.len().is_multiple_of(arms) {
        return Err(Error::SizeMismatch(format!(
            "trajectory of {} points does not divide into {arms} equal arms",
            traj.len()
        )));
    }
    let per_arm = traj.len() / arms;
    if per_arm < 2 {
        return Err(Error::InvalidArgument(
            "arms must hold at least 2 samples".into(),
        ));
    }
    let pts = traj.points();
    let mut weights = Vec::with_capacity(traj.len());
    for a in 0..arms {
        let arm = &pts[a * per_arm..(a + 1) * per_arm];
        let radius = |j: usize| (arm[j][0] * arm[j][0] + arm[j][1] * arm[j][1]).sqrt();
        let seg = |j: usize| (radius(j) - radius(j - 1)).abs();
        for j in 0..per_arm {
            if j == 0 {
                let r = seg(1) / 2.0;
                weights.push(PI * r * r);
            } else {
                let inc = if j + 1 < per_arm {
                    (seg(j) + seg(j + 1)) / 2.0
                } else {
                    seg(j)
                };
                weights.push(radius(j) * inc);
            }
        }
    }
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Err(Error::DegeneratePoints(
            "degenerate arms: zero total arc length".into(),
        ));
    }
    weights.iter_mut().for_each(|w| *w /= total);
    DensityWeights::new(weights)
}

/// Gridding reconstruction: weight, spread, FFT, deapodize, crop.
pub fn grid_reconstruct(
    samples: &KSpaceSamples,
    traj: &Trajectory,
    n_grid: usize,
    config: &GriddingConfig,
) -> Result<ComplexImage> {
    config.validate()?;
    if samples.len() != traj.len() {
        return Err(Error::SizeMismatch(format!(
            "samples ({}) vs trajectory ({})",
            samples.len(),
            traj.len()
        )));
    }
    traj.validate()?;
    if n_grid == 0 {
        return Err(Error::InvalidArgument("n_grid must be >= 1".into()));
    }

    let weights = match &config.density {
        DensityMethod::Voronoi => voronoi_weights(traj)?,
        DensityMethod::RadialSpiral { arms } => radial_spiral_weights(traj, *arms)?,
        DensityMethod::Uniform => uniform_weights(traj.len())?,
        DensityMethod::User(w) => {
            if w.len() != traj.len() {
                return Err(Error::SizeMismatch(format!(
                    "user weights ({}) vs trajectory ({})",
                    w.len(),
                    traj.len()
                )));
            }
            w.clone()
        }
    };

    let n = n_grid;
    let no = (config.oversampling * n as f64).ceil() as usize;
    let c0 = no / 2;
    let h = (n / 2) as f64; // image-domain centering shift
    let beta = config.resolved_beta();
    let w = config.kernel_width;
    let half = w as f64 / 2.0;

    // Spread: samples are pre-modulated so the object sits centered on the
    // periodic grid; grid cell p holds k = (p - c0)/no.
    let mut grid = Array2::<Complex64>::zeros((no, no));
    for ((&[kx, ky], &s), &wgt) in traj
        .points()
        .iter()
        .zip(samples.values())
        .zip(weights.values())
    {
        let val = s * wgt * Complex64::cis(-2.0 * PI * (kx + ky) * h);
        let gx = kx * no as f64 + c0 as f64;
        let gy = ky * no as f64 + c0 as f64;
        let (x_lo, x_hi) = ((gx - half).ceil() as i64, (gx + half).floor() as i64);
        let (y_lo, y_hi) = ((gy - half).ceil() as i64, (gy + half).floor() as i64);
        for qy in y_lo..=y_hi {
            let ky_w = kaiser_bessel(qy as f64 - gy, w, beta);
            if ky_w == 0.0 {
                continue;
            }
            let row = qy.rem_euclid(no as i64) as usize;
            for qx in x_lo..=x_hi {
                let kx_w = kaiser_bessel(qx as f64 - gx, w, beta);
                if kx_w == 0.0 {
                    continue;
                }
                let col = qx.rem_euclid(no as i64) as usize;
                grid[[row, col]] += val * (ky_w * kx_w);
            }
        }
    }

    // Centered FFT to the image domain.
    let fft = Fft2::new(no);
    let mut spec = ifftshift2(&grid);
    fft.forward(&mut spec);
    let img = fftshift2(&spec);

    // Image-domain apodization of the sampled kernel, one axis.
    let mut kern1d = vec![Complex64::ZERO; no];
    let reach = (w as i64 - 1) / 2;
    for u in -reach..=reach {
        let idx = u.rem_euclid(no as i64) as usize;
        kern1d[idx] += Complex64::new(kaiser_bessel(u as f64, w, beta), 0.0);
    }
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(no).process(&mut kern1d);
    let apod: Vec<f64> = fftshift1(&kern1d).iter().map(|z| z.re).collect();
    let apod_peak = apod.iter().map(|a| a.abs()).fold(0.0, f64::max);
    let guard = 1e-8 * apod_peak * apod_peak;

    // Crop the central N x N block; image coordinate xi = index - c0; object
    // pixel (r, c) corresponds to xi = (r - h, c - h).
    let start = c0 as i64 - h as i64;
    debug_assert!(start >= 0 && start as usize + n <= no);
    let start = start as usize;
    let mut out = Array2::<Complex64>::zeros((n, n));
    for r in 0..n {
        for c in 0..n {
            let denom = apod[start + r] * apod[start + c];
            if denom.abs() < guard {
                return Err(Error::InvalidArgument(format!(
                    "kernel apodization below guard at pixel ({r},{c}); \
                     increase oversampling or kernel width"
                )));
            }
            out[[r, c]] = img[[start + r, start + c]] * (n as f64 / denom);
        }
    }
    ComplexImage::from_array(out)
}
