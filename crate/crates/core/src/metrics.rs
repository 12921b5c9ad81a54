//! Reconstruction quality metrics over regions of interest.

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft::{fftshift2, Fft2};
use crate::image::ComplexImage;
use crate::phantom::Roi;

/// Quadratic reconstruction error over an ROI: (absolute, normalized).
///
/// absolute = sum |recon - reference|^2 over the ROI; normalized divides by
/// the reference energy on the ROI and is `None` when that energy is zero.
pub fn quad_error(
    recon: &ComplexImage,
    reference: &ComplexImage,
    roi: &Roi,
) -> Result<(f64, Option<f64>)> {
    if recon.n_grid() != reference.n_grid() || roi.mask.dim() != recon.as_array().dim() {
        return Err(Error::SizeMismatch(
            "recon, reference and ROI must share the same grid".into(),
        ));
    }
    let mut absolute = 0.0;
    let mut ref_energy = 0.0;
    for ((a, b), &m) in recon
        .as_array()
        .iter()
        .zip(reference.as_array().iter())
        .zip(roi.mask.iter())
    {
        if m {
            absolute += (a - b).norm_sqr();
            ref_energy += b.norm_sqr();
        }
    }
    let normalized = if ref_energy > 0.0 {
        Some(absolute / ref_energy)
    } else {
        None
    };
    Ok((absolute, normalized))
}

/// Population variance of the magnitude |recon| over the ROI pixels.
pub fn roi_variance(recon: &ComplexImage, roi: &Roi) -> Result<f64> {
    if roi.mask.dim() != recon.as_array().dim() {
        return Err(Error::SizeMismatch(
            "ROI does not match the image grid".into(),
        ));
    }
    let mags: Vec<f64> = recon
        .as_array()
        .iter()
        .zip(roi.mask.iter())
        .filter(|(_, &m)| m)
        .map(|(z, _)| z.norm())
        .collect();
    if mags.is_empty() {
        return Err(Error::InvalidArgument("ROI mask is empty".into()));
    }
    let n = mags.len() as f64;
    let mean = mags.iter().sum::<f64>() / n;
    Ok(mags.iter().map(|m| (m - mean) * (m - mean)).sum::<f64>() / n)
}

/// Centered 2-D FFT magnitude of an image, for k-space inspection and
/// comparison. The result holds real values.
pub fn kspace_of_image(image: &ComplexImage) -> ComplexImage {
    let n = image.n_grid();
    let fft = Fft2::new(n);
    let mut spec = image.as_array().clone();
    fft.forward(&mut spec);
    let centered = fftshift2(&spec);
    let mag: Array2<Complex64> = centered.mapv(|z| Complex64::new(z.norm(), 0.0));
    ComplexImage::from_array(mag).expect("magnitude of finite image is finite")
}

/// ||a - b|| / ||b|| over all entries.
pub fn normalized_l2_distance(a: &ComplexImage, b: &ComplexImage) -> Result<f64> {
    if a.n_grid() != b.n_grid() {
        return Err(Error::SizeMismatch("images differ in size".into()));
    }
    let diff: f64 = a
        .as_array()
        .iter()
        .zip(b.as_array().iter())
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt();
    let norm = b.norm();
    if norm == 0.0 {
        return Err(Error::InvalidArgument("reference image is zero".into()));
    }
    Ok(diff / norm)
}
