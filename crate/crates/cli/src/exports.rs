//! 16-bit PGM exports: magnitude, phase and difference images.

use std::f64::consts::PI;
use std::path::Path;

use anyhow::Result;
use ndarray::Array2;

use mrrecon_core::image::ComplexImage;
use mrrecon_core::io;

/// Magnitude, normalized to [0, max].
pub fn write_magnitude_pgm(image: &ComplexImage, path: &Path) -> Result<()> {
    let mag: Array2<f64> = image.as_array().mapv(|z| z.norm());
    io::write_pgm16(path, &io::scale_to_u16(&mag))?;
    Ok(())
}

/// Phase, mapped [-pi, pi] onto the full 16-bit range.
pub fn write_phase_pgm(image: &ComplexImage, path: &Path) -> Result<()> {
    let phase: Array2<f64> = image.as_array().mapv(|z| z.arg());
    io::write_pgm16(path, &io::scale_range_to_u16(&phase, -PI, PI))?;
    Ok(())
}

/// |recon - reference|, normalized to [0, max].
pub fn write_difference_pgm(
    recon: &ComplexImage,
    reference: &ComplexImage,
    path: &Path,
) -> Result<()> {
    anyhow::ensure!(
        recon.n_grid() == reference.n_grid(),
        "difference image needs matching grids"
    );
    let diff = Array2::from_shape_fn(recon.as_array().dim(), |idx| {
        (recon.as_array()[idx] - reference.as_array()[idx]).norm()
    });
    io::write_pgm16(path, &io::scale_to_u16(&diff))?;
    Ok(())
}
