use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Square complex image on an N x N grid.
///
/// Row index n pairs with the vertical axis (k_y), column index m with the
/// horizontal axis (k_x). All entries are finite.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexImage {
    data: Array2<Complex64>,
}

impl ComplexImage {
    pub fn zeros(n_grid: usize) -> Self {
        ComplexImage {
            data: Array2::zeros((n_grid, n_grid)),
        }
    }

    /// Wraps an array, enforcing the square-and-finite invariants.
    pub fn from_array(data: Array2<Complex64>) -> Result<Self> {
        let (rows, cols) = data.dim();
        if rows != cols {
            return Err(Error::SizeMismatch(format!(
                "image must be square, got {rows}x{cols}"
            )));
        }
        if rows == 0 {
            return Err(Error::InvalidArgument("image must be non-empty".into()));
        }
        if !data.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::InvalidArgument(
                "image contains non-finite entries".into(),
            ));
        }
        Ok(ComplexImage { data })
    }

    pub fn n_grid(&self) -> usize {
        self.data.nrows()
    }

    pub fn as_array(&self) -> &Array2<Complex64> {
        &self.data
    }

    pub fn as_array_mut(&mut self) -> &mut Array2<Complex64> {
        &mut self.data
    }

    pub fn into_array(self) -> Array2<Complex64> {
        self.data
    }

    pub fn all_finite(&self) -> bool {
        self.data
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Euclidean norm over the 2N^2 real coordinates.
    pub fn norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest magnitude entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// Complex k-space data values, aligned index-for-index with a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct KSpaceSamples {
    values: Vec<Complex64>,
}

impl KSpaceSamples {
    pub fn new(values: Vec<Complex64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidArgument(
                "sample vector must be non-empty".into(),
            ));
        }
        if !values.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::InvalidArgument(
                "samples contain non-finite entries".into(),
            ));
        }
        Ok(KSpaceSamples { values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Total signal energy sum |s_l|^2.
    pub fn energy(&self) -> f64 {
        self.values.iter().map(|z| z.norm_sqr()).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_square() {
        let a = Array2::<Complex64>::zeros((2, 3));
        assert!(ComplexImage::from_array(a).is_err());
    }

    #[test]
    fn rejects_non_finite() {
        let mut a = Array2::<Complex64>::zeros((2, 2));
        a[[0, 1]] = Complex64::new(f64::NAN, 0.0);
        assert!(ComplexImage::from_array(a).is_err());
    }

    #[test]
    fn rejects_empty_samples() {
        assert!(KSpaceSamples::new(vec![]).is_err());
    }
}
