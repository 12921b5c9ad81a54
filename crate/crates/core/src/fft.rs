//! Small 2-D FFT layer over rustfft, plus centering shifts.

use std::sync::Arc;

use ndarray::Array2;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Planned forward/inverse transforms for square arrays of a fixed size.
pub struct Fft2 {
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl Fft2 {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Fft2 {
            n,
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
        }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    /// In-place forward transform, e^{-i2*pi*...} convention, unnormalized.
    pub fn forward(&self, a: &mut Array2<Complex64>) {
        self.apply(&self.fwd, a);
    }

    /// In-place inverse transform, normalized by 1/n^2.
    pub fn inverse(&self, a: &mut Array2<Complex64>) {
        self.apply(&self.inv, a);
        let scale = 1.0 / (self.n * self.n) as f64;
        a.mapv_inplace(|z| z * scale);
    }

    fn apply(&self, fft: &Arc<dyn Fft<f64>>, a: &mut Array2<Complex64>) {
        assert_eq!(a.dim(), (self.n, self.n), "array size does not match plan");
        for mut row in a.rows_mut() {
            fft.process(row.as_slice_mut().expect("row must be contiguous"));
        }
        // Columns via transpose copy into a C-order scratch array.
        let mut t = Array2::zeros((self.n, self.n));
        t.assign(&a.t());
        for mut row in t.rows_mut() {
            fft.process(row.as_slice_mut().expect("row must be contiguous"));
        }
        a.assign(&t.t());
    }
}

/// Rotates index 0 to floor(n/2) along both axes (spectrum centering).
pub fn fftshift2<T: Clone>(a: &Array2<T>) -> Array2<T> {
    let (r, c) = a.dim();
    let (sr, sc) = (r / 2, c / 2);
    Array2::from_shape_fn((r, c), |(i, j)| {
        a[[(i + r - sr) % r, (j + c - sc) % c]].clone()
    })
}

/// Inverse of [`fftshift2`]: rotates index floor(n/2) back to 0.
pub fn ifftshift2<T: Clone>(a: &Array2<T>) -> Array2<T> {
    let (r, c) = a.dim();
    let (sr, sc) = (r / 2, c / 2);
    Array2::from_shape_fn((r, c), |(i, j)| a[[(i + sr) % r, (j + sc) % c]].clone())
}

/// 1-D forward DFT of a short vector, direct evaluation (used for kernel
/// apodization profiles where n is small).
pub fn fftshift1<T: Clone>(v: &[T]) -> Vec<T> {
    let n = v.len();
    let s = n / 2;
    (0..n).map(|i| v[(i + n - s) % n].clone()).collect()
}
