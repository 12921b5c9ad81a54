//! Regularized reconstruction criterion and its gradient.
//!
//! The data-fit term is evaluated in its rewritten form
//!   J(f) = sum|s_l|^2 - 2 Re{ sum f*[n][m] D[n][m] } + sum C[u][v] G[v][u]
//! where C is the image autocorrelation and G, D the precomputed kernels,
//! so the optimization loop only needs 2N x 2N FFTs. The regularizer adds
//! Huber penalties on first-order pixel differences and on the background.

use ndarray::{s, Array2};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft::Fft2;
use crate::forward::nudft_forward;
use crate::image::{ComplexImage, KSpaceSamples};
use crate::kernels::PrecomputedKernels;
use crate::trajectory::Trajectory;

/// Regularization weights and Huber knees for the two penalty terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hyperparameters {
    pub lambda1: f64,
    pub alpha1: f64,
    pub lambda0: f64,
    pub alpha0: f64,
}

impl Default for Hyperparameters {
    fn default() -> Self {
        Hyperparameters {
            lambda1: 0.1,
            alpha1: 20.0,
            lambda0: 0.5,
            alpha0: 10.0,
        }
    }
}

impl Hyperparameters {
    /// No regularization: the criterion reduces to the plain data fit.
    pub fn none() -> Self {
        Hyperparameters {
            lambda1: 0.0,
            alpha1: 1.0,
            lambda0: 0.0,
            alpha0: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = self.lambda1.is_finite()
            && self.alpha1.is_finite()
            && self.lambda0.is_finite()
            && self.alpha0.is_finite();
        if !finite {
            return Err(Error::InvalidArgument(
                "hyperparameters must be finite".into(),
            ));
        }
        if self.lambda1 < 0.0 || self.lambda0 < 0.0 {
            return Err(Error::InvalidArgument("lambdas must be nonnegative".into()));
        }
        if self.alpha1 <= 0.0 || self.alpha0 <= 0.0 {
            return Err(Error::InvalidArgument("alphas must be positive".into()));
        }
        Ok(())
    }
}

/// Huber penalty: x^2 below the knee, 2*alpha*|x| - alpha^2 above.
pub fn huber(x: f64, alpha: f64) -> f64 {
    let ax = x.abs();
    if ax <= alpha {
        x * x
    } else {
        2.0 * alpha * ax - alpha * alpha
    }
}

/// Derivative of [`huber`] for x >= 0: 2x below the knee, 2*alpha above.
pub fn huber_deriv(x: f64, alpha: f64) -> f64 {
    if x.abs() <= alpha {
        2.0 * x
    } else {
        2.0 * alpha * x.signum()
    }
}

/// Gradient contribution of phi_alpha(|z|) with respect to z, packed complex:
/// 2z inside the knee, 2*alpha*z/|z| outside; 0 at z = 0.
fn huber_psi(z: Complex64, alpha: f64) -> Complex64 {
    let az = z.norm();
    if az == 0.0 {
        Complex64::ZERO
    } else if az <= alpha {
        2.0 * z
    } else {
        z * (2.0 * alpha / az)
    }
}

/// Image autocorrelation C[u][v] = sum f[p][q] conj(f[p-u][q-v]) on the
/// centered offset range [1-N, N-1]^2; array index [u + N-1][v + N-1],
/// first index = row offset, second = column offset.
#[derive(Debug, Clone)]
pub struct CorrelationMap {
    data: Array2<Complex64>,
    n_grid: usize,
}

impl CorrelationMap {
    pub fn n_grid(&self) -> usize {
        self.n_grid
    }

    pub fn as_array(&self) -> &Array2<Complex64> {
        &self.data
    }

    /// Entry at signed offsets (u = row, v = column).
    pub fn get(&self, u: i64, v: i64) -> Complex64 {
        let c = self.n_grid as i64 - 1;
        self.data[[(u + c) as usize, (v + c) as usize]]
    }
}

/// Computes the autocorrelation by zero-padding to 2N x 2N, transforming,
/// multiplying by the conjugate transform and inverting; the circular result
/// is re-indexed to the centered range.
pub fn autocorrelation(image: &ComplexImage) -> CorrelationMap {
    let fft = Fft2::new(2 * image.n_grid());
    autocorrelation_with(&fft, image)
}

fn autocorrelation_with(fft: &Fft2, image: &ComplexImage) -> CorrelationMap {
    let n = image.n_grid();
    let p = 2 * n;
    debug_assert_eq!(fft.size(), p);
    let mut padded = Array2::<Complex64>::zeros((p, p));
    padded.slice_mut(s![..n, ..n]).assign(image.as_array());
    fft.forward(&mut padded);
    padded.mapv_inplace(|z| Complex64::new(z.norm_sqr(), 0.0));
    fft.inverse(&mut padded);
    // Circular index d holds offset d for d in [0, N-1] and offset d - 2N for
    // d in [N+1, 2N-1]; both interpretations of d = N have no overlap.
    let side = 2 * n - 1;
    let data = Array2::from_shape_fn((side, side), |(a, b)| {
        let u = (a as i64 - (n as i64 - 1)).rem_euclid(p as i64) as usize;
        let v = (b as i64 - (n as i64 - 1)).rem_euclid(p as i64) as usize;
        padded[[u, v]]
    });
    CorrelationMap { data, n_grid: n }
}

/// Immutable state shared by criterion and gradient evaluations: kernels,
/// the constant data energy, hyperparameters and FFT plans.
pub struct ObjectiveContext {
    kernels: PrecomputedKernels,
    data_norm: f64,
    hyper: Hyperparameters,
    fft: Fft2,
    // Transform of the gradient convolution kernel conj(G[u][v]) embedded at
    // (row v, col u) mod 2N, precomputed once.
    grad_kernel_fft: Array2<Complex64>,
}

impl ObjectiveContext {
    pub fn new(
        kernels: PrecomputedKernels,
        data_norm: f64,
        hyper: Hyperparameters,
    ) -> Result<Self> {
        hyper.validate()?;
        if !data_norm.is_finite() || data_norm < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "data_norm must be a nonnegative finite value, got {data_norm}"
            )));
        }
        let n = kernels.n_grid;
        let side = 2 * n - 1;
        if kernels.gram.dim() != (side, side) {
            return Err(Error::SizeMismatch(format!(
                "trajectory kernel is {:?}, expected {side}x{side}",
                kernels.gram.dim()
            )));
        }
        if kernels.data.n_grid() != n {
            return Err(Error::SizeMismatch(format!(
                "data kernel is {}x{0}, expected {n}x{n}",
                kernels.data.n_grid()
            )));
        }
        let p = 2 * n;
        let fft = Fft2::new(p);
        let mut kernel = Array2::<Complex64>::zeros((p, p));
        let c = n as i64 - 1;
        for ((iu, jv), g) in kernels.gram.indexed_iter() {
            let u = iu as i64 - c;
            let v = jv as i64 - c;
            let row = v.rem_euclid(p as i64) as usize;
            let col = u.rem_euclid(p as i64) as usize;
            kernel[[row, col]] = g.conj();
        }
        fft.forward(&mut kernel);
        Ok(ObjectiveContext {
            kernels,
            data_norm,
            hyper,
            fft,
            grad_kernel_fft: kernel,
        })
    }

    /// Builds the context from a trajectory and its data set.
    pub fn from_acquisition(
        traj: &Trajectory,
        samples: &KSpaceSamples,
        n_grid: usize,
        hyper: Hyperparameters,
    ) -> Result<Self> {
        let kernels = PrecomputedKernels::compute(traj, samples, n_grid)?;
        ObjectiveContext::new(kernels, samples.energy(), hyper)
    }

    pub fn n_grid(&self) -> usize {
        self.kernels.n_grid
    }

    pub fn kernels(&self) -> &PrecomputedKernels {
        &self.kernels
    }

    pub fn data_kernel(&self) -> &ComplexImage {
        &self.kernels.data
    }

    pub fn data_norm(&self) -> f64 {
        self.data_norm
    }

    pub fn hyper(&self) -> &Hyperparameters {
        &self.hyper
    }
}

fn check_image_size(image: &ComplexImage, ctx: &ObjectiveContext) -> Result<()> {
    if image.n_grid() != ctx.n_grid() {
        return Err(Error::SizeMismatch(format!(
            "image is {}x{0}, context expects {1}x{1}",
            image.n_grid(),
            ctx.n_grid()
        )));
    }
    Ok(())
}

/// Data-fit term in the rewritten, FFT-only form.
pub fn eval_data_fit_fast(image: &ComplexImage, ctx: &ObjectiveContext) -> Result<f64> {
    check_image_size(image, ctx)?;
    let corr = autocorrelation_with(&ctx.fft, image);

    // Pairing: C's column offset multiplies the k_x index of G, its row
    // offset the k_y index, hence the transposed access G[v][u].
    let side = 2 * ctx.n_grid() - 1;
    let mut term3 = Complex64::ZERO;
    let c = corr.as_array();
    let g = &ctx.kernels.gram;
    for a in 0..side {
        for b in 0..side {
            term3 += c[[a, b]] * g[[b, a]];
        }
    }
    if term3.im.abs() > 1e-9 * term3.re.abs() + 1e-12 {
        return Err(Error::Internal(format!(
            "imaginary residue {} on correlation-kernel sum (real part {})",
            term3.im, term3.re
        )));
    }

    let cross: Complex64 = image
        .as_array()
        .iter()
        .zip(ctx.kernels.data.as_array().iter())
        .map(|(f, d)| f.conj() * d)
        .sum();

    Ok(ctx.data_norm - 2.0 * cross.re + term3.re)
}

/// Data-fit term straight from the definition: forward-model residual energy.
pub fn eval_data_fit_direct(
    image: &ComplexImage,
    traj: &Trajectory,
    samples: &KSpaceSamples,
) -> Result<f64> {
    if traj.len() != samples.len() {
        return Err(Error::SizeMismatch(format!(
            "samples ({}) vs trajectory ({})",
            samples.len(),
            traj.len()
        )));
    }
    let predicted = nudft_forward(image, traj)?;
    Ok(samples
        .values()
        .iter()
        .zip(predicted.values())
        .map(|(s, y)| (s - y).norm_sqr())
        .sum())
}

/// Gradient of the data-fit term, packed complex (real part = d/dRe f,
/// imaginary part = d/dIm f): 2 (f conv conj-G) - 2 D via zero-padded FFT
/// convolution.
pub fn grad_data_fit(image: &ComplexImage, ctx: &ObjectiveContext) -> Result<ComplexImage> {
    check_image_size(image, ctx)?;
    let n = ctx.n_grid();
    let p = 2 * n;
    let mut padded = Array2::<Complex64>::zeros((p, p));
    padded.slice_mut(s![..n, ..n]).assign(image.as_array());
    ctx.fft.forward(&mut padded);
    padded *= &ctx.grad_kernel_fft;
    ctx.fft.inverse(&mut padded);
    // The 2N-periodic circular convolution equals the linear one on the
    // extracted [0, N)^2 block: aliased linear indices fall outside it.
    let d = ctx.kernels.data.as_array();
    let grad = Array2::from_shape_fn((n, n), |(r, c)| 2.0 * (padded[[r, c]] - d[[r, c]]));
    ComplexImage::from_array(grad)
}

/// Unweighted regularizer parts (Omega_1, Omega_0).
pub fn regularizer_parts(image: &ComplexImage, hyper: &Hyperparameters) -> (f64, f64) {
    let f = image.as_array();
    let n = image.n_grid();
    let mut omega1 = 0.0;
    for r in 0..n.saturating_sub(1) {
        for c in 0..n {
            omega1 += huber((f[[r + 1, c]] - f[[r, c]]).norm(), hyper.alpha1);
        }
    }
    for r in 0..n {
        for c in 0..n.saturating_sub(1) {
            omega1 += huber((f[[r, c + 1]] - f[[r, c]]).norm(), hyper.alpha1);
        }
    }
    let omega0 = f.iter().map(|z| huber(z.norm(), hyper.alpha0)).sum();
    (omega1, omega0)
}

/// Weighted regularizer lambda1*Omega_1 + lambda0*Omega_0. Differences are
/// taken only inside the grid (non-periodic boundaries); the penalty applies
/// to the modulus of complex differences and pixel values.
pub fn eval_regularizer(image: &ComplexImage, hyper: &Hyperparameters) -> f64 {
    let (omega1, omega0) = regularizer_parts(image, hyper);
    hyper.lambda1 * omega1 + hyper.lambda0 * omega0
}

/// Gradient of the weighted regularizer, packed complex.
pub fn grad_regularizer(image: &ComplexImage, hyper: &Hyperparameters) -> ComplexImage {
    let f = image.as_array();
    let n = image.n_grid();
    let mut g = Array2::<Complex64>::zeros((n, n));
    if hyper.lambda1 != 0.0 {
        for r in 0..n.saturating_sub(1) {
            for c in 0..n {
                let z = f[[r + 1, c]] - f[[r, c]];
                let p = hyper.lambda1 * huber_psi(z, hyper.alpha1);
                g[[r + 1, c]] += p;
                g[[r, c]] -= p;
            }
        }
        for r in 0..n {
            for c in 0..n.saturating_sub(1) {
                let z = f[[r, c + 1]] - f[[r, c]];
                let p = hyper.lambda1 * huber_psi(z, hyper.alpha1);
                g[[r, c + 1]] += p;
                g[[r, c]] -= p;
            }
        }
    }
    if hyper.lambda0 != 0.0 {
        for (slot, &z) in g.iter_mut().zip(f.iter()) {
            *slot += hyper.lambda0 * huber_psi(z, hyper.alpha0);
        }
    }
    ComplexImage::from_array(g).expect("regularizer gradient is finite")
}

/// Full criterion: data fit plus weighted regularizer.
pub fn eval_criterion(image: &ComplexImage, ctx: &ObjectiveContext) -> Result<f64> {
    Ok(eval_data_fit_fast(image, ctx)? + eval_regularizer(image, &ctx.hyper))
}

/// Gradient of the full criterion, packed complex.
pub fn grad_criterion(image: &ComplexImage, ctx: &ObjectiveContext) -> Result<ComplexImage> {
    let mut g = grad_data_fit(image, ctx)?;
    let gr = grad_regularizer(image, &ctx.hyper);
    *g.as_array_mut() += gr.as_array();
    Ok(g)
}

/// Real inner product over the 2N^2 real coordinates of two packed images.
pub fn real_dot(a: &ComplexImage, b: &ComplexImage) -> f64 {
    a.as_array()
        .iter()
        .zip(b.as_array().iter())
        .map(|(x, y)| x.re * y.re + x.im * y.im)
        .sum()
}
