//! Brute-force oracles shared by the integration suites. These deliberately
//! re-derive everything from the definitions, independent of the library's
//! computation paths.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use mrrecon_core::image::{ComplexImage, KSpaceSamples};
use mrrecon_core::trajectory::Trajectory;

/// Literal double-loop evaluation of the acquisition model.
pub fn brute_forward(image: &ComplexImage, traj: &Trajectory) -> Vec<Complex64> {
    let n = image.n_grid();
    let f = image.as_array();
    traj.points()
        .iter()
        .map(|&[kx, ky]| {
            let mut acc = Complex64::new(0.0, 0.0);
            for row in 0..n {
                for col in 0..n {
                    let phase = 2.0 * std::f64::consts::PI * (kx * col as f64 + ky * row as f64);
                    acc += f[[row, col]] * Complex64::new(phase.cos(), phase.sin());
                }
            }
            acc / n as f64
        })
        .collect()
}

/// Literal double-loop evaluation of the adjoint.
pub fn brute_adjoint(
    samples: &KSpaceSamples,
    traj: &Trajectory,
    n_grid: usize,
) -> Vec<Vec<Complex64>> {
    (0..n_grid)
        .map(|row| {
            (0..n_grid)
                .map(|col| {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (&[kx, ky], &s) in traj.points().iter().zip(samples.values()) {
                        let phase =
                            -2.0 * std::f64::consts::PI * (kx * col as f64 + ky * row as f64);
                        acc += s * Complex64::new(phase.cos(), phase.sin());
                    }
                    acc / n_grid as f64
                })
                .collect()
        })
        .collect()
}

/// Dense solve of (H^H H + l1 (Dx^H Dx + Dy^H Dy) + l0 I) f = H^H s, the
/// closed-form minimizer of the criterion when both Huber terms stay in
/// their quadratic branch. Row-major vectorization (idx = row * n + col).
pub fn normal_equations_solution(
    traj: &Trajectory,
    samples: &KSpaceSamples,
    n: usize,
    lambda1: f64,
    lambda0: f64,
) -> DVector<Complex64> {
    let l = traj.len();
    let dim = n * n;
    let mut h = DMatrix::<Complex64>::zeros(l, dim);
    for (li, &[kx, ky]) in traj.points().iter().enumerate() {
        for r in 0..n {
            for c in 0..n {
                let phase = 2.0 * std::f64::consts::PI * (kx * c as f64 + ky * r as f64);
                h[(li, r * n + c)] = Complex64::new(phase.cos(), phase.sin()) / n as f64;
            }
        }
    }
    let mut dy = DMatrix::<Complex64>::zeros((n - 1) * n, dim);
    let mut row = 0;
    for r in 0..n - 1 {
        for c in 0..n {
            dy[(row, (r + 1) * n + c)] = Complex64::ONE;
            dy[(row, r * n + c)] = -Complex64::ONE;
            row += 1;
        }
    }
    let mut dx = DMatrix::<Complex64>::zeros(n * (n - 1), dim);
    let mut row = 0;
    for r in 0..n {
        for c in 0..n - 1 {
            dx[(row, r * n + c + 1)] = Complex64::ONE;
            dx[(row, r * n + c)] = -Complex64::ONE;
            row += 1;
        }
    }

    let mut a = h.adjoint() * &h;
    a += (dy.adjoint() * &dy + dx.adjoint() * &dx) * Complex64::new(lambda1, 0.0);
    for i in 0..dim {
        a[(i, i)] += Complex64::new(lambda0, 0.0);
    }
    let s = DVector::from_iterator(l, samples.values().iter().copied());
    let rhs = h.adjoint() * s;
    a.lu().solve(&rhs).expect("normal equations are invertible")
}

/// Deterministic low-discrepancy points in [0, 1)^2 (Halton bases 2 and 3).
pub fn halton_points(count: usize) -> Vec<[f64; 2]> {
    fn radical_inverse(mut i: usize, base: usize) -> f64 {
        let mut inv = 1.0 / base as f64;
        let mut out = 0.0;
        while i > 0 {
            out += (i % base) as f64 * inv;
            i /= base;
            inv /= base as f64;
        }
        out
    }
    (1..=count)
        .map(|i| [radical_inverse(i, 2), radical_inverse(i, 3)])
        .collect()
}
