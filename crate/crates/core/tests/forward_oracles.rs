//! The NUDFT operators against literal brute-force evaluation of their
//! definitions, plus the adjoint and linearity identities.

mod common;

use mrrecon_core::forward::{nudft_adjoint, nudft_forward};
use mrrecon_core::image::{ComplexImage, KSpaceSamples};
use mrrecon_core::test_util::{random_image, random_samples, random_trajectory};
use num_complex::Complex64;

#[test]
fn forward_matches_brute_force() {
    for seed in 0..5u64 {
        let n = 8;
        let img = random_image(n, seed);
        let traj = random_trajectory(13, seed + 50);
        let got = nudft_forward(&img, &traj).unwrap();
        let want = common::brute_forward(&img, &traj);
        for (g, w) in got.values().iter().zip(&want) {
            assert!(
                (g - w).norm() <= 1e-12 * (1.0 + w.norm()),
                "seed {seed}: {g} vs {w}"
            );
        }
    }
}

#[test]
fn adjoint_matches_brute_force() {
    for seed in 0..5u64 {
        let n = 8;
        let traj = random_trajectory(13, seed + 10);
        let samples = random_samples(13, seed + 60);
        let got = nudft_adjoint(&samples, &traj, n).unwrap();
        let want = common::brute_adjoint(&samples, &traj, n);
        for (row, want_row) in want.iter().enumerate() {
            for (col, w) in want_row.iter().enumerate() {
                let g = got.as_array()[[row, col]];
                assert!((g - w).norm() <= 1e-12 * (1.0 + w.norm()));
            }
        }
    }
}

#[test]
fn adjoint_inner_product_identity() {
    // <forward(f), s> == <f, adjoint(s)> over 20 random instances.
    for seed in 0..20u64 {
        let n = 8;
        let l = 13;
        let img = random_image(n, 2 * seed);
        let traj = random_trajectory(l, 3 * seed + 1);
        let samples = random_samples(l, 5 * seed + 2);

        let forward = nudft_forward(&img, &traj).unwrap();
        let lhs: Complex64 = forward
            .values()
            .iter()
            .zip(samples.values())
            .map(|(y, s)| y * s.conj())
            .sum();

        let adj = nudft_adjoint(&samples, &traj, n).unwrap();
        let rhs: Complex64 = img
            .as_array()
            .iter()
            .zip(adj.as_array().iter())
            .map(|(f, a)| f * a.conj())
            .sum();

        assert!(
            (lhs - rhs).norm() <= 1e-12 * (1.0 + lhs.norm()),
            "seed {seed}: {lhs} vs {rhs}"
        );
    }
}

#[test]
fn forward_is_linear() {
    let n = 8;
    let traj = random_trajectory(17, 99);
    let f = random_image(n, 1);
    let g = random_image(n, 2);
    let (a, b) = (Complex64::new(1.7, -0.3), Complex64::new(-0.4, 2.2));
    let combo =
        ComplexImage::from_array(f.as_array().mapv(|z| z * a) + g.as_array().mapv(|z| z * b))
            .unwrap();
    let sf = nudft_forward(&f, &traj).unwrap();
    let sg = nudft_forward(&g, &traj).unwrap();
    let sc = nudft_forward(&combo, &traj).unwrap();
    for ((x, y), z) in sf.values().iter().zip(sg.values()).zip(sc.values()) {
        let expect = a * x + b * y;
        assert!((z - expect).norm() <= 1e-12 * (1.0 + expect.norm()));
    }
}

#[test]
fn near_boundary_frequencies_are_handled() {
    // Components at exactly +-0.5 are valid trajectory points.
    let n = 6;
    let traj = mrrecon_core::Trajectory::new(vec![[0.5, -0.5], [-0.5, 0.5], [0.5, 0.5]]).unwrap();
    let img = random_image(n, 8);
    let got = nudft_forward(&img, &traj).unwrap();
    let want = common::brute_forward(&img, &traj);
    for (g, w) in got.values().iter().zip(&want) {
        assert!((g - w).norm() <= 1e-12 * (1.0 + w.norm()));
    }
    let s = KSpaceSamples::new(want).unwrap();
    let adj = nudft_adjoint(&s, &traj, n).unwrap();
    let brute = common::brute_adjoint(&s, &traj, n);
    for (row, brute_row) in brute.iter().enumerate() {
        for (col, w) in brute_row.iter().enumerate() {
            assert!((adj.as_array()[[row, col]] - w).norm() <= 1e-12 * (1.0 + w.norm()));
        }
    }
}
