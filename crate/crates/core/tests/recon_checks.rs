//! Cross-module checks: Voronoi areas against a quasi-Monte-Carlo oracle,
//! density-method agreement on a phantom reconstruction, PSF ring structure.

mod common;

use mrrecon_core::forward::nudft_forward;
use mrrecon_core::gridding::{grid_reconstruct, voronoi_weights, DensityMethod, GriddingConfig};
use mrrecon_core::kernels::{central_row_half_profile, compute_gram_kernel, first_ring_offset};
use mrrecon_core::metrics::quad_error;
use mrrecon_core::phantom::{make_phantom, PhantomSpec};
use mrrecon_core::test_util::random_trajectory;
use mrrecon_core::trajectory::{default_turns, generate_spiral};

#[test]
fn voronoi_areas_match_nearest_neighbor_estimate() {
    let traj = random_trajectory(50, 123);
    let weights = voronoi_weights(&traj).unwrap();

    // 1e6 equidistributed points; each is assigned to its nearest site.
    let samples = common::halton_points(1_000_000);
    let pts = traj.points();
    let mut counts = vec![0u64; pts.len()];
    for s in &samples {
        let (x, y) = (s[0] - 0.5, s[1] - 0.5);
        let mut best = 0usize;
        let mut best_d = f64::INFINITY;
        for (i, p) in pts.iter().enumerate() {
            let d = (p[0] - x) * (p[0] - x) + (p[1] - y) * (p[1] - y);
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        counts[best] += 1;
    }
    for (i, (&c, &w)) in counts.iter().zip(weights.values()).enumerate() {
        let estimate = c as f64 / samples.len() as f64;
        let rel = (estimate - w).abs() / w;
        assert!(rel < 0.02, "site {i}: voronoi {w}, estimate {estimate}");
    }
}

#[test]
fn voronoi_and_radial_densities_agree_on_the_phantom() {
    let n = 128;
    let arms = 6;
    let spec = PhantomSpec::default_for(n);
    let (reference, roi1, _) = make_phantom(&spec).unwrap();
    let traj = generate_spiral(arms, 512, default_turns(n, arms)).unwrap();
    let samples = nudft_forward(&reference, &traj).unwrap();

    // Away from the outermost pass the two estimators measure the same polar
    // Jacobian, up to the disk-vs-square normalization pi/4. The outermost
    // samples differ by design: square-clipped Voronoi cells also absorb the
    // unsampled corner area.
    let vor = mrrecon_core::gridding::voronoi_weights(&traj).unwrap();
    let rad = mrrecon_core::gridding::radial_spiral_weights(&traj, arms).unwrap();
    let mut interior_ratios = Vec::new();
    for ((p, &v), &r) in traj.points().iter().zip(vor.values()).zip(rad.values()) {
        let radius = (p[0] * p[0] + p[1] * p[1]).sqrt();
        if (0.05..0.45).contains(&radius) {
            interior_ratios.push(v / r);
        }
    }
    let mean: f64 = interior_ratios.iter().sum::<f64>() / interior_ratios.len() as f64;
    assert!(
        (mean - std::f64::consts::FRAC_PI_4).abs() < 0.01,
        "mean ratio {mean}"
    );
    for r in &interior_ratios {
        assert!(
            (r / mean - 1.0).abs() < 0.05,
            "interior ratio {r} vs mean {mean}"
        );
    }

    let voronoi = grid_reconstruct(&samples, &traj, n, &GriddingConfig::default()).unwrap();
    let radial = grid_reconstruct(
        &samples,
        &traj,
        n,
        &GriddingConfig {
            density: DensityMethod::RadialSpiral { arms },
            ..Default::default()
        },
    )
    .unwrap();

    let (err_v, _) = quad_error(&voronoi, &reference, &roi1).unwrap();
    let (err_r, _) = quad_error(&radial, &reference, &roi1).unwrap();
    let ratio = err_v.max(err_r) / err_v.min(err_r);
    assert!(
        ratio < 2.5,
        "ROI1 quadratic errors too far apart: voronoi {err_v}, radial {err_r}"
    );
}

#[test]
fn halving_the_arms_pulls_the_first_psf_ring_inward() {
    let n = 64;
    let ring_of = |arms: usize| {
        let traj = generate_spiral(arms, 512, 1.0).unwrap();
        let gram = compute_gram_kernel(&traj, n).unwrap();
        let profile = central_row_half_profile(&gram);
        first_ring_offset(&profile).expect("ring should be detectable")
    };
    let ring24 = ring_of(24);
    let ring12 = ring_of(12);
    assert!(
        ring12 < ring24,
        "expected the 12-arm ring closer to center: {ring12} vs {ring24}"
    );
    // Arm spacing halves, so the ring radius should land near half as far.
    assert!((20..=30).contains(&ring12), "ring12 = {ring12}");
    assert!((40..=56).contains(&ring24), "ring24 = {ring24}");
}
