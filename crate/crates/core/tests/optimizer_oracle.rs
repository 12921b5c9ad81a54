//! Conjugate-gradient minimizer against a dense normal-equations solve in the
//! pure quadratic regime (Huber knees set far above all magnitudes).

mod common;

use mrrecon_core::objective::{Hyperparameters, ObjectiveContext};
use mrrecon_core::optimizer::{minimize, InitGuess, OptimConfig};
use mrrecon_core::test_util::{random_samples, random_trajectory};

#[test]
fn quadratic_regime_matches_dense_solve() {
    let n = 8;
    let l = 5 * n;
    let (lambda1, lambda0) = (0.1, 0.5);
    for seed in [1u64, 2] {
        let traj = random_trajectory(l, seed);
        let samples = random_samples(l, seed + 10);
        let reference = common::normal_equations_solution(&traj, &samples, n, lambda1, lambda0);

        // Knees far beyond any magnitude in play keep both Huber terms in
        // their quadratic branch.
        let hyper = Hyperparameters {
            lambda1,
            alpha1: 1e9,
            lambda0,
            alpha0: 1e9,
        };
        let ctx = ObjectiveContext::from_acquisition(&traj, &samples, n, hyper).unwrap();
        let config = OptimConfig {
            max_iters: 400,
            rel_tol: 0.0,
            grad_tol: 0.0,
            ls_max_evals: 3,
            init: InitGuess::Zero,
        };
        let (f, report) = minimize(&ctx, &config).unwrap();

        let mut num = 0.0;
        let mut den = 0.0;
        for (idx, z) in f.as_array().indexed_iter() {
            let want = reference[idx.0 * n + idx.1];
            num += (z - want).norm_sqr();
            den += want.norm_sqr();
        }
        let rel = (num / den).sqrt();
        assert!(
            rel < 1e-6,
            "seed {seed}: relative deviation {rel}, stop {:?}, iters {}",
            report.stop,
            report.iterations
        );
    }
}
