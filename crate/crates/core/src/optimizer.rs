//! Conjugate-gradient minimization of the reconstruction criterion.
//!
//! Polak-Ribiere with nonnegative beta (PR+) and restart to steepest descent
//! whenever the search direction stops being a descent direction. The line
//! search fits a quadratic through the current point, the directional slope
//! and one probe, spending at most `ls_max_evals` criterion evaluations per
//! iteration and accepting the best strictly-decreasing candidate; if the
//! probe does not decrease it falls back to step halving within the same
//! budget.

use std::path::Path;

use crate::error::{Error, Result};
use crate::image::ComplexImage;
use crate::objective::{
    eval_criterion, grad_criterion, real_dot, regularizer_parts, ObjectiveContext,
};

/// Starting point of the iteration.
#[derive(Debug, Clone, Default)]
pub enum InitGuess {
    #[default]
    Zero,
    /// Start from the data kernel (adjoint image).
    Adjoint,
    User(ComplexImage),
}

#[derive(Debug, Clone)]
pub struct OptimConfig {
    pub max_iters: usize,
    /// Stop when the relative criterion decrease of an accepted step falls
    /// below this value.
    pub rel_tol: f64,
    /// Stop when the gradient norm (over the 2N^2 real coordinates) falls to
    /// this value or below.
    pub grad_tol: f64,
    /// Criterion-evaluation budget per iteration.
    pub ls_max_evals: usize,
    pub init: InitGuess,
}

impl Default for OptimConfig {
    fn default() -> Self {
        OptimConfig {
            max_iters: 50,
            rel_tol: 1e-6,
            grad_tol: 0.0,
            ls_max_evals: 3,
            init: InitGuess::Zero,
        }
    }
}

impl OptimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters < 1 {
            return Err(Error::InvalidArgument("max_iters must be >= 1".into()));
        }
        if self.ls_max_evals < 1 {
            return Err(Error::InvalidArgument("ls_max_evals must be >= 1".into()));
        }
        let bad = |t: f64| t.is_nan() || t < 0.0;
        if bad(self.rel_tol) || bad(self.grad_tol) {
            return Err(Error::InvalidArgument(
                "tolerances must be nonnegative".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    MaxIters,
    /// Relative criterion decrease below `rel_tol`.
    RelTol,
    /// Gradient norm at or below `grad_tol`.
    GradTol,
    /// Line search could not find a decrease down to machine-epsilon steps.
    Stalled,
}

impl StopReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            StopReason::MaxIters => "max_iters",
            StopReason::RelTol => "rel_tol",
            StopReason::GradTol => "grad_tol",
            StopReason::Stalled => "stalled",
        }
    }
}

/// One row of the criterion trace. Iteration 0 is the initial state.
#[derive(Debug, Clone, Copy)]
pub struct IterationRecord {
    pub iteration: usize,
    pub j_reg: f64,
    pub j_ls: f64,
    pub omega1: f64,
    pub omega0: f64,
    /// Accepted step length (0 for the initial row and no-move iterations).
    pub step: f64,
    pub grad_norm: f64,
    pub ls_evals: usize,
}

#[derive(Debug, Clone)]
pub struct OptimReport {
    pub iterations: usize,
    pub trace: Vec<IterationRecord>,
    pub final_grad_norm: f64,
    pub stop: StopReason,
    pub criterion_evals: usize,
    pub gradient_evals: usize,
}

impl OptimReport {
    /// Writes the trace as CSV with columns
    /// iteration,j_reg,j_ls,omega1,omega0,step,grad_norm.
    pub fn write_trace_csv(&self, path: &Path) -> Result<()> {
        let mut out = String::from("iteration,j_reg,j_ls,omega1,omega0,step,grad_norm\n");
        for r in &self.trace {
            out.push_str(&format!(
                "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
                r.iteration, r.j_reg, r.j_ls, r.omega1, r.omega0, r.step, r.grad_norm
            ));
        }
        std::fs::write(path, out).map_err(|e| Error::io(path, e))
    }
}

fn axpy(y: &ComplexImage, t: f64, d: &ComplexImage) -> ComplexImage {
    let sum = y.as_array() + &d.as_array().mapv(|z| z * t);
    ComplexImage::from_array(sum).expect("iterate stays finite")
}

/// True when a step of length `t` along `d` changes `f` representably.
fn step_is_representable(t: f64, d: &ComplexImage, f: &ComplexImage) -> bool {
    if t < 1e-200 {
        return false;
    }
    t * d.max_abs() > f64::EPSILON * (f.max_abs() + f64::MIN_POSITIVE)
}

struct LineSearchOutcome {
    accepted: Option<(f64, f64)>, // (step, criterion)
    smallest_tried: f64,
    evals: usize,
}

fn line_search(
    ctx: &ObjectiveContext,
    f: &ComplexImage,
    d: &ComplexImage,
    j0: f64,
    slope: f64,
    seed: f64,
    max_evals: usize,
) -> Result<LineSearchOutcome> {
    let mut evals = 0usize;
    let mut smallest = f64::INFINITY;
    let probe = |t: f64, evals: &mut usize, smallest: &mut f64| -> Result<f64> {
        *evals += 1;
        *smallest = smallest.min(t);
        eval_criterion(&axpy(f, t, d), ctx)
    };

    let t1 = seed;
    let j1 = probe(t1, &mut evals, &mut smallest)?;

    if j1 < j0 {
        // Refine with quadratic interpolation while the budget lasts.
        let (mut tb, mut jb) = (t1, j1);
        while evals < max_evals {
            let curvature = (jb - j0 - slope * tb) / (tb * tb);
            let tq = if curvature > 0.0 {
                (-slope / (2.0 * curvature)).clamp(tb / 100.0, tb * 100.0)
            } else {
                tb * 4.0
            };
            if (tq - tb).abs() <= 1e-3 * tb {
                break;
            }
            let jq = probe(tq, &mut evals, &mut smallest)?;
            if jq < jb {
                tb = tq;
                jb = jq;
            } else {
                break;
            }
        }
        return Ok(LineSearchOutcome {
            accepted: Some((tb, jb)),
            smallest_tried: smallest,
            evals,
        });
    }

    // Fall back to halving from the seed.
    let mut t = t1;
    while evals < max_evals {
        t /= 2.0;
        let jt = probe(t, &mut evals, &mut smallest)?;
        if jt < j0 {
            return Ok(LineSearchOutcome {
                accepted: Some((t, jt)),
                smallest_tried: smallest,
                evals,
            });
        }
    }
    Ok(LineSearchOutcome {
        accepted: None,
        smallest_tried: smallest,
        evals,
    })
}

/// Minimizes the criterion held by `ctx`, returning the final iterate and a
/// report with the per-iteration trace.
pub fn minimize(
    ctx: &ObjectiveContext,
    config: &OptimConfig,
) -> Result<(ComplexImage, OptimReport)> {
    config.validate()?;
    let n = ctx.n_grid();
    let mut f = match &config.init {
        InitGuess::Zero => ComplexImage::zeros(n),
        InitGuess::Adjoint => ctx.data_kernel().clone(),
        InitGuess::User(img) => {
            if img.n_grid() != n {
                return Err(Error::SizeMismatch(format!(
                    "initial image is {}x{0}, context expects {n}x{n}",
                    img.n_grid()
                )));
            }
            img.clone()
        }
    };

    let mut criterion_evals = 1usize;
    let mut gradient_evals = 1usize;
    let mut j = eval_criterion(&f, ctx)?;
    let initial_j = j;
    let mut g = grad_criterion(&f, ctx)?;
    let mut gg = real_dot(&g, &g);
    let mut dir = negate(&g);
    // Along d0 = -g0 a nonnegative quadratic model of the criterion has its
    // minimizer between j0/gg and 2*j0/gg, which makes j0/gg a well-scaled
    // first probe. Later iterations seed with the previous accepted step.
    let mut seed = if gg > 0.0 && j > 0.0 { j / gg } else { 1.0 };

    let record = |iter: usize, j: f64, step: f64, gnorm: f64, evals: usize, f: &ComplexImage| {
        let (omega1, omega0) = regularizer_parts(f, ctx.hyper());
        let j_ls = j - ctx.hyper().lambda1 * omega1 - ctx.hyper().lambda0 * omega0;
        IterationRecord {
            iteration: iter,
            j_reg: j,
            j_ls,
            omega1,
            omega0,
            step,
            grad_norm: gnorm,
            ls_evals: evals,
        }
    };

    let mut trace = vec![record(0, j, 0.0, gg.sqrt(), 0, &f)];
    let mut stop = StopReason::MaxIters;
    let mut iterations = 0usize;

    for k in 1..=config.max_iters {
        let gnorm = gg.sqrt();
        if gnorm <= config.grad_tol {
            stop = StopReason::GradTol;
            break;
        }

        let mut slope = real_dot(&g, &dir);
        if slope >= 0.0 {
            // Restart to steepest descent.
            dir = negate(&g);
            slope = -gg;
        }
        if slope == 0.0 || !step_is_representable(seed, &dir, &f) {
            stop = StopReason::Stalled;
            break;
        }

        let outcome = line_search(ctx, &f, &dir, j, slope, seed, config.ls_max_evals)?;
        criterion_evals += outcome.evals;
        iterations = k;

        match outcome.accepted {
            Some((t, jt)) => {
                f = axpy(&f, t, &dir);
                let decrease = j - jt;
                j = jt;
                seed = t;

                let g_new = grad_criterion(&f, ctx)?;
                gradient_evals += 1;
                let gg_new = real_dot(&g_new, &g_new);
                let mut beta = (gg_new - real_dot(&g_new, &g)) / gg;
                if !beta.is_finite() || beta < 0.0 {
                    beta = 0.0;
                }
                dir = combine(&g_new, beta, &dir);
                g = g_new;
                gg = gg_new;

                trace.push(record(k, j, t, gg.sqrt(), outcome.evals, &f));

                let prev = trace[trace.len() - 2].j_reg;
                if decrease < config.rel_tol * prev.abs().max(f64::MIN_POSITIVE) {
                    stop = StopReason::RelTol;
                    break;
                }
            }
            None => {
                trace.push(record(k, j, 0.0, gg.sqrt(), outcome.evals, &f));
                if !step_is_representable(outcome.smallest_tried, &dir, &f) {
                    stop = StopReason::Stalled;
                    break;
                }
                // Resume the halving from below the smallest failed step.
                seed = outcome.smallest_tried / 2.0;
            }
        }
    }

    let final_grad_norm = gg.sqrt();
    // Accepted steps only decrease, so the trace is non-increasing and the
    // final criterion cannot exceed the initial one.
    debug_assert!(trace.windows(2).all(|w| w[1].j_reg <= w[0].j_reg));
    assert!(
        j <= initial_j,
        "criterion increased: initial {initial_j}, final {j}"
    );

    let report = OptimReport {
        iterations,
        trace,
        final_grad_norm,
        stop,
        criterion_evals,
        gradient_evals,
    };
    Ok((f, report))
}

fn negate(g: &ComplexImage) -> ComplexImage {
    ComplexImage::from_array(g.as_array().mapv(|z| -z)).expect("finite")
}

/// -g + beta * d
fn combine(g: &ComplexImage, beta: f64, d: &ComplexImage) -> ComplexImage {
    let arr = d.as_array().mapv(|z| z * beta) - g.as_array();
    ComplexImage::from_array(arr).expect("finite")
}
