//! Minimal solutions by monotone iteration.
//!
//! For each lambda the scheme solves
//!
//! ```text
//!   (-laplace_h + omega I) u_{k+1} = lambda f(u_k) + omega u_k,   u_0 = 0.
//! ```
//!
//! With omega at least lambda times a one-sided decrease bound for f, the
//! right-hand side is order preserving, so the iterates increase monotonely
//! and converge to the smallest discrete solution whenever one exists; for
//! nondecreasing f the shift is zero and this is the classical iteration.
//! Unbounded growth past the blow-up cap is the honest "no solution here"
//! outcome, reported as such rather than as an error.

use crate::branch::{Branch, TerminationReason};
use crate::defaults;
use crate::error::{Error, Result};
use crate::nonlinearity::{admissibility, Nonlinearity};
use crate::problem::ProblemSpec;
use crate::solvers::grid::FdOperator;
use crate::solvers::operator_for;
use rayon::prelude::*;

/// Settings for a minimal-branch sweep.
#[derive(Debug, Clone)]
pub struct MinimalConfig {
    /// Parameter values, strictly increasing.
    pub lambdas: Vec<f64>,
    pub grid_n: usize,
    pub iter_tol: f64,
    pub blow_cap: f64,
    pub max_iters: usize,
}

impl MinimalConfig {
    /// Uniform parameter grid from lo to hi inclusive.
    pub fn range(lo: f64, hi: f64, count: usize, grid_n: usize) -> Self {
        let lambdas = (0..count)
            .map(|i| lo + (hi - lo) * i as f64 / (count.max(2) - 1) as f64)
            .collect();
        MinimalConfig {
            lambdas,
            grid_n,
            iter_tol: defaults::ITER_TOL,
            blow_cap: defaults::BLOW_CAP,
            max_iters: 200_000,
        }
    }
}

/// Outcome of one monotone iteration: the solution, or honest divergence.
pub enum IterationOutcome {
    Converged(Vec<f64>),
    Diverged { sup: f64 },
}

/// Run the shifted monotone iteration at one parameter value.
///
/// `omega` must dominate lambda times the steepest decrease of f over the
/// range the iterates visit; zero is correct for nondecreasing f.
pub fn minimal_solution(
    f: &Nonlinearity,
    op: &FdOperator,
    lambda: f64,
    omega: f64,
    iter_tol: f64,
    blow_cap: f64,
    max_iters: usize,
) -> Result<IterationOutcome> {
    if !lambda.is_finite() || lambda < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "minimal iteration needs lambda >= 0, got {lambda}"
        )));
    }
    let n = op.tri.n();
    let shifted = op.tri.shifted(omega);
    let mut u = vec![0.0_f64; n];
    let mut rhs = vec![0.0_f64; n];
    for _ in 0..max_iters {
        for i in 0..n {
            rhs[i] = lambda * f.eval(u[i]) + omega * u[i];
        }
        let next = shifted.solve(&rhs);
        let mut diff = 0.0_f64;
        let mut sup = 0.0_f64;
        for i in 0..n {
            diff = diff.max((next[i] - u[i]).abs());
            sup = sup.max(next[i].abs());
        }
        if !sup.is_finite() || sup > blow_cap {
            return Ok(IterationOutcome::Diverged { sup });
        }
        u = next;
        if diff < iter_tol {
            return Ok(IterationOutcome::Converged(u));
        }
    }
    Err(Error::IterationStalled {
        lambda,
        iterations: max_iters,
    })
}

/// Collect the first `count` iterates of the shifted monotone iteration,
/// starting from the zero vector, without waiting for convergence. Useful
/// for inspecting the monotone structure of the scheme directly.
pub fn minimal_iterates(
    f: &Nonlinearity,
    op: &FdOperator,
    lambda: f64,
    omega: f64,
    count: usize,
) -> Result<Vec<Vec<f64>>> {
    if !lambda.is_finite() || lambda < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "minimal iteration needs lambda >= 0, got {lambda}"
        )));
    }
    let n = op.tri.n();
    let shifted = op.tri.shifted(omega);
    let mut u = vec![0.0_f64; n];
    let mut rhs = vec![0.0_f64; n];
    let mut iterates = Vec::with_capacity(count);
    iterates.push(u.clone());
    while iterates.len() < count {
        for i in 0..n {
            rhs[i] = lambda * f.eval(u[i]) + omega * u[i];
        }
        u = shifted.solve(&rhs);
        iterates.push(u.clone());
    }
    Ok(iterates)
}

/// Sweep the parameter grid and assemble the minimal branch. Points past
/// the first divergence are dropped and the branch records the onset.
pub fn minimal_branch(problem: &ProblemSpec, cfg: &MinimalConfig) -> Result<Branch> {
    problem.validate()?;
    if cfg.lambdas.is_empty() {
        return Err(Error::InvalidParameter(
            "minimal branch needs at least one lambda".into(),
        ));
    }
    if cfg.lambdas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter(
            "minimal branch lambdas must be strictly increasing".into(),
        ));
    }
    let op = operator_for(problem, cfg.grid_n)?;
    let report = admissibility(&problem.nonlinearity, problem.lambda1())?;
    let omega_f = report
        .omega_table
        .last()
        .map(|p| p.1)
        .unwrap_or(0.0);
    let f = &problem.nonlinearity;
    let outcomes: Vec<Result<IterationOutcome>> = cfg
        .lambdas
        .par_iter()
        .map(|&lambda| {
            minimal_solution(
                f,
                &op,
                lambda,
                lambda * omega_f,
                cfg.iter_tol,
                cfg.blow_cap,
                cfg.max_iters,
            )
        })
        .collect();

    let mut pts: Vec<(f64, f64, Option<Vec<(f64, f64)>>)> = Vec::new();
    let mut onset = None;
    for (lambda, outcome) in cfg.lambdas.iter().zip(outcomes) {
        match outcome? {
            IterationOutcome::Converged(u) => {
                let alpha = FdOperator::sup(&u);
                let mut profile: Vec<(f64, f64)> =
                    op.nodes.iter().cloned().zip(u.iter().cloned()).collect();
                if problem.dimension == 1 {
                    profile.insert(0, (0.0, 0.0));
                }
                profile.push((op.extent, 0.0));
                pts.push((alpha, *lambda, Some(profile)));
            }
            IterationOutcome::Diverged { .. } => {
                onset = Some(*lambda);
                break;
            }
        }
    }
    let termination = if onset.is_some() {
        TerminationReason::Divergence
    } else {
        TerminationReason::AlphaMax
    };
    let mut branch = Branch::from_points(pts, termination);
    branch.divergence_onset = onset;
    Ok(branch)
}
