//! Implicit-explicit evolution of u_t - laplace(u) = lambda f(u).
//!
//! The diffusion is treated implicitly and the source explicitly:
//!
//! ```text
//!   (I + dt (-laplace_h)) u^{n+1} = u^n + dt lambda f(u^n).
//! ```
//!
//! The left matrix is an M-matrix, so its inverse is order preserving; for
//! nondecreasing f the whole step is monotone, which gives the scheme an
//! exact discrete comparison principle. Steady states of the step satisfy
//! exactly the same discrete equation as the minimal-solution iteration on
//! the same grid, so the two agree to iteration tolerance, not just to
//! discretization error.

use crate::defaults;
use crate::error::{Error, Result};
use crate::nonlinearity::Nonlinearity;
use crate::problem::ProblemSpec;
use crate::solvers::grid::{FdOperator, Tridiag};
use crate::solvers::operator_for;

/// How an evolution run ended.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EvolveOutcome {
    /// The discrete time derivative dropped below the steady tolerance.
    Converged { time: f64 },
    /// The sup-norm crossed the blow-up cap (or left the finite range).
    Blowup { time: f64 },
    /// Still moving at t_max; no verdict.
    TimedOut,
}

/// Settings for one evolution run.
#[derive(Debug, Clone)]
pub struct EvolveConfig {
    pub lambda: f64,
    pub dt: f64,
    pub t_max: f64,
    pub steady_tol: f64,
    pub blow_cap: f64,
    pub grid_n: usize,
    /// Record (time, sup-norm) every this many steps; 0 disables recording.
    pub record_every: usize,
}

impl EvolveConfig {
    pub fn new(lambda: f64, dt: f64, t_max: f64, grid_n: usize) -> Self {
        EvolveConfig {
            lambda,
            dt,
            t_max,
            steady_tol: defaults::STEADY_TOL,
            blow_cap: defaults::BLOW_CAP,
            grid_n,
            record_every: 16,
        }
    }
}

/// Result of an evolution run.
#[derive(Debug, Clone)]
pub struct Evolution {
    pub outcome: EvolveOutcome,
    /// Recorded (time, sup-norm) history.
    pub history: Vec<(f64, f64)>,
    /// Grid coordinates of the state entries.
    pub nodes: Vec<f64>,
    /// State at the end of the run.
    pub final_state: Vec<f64>,
    pub steps_taken: usize,
}

/// One IMEX stepper, reusable across steps and tests.
pub struct ParabolicStepper<'a> {
    f: &'a Nonlinearity,
    lambda: f64,
    dt: f64,
    lhs: Tridiag,
}

impl<'a> ParabolicStepper<'a> {
    pub fn new(f: &'a Nonlinearity, op: &FdOperator, lambda: f64, dt: f64) -> Self {
        // I + dt A, built by scaling A and shifting the diagonal.
        let mut lhs = op.tri.clone();
        for v in &mut lhs.sub {
            *v *= dt;
        }
        for v in &mut lhs.sup {
            *v *= dt;
        }
        for v in &mut lhs.diag {
            *v = 1.0 + dt * *v;
        }
        ParabolicStepper { f, lambda, dt, lhs }
    }

    /// Advance one step.
    pub fn step(&self, u: &[f64]) -> Vec<f64> {
        let rhs: Vec<f64> = u
            .iter()
            .map(|&v| v + self.dt * self.lambda * self.f.eval(v))
            .collect();
        self.lhs.solve(&rhs)
    }
}

/// Evolve from the given initial data (zeros when `None`).
pub fn evolve(
    problem: &ProblemSpec,
    initial: Option<&[f64]>,
    cfg: &EvolveConfig,
) -> Result<Evolution> {
    problem.validate()?;
    if !cfg.dt.is_finite() || cfg.dt <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "time step must be positive, got {}",
            cfg.dt
        )));
    }
    if cfg.t_max < cfg.dt {
        return Err(Error::InvalidParameter(
            "t_max must allow at least one step".into(),
        ));
    }
    if !cfg.lambda.is_finite() || cfg.lambda < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "lambda must be nonnegative, got {}",
            cfg.lambda
        )));
    }
    let op = operator_for(problem, cfg.grid_n)?;
    let n = op.tri.n();
    let mut u = match initial {
        Some(u0) => {
            if u0.len() != n {
                return Err(Error::InvalidParameter(format!(
                    "initial data has {} entries, grid has {n}",
                    u0.len()
                )));
            }
            u0.to_vec()
        }
        None => vec![0.0; n],
    };
    let stepper = ParabolicStepper::new(&problem.nonlinearity, &op, cfg.lambda, cfg.dt);
    let steps = (cfg.t_max / cfg.dt).floor() as usize;
    let mut history = Vec::new();
    if cfg.record_every > 0 {
        history.push((0.0, FdOperator::sup(&u)));
    }
    for k in 1..=steps {
        let next = stepper.step(&u);
        let t = k as f64 * cfg.dt;
        let mut diff = 0.0_f64;
        let mut sup = 0.0_f64;
        for i in 0..n {
            diff = diff.max((next[i] - u[i]).abs());
            sup = sup.max(next[i].abs());
        }
        u = next;
        if cfg.record_every > 0 && (k % cfg.record_every == 0 || k == steps) {
            history.push((t, sup));
        }
        if !sup.is_finite() || sup > cfg.blow_cap {
            return Ok(Evolution {
                outcome: EvolveOutcome::Blowup { time: t },
                history,
                nodes: op.nodes,
                final_state: u,
                steps_taken: k,
            });
        }
        if diff / cfg.dt < cfg.steady_tol {
            return Ok(Evolution {
                outcome: EvolveOutcome::Converged { time: t },
                history,
                nodes: op.nodes,
                final_state: u,
                steps_taken: k,
            });
        }
    }
    Ok(Evolution {
        outcome: EvolveOutcome::TimedOut,
        history,
        nodes: op.nodes,
        final_state: u,
        steps_taken: steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solvers::grid::interval_operator;
    use crate::solvers::minimal::{minimal_solution, IterationOutcome};
    use proptest::prelude::*;

    #[test]
    fn subcritical_run_settles_on_the_minimal_solution() {
        // lambda = 2 sits below the unit-interval fold near 3.51, so the
        // run must settle instead of blowing up.
        let problem = ProblemSpec::interval(1.0, Nonlinearity::Exponential);
        let cfg = EvolveConfig::new(2.0, 0.02, 400.0, 512);
        let ev = evolve(&problem, None, &cfg).unwrap();
        assert!(
            matches!(ev.outcome, EvolveOutcome::Converged { .. }),
            "outcome {:?}",
            ev.outcome
        );
        let op = interval_operator(1.0, 512);
        let steady = match minimal_solution(
            &Nonlinearity::Exponential,
            &op,
            2.0,
            0.0,
            1e-11,
            1e6,
            100_000,
        )
        .unwrap()
        {
            IterationOutcome::Converged(u) => u,
            _ => panic!("iteration should converge at lambda = 2"),
        };
        let mut worst = 0.0_f64;
        for i in 0..steady.len() {
            worst = worst.max((steady[i] - ev.final_state[i]).abs());
        }
        assert!(worst < 1e-4, "steady-state gap {worst}");
    }

    #[test]
    fn supercritical_run_blows_up_with_a_recorded_time() {
        let problem = ProblemSpec::interval(2.0, Nonlinearity::Exponential);
        let cfg = EvolveConfig::new(4.5, 0.05, 2000.0, 256);
        let ev = evolve(&problem, None, &cfg).unwrap();
        match ev.outcome {
            EvolveOutcome::Blowup { time } => assert!(time > 0.0),
            other => panic!("expected blow-up, got {other:?}"),
        }
        // Sup-norm history is nondecreasing on the way up.
        for w in ev.history.windows(2) {
            assert!(w[1].1 >= w[0].1 - 1e-12);
        }
    }

    #[test]
    fn evolver_validates_its_inputs() {
        let problem = ProblemSpec::interval(2.0, Nonlinearity::Exponential);
        let mut cfg = EvolveConfig::new(1.0, 0.0, 1.0, 64);
        assert!(evolve(&problem, None, &cfg).is_err());
        cfg.dt = 0.1;
        cfg.t_max = 0.01;
        assert!(evolve(&problem, None, &cfg).is_err());
        cfg.t_max = 1.0;
        assert!(evolve(&problem, Some(&[0.0; 3]), &cfg).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn comparison_principle_holds_exactly_in_the_scheme(
            seed in 0u64..1000,
            lambda in 0.0..3.0_f64,
        ) {
            // Ordered initial data stay ordered after a step: the explicit
            // source is monotone for nondecreasing f and the implicit
            // matrix has a nonnegative inverse.
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let op = interval_operator(2.0, 33);
            let f = Nonlinearity::Exponential;
            let stepper = ParabolicStepper::new(&f, &op, lambda, 0.05);
            let lo: Vec<f64> = (0..33).map(|_| rng.gen_range(0.0..1.0)).collect();
            let hi: Vec<f64> = lo.iter().map(|v| v + rng.gen_range(0.0..0.5)).collect();
            let lo1 = stepper.step(&lo);
            let hi1 = stepper.step(&hi);
            for i in 0..33 {
                prop_assert!(lo1[i] <= hi1[i] + 1e-13);
            }
        }
    }
}
