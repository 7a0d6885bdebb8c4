//! Solvers: discrete operators, the one-dimensional time map, radial
//! shooting, monotone minimal-solution iteration, torsion profiles, and the
//! parabolic evolver.

pub mod grid;
pub mod minimal;
pub mod parabolic;
pub mod poisson;
pub mod shooting;
pub mod time_map;

pub use grid::{interval_operator, radial_operator, FdOperator, Tridiag};
pub use minimal::{minimal_branch, minimal_solution, MinimalConfig};
pub use parabolic::{evolve, EvolveConfig, EvolveOutcome, Evolution};
pub use poisson::{poisson_fd, PoissonProfile};
pub use shooting::{RadialShoot, ShootResult};
pub use time_map::TimeMap;

use crate::error::{Error, Result};
use crate::problem::{Domain, ProblemSpec};

/// Finite-difference operator matching the problem's domain.
pub fn operator_for(problem: &ProblemSpec, n: usize) -> Result<FdOperator> {
    match (&problem.domain, problem.dimension) {
        (Domain::Interval { length }, 1) => {
            if n < 2 {
                return Err(Error::InvalidParameter(format!(
                    "interval grid needs at least 2 interior nodes, got {n}"
                )));
            }
            Ok(grid::interval_operator(*length, n))
        }
        (Domain::Ball { radius }, d @ (2 | 3)) => grid::radial_operator(d, *radius, n),
        _ => {
            problem.validate()?;
            unreachable!("validate rejects inconsistent dimension/domain pairs")
        }
    }
}
