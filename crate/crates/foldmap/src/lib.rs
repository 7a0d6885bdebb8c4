//! Continuation and bifurcation analysis for the Dirichlet problem
//!
//! ```text
//!     -laplace(u) = lambda f(u)   in Omega,      u = 0   on the boundary,
//! ```
//!
//! with `f` positive, on an interval (d = 1) or on a ball with radially
//! symmetric solutions (d = 2, 3).
//!
//! The crate traces solution branches `alpha -> lambda(alpha)` parametrised
//! by the sup-norm `alpha = u(0)`, locates folds and multiple points on the
//! resulting diagrams, computes minimal solutions by monotone iteration,
//! searches for compactly supported perturbations of `f` that change the
//! diagram topology, and cross-checks solution counts with a finite
//! dimensional Brouwer degree. Supporting pieces: closed-form torsion
//! profiles for the constant right-hand side, and an implicit-explicit
//! evolver for the parabolic flow `u_t - laplace(u) = lambda f(u)`.

pub mod branch;
pub mod continuation;
pub mod defaults;
pub mod degree;
pub mod error;
pub mod nonlinearity;
pub mod problem;
pub mod quad;
pub mod solvers;
pub mod topology;

pub use branch::{Branch, BranchPoint, TerminationReason};
pub use error::{Error, Result};
pub use nonlinearity::{AdmissibilityReport, Bump, Nonlinearity};
pub use problem::{Domain, ProblemSpec};
