//! Error type shared across the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong in solvers, detectors and searches.
///
/// Variants distinguish between caller mistakes (bad parameters, bad
/// brackets), numerical breakdowns (quadrature or step-size failure), and
/// honest negative outcomes (divergent iteration, exhausted search). The
/// distinction matters to the command line layer, which maps them to
/// different exit codes.
#[derive(Debug, Error)]
pub enum Error {
    /// A configuration or argument value is outside its admissible range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The nonlinearity must stay strictly positive on the range it is used.
    #[error("nonlinearity not positive: f({x}) = {value}")]
    NotPositive { x: f64, value: f64 },

    /// A monotone perturbation was requested with an amplitude above the
    /// slope-limited feasibility cap for the chosen placement.
    #[error(
        "monotone perturbation infeasible at m = {m}, width = {width}: \
         requested amplitude {requested}, feasible cap {feasible_cap}"
    )]
    InfeasibleAmplitude {
        m: f64,
        width: f64,
        requested: f64,
        feasible_cap: f64,
    },

    /// Adaptive quadrature ran out of subdivisions before hitting its target.
    #[error("quadrature did not reach tolerance {tol:.3e}: error estimate {achieved:.3e}")]
    QuadratureFailure { tol: f64, achieved: f64 },

    /// The time-map integrand hit a non-positive energy difference, which
    /// means no orbit reaches height `alpha`.
    #[error("time map undefined at alpha = {alpha}: F(alpha) - F({u}) = {diff:.3e} <= 0")]
    TimeMapUndefined { alpha: f64, u: f64, diff: f64 },

    /// The shooting trajectory never crossed zero before the safety horizon.
    #[error("no zero of the shooting profile in (0, {s_max:.6e}] for alpha = {alpha}")]
    NoZero { alpha: f64, s_max: f64 },

    /// The adaptive integrator was forced below the smallest usable step.
    #[error("step size underflow at s = {s:.6e} (step {h:.3e})")]
    StepSizeUnderflow { s: f64, h: f64 },

    /// A fixed-point or parabolic iteration blew past the blow-up cap.
    #[error("iteration diverged at lambda = {lambda}: sup-norm {sup:.3e} exceeds cap {cap:.3e}")]
    Diverged { lambda: f64, sup: f64, cap: f64 },

    /// A fixed-point iteration neither converged nor blew up within its
    /// budget; usually a sign of running too close to a fold.
    #[error("iteration stalled at lambda = {lambda}: still moving after {iterations} iterations")]
    IterationStalled { lambda: f64, iterations: usize },

    /// A bisection or bracketing routine was handed endpoints that do not
    /// straddle the feature it is asked to locate.
    #[error("invalid bracket: {0}")]
    InvalidBracket(String),

    /// A degree computation found the boundary too close to a zero for the
    /// count to be trustworthy.
    #[error("zero too close to region boundary: min |F| on boundary = {min_norm:.3e} <= {tol:.3e}")]
    BoundaryTooClose { min_norm: f64, tol: f64 },

    /// A perturbation search tried its whole placement grid without
    /// producing the requested change. This is a negative result, not a bug.
    #[error("perturbation search exhausted after {tried} placements: {detail}")]
    SearchExhausted { tried: usize, detail: String },

    /// Only d = 1, 2, 3 are supported.
    #[error("unsupported dimension {0}")]
    UnsupportedDimension(usize),
}
