//! Central numerical tolerances and default sizes.
//!
//! Every tolerance that more than one module relies on lives here, with the
//! rationale for its value, so that tightening or loosening one is a single
//! edit with a visible blast radius.

/// Relative tolerance for adaptive quadrature (time-map integrals).
///
/// The time map is differenced with spacings down to about 1e-4 when folds
/// are refined, so its own error must sit well below that; 1e-10 leaves four
/// orders of headroom while staying cheap.
pub const QUAD_TOL: f64 = 1e-10;

/// Relative tolerance for the radial shooting integrator.
pub const SHOOT_RTOL: f64 = 1e-10;

/// Absolute tolerance for the radial shooting integrator.
pub const SHOOT_ATOL: f64 = 1e-12;

/// Sup-norm tolerance for monotone fixed-point iteration.
pub const ITER_TOL: f64 = 1e-10;

/// Sup-norm cap above which an iteration or evolution counts as blown up.
///
/// Physical branches of interest here stay below sup-norm ~1e2; 1e6 is far
/// enough away to be unambiguous and small enough to avoid overflow in
/// `exp`-type nonlinearities times lambda.
pub const BLOW_CAP: f64 = 1e6;

/// Default interior grid size for one-dimensional finite differences.
pub const GRID_N_1D: usize = 2048;

/// Default interior grid size for radial finite differences.
///
/// Radial truncation error carries a curvature term absent in d = 1, so the
/// default grid is finer.
pub const GRID_N_RADIAL: usize = 4096;

/// Steady-state criterion for the parabolic evolver: the run stops when the
/// discrete time derivative `sup |u_next - u| / dt` drops below this.
pub const STEADY_TOL: f64 = 1e-8;

/// Fold location tolerance (in alpha) for one-dimensional time-map branches,
/// where evaluations are cheap and smooth.
pub const FOLD_TOL_1D: f64 = 1e-8;

/// Fold location tolerance (in alpha) for shooting-based radial branches,
/// where event location noise makes 1e-8 unreachable.
pub const FOLD_TOL_RADIAL: f64 = 1e-6;

/// Minimal-branch jump detection threshold (in alpha). Physical jumps in the
/// problems treated here are order 1e-1 or larger; 1e-3 separates them from
/// grid-resolution wiggle with three orders of margin.
pub const JUMP_TOL: f64 = 1e-3;

/// Clustering tolerance for multiple-point detection, measured in the
/// taxicab metric |d lambda| + |d alpha| on the diagram.
pub const MULTIPLE_POINT_TOL: f64 = 1e-6;

/// Bisection width at which a critical-threshold search stops.
pub const EPS_TOL: f64 = 5e-4;

/// Largest perturbation amplitude any search is allowed to request.
pub const AMPLITUDE_CAP: f64 = 10.0;

/// Two refined folds closer than this multiple of the fold tolerance (in
/// lambda) are treated as one degenerate feature, not two folds.
pub const FOLD_GAP_FACTOR: f64 = 10.0;

/// Default number of equal steps in the initial branch trace.
pub const TRACE_INITIAL_STEPS: usize = 512;

/// Default cap on the number of points a trace may grow to while refining.
pub const TRACE_MAX_POINTS: usize = 60_000;

/// Default multistart count for degree computations.
pub const DEGREE_STARTS: usize = 200;

/// Default RNG seed for anything randomized (degree multistarts).
pub const DEFAULT_SEED: u64 = 0;

/// First positive zero of the Bessel function J0, squared; the principal
/// Dirichlet eigenvalue of the unit disc.
pub const J0_FIRST_ZERO_SQ: f64 = 5.783_185_962_946_785;
