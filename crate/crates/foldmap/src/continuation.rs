//! Branch continuation in the amplitude variable.
//!
//! Every solver that produces a map alpha -> lambda(alpha) (the time map in
//! d = 1, shooting in d = 2, 3, closures in tests) is traced the same way:
//! an even sweep of the amplitude range, optional fine windows where a
//! search needs extra resolution, and midpoint refinement around detected
//! turning regions. Amplitude parametrisation cannot fold back, so the
//! polyline is a graph over alpha and every lambda extremum is visible as a
//! sign change of the discrete slope.

use crate::branch::{Branch, ExtReal, TerminationReason};
use crate::defaults;
use crate::error::{Error, Result};
use crate::nonlinearity::{admissibility, Nonlinearity};
use crate::problem::ProblemSpec;
use crate::solvers::shooting::RadialShoot;
use crate::solvers::time_map::TimeMap;
use rayon::prelude::*;
use serde::Serialize;

/// A branch map: the parameter value at which the solution with sup-norm
/// `alpha` exists.
pub trait AlphaMap: Sync {
    fn lambda(&self, alpha: f64) -> Result<f64>;
}

impl AlphaMap for TimeMap<'_> {
    fn lambda(&self, alpha: f64) -> Result<f64> {
        TimeMap::lambda(self, alpha)
    }
}

impl AlphaMap for RadialShoot<'_> {
    fn lambda(&self, alpha: f64) -> Result<f64> {
        RadialShoot::lambda(self, alpha)
    }
}

/// Adapter for plain closures.
pub struct FnMap<F: Fn(f64) -> Result<f64> + Sync>(pub F);

impl<F: Fn(f64) -> Result<f64> + Sync> AlphaMap for FnMap<F> {
    fn lambda(&self, alpha: f64) -> Result<f64> {
        (self.0)(alpha)
    }
}

/// A window of the amplitude range that must be sampled at least this
/// finely, regardless of the global step.
#[derive(Debug, Clone, Copy)]
pub struct FocusWindow {
    pub lo: f64,
    pub hi: f64,
    pub max_step: f64,
}

/// Trace settings.
#[derive(Debug, Clone)]
pub struct TraceConfig {
    pub alpha_max: f64,
    pub initial_steps: usize,
    /// Rounds of midpoint insertion around slope sign changes.
    pub refine_rounds: usize,
    pub max_points: usize,
    pub focus: Vec<FocusWindow>,
}

impl TraceConfig {
    pub fn new(alpha_max: f64) -> Self {
        TraceConfig {
            alpha_max,
            initial_steps: defaults::TRACE_INITIAL_STEPS,
            refine_rounds: 2,
            max_points: defaults::TRACE_MAX_POINTS,
            focus: Vec::new(),
        }
    }

    pub fn with_focus(mut self, lo: f64, hi: f64, max_step: f64) -> Self {
        self.focus.push(FocusWindow { lo, hi, max_step });
        self
    }
}

/// Evaluate the map over a sorted amplitude grid. Amplitudes past the
/// first "the branch ended here" signal are dropped; genuine numerical
/// failures propagate.
fn evaluate_sweep(
    map: &dyn AlphaMap,
    alphas: &[f64],
) -> Result<(Vec<(f64, f64)>, Option<TerminationReason>)> {
    let results: Vec<Result<f64>> = alphas.par_iter().map(|&a| map.lambda(a)).collect();
    let mut pts = Vec::with_capacity(alphas.len());
    for (a, r) in alphas.iter().zip(results) {
        match r {
            Ok(l) => pts.push((*a, l)),
            Err(Error::NoZero { .. }) => return Ok((pts, Some(TerminationReason::NoZero))),
            Err(Error::Diverged { .. }) => {
                return Ok((pts, Some(TerminationReason::Divergence)))
            }
            Err(e) => return Err(e),
        }
    }
    Ok((pts, None))
}

/// Trace lambda(alpha) over (0, alpha_max]. When `trivial_lambda` is given
/// (the limit of lambda as alpha -> 0, finite), the branch is anchored
/// there with an exact leading point.
pub fn trace_with_map(
    map: &dyn AlphaMap,
    trivial_lambda: Option<f64>,
    cfg: &TraceConfig,
) -> Result<Branch> {
    if !(cfg.alpha_max.is_finite() && cfg.alpha_max > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "alpha_max must be positive, got {}",
            cfg.alpha_max
        )));
    }
    if cfg.initial_steps < 8 {
        return Err(Error::InvalidParameter(
            "need at least 8 initial trace steps".into(),
        ));
    }
    // Initial grid plus any focus windows.
    let mut alphas: Vec<f64> = (1..=cfg.initial_steps)
        .map(|i| cfg.alpha_max * i as f64 / cfg.initial_steps as f64)
        .collect();
    for w in &cfg.focus {
        if !(w.max_step > 0.0 && w.lo < w.hi) {
            return Err(Error::InvalidParameter(
                "focus windows need lo < hi and a positive step".into(),
            ));
        }
        let lo = w.lo.max(cfg.alpha_max * 1e-9);
        let hi = w.hi.min(cfg.alpha_max);
        let count = ((hi - lo) / w.max_step).ceil() as usize;
        for i in 0..=count {
            alphas.push(lo + (hi - lo) * i as f64 / count.max(1) as f64);
        }
    }
    alphas.sort_by(f64::total_cmp);
    alphas.dedup_by(|a, b| (*a - *b).abs() < 1e-12 * cfg.alpha_max);
    if alphas.len() > cfg.max_points {
        return Err(Error::InvalidParameter(format!(
            "trace grid of {} points exceeds the cap {}",
            alphas.len(),
            cfg.max_points
        )));
    }

    let (mut pts, termination) = evaluate_sweep(map, &alphas)?;
    if pts.is_empty() {
        return Err(Error::InvalidParameter(
            "branch trace produced no points".into(),
        ));
    }

    // Midpoint refinement around discrete slope sign changes. Midpoints
    // are interior to already-evaluated cells, so terminations cannot
    // legitimately appear here; only the base sweep sets them.
    for _ in 0..cfg.refine_rounds {
        if termination.is_some() {
            break;
        }
        let mut inserts = Vec::new();
        for i in 1..pts.len().saturating_sub(1) {
            let dl = pts[i].1 - pts[i - 1].1;
            let dr = pts[i + 1].1 - pts[i].1;
            if dl * dr < 0.0 {
                inserts.push(0.5 * (pts[i - 1].0 + pts[i].0));
                inserts.push(0.5 * (pts[i].0 + pts[i + 1].0));
            }
        }
        inserts.sort_by(f64::total_cmp);
        inserts.dedup();
        if inserts.is_empty() || pts.len() + inserts.len() > cfg.max_points {
            break;
        }
        let (new_pts, _) = evaluate_sweep(map, &inserts)?;
        pts.extend(new_pts);
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    }

    let mut triples: Vec<(f64, f64, Option<Vec<(f64, f64)>>)> = Vec::new();
    if let Some(l0) = trivial_lambda {
        if l0.is_finite() {
            triples.push((0.0, l0, None));
        }
    }
    triples.extend(pts.into_iter().map(|(a, l)| (a, l, None)));
    Ok(Branch::from_points(
        triples,
        termination.unwrap_or(TerminationReason::AlphaMax),
    ))
}

/// The natural map for a problem: time map in d = 1, shooting otherwise.
pub fn problem_map<'a>(problem: &'a ProblemSpec) -> Result<Box<dyn AlphaMap + 'a>> {
    problem.validate()?;
    if problem.dimension == 1 {
        Ok(Box::new(TimeMap::new(problem)?))
    } else {
        Ok(Box::new(RadialShoot::new(problem)?))
    }
}

/// Trace the branch of a problem, dispatching on its dimension and
/// anchoring the trivial limit lambda_1 / a when that is finite.
pub fn trace_branch(problem: &ProblemSpec, cfg: &TraceConfig) -> Result<Branch> {
    problem.validate()?;
    let report = admissibility(&problem.nonlinearity, problem.lambda1())?;
    let a = report.slope_at_zero.0;
    let trivial = if a == f64::INFINITY {
        Some(0.0)
    } else if a > 0.0 && a.is_finite() {
        Some(problem.lambda1() / a)
    } else {
        None
    };
    let map = problem_map(problem)?;
    trace_with_map(map.as_ref(), trivial, cfg)
}

/// Golden-section search for a local extremum of the map inside [lo, hi],
/// finished by a parabolic vertex fit. Returns (alpha, lambda) of the
/// refined extremum. `maximize` picks which kind; the bracket must contain
/// one (ensured by a slope sign change on the traced polyline).
///
/// Near a smooth extremum the map varies quadratically, so once the
/// bracket is narrower than about the cube root of machine epsilon times
/// the argument scale, sample values differ by less than their own
/// rounding error and further golden steps only shuffle noise. The search
/// therefore stops at that width (or at `tol` if larger) and fits a
/// parabola through the bracket ends and midpoint; its vertex places the
/// extremum far more precisely than value comparisons alone could.
pub fn golden_extremum(
    map: &dyn AlphaMap,
    lo: f64,
    hi: f64,
    maximize: bool,
    tol: f64,
) -> Result<(f64, f64)> {
    if !(lo < hi) {
        return Err(Error::InvalidBracket(format!(
            "golden section needs lo < hi, got [{lo}, {hi}]"
        )));
    }
    let phi = 0.5 * (5.0_f64.sqrt() - 1.0);
    let sign = if maximize { 1.0 } else { -1.0 };
    let scale = lo.abs().max(hi.abs()).max(1.0);
    let stop = tol.max(f64::EPSILON.cbrt() * scale);
    let mut a = lo;
    let mut b = hi;
    let mut x1 = b - phi * (b - a);
    let mut x2 = a + phi * (b - a);
    let mut f1 = sign * map.lambda(x1)?;
    let mut f2 = sign * map.lambda(x2)?;
    while b - a > stop {
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = sign * map.lambda(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = sign * map.lambda(x2)?;
        }
    }
    let m = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let ga = sign * map.lambda(a)?;
    let gm = sign * map.lambda(m)?;
    let gb = sign * map.lambda(b)?;
    let mut best = (m, gm);
    for cand in [(a, ga), (b, gb)] {
        if cand.1 > best.1 {
            best = cand;
        }
    }
    // Vertex of the parabola through (a, ga), (m, gm), (b, gb). The
    // curvature must agree with the extremum kind and the vertex must stay
    // inside the bracket; otherwise the sampled best point stands.
    let curve = ga - 2.0 * gm + gb;
    if curve < 0.0 {
        let shift = 0.5 * h * (ga - gb) / curve;
        if shift.is_finite() && shift.abs() <= h {
            let v = (m + shift).clamp(lo, hi);
            let gv = sign * map.lambda(v)?;
            if gv >= best.1 {
                best = (v, gv);
            }
        }
    }
    Ok((best.0, sign * best.1))
}

/// Estimate of the extremal parameter (the supremum of lambda values with
/// a solution).
#[derive(Debug, Clone, Serialize)]
pub struct ExtremalReport {
    /// Whether the extremal parameter is finite (superlinear growth) or
    /// infinite (sublinear growth, b = 0).
    pub finite: bool,
    pub lambda_star: ExtReal,
    /// Amplitude attaining the finite estimate, when one exists inside the
    /// traced range.
    pub attained_alpha: Option<f64>,
    /// Largest lambda seen on the traced polyline (a lower bound always).
    pub observed_sup: f64,
    /// What the finiteness verdict rests on.
    pub rationale: FinitenessRationale,
}

/// Ground for the finite-or-infinite classification of the extremal
/// parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FinitenessRationale {
    /// Slope of f at infinity is zero, so every parameter value is
    /// reached and the supremum is infinite.
    SublinearGrowth,
    /// Slope of f at infinity is infinite, so the parameter range is
    /// bounded and the branch maximum estimates its supremum.
    SuperlinearGrowth,
    /// Growth diagnostics were inconclusive either way; the verdict
    /// leans on the traced branch alone.
    Empirical,
}

/// Classify and estimate the extremal parameter from growth diagnostics
/// plus a traced branch. Requires f(0) > 0: branches of these problems
/// leave the trivial solution only then.
pub fn extremal_lambda(problem: &ProblemSpec, branch: &Branch) -> Result<ExtremalReport> {
    let f = &problem.nonlinearity;
    if f.eval(0.0) <= 0.0 {
        return Err(Error::InvalidParameter(
            "extremal parameter estimation requires f(0) > 0".into(),
        ));
    }
    if branch.points.is_empty() {
        return Err(Error::InvalidParameter("empty branch".into()));
    }
    let report = admissibility(f, problem.lambda1())?;
    let (idx, observed_sup) = branch.lambda_max().expect("nonempty");
    let b = report.slope_at_infinity.0;
    if b == 0.0 {
        return Ok(ExtremalReport {
            finite: false,
            lambda_star: ExtReal(f64::INFINITY),
            attained_alpha: None,
            observed_sup,
            rationale: FinitenessRationale::SublinearGrowth,
        });
    }
    let rationale = if b.is_infinite() {
        FinitenessRationale::SuperlinearGrowth
    } else {
        FinitenessRationale::Empirical
    };
    // Superlinear: the branch max is the estimate; polish it when the
    // argmax is interior.
    let pts = &branch.points;
    let (mut alpha_star, mut lambda_star) = (pts[idx].alpha, observed_sup);
    if idx > 0 && idx + 1 < pts.len() && pts[idx].alpha > 0.0 {
        let map = problem_map(problem)?;
        let tol = if problem.dimension == 1 {
            defaults::FOLD_TOL_1D
        } else {
            defaults::FOLD_TOL_RADIAL
        };
        let lo = pts[idx - 1].alpha.max(f64::MIN_POSITIVE);
        let hi = pts[idx + 1].alpha;
        let (a, l) = golden_extremum(map.as_ref(), lo, hi, true, tol)?;
        alpha_star = a;
        lambda_star = l.max(observed_sup);
    }
    Ok(ExtremalReport {
        finite: true,
        lambda_star: ExtReal(lambda_star),
        attained_alpha: Some(alpha_star),
        observed_sup,
        rationale,
    })
}

/// Settings for the critical-saturation bisection.
#[derive(Debug, Clone)]
pub struct EpsSearchConfig {
    pub bracket: (f64, f64),
    pub eps_tol: f64,
    pub alpha_max: f64,
    pub initial_steps: usize,
    pub fold_tol: f64,
}

impl EpsSearchConfig {
    pub fn new(bracket: (f64, f64), dimension: usize) -> Self {
        EpsSearchConfig {
            bracket,
            eps_tol: defaults::EPS_TOL,
            alpha_max: 60.0,
            initial_steps: 768,
            fold_tol: if dimension == 1 {
                defaults::FOLD_TOL_1D
            } else {
                defaults::FOLD_TOL_RADIAL
            },
        }
    }
}

/// Result of the critical-saturation search: the threshold lies in
/// [lo, hi], with fold counts verifying the bracket endpoints.
#[derive(Debug, Clone, Serialize)]
pub struct EpsCritical {
    pub lo: f64,
    pub hi: f64,
    pub bisections: usize,
    pub lo_folds: usize,
    pub hi_folds: usize,
}

/// Bisect the saturation parameter of the arrhenius family between "the
/// branch has a fold pair" and "the branch is monotone". The template
/// problem supplies dimension and domain; its nonlinearity is replaced by
/// arrhenius(eps) at each probe.
pub fn critical_eps_search(template: &ProblemSpec, cfg: &EpsSearchConfig) -> Result<EpsCritical> {
    let (mut lo, mut hi) = cfg.bracket;
    if !(lo > 0.0 && lo < hi) {
        return Err(Error::InvalidBracket(format!(
            "need 0 < lo < hi, got [{lo}, {hi}]"
        )));
    }
    let count_folds = |eps: f64| -> Result<usize> {
        let problem = ProblemSpec {
            dimension: template.dimension,
            domain: template.domain,
            nonlinearity: Nonlinearity::arrhenius(eps),
        };
        let mut tc = TraceConfig::new(cfg.alpha_max);
        tc.initial_steps = cfg.initial_steps;
        let branch = trace_branch(&problem, &tc)?;
        let folds = crate::topology::detect_folds_in_problem(&problem, &branch, cfg.fold_tol)?;
        // Gap rule: a max/min pair closer than a few fold tolerances in
        // lambda is a degenerate near-collision, counted as no folds.
        if folds.folds.len() >= 2 {
            let lmax = folds
                .folds
                .iter()
                .map(|f| f.lambda)
                .fold(f64::NEG_INFINITY, f64::max);
            let lmin = folds
                .folds
                .iter()
                .map(|f| f.lambda)
                .fold(f64::INFINITY, f64::min);
            if lmax - lmin <= defaults::FOLD_GAP_FACTOR * cfg.fold_tol {
                return Ok(0);
            }
        }
        Ok(folds.folds.len())
    };
    let lo_folds = count_folds(lo)?;
    let hi_folds = count_folds(hi)?;
    if lo_folds < 2 || hi_folds != 0 {
        return Err(Error::InvalidBracket(format!(
            "bracket endpoints must straddle the threshold: folds({lo}) = {lo_folds}, \
             folds({hi}) = {hi_folds}"
        )));
    }
    let mut bisections = 0;
    while hi - lo > cfg.eps_tol {
        let mid = 0.5 * (lo + hi);
        if count_folds(mid)? >= 2 {
            lo = mid;
        } else {
            hi = mid;
        }
        bisections += 1;
        if bisections > 64 {
            return Err(Error::InvalidBracket(
                "bisection failed to narrow the bracket".into(),
            ));
        }
    }
    Ok(EpsCritical {
        lo,
        hi,
        bisections,
        lo_folds,
        hi_folds,
    })
}
