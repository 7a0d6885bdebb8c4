//! Diagram topology: fold points, multiple points, minimal-branch jumps,
//! regime labels, a non-equivalence comparator, and the perturbation
//! search that manufactures new folds with a compactly supported bump.
//!
//! All detectors work on traced polylines in the (alpha, lambda) plane.
//! For the radial and interval families here the amplitude parameterizes
//! solutions injectively, so polyline geometry is a faithful proxy for the
//! solution-space picture.

use crate::branch::Branch;
use crate::continuation::{golden_extremum, problem_map, trace_branch, AlphaMap, TraceConfig};
use crate::defaults;
use crate::error::{Error, Result};
use crate::nonlinearity::{build_perturbation, monotone_amplitude_cap, Nonlinearity};
use crate::problem::ProblemSpec;
use crate::solvers::minimal::{minimal_branch, MinimalConfig};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Which kind of lambda extremum a fold is.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FoldKind {
    Max,
    Min,
}

/// A turning point of the branch: a strict local extremum of lambda along
/// the continuum, refined in alpha by a bracketed search with a parabolic
/// finish (`tol` is the requested bracket width), at which small metric
/// spheres meet the branch in exactly two points.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FoldPoint {
    pub lambda: f64,
    pub alpha: f64,
    pub kind: FoldKind,
    #[serde(skip)]
    pub tol: f64,
}

/// Fold detection output: accepted folds plus candidates rejected by the
/// strictness or sphere checks (plateaus, near-collisions).
#[derive(Debug, Clone, Default, Serialize)]
pub struct FoldScan {
    pub folds: Vec<FoldPoint>,
    /// (alpha, lambda) of discarded degenerate candidates.
    pub degenerate: Vec<(f64, f64)>,
}

/// Golden-section refinement of a discrete lambda extremum at interior
/// index `i` of the branch polyline. Rejects the candidate when the
/// refined value fails to beat the bracket endpoints (bracket lost).
pub fn refine_fold(
    map: &dyn AlphaMap,
    branch: &Branch,
    index: usize,
    tol: f64,
) -> Result<FoldPoint> {
    let pts = &branch.points;
    if index == 0 || index + 1 >= pts.len() {
        return Err(Error::InvalidBracket(format!(
            "fold candidate index {index} is not interior"
        )));
    }
    let (l_prev, l_here, l_next) = (
        pts[index - 1].lambda,
        pts[index].lambda,
        pts[index + 1].lambda,
    );
    let kind = if l_here > l_prev && l_here > l_next {
        FoldKind::Max
    } else if l_here < l_prev && l_here < l_next {
        FoldKind::Min
    } else {
        return Err(Error::InvalidBracket(format!(
            "no strict extremum at index {index}"
        )));
    };
    let lo = pts[index - 1].alpha.max(f64::MIN_POSITIVE);
    let hi = pts[index + 1].alpha;
    let (alpha, lambda) = golden_extremum(map, lo, hi, kind == FoldKind::Max, tol)?;
    let beats = match kind {
        FoldKind::Max => lambda >= l_prev && lambda >= l_next && lambda >= l_here,
        FoldKind::Min => lambda <= l_prev && lambda <= l_next && lambda <= l_here,
    };
    if !beats {
        return Err(Error::InvalidBracket(format!(
            "refinement lost the extremum near alpha = {}",
            pts[index].alpha
        )));
    }
    Ok(FoldPoint {
        lambda,
        alpha,
        kind,
        tol,
    })
}

/// Count crossings of the level `r` by the polyline distance
/// |lambda - lambda*| + |alpha - alpha*|. A clean simple fold is crossed
/// exactly twice: once on each side.
fn sphere_crossings(pts: &[(f64, f64)], alpha_star: f64, lambda_star: f64, r: f64) -> usize {
    let metric =
        |p: &(f64, f64)| (p.0 - alpha_star).abs() + (p.1 - lambda_star).abs();
    let mut crossings = 0;
    for w in pts.windows(2) {
        let (m0, m1) = (metric(&w[0]) - r, metric(&w[1]) - r);
        if m0 * m1 < 0.0 || (m0 == 0.0 && m1 != 0.0) {
            crossings += 1;
        }
    }
    crossings
}

/// Detect all folds of a traced branch: every strict interior sign change
/// of the discrete slope is refined, then checked for five-point
/// strictness and for the two-point sphere-intersection property at radii
/// 2, 4, 8 times the local step. Failing candidates are reported as
/// degenerate, not as folds.
pub fn detect_folds(map: &dyn AlphaMap, branch: &Branch, fold_tol: f64) -> Result<FoldScan> {
    let pts: Vec<(f64, f64)> = branch.points.iter().map(|p| (p.alpha, p.lambda)).collect();
    let mut scan = FoldScan::default();
    if pts.len() < 3 {
        return Ok(scan);
    }
    for i in 1..pts.len() - 1 {
        let (l_prev, l_here, l_next) = (pts[i - 1].1, pts[i].1, pts[i + 1].1);
        let is_max = l_here > l_prev && l_here > l_next;
        let is_min = l_here < l_prev && l_here < l_next;
        if !is_max && !is_min {
            continue;
        }
        // Five-point strictness: the extremum must also dominate the
        // second ring when it exists; plateaus are degenerate.
        let mut strict = true;
        if i >= 2 {
            strict &= if is_max {
                l_here > pts[i - 2].1
            } else {
                l_here < pts[i - 2].1
            };
        }
        if i + 2 < pts.len() {
            strict &= if is_max {
                l_here > pts[i + 2].1
            } else {
                l_here < pts[i + 2].1
            };
        }
        if !strict {
            scan.degenerate.push(pts[i]);
            continue;
        }
        let fold = match refine_fold(map, branch, i, fold_tol) {
            Ok(f) => f,
            Err(Error::InvalidBracket(_)) => {
                scan.degenerate.push(pts[i]);
                continue;
            }
            Err(e) => return Err(e),
        };
        // Sphere check at radii scaled by the local step, skipping radii
        // that poke past the traced range.
        let local_step = 0.5 * (pts[i + 1].0 - pts[i - 1].0);
        let alpha_lo = pts.first().unwrap().0;
        let alpha_hi = pts.last().unwrap().0;
        let mut clean = true;
        for mult in [2.0, 4.0, 8.0] {
            let r = mult * local_step;
            if fold.alpha - r < alpha_lo || fold.alpha + r > alpha_hi {
                continue;
            }
            if sphere_crossings(&pts, fold.alpha, fold.lambda, r) != 2 {
                clean = false;
                break;
            }
        }
        if !clean {
            scan.degenerate.push(pts[i]);
            continue;
        }
        scan.folds.push(fold);
    }
    // Distinct grid candidates can refine into the same extremum; keep the
    // first of any same-kind pair closer than the refinement scale.
    let mut folds: Vec<FoldPoint> = Vec::new();
    for f in scan.folds.drain(..) {
        let dup = folds.iter().any(|g| {
            g.kind == f.kind && (g.alpha - f.alpha).abs() < 100.0 * fold_tol.max(1e-12)
        });
        if !dup {
            folds.push(f);
        }
    }
    folds.sort_by(|a, b| a.alpha.total_cmp(&b.alpha));
    scan.folds = folds;
    Ok(scan)
}

/// Fold detection with the problem's natural map built on the fly.
pub fn detect_folds_in_problem(
    problem: &ProblemSpec,
    branch: &Branch,
    fold_tol: f64,
) -> Result<FoldScan> {
    let map = problem_map(problem)?;
    detect_folds(map.as_ref(), branch, fold_tol)
}

/// A point where at least three distinct local branch segments meet.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MultiplePoint {
    pub lambda: f64,
    pub alpha: f64,
    pub branch_count: usize,
    /// (branch index, representative point index) per contributing segment.
    pub segments: Vec<(usize, usize)>,
}

/// Multiple-point search output; clusters that lack stored profiles for
/// disambiguation are counted as ambiguous rather than reported.
#[derive(Debug, Clone, Default, Serialize)]
pub struct MultipleScan {
    pub points: Vec<MultiplePoint>,
    pub ambiguous: usize,
}

fn profile_distance(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    // Profiles share their radial grid by construction; compare values
    // at matched indices and fall back to infinity on mismatched shapes.
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    a.iter()
        .zip(b)
        .map(|(p, q)| (p.1 - q.1).abs())
        .fold(0.0, f64::max)
}

/// Cluster branch points coinciding within `tol` in both coordinates and
/// report clusters visited by three or more distinct local segments.
/// Pairwise crossings are ignored. When every contributing segment stores
/// a profile, segments whose profiles agree within `tol` are merged first;
/// clusters that cannot be disambiguated are flagged ambiguous.
pub fn detect_multiple_points(branches: &[&Branch], tol: f64) -> MultipleScan {
    let mut entries: Vec<(usize, usize, f64, f64)> = Vec::new();
    for (bi, b) in branches.iter().enumerate() {
        for (pi, p) in b.points.iter().enumerate() {
            entries.push((bi, pi, p.alpha, p.lambda));
        }
    }
    let mut order: Vec<usize> = (0..entries.len()).collect();
    order.sort_by(|&i, &j| entries[i].3.total_cmp(&entries[j].3));
    let mut consumed = vec![false; entries.len()];
    let mut scan = MultipleScan::default();

    for &seed in &order {
        if consumed[seed] {
            continue;
        }
        let (_, _, a0, l0) = entries[seed];
        let mut cluster: Vec<usize> = Vec::new();
        for &k in &order {
            if !consumed[k]
                && (entries[k].3 - l0).abs() <= tol
                && (entries[k].2 - a0).abs() <= tol
            {
                cluster.push(k);
            }
        }
        if cluster.len() < 3 {
            continue;
        }
        for &k in &cluster {
            consumed[k] = true;
        }
        // Split the cluster into local segments: runs of contiguous point
        // indices within one branch. An index gap means the branch left
        // the ball and came back, a distinct local passage.
        let mut members: Vec<(usize, usize)> = cluster
            .iter()
            .map(|&k| (entries[k].0, entries[k].1))
            .collect();
        members.sort_unstable();
        let mut segments: Vec<(usize, usize)> = Vec::new();
        let mut prev: Option<(usize, usize)> = None;
        for (bi, pi) in members {
            let new_run = match prev {
                Some((pb, pp)) => bi != pb || pi > pp + 1,
                None => true,
            };
            if new_run {
                segments.push((bi, pi));
            }
            prev = Some((bi, pi));
        }
        if segments.len() < 3 {
            continue;
        }
        // Profile disambiguation: merge segments whose stored profiles
        // coincide; without full profile coverage the cluster stays
        // ambiguous.
        let profiles: Vec<Option<&Vec<(f64, f64)>>> = segments
            .iter()
            .map(|&(bi, pi)| branches[bi].points[pi].profile.as_ref())
            .collect();
        if profiles.iter().any(|p| p.is_none()) {
            scan.ambiguous += 1;
            continue;
        }
        let mut distinct: Vec<usize> = Vec::new();
        for si in 0..segments.len() {
            let p = profiles[si].unwrap();
            let dup = distinct.iter().any(|&dj| {
                let q = profiles[dj].unwrap();
                profile_distance(p, q) <= tol
            });
            if !dup {
                distinct.push(si);
            }
        }
        if distinct.len() < 3 {
            continue;
        }
        let n = cluster.len() as f64;
        let mean_l = cluster.iter().map(|&k| entries[k].3).sum::<f64>() / n;
        let mean_a = cluster.iter().map(|&k| entries[k].2).sum::<f64>() / n;
        scan.points.push(MultiplePoint {
            lambda: mean_l,
            alpha: mean_a,
            branch_count: distinct.len(),
            segments: distinct.iter().map(|&si| segments[si]).collect(),
        });
    }
    scan.points.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
    scan
}

/// A first-kind discontinuity of the minimal branch: between adjacent
/// parameter samples the minimal amplitude rises by more than `jump_tol`,
/// upward by construction.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MinimalJump {
    pub lambda_tilde: f64,
    pub alpha_minus: f64,
    pub alpha_plus: f64,
    /// Number of consecutive grid cells the rise spans; more than two
    /// means the grid cannot distinguish a jump from a steep ramp.
    pub cells: usize,
    pub grid_too_coarse: bool,
}

/// Scan a minimal branch (sampled over a parameter grid, amplitude
/// nondecreasing) for jumps: maximal runs of consecutive cells whose
/// amplitude rise exceeds `jump_tol`.
pub fn detect_minimal_jumps(minimal: &Branch, jump_tol: f64) -> Vec<MinimalJump> {
    let pts = &minimal.points;
    let mut jumps = Vec::new();
    let mut run_start: Option<usize> = None;
    for i in 0..pts.len().saturating_sub(1) {
        let big = pts[i + 1].alpha - pts[i].alpha > jump_tol;
        match (big, run_start) {
            (true, None) => run_start = Some(i),
            (false, Some(s)) => {
                jumps.push(make_jump(pts, s, i));
                run_start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = run_start {
        jumps.push(make_jump(pts, s, pts.len() - 1));
    }
    jumps
}

fn make_jump(pts: &[crate::branch::BranchPoint], start: usize, end: usize) -> MinimalJump {
    let cells = end - start;
    MinimalJump {
        lambda_tilde: 0.5 * (pts[start].lambda + pts[end].lambda),
        alpha_minus: pts[start].alpha,
        alpha_plus: pts[end].alpha,
        cells,
        grid_too_coarse: cells > 2,
    }
}

/// Diagram regimes. Serialized labels follow the report interface:
/// "i" for finitely many folds above a minimal window, "ii" for damped
/// fold oscillation onto a limiting parameter, "iii" for a fold-free
/// monotone diagram.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DiagramCase {
    #[serde(rename = "i")]
    FiniteFolds,
    #[serde(rename = "ii")]
    DampedOscillation,
    #[serde(rename = "iii")]
    Monotone,
    #[serde(rename = "unclassified")]
    Unclassified,
}

/// Everything the detectors can say about one diagram.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiagramReport {
    pub folds: Vec<FoldPoint>,
    pub multiple_points: Vec<MultiplePoint>,
    pub continua_count: usize,
    pub minimal_jumps: Vec<MinimalJump>,
    pub case: DiagramCase,
    pub lambda_m: Option<f64>,
    pub lambda_sharp: Option<f64>,
}

fn kinds_alternate(folds: &[FoldPoint]) -> bool {
    folds.windows(2).all(|w| w[0].kind != w[1].kind)
}

/// Label the regime from the fold pattern and the branch tail.
///
/// Monotone ("iii") when no folds; damped oscillation ("ii") when three or
/// more alternating folds close onto the tail parameter; finitely many
/// folds ("i") when an even alternating fold set starts with a maximum and
/// the branch continues past the last fold. Everything else is honest
/// "unclassified".
pub fn classify_case(
    folds: &[FoldPoint],
    branch: &Branch,
) -> (DiagramCase, Option<f64>, Option<f64>) {
    if folds.is_empty() {
        return (DiagramCase::Monotone, None, None);
    }
    let lambda_m = folds
        .iter()
        .map(|f| f.lambda)
        .fold(f64::INFINITY, f64::min);
    let tail = match branch.points.last() {
        Some(p) => p.lambda,
        None => return (DiagramCase::Unclassified, Some(lambda_m), None),
    };
    if !kinds_alternate(folds) {
        return (DiagramCase::Unclassified, Some(lambda_m), None);
    }
    if folds.len() >= 3 {
        // Damped oscillation: fold deviations from the tail value shrink
        // (5 percent slack for refinement noise).
        let devs: Vec<f64> = folds.iter().map(|f| (f.lambda - tail).abs()).collect();
        let damped = devs.windows(2).all(|w| w[1] <= 1.05 * w[0]);
        let straddles = folds
            .windows(2)
            .all(|w| (w[0].lambda - tail) * (w[1].lambda - tail) < 0.0);
        if damped && straddles {
            return (
                DiagramCase::DampedOscillation,
                Some(lambda_m),
                Some(tail),
            );
        }
    }
    if folds.len() % 2 == 0 && folds[0].kind == FoldKind::Max && tail > lambda_m {
        return (DiagramCase::FiniteFolds, Some(lambda_m), None);
    }
    (DiagramCase::Unclassified, Some(lambda_m), None)
}

/// Build the full report for one traced diagram. A minimal branch, when
/// supplied, contributes jump detection; traces drawn as graphs over the
/// amplitude form a single continuum.
pub fn diagram_report(
    problem: &ProblemSpec,
    branch: &Branch,
    fold_tol: f64,
    minimal: Option<&Branch>,
) -> Result<DiagramReport> {
    let scan = detect_folds_in_problem(problem, branch, fold_tol)?;
    let multiple = detect_multiple_points(&[branch], defaults::MULTIPLE_POINT_TOL);
    let (case, lambda_m, lambda_sharp) = classify_case(&scan.folds, branch);
    let minimal_jumps = minimal
        .map(|m| detect_minimal_jumps(m, defaults::JUMP_TOL))
        .unwrap_or_default();
    Ok(DiagramReport {
        folds: scan.folds,
        multiple_points: multiple.points,
        continua_count: 1,
        minimal_jumps,
        case,
        lambda_m,
        lambda_sharp,
    })
}

/// Sufficient reasons two diagrams cannot be topologically equivalent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NonEquivalence {
    ContinuaCount,
    FoldCount,
    MultiplePointCount,
}

/// Comparator verdict. The criteria are sufficient only, so equal counts
/// yield Inconclusive, never a positive equivalence claim.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    NotEquivalent(NonEquivalence),
    Inconclusive,
}

impl Serialize for Verdict {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut m = s.serialize_map(Some(2))?;
        match self {
            Verdict::NotEquivalent(r) => {
                m.serialize_entry("verdict", "not_equivalent")?;
                m.serialize_entry("reason", r)?;
            }
            Verdict::Inconclusive => {
                m.serialize_entry("verdict", "inconclusive")?;
                m.serialize_entry("reason", &Option::<NonEquivalence>::None)?;
            }
        }
        m.end()
    }
}

/// Compare two diagram reports by the count criteria, in fixed order:
/// continua, folds, multiple points.
pub fn compare_diagrams(a: &DiagramReport, b: &DiagramReport) -> Verdict {
    if a.continua_count != b.continua_count {
        return Verdict::NotEquivalent(NonEquivalence::ContinuaCount);
    }
    if a.folds.len() != b.folds.len() {
        return Verdict::NotEquivalent(NonEquivalence::FoldCount);
    }
    if a.multiple_points.len() != b.multiple_points.len() {
        return Verdict::NotEquivalent(NonEquivalence::MultiplePointCount);
    }
    Verdict::Inconclusive
}

/// Knobs of the perturbation search.
#[derive(Debug, Clone)]
pub struct PipelineConfig {
    /// Overall perturbation budget: bump width and amplitude never exceed
    /// this, and the sup-norm change equals the amplitude.
    pub eps_amp: f64,
    /// Amplitude range for base and perturbed traces.
    pub alpha_max: f64,
    /// Spacing of candidate bump positions.
    pub m_step: f64,
    /// Local screening grid spacing; the manufactured dip in lambda spans
    /// a few times this scale.
    pub fine_step: f64,
    /// A screening dip must undercut this to count as a real decrease.
    pub noise_floor: f64,
    /// Interior nodes for the minimal-branch jump verification.
    pub grid_n: usize,
    /// Upper cap on candidate bump positions.
    pub m_cap: f64,
}

impl PipelineConfig {
    pub fn new(eps_amp: f64) -> Self {
        PipelineConfig {
            eps_amp,
            alpha_max: 12.0,
            m_step: 0.1,
            fine_step: 1e-4,
            noise_floor: 1e-9,
            grid_n: defaults::GRID_N_1D,
            m_cap: 8.0,
        }
    }
}

/// Outcome of a successful perturbation search.
#[derive(Debug, Clone, Serialize)]
pub struct PipelineResult {
    pub bump_m: f64,
    pub bump_width: f64,
    pub bump_amplitude: f64,
    #[serde(skip)]
    pub perturbed: Nonlinearity,
    pub before: DiagramReport,
    pub after: DiagramReport,
    pub verdict: Verdict,
    /// Folds of the perturbed diagram inside the perturbation window.
    pub new_folds: Vec<FoldPoint>,
    pub jump: MinimalJump,
    /// Candidates examined before the first verified hit.
    pub tried: usize,
}

struct Candidate {
    m: f64,
    width: f64,
    amplitude: f64,
}

/// Search for a monotone bump perturbation of the problem's nonlinearity
/// that provably changes the diagram: at least two new folds, a
/// fold-count non-equivalence verdict, and an upward minimal-branch jump.
///
/// The admissible bump-position window depends on the regime of the base
/// diagram: positions must stay below the minimal window for the
/// finite-fold and oscillatory regimes, and are unconstrained for
/// monotone diagrams. The search is deterministic: candidates are screened
/// in parallel for a genuine lambda decrease on a fine local grid, then
/// verified one by one in grid order; the first fully verified candidate
/// wins. Exhausting the grid is an honest error carrying the ranges tried.
pub fn instability_pipeline(
    problem: &ProblemSpec,
    cfg: &PipelineConfig,
) -> Result<PipelineResult> {
    problem.validate()?;
    if !(cfg.eps_amp > 0.0 && cfg.eps_amp.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "perturbation budget must be positive, got {}",
            cfg.eps_amp
        )));
    }
    let fold_tol = if problem.dimension == 1 {
        defaults::FOLD_TOL_1D
    } else {
        defaults::FOLD_TOL_RADIAL
    };

    // Base diagram and regime window.
    let trace_cfg = TraceConfig::new(cfg.alpha_max);
    let base_branch = trace_branch(problem, &trace_cfg)?;
    let before = diagram_report(problem, &base_branch, fold_tol, None)?;
    let (m_lo, m_hi) = match before.case {
        DiagramCase::Monotone => (
            0.5,
            cfg.m_cap.min(cfg.alpha_max - 2.0 * cfg.eps_amp - 2.0),
        ),
        DiagramCase::FiniteFolds => {
            let lambda_m = before.lambda_m.expect("folds present");
            let alpha_low = base_branch.alpha_at_lambda_lower(lambda_m).ok_or_else(|| {
                Error::InvalidParameter(
                    "minimal window boundary not crossed by the trace".into(),
                )
            })?;
            (cfg.m_step, alpha_low - cfg.eps_amp)
        }
        DiagramCase::DampedOscillation => {
            let lambda_sharp = before.lambda_sharp.expect("oscillation tail present");
            let alpha_cross = base_branch
                .alpha_at_lambda_lower(lambda_sharp)
                .ok_or_else(|| {
                    Error::InvalidParameter(
                        "limit parameter not crossed by the trace".into(),
                    )
                })?;
            (cfg.m_step, alpha_cross - cfg.eps_amp)
        }
        DiagramCase::Unclassified => {
            return Err(Error::InvalidParameter(
                "base diagram is unclassified; no admissible bump window".into(),
            ))
        }
    };

    // Candidate grid in deterministic lexicographic order: wide bumps
    // first, positions ascending. Amplitudes take the full budget capped
    // just under the monotonicity bound.
    let mut candidates: Vec<Candidate> = Vec::new();
    for width in [cfg.eps_amp, 0.5 * cfg.eps_amp] {
        let mut m = m_lo;
        while m <= m_hi + 1e-12 {
            let cap = monotone_amplitude_cap(&problem.nonlinearity, m, width);
            let amplitude = cfg.eps_amp.min(0.98 * cap);
            if amplitude >= 1e-3 {
                candidates.push(Candidate {
                    m,
                    width,
                    amplitude,
                });
            }
            m += cfg.m_step;
        }
    }
    if candidates.is_empty() {
        return Err(Error::SearchExhausted {
            tried: 0,
            detail: format!(
                "no admissible bump positions in [{m_lo:.6}, {m_hi:.6}] \
                 with budget {}",
                cfg.eps_amp
            ),
        });
    }

    // Parallel screening: a candidate survives when the perturbed map
    // shows a genuine lambda decrease on the fine grid just past its bump.
    let screen: Vec<Result<bool>> = candidates
        .par_iter()
        .map(|c| {
            let ghat = build_perturbation(
                &problem.nonlinearity,
                c.m,
                c.width,
                c.amplitude,
                true,
            )?;
            let pp = ProblemSpec {
                dimension: problem.dimension,
                domain: problem.domain,
                nonlinearity: ghat,
            };
            let map = problem_map(&pp)?;
            let lo = c.m;
            let hi = (c.m + c.width + 1.0).min(cfg.alpha_max);
            let count = ((hi - lo) / cfg.fine_step).ceil() as usize;
            let mut prev = f64::NEG_INFINITY;
            let mut dip = false;
            for i in 0..=count {
                let a = lo + (hi - lo) * i as f64 / count as f64;
                let l = map.lambda(a)?;
                if l - prev < -cfg.noise_floor {
                    dip = true;
                    break;
                }
                prev = l;
            }
            Ok(dip)
        })
        .collect();

    let mut tried = 0;
    for (c, hit) in candidates.iter().zip(screen) {
        tried += 1;
        if !hit? {
            continue;
        }
        if let Some(result) = verify_candidate(
            problem,
            cfg,
            fold_tol,
            &before,
            c,
            tried,
        )? {
            return Ok(result);
        }
    }
    Err(Error::SearchExhausted {
        tried,
        detail: format!(
            "no verified bump in positions [{m_lo:.6}, {m_hi:.6}] step {}, \
             widths {{{}, {}}}, amplitude budget {}",
            cfg.m_step,
            cfg.eps_amp,
            0.5 * cfg.eps_amp,
            cfg.eps_amp
        ),
    })
}

/// Full verification of one screened candidate: focused trace, new folds
/// with a healthy gap, fold-count verdict, regime-specific location
/// constraint, and a minimal-branch jump near the new fold maximum.
fn verify_candidate(
    problem: &ProblemSpec,
    cfg: &PipelineConfig,
    fold_tol: f64,
    before: &DiagramReport,
    c: &Candidate,
    tried: usize,
) -> Result<Option<PipelineResult>> {
    let ghat = build_perturbation(&problem.nonlinearity, c.m, c.width, c.amplitude, true)?;
    let pp = ProblemSpec {
        dimension: problem.dimension,
        domain: problem.domain,
        nonlinearity: ghat,
    };
    let window_lo = (c.m - 0.5).max(cfg.fine_step);
    let window_hi = (c.m + c.width + 1.5).min(cfg.alpha_max);
    let tc = TraceConfig::new(cfg.alpha_max).with_focus(window_lo, window_hi, cfg.fine_step);
    let after_branch = trace_branch(&pp, &tc)?;
    let after = diagram_report(&pp, &after_branch, fold_tol, None)?;

    let new_folds: Vec<FoldPoint> = after
        .folds
        .iter()
        .filter(|f| f.alpha >= window_lo && f.alpha <= window_hi)
        .filter(|f| {
            !before
                .folds
                .iter()
                .any(|g| (g.alpha - f.alpha).abs() <= 1e-3 * (1.0 + f.alpha))
        })
        .cloned()
        .collect();
    if new_folds.len() < 2 {
        return Ok(None);
    }
    let lmax = new_folds
        .iter()
        .map(|f| f.lambda)
        .fold(f64::NEG_INFINITY, f64::max);
    let lmin = new_folds
        .iter()
        .map(|f| f.lambda)
        .fold(f64::INFINITY, f64::min);
    if lmax - lmin <= defaults::FOLD_GAP_FACTOR * fold_tol {
        return Ok(None);
    }
    // In the finite-fold regime new folds must sit strictly below the
    // base minimal window boundary.
    if before.case == DiagramCase::FiniteFolds {
        let lambda_m = before.lambda_m.expect("folds present");
        if new_folds.iter().any(|f| f.lambda >= lambda_m) {
            return Ok(None);
        }
    }
    let verdict = compare_diagrams(before, &after);
    if verdict != Verdict::NotEquivalent(NonEquivalence::FoldCount) {
        return Ok(None);
    }

    // Jump verification: the minimal branch must jump upward as the
    // parameter crosses the new fold maximum.
    let lambda_tilde = new_folds
        .iter()
        .filter(|f| f.kind == FoldKind::Max)
        .map(|f| f.lambda)
        .fold(f64::NEG_INFINITY, f64::max);
    if !lambda_tilde.is_finite() {
        return Ok(None);
    }
    let mc = MinimalConfig::range(0.9 * lambda_tilde, 1.1 * lambda_tilde, 81, cfg.grid_n);
    let minimal = minimal_branch(&pp, &mc)?;
    let jumps = detect_minimal_jumps(&minimal, defaults::JUMP_TOL);
    let jump = jumps
        .into_iter()
        .filter(|j| j.alpha_plus > j.alpha_minus)
        .min_by(|a, b| {
            (a.lambda_tilde - lambda_tilde)
                .abs()
                .total_cmp(&(b.lambda_tilde - lambda_tilde).abs())
        });
    let Some(jump) = jump else {
        return Ok(None);
    };

    let mut after = after;
    after.minimal_jumps = vec![jump.clone()];
    Ok(Some(PipelineResult {
        bump_m: c.m,
        bump_width: c.width,
        bump_amplitude: c.amplitude,
        perturbed: pp.nonlinearity,
        before: before.clone(),
        after,
        verdict,
        new_folds,
        jump,
        tried,
    }))
}
