//! One function per subcommand, sharing a context of parsed config,
//! output formats, and seed.

use crate::config::RunConfig;
use crate::emit;
use foldmap::branch::TerminationReason;
use foldmap::continuation::{
    critical_eps_search, trace_branch, EpsSearchConfig, TraceConfig,
};
use foldmap::degree::{
    brouwer_degree, homotopy_sweep, BoxRegion, DegreeConfig, EllipticFdMap,
};
use foldmap::solvers::minimal::{minimal_branch, MinimalConfig};
use foldmap::solvers::parabolic::{evolve as run_evolve, EvolveConfig, EvolveOutcome};
use foldmap::solvers::poisson::{poisson_fd, PoissonProfile};
use foldmap::topology::{
    compare_diagrams, detect_minimal_jumps, diagram_report, DiagramReport, FoldPoint,
    MinimalJump, PipelineConfig,
};
use foldmap::{defaults, Branch, Error as CoreError, ProblemSpec};
use serde::Serialize;
use std::path::{Path, PathBuf};

/// A command failure with its exit-code class.
#[derive(Debug)]
pub enum Failure {
    /// Unusable configuration or arguments (exit 2).
    Config(String),
    /// The command ran correctly and established a negative outcome,
    /// e.g. a search exhausted its grid (exit 1).
    Honest(String),
    /// A solver or I/O breakdown (exit 3).
    Solver(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Honest(_) => 1,
            Failure::Config(_) => 2,
            Failure::Solver(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Honest(m) | Failure::Solver(m) => m,
        }
    }
}

/// Map core errors onto exit-code classes: exhausted searches and lost
/// brackets are honest negatives, parameter problems are configuration
/// errors, everything else is a solver failure.
fn from_core(e: CoreError) -> Failure {
    match e {
        CoreError::SearchExhausted { .. } | CoreError::InvalidBracket(_) => {
            Failure::Honest(e.to_string())
        }
        CoreError::InvalidParameter(_)
        | CoreError::UnsupportedDimension(_)
        | CoreError::InfeasibleAmplitude { .. } => Failure::Config(e.to_string()),
        other => Failure::Solver(other.to_string()),
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Formats {
    pub csv: bool,
    pub json: bool,
    pub svg: bool,
}

impl Formats {
    pub fn parse(s: &str) -> Result<Formats, Failure> {
        let mut f = Formats {
            csv: false,
            json: false,
            svg: false,
        };
        for tok in s.split(',') {
            match tok.trim() {
                "csv" => f.csv = true,
                "json" => f.json = true,
                "svg" => f.svg = true,
                other => {
                    return Err(Failure::Config(format!(
                        "unknown format `{other}` (expected csv, json, svg)"
                    )))
                }
            }
        }
        Ok(f)
    }
}

/// Everything a subcommand needs.
pub struct Ctx {
    pub cfg: RunConfig,
    pub out: PathBuf,
    pub formats: Formats,
    pub seed: u64,
}

impl Ctx {
    fn emit_json<T: Serialize>(&self, name: &str, value: &T) -> Result<(), Failure> {
        if self.formats.json {
            let text = emit::to_canonical_json(value)?;
            emit::write_atomic(&self.out, name, &text)?;
        }
        Ok(())
    }

    fn emit_csv(&self, name: &str, content: &str) -> Result<(), Failure> {
        if self.formats.csv {
            emit::write_atomic(&self.out, name, content)?;
        }
        Ok(())
    }

    fn emit_svg(&self, name: &str, diagram: &emit::SvgDiagram) -> Result<(), Failure> {
        if self.formats.svg {
            emit::write_atomic(&self.out, name, &emit::diagram_svg(diagram))?;
        }
        Ok(())
    }
}

fn trace_config(cfg: &RunConfig) -> Result<TraceConfig, Failure> {
    let block = cfg
        .trace
        .as_ref()
        .ok_or_else(|| Failure::Config("this command needs a `trace` block".into()))?;
    let mut tc = TraceConfig::new(block.alpha_max);
    if let Some(n) = block.initial_steps {
        tc.initial_steps = n;
    }
    if let Some(r) = block.refine_rounds {
        tc.refine_rounds = r;
    }
    for w in &block.focus {
        tc = tc.with_focus(w.lo, w.hi, w.max_step);
    }
    Ok(tc)
}

fn branch_xy(branch: &Branch) -> Vec<(f64, f64)> {
    branch.points.iter().map(|p| (p.lambda, p.alpha)).collect()
}

fn fold_xy(folds: &[FoldPoint]) -> Vec<(f64, f64)> {
    folds.iter().map(|f| (f.lambda, f.alpha)).collect()
}

fn jump_xyz(jumps: &[MinimalJump]) -> Vec<(f64, f64, f64)> {
    jumps
        .iter()
        .map(|j| (j.lambda_tilde, j.alpha_minus, j.alpha_plus))
        .collect()
}

pub fn diagram(ctx: &Ctx) -> Result<(), Failure> {
    let problem = ctx.cfg.problem()?;
    let tc = trace_config(&ctx.cfg)?;
    let branch = trace_branch(problem, &tc).map_err(from_core)?;
    let fold_tol = ctx.cfg.fold_tol_for(problem.dimension);
    let report = diagram_report(problem, &branch, fold_tol, None).map_err(from_core)?;

    let marks = emit::fold_marks(&branch, &report.folds);
    ctx.emit_csv("diagram.csv", &emit::branch_csv(&branch, &marks))?;
    ctx.emit_json("diagram.json", &report)?;
    ctx.emit_svg(
        "diagram.svg",
        &emit::SvgDiagram {
            points: &branch_xy(&branch),
            folds: &fold_xy(&report.folds),
            jumps: &[],
        },
    )?;
    println!(
        "diagram: {} points, {} folds, case {:?}",
        branch.points.len(),
        report.folds.len(),
        report.case
    );
    Ok(())
}

#[derive(Serialize)]
struct MinimalReport<'a> {
    jumps: &'a [MinimalJump],
    termination: TerminationReason,
    divergence_onset: Option<f64>,
    points: usize,
}

pub fn minimal(ctx: &Ctx) -> Result<(), Failure> {
    let problem = ctx.cfg.problem()?;
    let block = ctx
        .cfg
        .minimal
        .as_ref()
        .ok_or_else(|| Failure::Config("the minimal command needs a `minimal` block".into()))?;
    let grid_n = block.grid_n.unwrap_or(if problem.dimension == 1 {
        defaults::GRID_N_1D
    } else {
        defaults::GRID_N_RADIAL
    });
    let mc = MinimalConfig::range(block.lambda_lo, block.lambda_hi, block.count, grid_n);
    let branch = minimal_branch(problem, &mc).map_err(from_core)?;
    let jumps = detect_minimal_jumps(&branch, defaults::JUMP_TOL);

    ctx.emit_csv("minimal.csv", &emit::branch_csv(&branch, &[]))?;
    ctx.emit_json(
        "minimal.json",
        &MinimalReport {
            jumps: &jumps,
            termination: branch.termination,
            divergence_onset: branch.divergence_onset,
            points: branch.points.len(),
        },
    )?;
    ctx.emit_svg(
        "minimal.svg",
        &emit::SvgDiagram {
            points: &branch_xy(&branch),
            folds: &[],
            jumps: &jump_xyz(&jumps),
        },
    )?;
    println!(
        "minimal: {} points, {} jumps, termination {:?}",
        branch.points.len(),
        jumps.len(),
        branch.termination
    );
    Ok(())
}

pub fn perturb(ctx: &Ctx) -> Result<(), Failure> {
    let problem = ctx.cfg.problem()?;
    let block = ctx
        .cfg
        .perturb
        .as_ref()
        .ok_or_else(|| Failure::Config("the perturb command needs a `perturb` block".into()))?;
    let mut pc = PipelineConfig::new(block.eps_amp);
    if let Some(v) = block.alpha_max {
        pc.alpha_max = v;
    }
    if let Some(v) = block.m_step {
        pc.m_step = v;
    }
    if let Some(v) = block.fine_step {
        pc.fine_step = v;
    }
    if let Some(v) = block.m_cap {
        pc.m_cap = v;
    }
    if let Some(v) = block.grid_n {
        pc.grid_n = v;
    }
    let result = foldmap::topology::instability_pipeline(problem, &pc).map_err(from_core)?;

    // Re-trace the perturbed problem for the branch artifacts.
    let perturbed_problem = ProblemSpec {
        dimension: problem.dimension,
        domain: problem.domain,
        nonlinearity: result.perturbed.clone(),
    };
    let window_lo = (result.bump_m - 0.5).max(pc.fine_step);
    let window_hi = (result.bump_m + result.bump_width + 1.5).min(pc.alpha_max);
    let tc = TraceConfig::new(pc.alpha_max).with_focus(window_lo, window_hi, 10.0 * pc.fine_step);
    let branch = trace_branch(&perturbed_problem, &tc).map_err(from_core)?;

    let marks = emit::fold_marks(&branch, &result.after.folds);
    ctx.emit_csv("perturb.csv", &emit::branch_csv(&branch, &marks))?;
    ctx.emit_json("perturb.json", &result)?;
    ctx.emit_svg(
        "perturb.svg",
        &emit::SvgDiagram {
            points: &branch_xy(&branch),
            folds: &fold_xy(&result.after.folds),
            jumps: &jump_xyz(&result.after.minimal_jumps),
        },
    )?;
    println!(
        "perturb: bump at m = {:.6}, width {:.6}, amplitude {:.6}; {} new folds after {} candidates",
        result.bump_m,
        result.bump_width,
        result.bump_amplitude,
        result.new_folds.len(),
        result.tried
    );
    Ok(())
}

#[derive(Serialize)]
struct ClassifyReport<'a> {
    case: foldmap::topology::DiagramCase,
    lambda_m: Option<f64>,
    lambda_sharp: Option<f64>,
    folds: &'a [FoldPoint],
}

pub fn classify(ctx: &Ctx) -> Result<(), Failure> {
    let problem = ctx.cfg.problem()?;
    let tc = trace_config(&ctx.cfg)?;
    let branch = trace_branch(problem, &tc).map_err(from_core)?;
    let fold_tol = ctx.cfg.fold_tol_for(problem.dimension);
    let report = diagram_report(problem, &branch, fold_tol, None).map_err(from_core)?;

    let marks = emit::fold_marks(&branch, &report.folds);
    ctx.emit_csv("classify.csv", &emit::branch_csv(&branch, &marks))?;
    ctx.emit_json(
        "classify.json",
        &ClassifyReport {
            case: report.case,
            lambda_m: report.lambda_m,
            lambda_sharp: report.lambda_sharp,
            folds: &report.folds,
        },
    )?;
    ctx.emit_svg(
        "classify.svg",
        &emit::SvgDiagram {
            points: &branch_xy(&branch),
            folds: &fold_xy(&report.folds),
            jumps: &[],
        },
    )?;
    println!("classify: case {:?}", report.case);
    Ok(())
}

pub fn compare(a: &Path, b: &Path, out: &Path) -> Result<(), Failure> {
    let read = |p: &Path| -> Result<DiagramReport, Failure> {
        let text = std::fs::read_to_string(p)
            .map_err(|e| Failure::Config(format!("cannot read {}: {e}", p.display())))?;
        let mut de = serde_json::Deserializer::from_str(&text);
        serde_path_to_error::deserialize(&mut de).map_err(|e| {
            Failure::Config(format!(
                "{} is not a diagram report (at `{}`): {}",
                p.display(),
                e.path(),
                e.inner()
            ))
        })
    };
    let ra = read(a)?;
    let rb = read(b)?;
    let verdict = compare_diagrams(&ra, &rb);
    let text = emit::to_canonical_json(&verdict)?;
    emit::write_atomic(out, "compare.json", &text)?;
    println!("compare: {verdict:?}");
    Ok(())
}

#[derive(Serialize)]
struct PoissonReport {
    #[serde(rename = "K")]
    k: f64,
    dimension: usize,
    radius: f64,
    rho: f64,
    grid_n: usize,
    fd_sup_diff: f64,
}

pub fn poisson(ctx: &Ctx) -> Result<(), Failure> {
    let block = ctx
        .cfg
        .poisson
        .as_ref()
        .ok_or_else(|| Failure::Config("the poisson command needs a `poisson` block".into()))?;
    let profile = PoissonProfile::new(block.dimension, block.radius, block.rho)
        .map_err(from_core)?;
    let grid_n = block.grid_n.unwrap_or(defaults::GRID_N_RADIAL);
    let (nodes, fd) = poisson_fd(block.dimension, block.radius, block.rho, grid_n)
        .map_err(from_core)?;
    let mut rows = Vec::with_capacity(nodes.len());
    let mut sup_diff = 0.0_f64;
    for (i, (&r, &v)) in nodes.iter().zip(&fd).enumerate() {
        let closed = profile.eval(r);
        sup_diff = sup_diff.max((closed - v).abs());
        rows.push(vec![i as f64, r, closed, v]);
    }

    ctx.emit_csv("poisson.csv", &emit::numeric_csv("index,r,closed_form,fd", &rows))?;
    ctx.emit_json(
        "poisson.json",
        &PoissonReport {
            k: profile.k_value,
            dimension: block.dimension,
            radius: block.radius,
            rho: block.rho,
            grid_n,
            fd_sup_diff: sup_diff,
        },
    )?;
    println!(
        "poisson: K = {:.12}, fd sup diff {:.3e}",
        profile.k_value, sup_diff
    );
    Ok(())
}

pub fn degree(ctx: &Ctx) -> Result<(), Failure> {
    let problem = ctx.cfg.problem()?;
    let block = ctx
        .cfg
        .degree
        .as_ref()
        .ok_or_else(|| Failure::Config("the degree command needs a `degree` block".into()))?;
    let map = EllipticFdMap::new(problem, block.n).map_err(from_core)?;
    let lo = block.box_lo.expand(block.n, "box_lo")?;
    let hi = block.box_hi.expand(block.n, "box_hi")?;
    let region = BoxRegion::new(lo, hi)
        .map_err(|e| Failure::Config(format!("invalid degree box: {e}")))?;
    let mut dcfg = DegreeConfig {
        seed: ctx.seed,
        ..DegreeConfig::default()
    };
    if let Some(s) = block.starts {
        dcfg.starts = s;
    }

    if let Some(sweep_lambdas) = &block.sweep {
        let sweep = homotopy_sweep(&map, sweep_lambdas, &region, &dcfg).map_err(from_core)?;
        let rows: Vec<Vec<f64>> = sweep
            .results
            .iter()
            .enumerate()
            .map(|(i, (l, r))| vec![i as f64, *l, r.degree as f64])
            .collect();
        ctx.emit_csv("degree.csv", &emit::numeric_csv("index,lambda,degree", &rows))?;
        ctx.emit_json("degree.json", &sweep)?;
        println!(
            "degree sweep: {} values, constant = {}, crossing = {:?}",
            sweep.results.len(),
            sweep.constant,
            sweep.crossing
        );
        return Ok(());
    }

    let lambda = block.lambda.ok_or_else(|| {
        Failure::Config("the degree block needs `lambda` or `sweep`".into())
    })?;
    let result = brouwer_degree(&map, lambda, &region, &dcfg).map_err(from_core)?;
    // Zero table: index, sign, then one column per coordinate.
    let mut csv = String::from("index,sign");
    for k in 0..block.n {
        csv.push_str(&format!(",z{k}"));
    }
    csv.push('\n');
    for (i, (z, s)) in result.zeros.iter().zip(&result.jacobian_signs).enumerate() {
        csv.push_str(&format!("{i},{s}"));
        for v in z {
            csv.push(',');
            csv.push_str(&emit::float_repr(*v));
        }
        csv.push('\n');
    }
    ctx.emit_csv("degree.csv", &csv)?;
    ctx.emit_json("degree.json", &result)?;
    println!(
        "degree: {} with {} zeros",
        result.degree,
        result.zeros.len()
    );
    Ok(())
}

#[derive(Serialize)]
struct EvolveReport {
    outcome: &'static str,
    /// Time of convergence or blow-up, absent on timeout.
    time: Option<f64>,
    sup_final: f64,
    steps: usize,
    lambda: f64,
}

pub fn evolve(ctx: &Ctx) -> Result<(), Failure> {
    let problem = ctx.cfg.problem()?;
    let block = ctx
        .cfg
        .evolve
        .as_ref()
        .ok_or_else(|| Failure::Config("the evolve command needs an `evolve` block".into()))?;
    let grid_n = block.grid_n.unwrap_or(if problem.dimension == 1 {
        defaults::GRID_N_1D
    } else {
        defaults::GRID_N_RADIAL
    });
    let ec = EvolveConfig::new(
        block.lambda,
        block.dt.unwrap_or(1e-3),
        block.t_max.unwrap_or(50.0),
        grid_n,
    );
    if let Some(init) = &block.initial {
        if init.len() != grid_n {
            return Err(Failure::Config(format!(
                "evolve.initial has {} entries but the grid has {grid_n}",
                init.len()
            )));
        }
    }
    let ev = run_evolve(problem, block.initial.as_deref(), &ec).map_err(from_core)?;
    let (outcome, time) = match ev.outcome {
        EvolveOutcome::Converged { time } => ("converged", Some(time)),
        EvolveOutcome::Blowup { time } => ("blow_up", Some(time)),
        EvolveOutcome::TimedOut => ("timed_out", None),
    };
    let sup_final = ev.final_state.iter().fold(0.0_f64, |m, &v| m.max(v.abs()));

    let rows: Vec<Vec<f64>> = ev
        .nodes
        .iter()
        .zip(&ev.final_state)
        .enumerate()
        .map(|(i, (&x, &u))| vec![i as f64, x, u])
        .collect();
    ctx.emit_csv("evolve.csv", &emit::numeric_csv("index,x,u", &rows))?;
    ctx.emit_json(
        "evolve.json",
        &EvolveReport {
            outcome,
            time,
            sup_final,
            steps: ev.steps_taken,
            lambda: block.lambda,
        },
    )?;
    println!(
        "evolve: {outcome} after {} steps, final sup {:.6}",
        ev.steps_taken, sup_final
    );
    Ok(())
}

pub fn critical_eps(ctx: &Ctx) -> Result<(), Failure> {
    let problem = ctx.cfg.problem()?;
    let block = ctx.cfg.critical_eps.as_ref().ok_or_else(|| {
        Failure::Config("the critical-eps command needs a `critical_eps` block".into())
    })?;
    let mut ec = EpsSearchConfig::new((block.bracket_lo, block.bracket_hi), problem.dimension);
    if let Some(v) = block.eps_tol {
        ec.eps_tol = v;
    }
    if let Some(v) = block.alpha_max {
        ec.alpha_max = v;
    }
    if let Some(v) = block.initial_steps {
        ec.initial_steps = v;
    }
    let result = critical_eps_search(problem, &ec).map_err(from_core)?;

    ctx.emit_csv(
        "critical_eps.csv",
        &emit::numeric_csv(
            "eps_lo,eps_hi,width",
            &[vec![result.lo, result.hi, result.hi - result.lo]],
        ),
    )?;
    ctx.emit_json("critical_eps.json", &result)?;
    println!(
        "critical-eps: [{:.6}, {:.6}] after {} bisections",
        result.lo, result.hi, result.bisections
    );
    Ok(())
}
