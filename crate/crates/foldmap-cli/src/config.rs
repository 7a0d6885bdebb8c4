//! Strict JSON run configuration.
//!
//! One document configures every subcommand; each command reads only the
//! blocks it needs. Unknown keys are rejected with the offending JSON
//! path so typos surface instead of silently falling back to defaults.

use crate::commands::Failure;
use foldmap::ProblemSpec;
use serde::Deserialize;
use std::path::Path;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Problem instance: dimension, domain, nonlinearity.
    #[serde(default)]
    pub problem: Option<ProblemSpec>,
    /// Fold refinement tolerance override (defaults by dimension).
    #[serde(default)]
    pub fold_tol: Option<f64>,
    #[serde(default)]
    pub trace: Option<TraceBlock>,
    #[serde(default)]
    pub minimal: Option<MinimalBlock>,
    #[serde(default)]
    pub perturb: Option<PerturbBlock>,
    #[serde(default)]
    pub critical_eps: Option<EpsBlock>,
    #[serde(default)]
    pub degree: Option<DegreeBlock>,
    #[serde(default)]
    pub poisson: Option<PoissonBlock>,
    #[serde(default)]
    pub evolve: Option<EvolveBlock>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceBlock {
    /// Upper end of the traced sup-norm range.
    pub alpha_max: f64,
    #[serde(default)]
    pub initial_steps: Option<usize>,
    #[serde(default)]
    pub refine_rounds: Option<usize>,
    /// Extra windows sampled at a finer step.
    #[serde(default)]
    pub focus: Vec<FocusBlock>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FocusBlock {
    pub lo: f64,
    pub hi: f64,
    pub max_step: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MinimalBlock {
    pub lambda_lo: f64,
    pub lambda_hi: f64,
    pub count: usize,
    #[serde(default)]
    pub grid_n: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbBlock {
    /// Perturbation budget: bump width and sup-norm never exceed this.
    pub eps_amp: f64,
    #[serde(default)]
    pub alpha_max: Option<f64>,
    #[serde(default)]
    pub m_step: Option<f64>,
    #[serde(default)]
    pub fine_step: Option<f64>,
    #[serde(default)]
    pub m_cap: Option<f64>,
    #[serde(default)]
    pub grid_n: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpsBlock {
    pub bracket_lo: f64,
    pub bracket_hi: f64,
    #[serde(default)]
    pub eps_tol: Option<f64>,
    #[serde(default)]
    pub alpha_max: Option<f64>,
    #[serde(default)]
    pub initial_steps: Option<usize>,
}

/// A box bound: one number replicated across coordinates, or the full
/// per-coordinate vector.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum BoxBound {
    Scalar(f64),
    Vector(Vec<f64>),
}

impl BoxBound {
    pub fn expand(&self, n: usize, which: &str) -> Result<Vec<f64>, Failure> {
        match self {
            BoxBound::Scalar(v) => Ok(vec![*v; n]),
            BoxBound::Vector(v) if v.len() == n => Ok(v.clone()),
            BoxBound::Vector(v) => Err(Failure::Config(format!(
                "degree.{which} has {} entries but n = {n}",
                v.len()
            ))),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DegreeBlock {
    /// Number of interior grid points (the box dimension).
    pub n: usize,
    /// Parameter for a single degree computation.
    #[serde(default)]
    pub lambda: Option<f64>,
    /// Parameter list for a homotopy sweep (overrides `lambda`).
    #[serde(default)]
    pub sweep: Option<Vec<f64>>,
    pub box_lo: BoxBound,
    pub box_hi: BoxBound,
    #[serde(default)]
    pub starts: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoissonBlock {
    pub dimension: usize,
    pub radius: f64,
    pub rho: f64,
    #[serde(default)]
    pub grid_n: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveBlock {
    pub lambda: f64,
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default)]
    pub t_max: Option<f64>,
    #[serde(default)]
    pub grid_n: Option<usize>,
    /// Initial data on the interior grid; zeros when omitted.
    #[serde(default)]
    pub initial: Option<Vec<f64>>,
}

pub fn load(path: &Path) -> Result<RunConfig, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut de = serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path_str = e.path().to_string();
        let loc = if path_str == "." {
            "config".to_string()
        } else {
            format!("config key `{path_str}`")
        };
        Failure::Config(format!("{loc}: {}", e.inner()))
    })
}

impl RunConfig {
    /// The problem block, validated; missing or inconsistent is a
    /// configuration error.
    pub fn problem(&self) -> Result<&ProblemSpec, Failure> {
        let p = self
            .problem
            .as_ref()
            .ok_or_else(|| Failure::Config("config needs a `problem` block".into()))?;
        p.validate()
            .map_err(|e| Failure::Config(format!("invalid problem: {e}")))?;
        Ok(p)
    }

    pub fn fold_tol_for(&self, dimension: usize) -> f64 {
        self.fold_tol.unwrap_or(if dimension == 1 {
            foldmap::defaults::FOLD_TOL_1D
        } else {
            foldmap::defaults::FOLD_TOL_RADIAL
        })
    }
}
