//! Gauss-Legendre quadrature: fixed panels and a globally adaptive driver.
//!
//! Nodes and weights are computed once per order by Newton iteration on the
//! Legendre recurrence and cached; this keeps the module free of long
//! coefficient tables while staying bit-reproducible.

use crate::error::{Error, Result};
use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

/// Nodes and weights on the reference interval [-1, 1].
#[derive(Clone)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

fn rule_cache() -> &'static Mutex<HashMap<usize, GaussRule>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, GaussRule>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Legendre polynomial value and derivative at `x` by the three-term
/// recurrence.
fn legendre_pair(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    // Derivative from the standard identity, safe away from |x| = 1; the
    // Newton iterates below stay strictly inside (-1, 1).
    let dp = (n as f64) * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Gauss-Legendre rule of order `n` (exact for polynomials of degree
/// 2n - 1), computed on first use and cached.
pub fn gauss_rule(n: usize) -> GaussRule {
    assert!(n >= 2, "gauss_rule needs order >= 2");
    if let Some(r) = rule_cache().lock().unwrap().get(&n) {
        return r.clone();
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for k in 0..n {
        // Chebyshev-based initial guess, then Newton.
        let mut x = (std::f64::consts::PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_pair(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_pair(n, x);
        nodes[k] = x;
        weights[k] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    nodes.reverse();
    weights.reverse();
    let rule = GaussRule { nodes, weights };
    rule_cache().lock().unwrap().insert(n, rule.clone());
    rule
}

/// Integral of `f` over [a, b] with a single fixed panel of order `n`.
pub fn fixed<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let rule = gauss_rule(n);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut acc = 0.0;
    for (x, w) in rule.nodes.iter().zip(&rule.weights) {
        acc += w * f(mid + half * x);
    }
    half * acc
}

/// Integral over [a, b] split into equal panels of width at most
/// `max_panel`, each integrated with a fixed rule of order `n`.
pub fn composite<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, max_panel: f64, n: usize) -> f64 {
    if a == b {
        return 0.0;
    }
    let len = (b - a).abs();
    let panels = (len / max_panel).ceil().max(1.0) as usize;
    let h = (b - a) / panels as f64;
    let mut acc = 0.0;
    for i in 0..panels {
        acc += fixed(&f, a + i as f64 * h, a + (i + 1) as f64 * h, n);
    }
    acc
}

const ADAPTIVE_ORDER: usize = 15;
const MAX_DEPTH: usize = 48;

/// Globally adaptive Gauss-Legendre integration to a relative tolerance.
///
/// Each subinterval is accepted when one panel and its two halves agree to
/// the locally allotted share of the error budget; the halves (the better
/// estimate) are kept. Smooth integrands converge in a handful of levels;
/// failure to converge within the depth limit is reported, never papered
/// over.
pub fn adaptive<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let coarse = fixed(&f, a, b, ADAPTIVE_ORDER);
    // Error budget: relative to the coarse magnitude, with a tiny absolute
    // floor so an exactly-zero integral still terminates.
    let budget = rel_tol * coarse.abs().max(1e-300) + f64::MIN_POSITIVE;
    let mut acc = 0.0_f64;
    let mut worst = 0.0_f64;
    let mut ok = true;
    adaptive_recurse(
        &f, a, b, coarse, budget, 0, &mut acc, &mut worst, &mut ok,
    );
    if ok {
        Ok(acc)
    } else {
        Err(Error::QuadratureFailure {
            tol: budget,
            achieved: worst,
        })
    }
}

#[allow(clippy::too_many_arguments)]
fn adaptive_recurse<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    whole: f64,
    budget: f64,
    depth: usize,
    acc: &mut f64,
    worst: &mut f64,
    ok: &mut bool,
) {
    let mid = 0.5 * (a + b);
    let left = fixed(f, a, mid, ADAPTIVE_ORDER);
    let right = fixed(f, mid, b, ADAPTIVE_ORDER);
    let err = (left + right - whole).abs();
    if err <= budget || depth >= MAX_DEPTH {
        if err > budget {
            *ok = false;
            *worst = worst.max(err);
        }
        *acc += left + right;
        return;
    }
    let half_budget = 0.5 * budget;
    adaptive_recurse(f, a, mid, left, half_budget, depth + 1, acc, worst, ok);
    adaptive_recurse(f, mid, b, right, half_budget, depth + 1, acc, worst, ok);
}
