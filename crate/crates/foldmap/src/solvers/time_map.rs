//! Exact one-dimensional branches via the time map.
//!
//! On the interval (0, L) with u(0) = u(L) = 0, the positive solution with
//! sup-norm alpha exists exactly when
//!
//! ```text
//!   lambda(alpha) = (2 / L^2) I(alpha)^2,
//!   I(alpha) = integral_0^alpha du / sqrt(F(alpha) - F(u)),
//! ```
//!
//! where F is the antiderivative of f. The substitution u = alpha sin(theta)
//! removes the inverse-square-root endpoint singularity: the transformed
//! integrand extends continuously to theta = pi/2 with value
//! sqrt(2 alpha / f(alpha)). Energy differences F(alpha) - F(u) are computed
//! by integrating f directly over [u, alpha] (closed forms where available,
//! cumulative Gauss panels otherwise), and close to the endpoint the gap
//! alpha - u is taken from theta in multiplicative form rather than by
//! subtraction, so the integrand stays smooth to machine precision all the
//! way into the corner.

use crate::defaults;
use crate::error::{Error, Result};
use crate::nonlinearity::Nonlinearity;
use crate::problem::{Domain, ProblemSpec};
use crate::quad;

/// Panel width and order for the cumulative integration of nonlinearities
/// without closed-form antiderivatives; see `Nonlinearity`.
const TABLE_PANEL_WIDTH: f64 = 1.0;
const TABLE_PANEL_ORDER: usize = 20;

/// Precomputed cumulative integrals of f over [0, alpha] on panels aligned
/// with the formula breakpoints. `suffix[i]` holds the integral of f from
/// `edges[i]` to alpha, a sum of positive panel values, so the energy
/// difference to alpha never suffers cancellation.
struct EnergyTable<'a> {
    f: &'a Nonlinearity,
    edges: Vec<f64>,
    suffix: Vec<f64>,
}

impl<'a> EnergyTable<'a> {
    fn new(f: &'a Nonlinearity, alpha: f64) -> Self {
        let mut coarse = vec![0.0, alpha];
        for b in f.breakpoints() {
            if b > 0.0 && b < alpha {
                coarse.push(b);
            }
        }
        coarse.sort_by(f64::total_cmp);
        coarse.dedup();
        let mut edges = Vec::new();
        for w in coarse.windows(2) {
            let parts = ((w[1] - w[0]) / TABLE_PANEL_WIDTH).ceil().max(1.0) as usize;
            for k in 0..parts {
                edges.push(w[0] + (w[1] - w[0]) * k as f64 / parts as f64);
            }
        }
        edges.push(alpha);
        let p = edges.len() - 1;
        let mut suffix = vec![0.0; p + 1];
        for i in (0..p).rev() {
            let v = quad::fixed(|x| f.eval(x), edges[i], edges[i + 1], TABLE_PANEL_ORDER);
            suffix[i] = suffix[i + 1] + v;
        }
        EnergyTable { f, edges, suffix }
    }

    /// Integral of f over [u, alpha] for 0 <= u <= alpha.
    fn diff_to_alpha(&self, u: f64) -> f64 {
        let j = match self
            .edges
            .binary_search_by(|e| e.total_cmp(&u))
        {
            Ok(j) => j,
            Err(j) => j.saturating_sub(1),
        };
        let j = j.min(self.edges.len() - 2);
        let partial = quad::fixed(
            |x| self.f.eval(x),
            u,
            self.edges[j + 1],
            TABLE_PANEL_ORDER,
        );
        partial + self.suffix[j + 1]
    }
}

/// The one-dimensional branch map alpha -> lambda(alpha).
pub struct TimeMap<'a> {
    f: &'a Nonlinearity,
    length: f64,
    rel_tol: f64,
}

impl<'a> TimeMap<'a> {
    /// Build from a problem; the problem must be one-dimensional.
    pub fn new(problem: &'a ProblemSpec) -> Result<Self> {
        match (&problem.domain, problem.dimension) {
            (Domain::Interval { length }, 1) => Ok(TimeMap {
                f: &problem.nonlinearity,
                length: *length,
                rel_tol: defaults::QUAD_TOL,
            }),
            _ => Err(Error::InvalidParameter(
                "the time map applies to one-dimensional interval problems".into(),
            )),
        }
    }

    pub fn with_parts(f: &'a Nonlinearity, length: f64, rel_tol: f64) -> Self {
        TimeMap {
            f,
            length,
            rel_tol,
        }
    }

    /// lambda(alpha): the parameter at which the positive solution with
    /// sup-norm alpha exists.
    pub fn lambda(&self, alpha: f64) -> Result<f64> {
        if !alpha.is_finite() || alpha <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "time map needs alpha > 0, got {alpha}"
            )));
        }
        let table = if self.f.has_closed_antiderivative() {
            None
        } else {
            Some(EnergyTable::new(self.f, alpha))
        };
        let diff = |u: f64| -> f64 {
            match &table {
                Some(t) => t.diff_to_alpha(u),
                None => self.f.antiderivative_between(u, alpha),
            }
        };

        // Split the theta range at the images of formula breakpoints so the
        // adaptive panels only ever see smooth integrands.
        let mut splits = vec![0.0, std::f64::consts::FRAC_PI_2];
        for b in self.f.breakpoints() {
            if b > 0.0 && b < alpha {
                splits.push((b / alpha).asin());
            }
        }
        splits.sort_by(f64::total_cmp);
        splits.dedup();

        // Non-positive energy differences mean no orbit reaches alpha; the
        // integrand records the first offender and the loop reports it.
        let bad: std::cell::Cell<Option<(f64, f64)>> = std::cell::Cell::new(None);
        // Within this distance of alpha the energy difference is evaluated
        // as delta times the Gauss average of f over [alpha - delta, alpha],
        // with delta = alpha cos^2(theta) / (1 + sin(theta)) taken straight
        // from theta in multiplicative form. Forming u = alpha sin(theta)
        // first and differencing would leave relative noise of order
        // eps_machine * alpha / delta in the energy, which the adaptive
        // driver then chases forever whenever a formula breakpoint pins a
        // split next to the endpoint.
        let near = 1e-3 * alpha;
        let mut total = 0.0;
        for w in splits.windows(2) {
            let part = quad::adaptive(
                |theta: f64| {
                    let s = theta.sin();
                    let c = theta.cos();
                    let delta = alpha * c * c / (1.0 + s);
                    let d = if delta <= near {
                        delta
                            * quad::fixed(
                                |t| self.f.eval(alpha - delta * t),
                                0.0,
                                1.0,
                                TABLE_PANEL_ORDER,
                            )
                    } else {
                        diff(alpha - delta)
                    };
                    if d <= 0.0 {
                        if bad.get().is_none() {
                            bad.set(Some((alpha - delta, d)));
                        }
                        return 0.0;
                    }
                    alpha * c / d.sqrt()
                },
                w[0],
                w[1],
                self.rel_tol,
            )?;
            if let Some((u, d)) = bad.get() {
                return Err(Error::TimeMapUndefined { alpha, u, diff: d });
            }
            total += part;
        }
        Ok(2.0 * total * total / (self.length * self.length))
    }
}
