//! Closed-form torsion profiles for a unit source on a concentric ball.
//!
//! Psi solves -laplace(Psi) = indicator(|x| < rho) on the ball of radius R
//! (the symmetric interval in d = 1) with zero boundary data. Outside the
//! source the solution is harmonic and radial; inside it is that value at
//! rho plus a paraboloid:
//!
//! ```text
//!   d = 1:  Psi(r) = rho (R - r)                    for rho <= r <= R
//!   d = 2:  Psi(r) = (rho^2 / 2) ln(R / r)
//!   d = 3:  Psi(r) = (rho^3 / 3) (1/r - 1/R)
//!   inner:  Psi(r) = Psi(rho) + (rho^2 - r^2) / (2 d)
//! ```
//!
//! The normalized gauge K(rho) = Psi(2 rho) / rho^2 measures how much of
//! the source's influence survives at twice its radius; its closed forms
//! (R/rho - 2, ln(R/(2 rho))/2, and 1/6 - rho/(3R)) separate the
//! dimensions sharply and anchor the desk-scale perturbation estimates.

use crate::error::{Error, Result};
use crate::solvers::grid::radial_operator;

/// Closed-form profile with its gauge value.
#[derive(Debug, Clone, Copy)]
pub struct PoissonProfile {
    pub dimension: usize,
    pub radius: f64,
    pub rho: f64,
    /// K(rho) = Psi(2 rho) / rho^2.
    pub k_value: f64,
}

impl PoissonProfile {
    /// Requires 0 < rho < R/2 so the gauge point 2 rho stays inside.
    pub fn new(dimension: usize, radius: f64, rho: f64) -> Result<Self> {
        if !(1..=3).contains(&dimension) {
            return Err(Error::UnsupportedDimension(dimension));
        }
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "radius must be positive, got {radius}"
            )));
        }
        if !(rho.is_finite() && rho > 0.0 && 2.0 * rho < radius) {
            return Err(Error::InvalidParameter(format!(
                "need 0 < rho < R/2 (rho = {rho}, R = {radius})"
            )));
        }
        let k_value = match dimension {
            1 => radius / rho - 2.0,
            2 => 0.5 * (radius / (2.0 * rho)).ln(),
            _ => 1.0 / 6.0 - rho / (3.0 * radius),
        };
        Ok(PoissonProfile {
            dimension,
            radius,
            rho,
            k_value,
        })
    }

    /// Harmonic outer part, valid for rho <= r <= R.
    fn outer(&self, r: f64) -> f64 {
        let (rho, big_r) = (self.rho, self.radius);
        match self.dimension {
            1 => rho * (big_r - r),
            2 => 0.5 * rho * rho * (big_r / r).ln(),
            _ => rho.powi(3) / 3.0 * (1.0 / r - 1.0 / big_r),
        }
    }

    /// Profile value at radius r in [0, R].
    pub fn eval(&self, r: f64) -> f64 {
        let r = r.abs();
        if r >= self.radius {
            0.0
        } else if r >= self.rho {
            self.outer(r)
        } else {
            self.outer(self.rho) + (self.rho * self.rho - r * r) / (2.0 * self.dimension as f64)
        }
    }
}

/// Finite-difference cross-check: solve the same problem on a radial grid
/// with `n` nodes. The source radius must land on a grid node; the node on
/// the interface carries weight 1/2, which is exactly the local truncation
/// of the jump (and makes d = 1 exact to rounding). Returns (nodes, values).
pub fn poisson_fd(dimension: usize, radius: f64, rho: f64, n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    PoissonProfile::new(dimension, radius, rho)?;
    let op = radial_operator(dimension, radius, n)?;
    let h = op.h;
    let j = (rho / h).round();
    if ((j * h - rho) / radius).abs() > 1e-9 {
        return Err(Error::InvalidParameter(format!(
            "rho = {rho} must land on a grid node (h = {h})"
        )));
    }
    let j = j as usize;
    let mut rhs = vec![0.0; n];
    for (i, r) in rhs.iter_mut().enumerate() {
        *r = match i.cmp(&j) {
            std::cmp::Ordering::Less => 1.0,
            std::cmp::Ordering::Equal => 0.5,
            std::cmp::Ordering::Greater => 0.0,
        };
    }
    let u = op.tri.solve(&rhs);
    Ok((op.nodes, u))
}
