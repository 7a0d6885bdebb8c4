//! Finite-difference operators for -laplace on the interval and on balls
//! (radially symmetric), plus a tridiagonal solver.
//!
//! Radial rows use the conservative flux form
//!
//! ```text
//!   (-laplace_h u)_i = -( r_{i+1/2}^{d-1} (u_{i+1}-u_i)
//!                        - r_{i-1/2}^{d-1} (u_i-u_{i-1}) ) / (h^2 r_i^{d-1}),
//! ```
//!
//! with the center row from the regularity condition u'(0) = 0:
//! (-laplace_h u)_0 = 2d (u_0 - u_1) / h^2.

use crate::error::{Error, Result};

/// Tridiagonal matrix in banded storage. `sub` and `sup` have length
/// `n - 1`; `sub[i]` multiplies `x[i]` in row `i + 1`, `sup[i]` multiplies
/// `x[i + 1]` in row `i`.
#[derive(Debug, Clone)]
pub struct Tridiag {
    pub sub: Vec<f64>,
    pub diag: Vec<f64>,
    pub sup: Vec<f64>,
}

impl Tridiag {
    pub fn n(&self) -> usize {
        self.diag.len()
    }

    /// Matrix-vector product.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n();
        assert_eq!(x.len(), n);
        let mut out = vec![0.0; n];
        for i in 0..n {
            let mut v = self.diag[i] * x[i];
            if i > 0 {
                v += self.sub[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                v += self.sup[i] * x[i + 1];
            }
            out[i] = v;
        }
        out
    }

    /// Copy with `shift` added to every diagonal entry.
    pub fn shifted(&self, shift: f64) -> Tridiag {
        let mut t = self.clone();
        for d in &mut t.diag {
            *d += shift;
        }
        t
    }

    /// Thomas elimination. The matrices built here are strictly diagonally
    /// dominant (possibly after a positive shift), so no pivoting is needed.
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.n();
        assert_eq!(rhs.len(), n);
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        c[0] = if n > 1 { self.sup[0] / self.diag[0] } else { 0.0 };
        d[0] = rhs[0] / self.diag[0];
        for i in 1..n {
            let m = self.diag[i] - self.sub[i - 1] * c[i - 1];
            if i + 1 < n {
                c[i] = self.sup[i] / m;
            }
            d[i] = (rhs[i] - self.sub[i - 1] * d[i - 1]) / m;
        }
        let mut x = d;
        for i in (0..n - 1).rev() {
            let next = x[i + 1];
            x[i] -= c[i] * next;
        }
        x
    }
}

/// A discrete -laplace with its grid geometry.
#[derive(Debug, Clone)]
pub struct FdOperator {
    pub dimension: usize,
    /// Coordinates of the unknowns (interior points; radial grids include
    /// the center).
    pub nodes: Vec<f64>,
    /// Grid spacing.
    pub h: f64,
    /// Domain extent (interval length or ball radius).
    pub extent: f64,
    /// Matrix of -laplace_h on the unknowns, Dirichlet data eliminated.
    pub tri: Tridiag,
}

impl FdOperator {
    /// Sup-norm of a grid function.
    pub fn sup(u: &[f64]) -> f64 {
        u.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

/// Standard three-point operator on (0, length) with `n` interior nodes,
/// h = length / (n + 1).
pub fn interval_operator(length: f64, n: usize) -> FdOperator {
    assert!(n >= 2, "need at least two interior nodes");
    let h = length / (n + 1) as f64;
    let inv_h2 = 1.0 / (h * h);
    let tri = Tridiag {
        sub: vec![-inv_h2; n - 1],
        diag: vec![2.0 * inv_h2; n],
        sup: vec![-inv_h2; n - 1],
    };
    let nodes = (1..=n).map(|i| i as f64 * h).collect();
    FdOperator {
        dimension: 1,
        nodes,
        h,
        extent: length,
        tri,
    }
}

/// Flux-form radial operator on the ball of the given radius, unknowns at
/// r_i = i h for i = 0 .. n-1 with h = radius / n and Dirichlet data at
/// r = radius. Dimension 1 is the symmetric interval (-R, R) reduced to its
/// right half by the reflection condition u'(0) = 0.
pub fn radial_operator(dimension: usize, radius: f64, n: usize) -> Result<FdOperator> {
    if !(1..=3).contains(&dimension) {
        return Err(Error::UnsupportedDimension(dimension));
    }
    if n < 3 {
        return Err(Error::InvalidParameter(format!(
            "radial grid needs at least 3 nodes, got {n}"
        )));
    }
    let h = radius / n as f64;
    let inv_h2 = 1.0 / (h * h);
    let p = (dimension - 1) as i32;
    let mut sub = vec![0.0; n - 1];
    let mut diag = vec![0.0; n];
    let mut sup = vec![0.0; n - 1];
    diag[0] = 2.0 * dimension as f64 * inv_h2;
    sup[0] = -2.0 * dimension as f64 * inv_h2;
    for i in 1..n {
        let r = i as f64 * h;
        let wm = (r - 0.5 * h).powi(p) / r.powi(p);
        let wp = (r + 0.5 * h).powi(p) / r.powi(p);
        sub[i - 1] = -wm * inv_h2;
        diag[i] = (wm + wp) * inv_h2;
        if i + 1 < n {
            sup[i] = -wp * inv_h2;
        }
    }
    let nodes = (0..n).map(|i| i as f64 * h).collect();
    Ok(FdOperator {
        dimension,
        nodes,
        h,
        extent: radius,
        tri: Tridiag { sub, diag, sup },
    })
}
