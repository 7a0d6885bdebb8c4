//! Radial branches by shooting.
//!
//! Radially symmetric solutions on the ball of radius R scale out of the
//! parameter: if w solves
//!
//! ```text
//!   w'' + (d-1)/s w' + f(w) = 0,    w(0) = alpha,  w'(0) = 0,
//! ```
//!
//! and s_0 is its first zero, then u(r) = w(s_0 r / R) solves the boundary
//! value problem at lambda(alpha) = (s_0 / R)^2. The integrator is an
//! adaptive Dormand-Prince 5(4) pair started just off the coordinate
//! singularity with the regular power series of w; the zero is located by
//! bisection on single-step probes inside the step that crossed.
//!
//! Dimension 1 is accepted too (the curvature term vanishes); there R is
//! half the interval length, which makes the map agree with the time map
//! and gives the solvers a mutual cross-check.

use crate::defaults;
use crate::error::{Error, Result};
use crate::nonlinearity::Nonlinearity;
use crate::problem::{Domain, ProblemSpec};

/// Dormand-Prince coefficients.
const A2: [f64; 1] = [1.0 / 5.0];
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [
    19372.0 / 6561.0,
    -25360.0 / 2187.0,
    64448.0 / 6561.0,
    -212.0 / 729.0,
];
const A6: [f64; 5] = [
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
];
const B5: [f64; 6] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

type State = [f64; 2];

/// Result of one shot: the parameter value, the first zero, and the
/// rescaled profile on a uniform radial grid.
#[derive(Debug, Clone)]
pub struct ShootResult {
    pub alpha: f64,
    pub lambda: f64,
    /// First zero of w in the scaled variable.
    pub s_zero: f64,
    /// (r, u(r)) samples, r from 0 to the domain extent inclusive.
    pub profile: Vec<(f64, f64)>,
}

/// Shooting solver for one problem.
pub struct RadialShoot<'a> {
    f: &'a Nonlinearity,
    dimension: usize,
    /// Effective radius: ball radius, or half the interval length in d = 1.
    radius: f64,
    rtol: f64,
    atol: f64,
    profile_points: usize,
}

impl<'a> RadialShoot<'a> {
    pub fn new(problem: &'a ProblemSpec) -> Result<Self> {
        let radius = match (&problem.domain, problem.dimension) {
            (Domain::Ball { radius }, 2 | 3) => *radius,
            (Domain::Interval { length }, 1) => 0.5 * length,
            _ => {
                return Err(Error::InvalidParameter(
                    "shooting needs a ball domain (or an interval in d = 1)".into(),
                ))
            }
        };
        Ok(RadialShoot {
            f: &problem.nonlinearity,
            dimension: problem.dimension,
            radius,
            rtol: defaults::SHOOT_RTOL,
            atol: defaults::SHOOT_ATOL,
            profile_points: 257,
        })
    }

    pub fn with_parts(f: &'a Nonlinearity, dimension: usize, radius: f64) -> Self {
        RadialShoot {
            f,
            dimension,
            radius,
            rtol: defaults::SHOOT_RTOL,
            atol: defaults::SHOOT_ATOL,
            profile_points: 257,
        }
    }

    fn rhs(&self, s: f64, y: &State) -> State {
        let curv = if self.dimension > 1 {
            (self.dimension - 1) as f64 / s
        } else {
            0.0
        };
        [y[1], -curv * y[1] - self.f.eval(y[0])]
    }

    /// One Dormand-Prince step of size h from (s, y); returns the 5th order
    /// state and the embedded error estimate.
    fn dp_step(&self, s: f64, y: &State, h: f64, k1: &State) -> (State, f64) {
        let add = |y: &State, ks: &[&State], cs: &[f64]| -> State {
            let mut out = *y;
            for (k, c) in ks.iter().zip(cs) {
                out[0] += h * c * k[0];
                out[1] += h * c * k[1];
            }
            out
        };
        let k2 = self.rhs(s + h / 5.0, &add(y, &[k1], &A2));
        let k3 = self.rhs(s + 3.0 * h / 10.0, &add(y, &[k1, &k2], &A3));
        let k4 = self.rhs(s + 4.0 * h / 5.0, &add(y, &[k1, &k2, &k3], &A4));
        let k5 = self.rhs(s + 8.0 * h / 9.0, &add(y, &[k1, &k2, &k3, &k4], &A5));
        let k6 = self.rhs(s + h, &add(y, &[k1, &k2, &k3, &k4, &k5], &A6));
        let y5 = add(y, &[k1, &k2, &k3, &k4, &k5, &k6], &B5);
        let k7 = self.rhs(s + h, &y5);
        let y4 = add(y, &[k1, &k2, &k3, &k4, &k5, &k6, &k7], &B4);
        let mut err = 0.0_f64;
        for i in 0..2 {
            let sc = self.atol + self.rtol * y[i].abs().max(y5[i].abs());
            err = err.max((y5[i] - y4[i]).abs() / sc);
        }
        (y5, err)
    }

    /// Shoot from amplitude alpha and return the full result.
    pub fn solve(&self, alpha: f64) -> Result<ShootResult> {
        if !alpha.is_finite() || alpha <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "shooting needs alpha > 0, got {alpha}"
            )));
        }
        let d = self.dimension as f64;
        let f_alpha = self.f.eval(alpha);
        if f_alpha <= 0.0 {
            return Err(Error::NotPositive {
                x: alpha,
                value: f_alpha,
            });
        }
        // Crude positive lower bound for f on [0, alpha] feeding the
        // safety horizon: the profile falls from alpha with acceleration at
        // least f_min, so the first zero lies within a couple of free-fall
        // times.
        let mut f_min = f64::INFINITY;
        for i in 0..=1024 {
            let v = self.f.eval(alpha * i as f64 / 1024.0);
            if v < f_min {
                f_min = v;
            }
        }
        if f_min <= 0.0 {
            // A zero of f would let w hang; use a tiny floor and rely on
            // the horizon error to report honestly.
            f_min = 1e-12;
        }
        let s_max = 2.0 * (2.0 * d * alpha / f_min).sqrt();

        // Series start: w = alpha + c2 s^2 + c4 s^4 + O(s^6).
        let c2 = -f_alpha / (2.0 * d);
        let c4 = f_alpha * self.f.deriv(alpha) / (2.0 * d * (4.0 * d + 8.0));
        let h0 = if c4.abs() > 0.0 {
            (self.rtol * alpha.max(1.0) / c4.abs()).powf(0.25)
        } else {
            1e-3 * s_max
        }
        .clamp(1e-12, 1e-3 * s_max.max(1e-6));
        let mut s = h0;
        let mut y: State = [alpha + c2 * h0 * h0 + c4 * h0.powi(4), 2.0 * c2 * h0 + 4.0 * c4 * h0.powi(3)];

        let mut steps: Vec<(f64, State)> = vec![(s, y)];
        let mut h = h0;
        let mut k1 = self.rhs(s, &y);
        for _ in 0..2_000_000 {
            if s + h > s_max {
                h = s_max - s;
                if h <= 0.0 {
                    return Err(Error::NoZero { alpha, s_max });
                }
            }
            let (y_new, err) = self.dp_step(s, &y, h, &k1);
            if !y_new[0].is_finite() || !y_new[1].is_finite() {
                h *= 0.25;
                if h < 1e-15 * s.max(1.0) {
                    return Err(Error::StepSizeUnderflow { s, h });
                }
                continue;
            }
            if err <= 1.0 {
                if y_new[0] <= 0.0 {
                    // The zero lies inside this step: bisect on single-step
                    // probes of the profile height.
                    let mut lo = 0.0_f64;
                    let mut hi = h;
                    for _ in 0..90 {
                        let mid = 0.5 * (lo + hi);
                        let (probe, _) = self.dp_step(s, &y, mid, &k1);
                        if probe[0] > 0.0 {
                            lo = mid;
                        } else {
                            hi = mid;
                        }
                        if hi - lo < 1e-16 * (s + hi) {
                            break;
                        }
                    }
                    let s_zero = s + 0.5 * (lo + hi);
                    let (y_zero, _) = self.dp_step(s, &y, 0.5 * (lo + hi), &k1);
                    steps.push((s_zero, [0.0, y_zero[1]]));
                    let lambda = (s_zero / self.radius).powi(2);
                    let profile = self.sample_profile(alpha, s_zero, &steps);
                    return Ok(ShootResult {
                        alpha,
                        lambda,
                        s_zero,
                        profile,
                    });
                }
                s += h;
                y = y_new;
                k1 = self.rhs(s, &y);
                steps.push((s, y));
                h *= (0.9 * err.max(1e-10).powf(-0.2)).clamp(0.2, 5.0);
            } else {
                h *= (0.9 * err.powf(-0.2)).clamp(0.2, 5.0);
                if h < 1e-15 * s.max(1.0) {
                    return Err(Error::StepSizeUnderflow { s, h });
                }
            }
        }
        Err(Error::NoZero { alpha, s_max })
    }

    /// Just the parameter value.
    pub fn lambda(&self, alpha: f64) -> Result<f64> {
        self.solve(alpha).map(|r| r.lambda)
    }

    /// Rescale the accepted trajectory to u(r) = w(s_zero r / R) on a
    /// uniform r grid, interpolating each step with a cubic Hermite.
    fn sample_profile(&self, alpha: f64, s_zero: f64, steps: &[(f64, State)]) -> Vec<(f64, f64)> {
        let np = self.profile_points;
        let mut out = Vec::with_capacity(np);
        let mut idx = 0;
        for j in 0..np {
            let r = self.radius * j as f64 / (np - 1) as f64;
            let s = s_zero * j as f64 / (np - 1) as f64;
            let u = if j == 0 {
                alpha
            } else if j == np - 1 {
                0.0
            } else if s <= steps[0].0 {
                // Inside the series start: quadratic suffices here.
                alpha - self.f.eval(alpha) * s * s / (2.0 * self.dimension as f64)
            } else {
                while idx + 1 < steps.len() && steps[idx + 1].0 < s {
                    idx += 1;
                }
                let (s0, y0) = steps[idx];
                let (s1, y1) = steps[(idx + 1).min(steps.len() - 1)];
                let hh = s1 - s0;
                if hh <= 0.0 {
                    y0[0]
                } else {
                    let t = (s - s0) / hh;
                    let h00 = (1.0 + 2.0 * t) * (1.0 - t) * (1.0 - t);
                    let h10 = t * (1.0 - t) * (1.0 - t);
                    let h01 = t * t * (3.0 - 2.0 * t);
                    let h11 = t * t * (t - 1.0);
                    h00 * y0[0] + h10 * hh * y0[1] + h01 * y1[0] + h11 * hh * y1[1]
                }
            };
            out.push((r, u));
        }
        out
    }
}
