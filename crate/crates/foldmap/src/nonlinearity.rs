//! Nonlinearities f for the right-hand side lambda f(u), their exact
//! antiderivatives, compactly supported perturbations, and growth
//! diagnostics.
//!
//! The built-in family:
//!
//! ```text
//!   constant       f(x) = c
//!   linear         f(x) = x
//!   exponential    f(x) = exp(x)
//!   arrhenius      f(x) = exp(x / (1 + eps x)),  eps > 0
//!   perturbed      f(x) = base(x) + bump(x)
//! ```
//!
//! The bump is a C^1 quintic-smoothstep hump supported on [m, m + width]
//! with peak value exactly `amplitude` at the midpoint, zero value and zero
//! slope at both ends, and a closed-form antiderivative. Energy differences
//! F(alpha) - F(u) are therefore available without cancellation for every
//! kind except `arrhenius`, which integrates by fixed Gauss panels.

use crate::branch::ExtReal;
use crate::defaults;
use crate::error::{Error, Result};
use crate::quad;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Compactly supported C^1 hump added to a base nonlinearity.
///
/// With t = (x - m)/width in [0, 1] and the quintic smoothstep
/// s(t) = 6t^5 - 15t^4 + 10t^3, the shape is v(t) = 4 s(t)(1 - s(t)):
/// zero with zero slope at t = 0 and t = 1, and exactly 1 at t = 1/2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bump {
    /// Left edge of the support.
    pub m: f64,
    /// Support width; the bump lives on [m, m + width].
    pub width: f64,
    /// Peak value, attained at the midpoint of the support.
    pub amplitude: f64,
}

fn smoothstep(t: f64) -> f64 {
    t * t * t * (10.0 + t * (-15.0 + 6.0 * t))
}

fn smoothstep_deriv(t: f64) -> f64 {
    // 30 t^2 (1 - t)^2
    let a = t * (1.0 - t);
    30.0 * a * a
}

/// Unit shape v(t) = 4 s (1 - s) on [0, 1].
fn unit_shape(t: f64) -> f64 {
    let s = smoothstep(t);
    4.0 * s * (1.0 - s)
}

/// d/dt of the unit shape: 4 s'(t) (1 - 2 s(t)).
fn unit_shape_deriv(t: f64) -> f64 {
    4.0 * smoothstep_deriv(t) * (1.0 - 2.0 * smoothstep(t))
}

/// Antiderivative of the unit shape from 0 to t (t in [0, 1]), in closed
/// form; P(1) = 100/231.
fn unit_shape_integral(t: f64) -> f64 {
    // Integrate 4(s - s^2) termwise; coefficients of t^4 .. t^11.
    const C: [f64; 8] = [
        2.5,
        -3.0,
        1.0,
        -100.0 / 7.0,
        37.5,
        -115.0 / 3.0,
        18.0,
        -36.0 / 11.0,
    ];
    let mut acc = 0.0;
    for c in C.iter().rev() {
        acc = acc * t + c;
    }
    4.0 * t * t * t * t * acc
}

/// P(1): the integral of the unit shape over its whole support.
pub const UNIT_SHAPE_MASS: f64 = 100.0 / 231.0;

impl Bump {
    fn t(&self, x: f64) -> f64 {
        (x - self.m) / self.width
    }

    /// Bump value at x (zero outside the support). The support test is on x
    /// itself, not on the scaled coordinate, so the edges are exact: rounding
    /// in (x - m) / width cannot leak a stray 1e-44 past them.
    pub fn eval(&self, x: f64) -> f64 {
        let (lo, hi) = self.support();
        if x <= lo || x >= hi {
            0.0
        } else {
            let t = self.t(x).clamp(0.0, 1.0);
            self.amplitude * unit_shape(t)
        }
    }

    /// Bump slope at x (zero outside the support and at both edges).
    pub fn deriv(&self, x: f64) -> f64 {
        let (lo, hi) = self.support();
        if x <= lo || x >= hi {
            0.0
        } else {
            let t = self.t(x).clamp(0.0, 1.0);
            self.amplitude * unit_shape_deriv(t) / self.width
        }
    }

    /// Integral of the bump over [lo, hi], signed, in closed form.
    pub fn integral_between(&self, lo: f64, hi: f64) -> f64 {
        let p = |x: f64| {
            let t = self.t(x).clamp(0.0, 1.0);
            unit_shape_integral(t)
        };
        self.amplitude * self.width * (p(hi) - p(lo))
    }

    /// Total mass of the bump.
    pub fn mass(&self) -> f64 {
        self.amplitude * self.width * UNIT_SHAPE_MASS
    }

    pub fn support(&self) -> (f64, f64) {
        (self.m, self.m + self.width)
    }
}

/// Right-hand-side nonlinearity.
#[derive(Debug, Clone, PartialEq)]
pub enum Nonlinearity {
    Constant { value: f64 },
    Linear,
    Exponential,
    Arrhenius { eps: f64 },
    Perturbed { base: Box<Nonlinearity>, bump: Bump },
}

/// Panel width for direct Gauss integration of kinds without a closed-form
/// antiderivative. The integrands grow at most like exp(x), for which an
/// order-20 panel of this width is exact to machine precision.
const DIRECT_PANEL_WIDTH: f64 = 1.0;
const DIRECT_PANEL_ORDER: usize = 20;

impl Nonlinearity {
    pub fn arrhenius(eps: f64) -> Self {
        Nonlinearity::Arrhenius { eps }
    }

    pub fn constant(value: f64) -> Self {
        Nonlinearity::Constant { value }
    }

    /// f(x). Defined for all x; the arrhenius kind extends continuously by
    /// zero left of its pole at x = -1/eps, so that finite-dimensional
    /// root-finding may probe negative coordinates safely.
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Nonlinearity::Constant { value } => *value,
            Nonlinearity::Linear => x,
            Nonlinearity::Exponential => x.exp(),
            Nonlinearity::Arrhenius { eps } => {
                let d = 1.0 + eps * x;
                if d <= 0.0 {
                    0.0
                } else {
                    (x / d).exp()
                }
            }
            Nonlinearity::Perturbed { base, bump } => base.eval(x) + bump.eval(x),
        }
    }

    /// f'(x).
    pub fn deriv(&self, x: f64) -> f64 {
        match self {
            Nonlinearity::Constant { .. } => 0.0,
            Nonlinearity::Linear => 1.0,
            Nonlinearity::Exponential => x.exp(),
            Nonlinearity::Arrhenius { eps } => {
                let d = 1.0 + eps * x;
                if d <= 0.0 {
                    0.0
                } else {
                    (x / d).exp() / (d * d)
                }
            }
            Nonlinearity::Perturbed { base, bump } => base.deriv(x) + bump.deriv(x),
        }
    }

    /// True when the antiderivative is available in closed form (everything
    /// except the arrhenius kind, recursively through perturbations).
    pub fn has_closed_antiderivative(&self) -> bool {
        match self {
            Nonlinearity::Arrhenius { .. } => false,
            Nonlinearity::Perturbed { base, .. } => base.has_closed_antiderivative(),
            _ => true,
        }
    }

    /// Integral of f over [lo, hi], signed. Closed-form kinds are exact and
    /// cancellation-free (the exponential uses expm1); the arrhenius kind
    /// integrates directly with fixed Gauss panels.
    pub fn antiderivative_between(&self, lo: f64, hi: f64) -> f64 {
        match self {
            Nonlinearity::Constant { value } => value * (hi - lo),
            Nonlinearity::Linear => 0.5 * (hi - lo) * (hi + lo),
            Nonlinearity::Exponential => lo.exp() * (hi - lo).exp_m1(),
            Nonlinearity::Arrhenius { .. } => quad::composite(
                |x| self.eval(x),
                lo,
                hi,
                DIRECT_PANEL_WIDTH,
                DIRECT_PANEL_ORDER,
            ),
            Nonlinearity::Perturbed { base, bump } => {
                base.antiderivative_between(lo, hi) + bump.integral_between(lo, hi)
            }
        }
    }

    /// Points where the formula changes (bump support edges); integrators
    /// split panels here to keep integrands smooth inside each panel.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            Nonlinearity::Perturbed { base, bump } => {
                let mut v = base.breakpoints();
                let (a, b) = bump.support();
                v.push(a);
                v.push(b);
                v.sort_by(f64::total_cmp);
                v.dedup();
                v
            }
            _ => Vec::new(),
        }
    }

    /// Structural validation: parameter ranges and positivity of f on
    /// (0, x_max]. f(0) = 0 is tolerated here (the linear kind); operations
    /// that require f(0) > 0 check that themselves.
    pub fn validate(&self, x_max: f64) -> Result<()> {
        match self {
            Nonlinearity::Constant { value } => {
                if !value.is_finite() || *value <= 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "constant nonlinearity needs a positive value, got {value}"
                    )));
                }
            }
            Nonlinearity::Linear | Nonlinearity::Exponential => {}
            Nonlinearity::Arrhenius { eps } => {
                if !eps.is_finite() || *eps <= 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "arrhenius saturation needs eps > 0, got {eps}"
                    )));
                }
            }
            Nonlinearity::Perturbed { base, bump } => {
                base.validate(x_max)?;
                if !bump.width.is_finite() || bump.width <= 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "bump width must be positive, got {}",
                        bump.width
                    )));
                }
                if bump.m < 0.0 || !bump.m.is_finite() {
                    return Err(Error::InvalidParameter(format!(
                        "bump position must be nonnegative, got {}",
                        bump.m
                    )));
                }
                if !bump.amplitude.is_finite()
                    || bump.amplitude < 0.0
                    || bump.amplitude > defaults::AMPLITUDE_CAP
                {
                    return Err(Error::InvalidParameter(format!(
                        "bump amplitude must lie in [0, {}], got {}",
                        defaults::AMPLITUDE_CAP,
                        bump.amplitude
                    )));
                }
                // Positivity across the support; the bump is nonnegative but
                // nesting could in principle stack strangely, so check.
                let (lo, hi) = bump.support();
                let hi = hi.min(x_max);
                if lo < hi {
                    for i in 0..=512 {
                        let x = lo + (hi - lo) * i as f64 / 512.0;
                        let v = self.eval(x);
                        if !v.is_finite() || v < 0.0 {
                            return Err(Error::NotPositive { x, value: v });
                        }
                    }
                }
            }
        }
        // Sample positivity on (0, x_max].
        for i in 1..=256 {
            let x = x_max * i as f64 / 256.0;
            let v = self.eval(x);
            if !v.is_finite() || v < 0.0 {
                return Err(Error::NotPositive { x, value: v });
            }
        }
        Ok(())
    }
}

/// d/dx of the ratio exp(x/(1+eps x)) / x, in closed form:
///
/// ```text
///   (f/x)' = -f(x) (eps^2 x^2 + (2 eps - 1) x + 1) / (x^2 (1 + eps x)^2).
/// ```
///
/// The quadratic in the numerator controls the sign. Its discriminant is
/// 1 - 4 eps, so for eps >= 1/4 it never goes negative and the ratio is
/// nonincreasing on all of x > 0 (the classical uniqueness regime), while
/// for eps < 1/4 the ratio genuinely increases between the two real roots.
/// The rearrangement (eps x - 1)^2 + (4 eps - 1) x used here keeps the sign
/// exact at eps = 1/4, where the naive expansion cancels to rounding noise
/// near its double root at x = 4.
pub fn arrhenius_ratio_derivative(eps: f64, x: f64) -> f64 {
    let d = 1.0 + eps * x;
    let r = eps * x - 1.0;
    let q = r * r + (4.0 * eps - 1.0) * x;
    -(x / d).exp() * q / (x * x * d * d)
}

const MONOTONE_SCAN_POINTS: usize = 8192;

/// Largest amplitude for which `base + bump` stays nondecreasing on the
/// bump support, found by scanning the slope competition on a dense grid.
/// Returns infinity when the shape slope never turns negative (it always
/// does), or when the base has infinite slope samples.
pub fn monotone_amplitude_cap(base: &Nonlinearity, m: f64, width: f64) -> f64 {
    let mut cap = f64::INFINITY;
    for i in 1..MONOTONE_SCAN_POINTS {
        let t = i as f64 / MONOTONE_SCAN_POINTS as f64;
        let vs = unit_shape_deriv(t) / width;
        if vs >= 0.0 {
            continue;
        }
        let g = base.deriv(m + t * width);
        cap = cap.min(g / (-vs));
    }
    cap
}

/// Build `base + bump`, validating ranges. With `monotone` set, the
/// amplitude must also respect the slope cap so that the sum stays
/// nondecreasing on the support; violations report the feasible cap.
pub fn build_perturbation(
    base: &Nonlinearity,
    m: f64,
    width: f64,
    amplitude: f64,
    monotone: bool,
) -> Result<Nonlinearity> {
    if !width.is_finite() || width <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "bump width must be positive, got {width}"
        )));
    }
    if !m.is_finite() || m < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "bump position must be nonnegative, got {m}"
        )));
    }
    if !amplitude.is_finite() || amplitude < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "bump amplitude must be nonnegative, got {amplitude}"
        )));
    }
    if amplitude > defaults::AMPLITUDE_CAP {
        return Err(Error::InvalidParameter(format!(
            "bump amplitude {amplitude} exceeds the cap {}",
            defaults::AMPLITUDE_CAP
        )));
    }
    if monotone {
        let cap = monotone_amplitude_cap(base, m, width);
        if amplitude > cap * (1.0 + 1e-12) {
            return Err(Error::InfeasibleAmplitude {
                m,
                width,
                requested: amplitude,
                feasible_cap: cap,
            });
        }
    }
    let out = Nonlinearity::Perturbed {
        base: Box::new(base.clone()),
        bump: Bump {
            m,
            width,
            amplitude,
        },
    };
    out.validate(m + width + 1.0)?;
    Ok(out)
}

/// Growth diagnostics for f: the slopes a = lim_{x->0+} f(x)/x and
/// b = lim_{x->inf} f(x)/x (each possibly 0 or infinite), monotonicity of
/// the ratio f(x)/x, the resulting pinning window for the extremal
/// parameter, and one-sided decrease bounds used to pick the monotone
/// iteration shift.
#[derive(Debug, Clone, Serialize)]
pub struct AdmissibilityReport {
    /// a: limit of f(x)/x as x -> 0+.
    pub slope_at_zero: ExtReal,
    /// b: limit of f(x)/x as x -> infinity.
    pub slope_at_infinity: ExtReal,
    /// Whether f(x)/x is nonincreasing over the sampled range.
    pub ratio_decreasing: bool,
    /// Set when the ratio samples wobble within noise, so the monotonicity
    /// call should not be trusted.
    pub ratio_inconclusive: bool,
    /// (lambda_1 / a, lambda_1 / b): the branch leaves the trivial solution
    /// at the lower entry; no solutions exist beyond the upper entry when b
    /// is positive, and the upper entry is infinite when b = 0. When b is
    /// itself infinite the upper entry degenerates to zero and carries no
    /// information; extremal estimation then relies on the traced branch.
    pub lambda_window: (ExtReal, ExtReal),
    /// Pairs (sigma, omega) where omega bounds the steepest decrease of f
    /// on [0, sigma]: f(y) - f(x) >= -omega (y - x) for 0 <= x <= y <= sigma.
    /// Nondecreasing f has omega = 0.
    pub omega_table: Vec<(f64, f64)>,
}

impl AdmissibilityReport {
    /// Decrease bound covering [0, sigma]: the first tabulated entry at or
    /// above sigma, or the last one for larger ranges.
    pub fn omega(&self, sigma: f64) -> f64 {
        for (s, w) in &self.omega_table {
            if *s >= sigma {
                return *w;
            }
        }
        self.omega_table.last().map(|p| p.1).unwrap_or(0.0)
    }
}

/// Geometric-growth classification of ratio samples: sustained growth means
/// an infinite limit, sustained decay means zero, otherwise the tail is
/// extrapolated by Aitken acceleration.
fn classify_ratio_limit(v: &[f64]) -> f64 {
    if v.iter().any(|x| !x.is_finite()) {
        return f64::INFINITY;
    }
    let n = v.len();
    let overall = v[n - 1] / v[0];
    let per_step = overall.powf(1.0 / (n - 1) as f64);
    if per_step >= 2.0 || v.iter().any(|x| *x > 1e12) {
        return f64::INFINITY;
    }
    if per_step <= 0.5 {
        return 0.0;
    }
    // Aitken extrapolation of the last three samples; falls back to the
    // last sample when differences vanish (already converged).
    let (x0, x1, x2) = (v[n - 3], v[n - 2], v[n - 1]);
    let denom = (x2 - x1) - (x1 - x0);
    if denom.abs() < 1e-14 * x2.abs().max(1e-300) {
        x2
    } else {
        x2 - (x2 - x1) * (x2 - x1) / denom
    }
}

const OMEGA_SAMPLES: usize = 10_000;
const OMEGA_HEADROOM: f64 = 1.1;

/// Compute growth diagnostics for f given the principal Dirichlet
/// eigenvalue of the domain.
pub fn admissibility(f: &Nonlinearity, lambda1: f64) -> Result<AdmissibilityReport> {
    if !lambda1.is_finite() || lambda1 <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "principal eigenvalue must be positive, got {lambda1}"
        )));
    }
    // Slope at zero from x = 1e-2 .. 1e-8, ordered toward the limit point.
    let near: Vec<f64> = (2..=8)
        .map(|k| {
            let x = 10f64.powi(-k);
            f.eval(x) / x
        })
        .collect();
    let a = classify_ratio_limit(&near);
    // Slope at infinity from x = 10 .. 1e4.
    let far: Vec<f64> = (1..=4)
        .map(|k| {
            let x = 10f64.powi(k);
            f.eval(x) / x
        })
        .collect();
    let b = classify_ratio_limit(&far);

    // Ratio monotonicity on a geometric grid.
    let mut ratios = Vec::new();
    let (lo, hi) = (1e-3_f64, 1e4_f64);
    let n = 240;
    for i in 0..=n {
        let x = lo * (hi / lo).powf(i as f64 / n as f64);
        ratios.push(f.eval(x) / x);
    }
    let scale = ratios
        .iter()
        .cloned()
        .fold(0.0_f64, |m, r| if r.is_finite() { m.max(r.abs()) } else { m });
    let noise = 1e-12 * scale.max(1e-300);
    let mut max_increase = 0.0_f64;
    for w in ratios.windows(2) {
        if w[1].is_finite() && w[0].is_finite() {
            max_increase = max_increase.max(w[1] - w[0]);
        } else if !w[1].is_finite() {
            max_increase = f64::INFINITY;
        }
    }
    let (ratio_decreasing, ratio_inconclusive) = if max_increase <= noise {
        (true, false)
    } else if max_increase > 100.0 * noise {
        (false, false)
    } else {
        (false, true)
    };

    // One-sided decrease bounds over nested ranges.
    let mut omega_table = Vec::new();
    for exp in -2..=6 {
        let sigma = 10f64.powi(exp);
        let mut worst = 0.0_f64;
        let mut prev = f.eval(0.0);
        let h = sigma / OMEGA_SAMPLES as f64;
        for i in 1..=OMEGA_SAMPLES {
            let cur = f.eval(i as f64 * h);
            let slope = (cur - prev) / h;
            if slope < -worst {
                worst = -slope;
            }
            prev = cur;
        }
        omega_table.push((sigma, if worst > 0.0 { worst * OMEGA_HEADROOM } else { 0.0 }));
    }

    Ok(AdmissibilityReport {
        slope_at_zero: ExtReal(a),
        slope_at_infinity: ExtReal(b),
        ratio_decreasing,
        ratio_inconclusive,
        lambda_window: (ExtReal(lambda1 / a), ExtReal(lambda1 / b)),
        omega_table,
    })
}

// Serialization: a tagged representation {"kind": "...", ...} with strict
// field checking on input.

impl Serialize for Nonlinearity {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut map = s.serialize_map(None)?;
        match self {
            Nonlinearity::Constant { value } => {
                map.serialize_entry("kind", "constant")?;
                map.serialize_entry("value", value)?;
            }
            Nonlinearity::Linear => map.serialize_entry("kind", "linear")?,
            Nonlinearity::Exponential => map.serialize_entry("kind", "exponential")?,
            Nonlinearity::Arrhenius { eps } => {
                map.serialize_entry("kind", "arrhenius")?;
                map.serialize_entry("eps", eps)?;
            }
            Nonlinearity::Perturbed { base, bump } => {
                map.serialize_entry("kind", "perturbed")?;
                map.serialize_entry("base", base)?;
                map.serialize_entry("bump", bump)?;
            }
        }
        map.end()
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NonlinearityFields {
    kind: String,
    #[serde(default)]
    value: Option<f64>,
    #[serde(default)]
    eps: Option<f64>,
    #[serde(default)]
    base: Option<Box<Nonlinearity>>,
    #[serde(default)]
    bump: Option<Bump>,
}

impl<'de> Deserialize<'de> for Nonlinearity {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let f = NonlinearityFields::deserialize(d)?;
        let reject_extras = |allowed: &[&str]| -> std::result::Result<(), D::Error> {
            let present = [
                ("value", f.value.is_some()),
                ("eps", f.eps.is_some()),
                ("base", f.base.is_some()),
                ("bump", f.bump.is_some()),
            ];
            for (name, here) in present {
                if here && !allowed.contains(&name) {
                    return Err(D::Error::custom(format!(
                        "field `{name}` is not accepted by kind `{}`",
                        f.kind
                    )));
                }
            }
            Ok(())
        };
        match f.kind.as_str() {
            "constant" => {
                reject_extras(&["value"])?;
                Ok(Nonlinearity::Constant {
                    value: f.value.unwrap_or(1.0),
                })
            }
            "linear" => {
                reject_extras(&[])?;
                Ok(Nonlinearity::Linear)
            }
            "exponential" => {
                reject_extras(&[])?;
                Ok(Nonlinearity::Exponential)
            }
            "arrhenius" => {
                reject_extras(&["eps"])?;
                let eps = f
                    .eps
                    .ok_or_else(|| D::Error::custom("kind `arrhenius` requires field `eps`"))?;
                Ok(Nonlinearity::Arrhenius { eps })
            }
            "perturbed" => {
                reject_extras(&["base", "bump"])?;
                let base = f
                    .base
                    .ok_or_else(|| D::Error::custom("kind `perturbed` requires field `base`"))?;
                let bump = f
                    .bump
                    .ok_or_else(|| D::Error::custom("kind `perturbed` requires field `bump`"))?;
                Ok(Nonlinearity::Perturbed { base, bump })
            }
            other => Err(D::Error::custom(format!(
                "unknown nonlinearity kind `{other}` (expected constant, linear, \
                 exponential, arrhenius, or perturbed)"
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::adaptive;
    use proptest::prelude::*;

    fn bump(m: f64, width: f64, amplitude: f64) -> Bump {
        Bump {
            m,
            width,
            amplitude,
        }
    }

    #[test]
    fn bump_peak_value_is_exact_at_midpoint() {
        let b = bump(1.0, 0.5, 0.37);
        assert_eq!(b.eval(1.25), 0.37);
    }

    #[test]
    fn bump_vanishes_with_flat_contact_at_edges() {
        let b = bump(2.0, 0.3, 1.0);
        assert_eq!(b.eval(2.0), 0.0);
        assert_eq!(b.eval(2.3), 0.0);
        assert_eq!(b.eval(1.9), 0.0);
        assert_eq!(b.eval(2.4), 0.0);
        assert_eq!(b.deriv(2.0), 0.0);
        assert_eq!(b.deriv(2.3), 0.0);
        // Cubic contact: value within C * delta^3 near each edge.
        for delta in [1e-3, 1e-4, 1e-5] {
            let v = b.eval(2.0 + delta);
            let t = delta / 0.3;
            assert!(v <= 41.0 * t * t * t, "edge contact too steep: {v}");
        }
    }

    #[test]
    fn unit_shape_mass_matches_quadrature() {
        let q = adaptive(unit_shape, 0.0, 1.0, 1e-13).unwrap();
        assert!((q - UNIT_SHAPE_MASS).abs() < 1e-12, "mass {q}");
        // The closed-form coefficients cancel from magnitudes near 40 down
        // to 0.43, so a few units in the last place of 40 is the honest
        // accuracy of the polynomial evaluation at t = 1.
        assert!((unit_shape_integral(1.0) - UNIT_SHAPE_MASS).abs() < 1e-13);
        assert_eq!(unit_shape_integral(0.0), 0.0);
    }

    #[test]
    fn bump_integral_matches_quadrature_on_partial_ranges() {
        let b = bump(0.7, 0.45, 2.3);
        for (lo, hi) in [(0.0, 3.0), (0.8, 1.0), (0.7, 0.95), (0.9, 5.0)] {
            let exact = b.integral_between(lo, hi);
            let q = adaptive(|x| b.eval(x), lo, hi, 1e-13).unwrap();
            assert!(
                (exact - q).abs() < 1e-11 * (1.0 + q.abs()),
                "range ({lo}, {hi}): closed {exact} vs quad {q}"
            );
        }
    }

    #[test]
    fn exponential_antiderivative_avoids_cancellation() {
        let f = Nonlinearity::Exponential;
        // Tiny interval at moderate height: direct e^hi - e^lo loses ~7
        // digits here; the expm1 form must stay exact. The reference uses
        // the width hi - lo as actually rounded, since 5.0 + 1e-9 itself
        // carries half an ulp of 5.
        let (lo, d) = (5.0_f64, 1e-9);
        let hi = lo + d;
        let w = hi - lo;
        let got = f.antiderivative_between(lo, hi);
        let exact = lo.exp() * (w + w * w / 2.0 + w * w * w / 6.0);
        assert!(
            ((got - exact) / exact).abs() < 1e-14,
            "got {got:e}, exact {exact:e}"
        );
    }

    #[test]
    fn arrhenius_antiderivative_matches_adaptive_quadrature() {
        let f = Nonlinearity::arrhenius(0.2);
        for (lo, hi) in [(0.0, 5.0), (3.3, 60.0), (10.0, 10.5), (7.0, 2.0)] {
            let got = f.antiderivative_between(lo, hi);
            let q = adaptive(|x| f.eval(x), lo, hi, 1e-13).unwrap();
            assert!(
                ((got - q) / q.abs().max(1e-30)).abs() < 1e-11,
                "range ({lo}, {hi}): {got} vs {q}"
            );
        }
    }

    #[test]
    fn perturbed_antiderivative_is_base_plus_bump() {
        let base = Nonlinearity::Exponential;
        let p = build_perturbation(&base, 1.0, 0.5, 0.2, false).unwrap();
        let got = p.antiderivative_between(0.5, 2.0);
        let expect = base.antiderivative_between(0.5, 2.0)
            + bump(1.0, 0.5, 0.2).integral_between(0.5, 2.0);
        assert!((got - expect).abs() < 1e-14 * expect.abs());
    }

    #[test]
    fn ratio_derivative_closed_form_matches_finite_differences() {
        let eps = 0.3;
        let x = 1.0;
        let f = Nonlinearity::arrhenius(eps);
        let h = 1e-6;
        let fd = (f.eval(x + h) / (x + h) - f.eval(x - h) / (x - h)) / (2.0 * h);
        let cf = arrhenius_ratio_derivative(eps, x);
        assert!(
            ((cf - fd) / fd).abs() < 1e-8,
            "closed {cf:e} vs centered {fd:e}"
        );
    }

    #[test]
    fn ratio_derivative_is_nonpositive_at_quarter_saturation() {
        // eps = 1/4 makes the sign-controlling quadratic a perfect square,
        // so the ratio never increases.
        for i in 1..2000 {
            let x = i as f64 * 0.05;
            assert!(
                arrhenius_ratio_derivative(0.25, x) <= 0.0,
                "ratio increases at x = {x}"
            );
        }
        // Below the 1/4 threshold the quadratic has real roots (for
        // eps = 0.2 they sit near 1.91 and 13.09), so the ratio genuinely
        // increases in between.
        assert!(arrhenius_ratio_derivative(0.2, 4.0) > 0.0);
        assert!(arrhenius_ratio_derivative(0.2, 1.0) < 0.0);
        assert!(arrhenius_ratio_derivative(0.2, 20.0) < 0.0);
    }

    #[test]
    fn admissibility_classifies_the_built_in_family() {
        let lam1 = std::f64::consts::PI.powi(2) / 4.0;
        let arr = admissibility(&Nonlinearity::arrhenius(0.25), lam1).unwrap();
        assert_eq!(arr.slope_at_zero.0, f64::INFINITY);
        assert_eq!(arr.slope_at_infinity.0, 0.0);
        assert!(arr.ratio_decreasing);
        assert_eq!(arr.lambda_window.0 .0, 0.0);
        assert_eq!(arr.lambda_window.1 .0, f64::INFINITY);
        assert!(arr.omega_table.iter().all(|(_, w)| *w == 0.0));

        let lin = admissibility(&Nonlinearity::Linear, lam1).unwrap();
        assert!((lin.slope_at_zero.0 - 1.0).abs() < 1e-9);
        assert!((lin.slope_at_infinity.0 - 1.0).abs() < 1e-9);
        assert!((lin.lambda_window.0 .0 - lam1).abs() < 1e-8);

        let cst = admissibility(&Nonlinearity::constant(1.0), lam1).unwrap();
        assert_eq!(cst.slope_at_zero.0, f64::INFINITY);
        assert_eq!(cst.slope_at_infinity.0, 0.0);

        let exp = admissibility(&Nonlinearity::Exponential, lam1).unwrap();
        assert_eq!(exp.slope_at_zero.0, f64::INFINITY);
        assert_eq!(exp.slope_at_infinity.0, f64::INFINITY);
        assert!(!exp.ratio_decreasing);
    }

    #[test]
    fn omega_bounds_the_decrease_of_a_non_monotone_perturbation() {
        // A large free bump on a slowly rising base makes the sum dip.
        let base = Nonlinearity::arrhenius(0.3);
        let p = build_perturbation(&base, 2.0, 0.4, 3.0, false).unwrap();
        let rep = admissibility(&p, 1.0).unwrap();
        let omega = rep.omega(10.0);
        assert!(omega > 0.0, "expected a positive decrease bound");
        // Direct check on a fine grid: omega really bounds -f'.
        let mut steepest = 0.0_f64;
        for i in 0..40_000 {
            let x = 10.0 * i as f64 / 40_000.0;
            steepest = steepest.max(-p.deriv(x));
        }
        assert!(
            omega >= steepest,
            "omega {omega} below observed decrease {steepest}"
        );
    }

    #[test]
    fn monotone_cap_blocks_infeasible_amplitudes() {
        let base = Nonlinearity::arrhenius(0.3);
        let err = build_perturbation(&base, 3.0, 0.3, 0.3, true).unwrap_err();
        match err {
            Error::InfeasibleAmplitude {
                feasible_cap,
                requested,
                ..
            } => {
                assert_eq!(requested, 0.3);
                assert!(
                    (0.10..0.12).contains(&feasible_cap),
                    "cap {feasible_cap} outside the expected window"
                );
                // At 98% of the cap the build succeeds and the sum is
                // nondecreasing across the support.
                let p =
                    build_perturbation(&base, 3.0, 0.3, 0.98 * feasible_cap, true).unwrap();
                for i in 0..=20_000 {
                    let x = 3.0 + 0.3 * i as f64 / 20_000.0;
                    assert!(
                        p.deriv(x) >= -1e-12,
                        "perturbed slope negative at x = {x}: {}",
                        p.deriv(x)
                    );
                }
            }
            other => panic!("expected InfeasibleAmplitude, got {other:?}"),
        }
    }

    #[test]
    fn zero_amplitude_perturbation_is_allowed_and_inert() {
        let base = Nonlinearity::arrhenius(0.3);
        let p = build_perturbation(&base, 2.0, 0.3, 0.0, true).unwrap();
        for i in 0..=100 {
            let x = 3.0 * i as f64 / 100.0;
            assert_eq!(p.eval(x), base.eval(x));
        }
    }

    #[test]
    fn serde_roundtrip_and_strict_fields() {
        let p = build_perturbation(&Nonlinearity::arrhenius(0.24), 3.0, 0.24, 0.05, true)
            .unwrap();
        let json = serde_json::to_string(&p).unwrap();
        let back: Nonlinearity = serde_json::from_str(&json).unwrap();
        assert_eq!(back, p);

        let ok: Nonlinearity =
            serde_json::from_str(r#"{"kind":"arrhenius","eps":0.25}"#).unwrap();
        assert_eq!(ok, Nonlinearity::arrhenius(0.25));

        let dflt: Nonlinearity = serde_json::from_str(r#"{"kind":"constant"}"#).unwrap();
        assert_eq!(dflt, Nonlinearity::constant(1.0));

        assert!(serde_json::from_str::<Nonlinearity>(r#"{"kind":"arrhenius"}"#).is_err());
        assert!(
            serde_json::from_str::<Nonlinearity>(r#"{"kind":"linear","eps":0.1}"#).is_err()
        );
        assert!(serde_json::from_str::<Nonlinearity>(
            r#"{"kind":"arrhenius","eps":0.2,"typo":1}"#
        )
        .is_err());
        assert!(serde_json::from_str::<Nonlinearity>(r#"{"kind":"gaussian"}"#).is_err());
    }

    #[test]
    fn arrhenius_extends_by_zero_past_its_pole() {
        let f = Nonlinearity::arrhenius(0.25);
        assert_eq!(f.eval(-4.0), 0.0);
        assert_eq!(f.eval(-5.0), 0.0);
        assert_eq!(f.deriv(-4.0), 0.0);
        assert!(f.eval(-3.9) > 0.0);
    }

    proptest! {
        #[test]
        fn bump_stays_within_amplitude(
            m in 0.0..5.0_f64,
            width in 0.01..2.0_f64,
            amp in 0.0..10.0_f64,
            x in -1.0..8.0_f64,
        ) {
            let b = bump(m, width, amp);
            let v = b.eval(x);
            prop_assert!(v >= 0.0);
            prop_assert!(v <= amp * (1.0 + 1e-12));
        }

        #[test]
        fn antiderivative_is_additive_and_antisymmetric(
            lo in 0.0..20.0_f64,
            mid in 0.0..20.0_f64,
            hi in 0.0..20.0_f64,
        ) {
            let f = Nonlinearity::arrhenius(0.22);
            let a = f.antiderivative_between(lo, mid) + f.antiderivative_between(mid, hi);
            let b = f.antiderivative_between(lo, hi);
            let scale = a.abs().max(b.abs()).max(1.0);
            prop_assert!((a - b).abs() < 1e-11 * scale);
            let fwd = f.antiderivative_between(lo, hi);
            let rev = f.antiderivative_between(hi, lo);
            prop_assert!((fwd + rev).abs() < 1e-11 * scale);
        }

        #[test]
        fn bump_integral_additivity(
            m in 0.0..3.0_f64,
            width in 0.05..1.0_f64,
            amp in 0.0..5.0_f64,
            cut in 0.0..4.5_f64,
        ) {
            let b = bump(m, width, amp);
            let whole = b.integral_between(0.0, 4.5);
            let split = b.integral_between(0.0, cut) + b.integral_between(cut, 4.5);
            prop_assert!((whole - split).abs() < 1e-12 * (1.0 + whole.abs()));
        }
    }
}
