//! Problem description: dimension, domain, nonlinearity.

use crate::defaults;
use crate::error::{Error, Result};
use crate::nonlinearity::Nonlinearity;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// The spatial domain. Dimension 1 uses an interval (0, L); dimensions 2
/// and 3 use the ball of the given radius, with radially symmetric
/// solutions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Domain {
    Interval { length: f64 },
    Ball { radius: f64 },
}

impl Domain {
    /// Interval length or ball radius.
    pub fn extent(&self) -> f64 {
        match self {
            Domain::Interval { length } => *length,
            Domain::Ball { radius } => *radius,
        }
    }
}

/// A complete problem instance for -laplace(u) = lambda f(u) with zero
/// boundary data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub dimension: usize,
    pub domain: Domain,
    pub nonlinearity: Nonlinearity,
}

impl ProblemSpec {
    pub fn interval(length: f64, nonlinearity: Nonlinearity) -> Self {
        ProblemSpec {
            dimension: 1,
            domain: Domain::Interval { length },
            nonlinearity,
        }
    }

    pub fn ball(dimension: usize, radius: f64, nonlinearity: Nonlinearity) -> Self {
        ProblemSpec {
            dimension,
            domain: Domain::Ball { radius },
            nonlinearity,
        }
    }

    /// Check dimension / domain consistency and nonlinearity ranges.
    pub fn validate(&self) -> Result<()> {
        match (self.dimension, &self.domain) {
            (1, Domain::Interval { length }) => {
                if !length.is_finite() || *length <= 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "interval length must be positive, got {length}"
                    )));
                }
            }
            (2 | 3, Domain::Ball { radius }) => {
                if !radius.is_finite() || *radius <= 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "ball radius must be positive, got {radius}"
                    )));
                }
            }
            (1, Domain::Ball { .. }) => {
                return Err(Error::InvalidParameter(
                    "dimension 1 uses an interval domain, not a ball".into(),
                ))
            }
            (2 | 3, Domain::Interval { .. }) => {
                return Err(Error::InvalidParameter(
                    "dimensions 2 and 3 use a ball domain, not an interval".into(),
                ))
            }
            (d, _) => return Err(Error::UnsupportedDimension(d)),
        }
        self.nonlinearity.validate(100.0)
    }

    /// Principal Dirichlet eigenvalue of -laplace on the domain:
    /// (pi/L)^2 on the interval, (j_0 / R)^2 on the disc where j_0 is the
    /// first zero of J0, and (pi/R)^2 on the three dimensional ball.
    pub fn lambda1(&self) -> f64 {
        let pi = std::f64::consts::PI;
        match (self.dimension, &self.domain) {
            (1, Domain::Interval { length }) => (pi / length).powi(2),
            (2, Domain::Ball { radius }) => defaults::J0_FIRST_ZERO_SQ / (radius * radius),
            (3, Domain::Ball { radius }) => (pi / radius).powi(2),
            _ => f64::NAN,
        }
    }

    pub fn extent(&self) -> f64 {
        self.domain.extent()
    }
}

impl Serialize for Domain {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut map = s.serialize_map(None)?;
        match self {
            Domain::Interval { length } => {
                map.serialize_entry("shape", "interval")?;
                map.serialize_entry("length", length)?;
            }
            Domain::Ball { radius } => {
                map.serialize_entry("shape", "ball")?;
                map.serialize_entry("radius", radius)?;
            }
        }
        map.end()
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DomainFields {
    shape: String,
    #[serde(default)]
    length: Option<f64>,
    #[serde(default)]
    radius: Option<f64>,
}

impl<'de> Deserialize<'de> for Domain {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let f = DomainFields::deserialize(d)?;
        match f.shape.as_str() {
            "interval" => {
                if f.radius.is_some() {
                    return Err(D::Error::custom("shape `interval` does not take `radius`"));
                }
                let length = f
                    .length
                    .ok_or_else(|| D::Error::custom("shape `interval` requires `length`"))?;
                Ok(Domain::Interval { length })
            }
            "ball" => {
                if f.length.is_some() {
                    return Err(D::Error::custom("shape `ball` does not take `length`"));
                }
                let radius = f
                    .radius
                    .ok_or_else(|| D::Error::custom("shape `ball` requires `radius`"))?;
                Ok(Domain::Ball { radius })
            }
            other => Err(D::Error::custom(format!(
                "unknown domain shape `{other}` (expected interval or ball)"
            ))),
        }
    }
}
