//! Shared branch data: points, termination reasons, and an extended real
//! scalar for report fields that may be infinite.

use serde::de::{self, Deserializer, Visitor};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

/// A float that serializes infinities as the strings `"inf"` / `"-inf"`,
/// since JSON numbers cannot carry them. Finite values serialize as plain
/// numbers.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct ExtReal(pub f64);

impl ExtReal {
    pub fn is_finite(self) -> bool {
        self.0.is_finite()
    }
}

impl From<f64> for ExtReal {
    fn from(v: f64) -> Self {
        ExtReal(v)
    }
}

impl std::fmt::Display for ExtReal {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.0 == f64::INFINITY {
            write!(f, "inf")
        } else if self.0 == f64::NEG_INFINITY {
            write!(f, "-inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0 == f64::INFINITY {
            s.serialize_str("inf")
        } else if self.0 == f64::NEG_INFINITY {
            s.serialize_str("-inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for ExtReal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = ExtReal;
            fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                f.write_str("a number, or the string \"inf\" or \"-inf\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<ExtReal, E> {
                Ok(ExtReal(v))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<ExtReal, E> {
                Ok(ExtReal(v as f64))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<ExtReal, E> {
                Ok(ExtReal(v as f64))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<ExtReal, E> {
                match v {
                    "inf" => Ok(ExtReal(f64::INFINITY)),
                    "-inf" => Ok(ExtReal(f64::NEG_INFINITY)),
                    other => Err(E::custom(format!("not an extended real: {other:?}"))),
                }
            }
        }
        d.deserialize_any(V)
    }
}

/// Why a branch trace or sweep stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminationReason {
    /// The requested sup-norm range was covered in full.
    AlphaMax,
    /// The shooting profile stopped crossing zero (no solution beyond).
    NoZero,
    /// A fixed-point iteration blew up, so the branch ends at the onset.
    Divergence,
}

/// One point on a solution branch.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BranchPoint {
    /// Sup-norm of the solution (its value at the center / midpoint).
    pub alpha: f64,
    /// Parameter value at which this solution exists.
    pub lambda: f64,
    /// Cumulative polyline arclength in the (lambda, alpha) plane.
    pub arclength: f64,
    /// Radial or interval profile samples, when the solver produces them.
    /// Entries are (coordinate, value) pairs from the center outward.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub profile: Option<Vec<(f64, f64)>>,
}

/// A polyline approximation of a solution branch, ordered by increasing
/// sup-norm.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Branch {
    pub points: Vec<BranchPoint>,
    pub termination: TerminationReason,
    /// For `Divergence` terminations: the first parameter value at which the
    /// iteration blew up.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub divergence_onset: Option<f64>,
}

impl Branch {
    /// Assemble a branch from (alpha, lambda, profile) triples, computing
    /// arclength cumulatively in the (lambda, alpha) plane.
    pub fn from_points(
        mut pts: Vec<(f64, f64, Option<Vec<(f64, f64)>>)>,
        termination: TerminationReason,
    ) -> Branch {
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut points = Vec::with_capacity(pts.len());
        let mut arc = 0.0;
        let mut prev: Option<(f64, f64)> = None;
        for (alpha, lambda, profile) in pts {
            if let Some((pa, pl)) = prev {
                arc += ((alpha - pa).powi(2) + (lambda - pl).powi(2)).sqrt();
            }
            prev = Some((alpha, lambda));
            points.push(BranchPoint {
                alpha,
                lambda,
                arclength: arc,
                profile,
            });
        }
        Branch {
            points,
            termination,
            divergence_onset: None,
        }
    }

    pub fn alphas(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.alpha).collect()
    }

    pub fn lambdas(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.lambda).collect()
    }

    /// Largest lambda over the polyline, with the index attaining it.
    pub fn lambda_max(&self) -> Option<(usize, f64)> {
        self.points
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.lambda.total_cmp(&b.1.lambda))
            .map(|(i, p)| (i, p.lambda))
    }

    /// First alpha (on the lower, minimal segment) at which the branch
    /// reaches the given lambda, by linear interpolation. Walks from the
    /// start, so it sees the minimal segment before any fold.
    pub fn alpha_at_lambda_lower(&self, lambda: f64) -> Option<f64> {
        let pts = &self.points;
        for w in pts.windows(2) {
            let (l0, l1) = (w[0].lambda, w[1].lambda);
            if (l0 <= lambda && lambda <= l1) || (l1 <= lambda && lambda <= l0) {
                if l0 == l1 {
                    return Some(w[0].alpha);
                }
                let t = (lambda - l0) / (l1 - l0);
                return Some(w[0].alpha + t * (w[1].alpha - w[0].alpha));
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arclength_is_cumulative_and_sorted() {
        let b = Branch::from_points(
            vec![(2.0, 1.0, None), (0.0, 0.0, None), (1.0, 1.0, None)],
            TerminationReason::AlphaMax,
        );
        let a: Vec<f64> = b.alphas();
        assert_eq!(a, vec![0.0, 1.0, 2.0]);
        assert!((b.points[1].arclength - 2.0_f64.sqrt()).abs() < 1e-15);
        assert!((b.points[2].arclength - 2.0_f64.sqrt() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn lower_alpha_interpolation_sees_first_crossing() {
        // Fold shape: lambda rises to 2 then falls; alpha_at_lambda_lower(1.5)
        // must return the lower-segment crossing.
        let b = Branch::from_points(
            vec![
                (0.0, 0.0, None),
                (1.0, 2.0, None),
                (2.0, 1.0, None),
            ],
            TerminationReason::AlphaMax,
        );
        let a = b.alpha_at_lambda_lower(1.5).unwrap();
        assert!((a - 0.75).abs() < 1e-15, "got {a}");
    }

    #[test]
    fn extended_real_serialization_roundtrip() {
        let vals = [ExtReal(1.5), ExtReal(f64::INFINITY), ExtReal(f64::NEG_INFINITY)];
        let json = serde_json::to_string(&vals).unwrap();
        assert_eq!(json, "[1.5,\"inf\",\"-inf\"]");
        let back: Vec<ExtReal> = serde_json::from_str(&json).unwrap();
        assert_eq!(back[0].0, 1.5);
        assert_eq!(back[1].0, f64::INFINITY);
        assert_eq!(back[2].0, f64::NEG_INFINITY);
    }
}
