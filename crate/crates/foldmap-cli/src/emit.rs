//! Deterministic artifact emission.
//!
//! JSON is written with sorted keys and every float in a fixed
//! 17-significant-digit scientific format, so identical inputs produce
//! byte-identical files. CSV uses the same float format. SVG plots are
//! hand-emitted minimal documents: axes, a branch polyline, filled
//! circles on folds, dashed verticals on minimal-branch jumps. All files
//! land atomically via a temporary file plus rename.

use crate::commands::Failure;
use foldmap::topology::FoldPoint;
use foldmap::Branch;
use serde::Serialize;
use serde_json::Value;
use std::io::Write;
use std::path::{Path, PathBuf};

/// Fixed float format: 17 significant digits, scientific.
pub fn float_repr(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_json_string(s: &str, out: &mut String) {
    // serde_json performs the full escaping.
    out.push_str(&serde_json::to_string(s).expect("string serialization"));
}

fn write_value(v: &Value, indent: usize, out: &mut String) {
    let pad = "  ".repeat(indent);
    let pad_in = "  ".repeat(indent + 1);
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                out.push_str(&i.to_string());
            } else if let Some(u) = n.as_u64() {
                out.push_str(&u.to_string());
            } else {
                out.push_str(&float_repr(n.as_f64().expect("numeric value")));
            }
        }
        Value::String(s) => write_json_string(s, out),
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            out.push_str("[\n");
            for (k, item) in items.iter().enumerate() {
                out.push_str(&pad_in);
                write_value(item, indent + 1, out);
                if k + 1 < items.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            out.push_str(&pad);
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push_str("{\n");
            for (k, key) in keys.iter().enumerate() {
                out.push_str(&pad_in);
                write_json_string(key, out);
                out.push_str(": ");
                write_value(&map[*key], indent + 1, out);
                if k + 1 < keys.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            out.push_str(&pad);
            out.push('}');
        }
    }
}

/// Serialize to canonical JSON text: sorted keys, fixed float format,
/// trailing newline.
pub fn to_canonical_json<T: Serialize>(value: &T) -> Result<String, Failure> {
    let v = serde_json::to_value(value)
        .map_err(|e| Failure::Solver(format!("report serialization failed: {e}")))?;
    let mut out = String::new();
    write_value(&v, 0, &mut out);
    out.push('\n');
    Ok(out)
}

/// Write a file atomically into `dir`.
pub fn write_atomic(dir: &Path, name: &str, content: &str) -> Result<PathBuf, Failure> {
    let io_err = |e: &dyn std::fmt::Display| Failure::Solver(format!("writing {name}: {e}"));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| io_err(&e))?;
    tmp.write_all(content.as_bytes()).map_err(|e| io_err(&e))?;
    let path = dir.join(name);
    tmp.persist(&path)
        .map_err(|e| Failure::Solver(format!("renaming into {}: {e}", path.display())))?;
    Ok(path)
}

/// Branch points whose alpha is nearest to each fold, for CSV marking.
pub fn fold_marks(branch: &Branch, folds: &[FoldPoint]) -> Vec<usize> {
    let mut marks: Vec<usize> = folds
        .iter()
        .filter_map(|f| {
            branch
                .points
                .iter()
                .enumerate()
                .min_by(|a, b| {
                    (a.1.alpha - f.alpha)
                        .abs()
                        .total_cmp(&(b.1.alpha - f.alpha).abs())
                })
                .map(|(i, _)| i)
        })
        .collect();
    marks.sort_unstable();
    marks.dedup();
    marks
}

/// Branch table: `index,alpha,lambda,arclength,is_fold`.
pub fn branch_csv(branch: &Branch, marks: &[usize]) -> String {
    let mut s = String::from("index,alpha,lambda,arclength,is_fold\n");
    for (i, p) in branch.points.iter().enumerate() {
        let is_fold = u8::from(marks.binary_search(&i).is_ok());
        s.push_str(&format!(
            "{i},{},{},{},{is_fold}\n",
            float_repr(p.alpha),
            float_repr(p.lambda),
            float_repr(p.arclength),
        ));
    }
    s
}

/// Numeric table with a caller-supplied header; floats in fixed format.
pub fn numeric_csv(header: &str, rows: &[Vec<f64>]) -> String {
    let mut s = String::from(header);
    s.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|&x| float_repr(x)).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

/// Data for one diagram plot in the (lambda, alpha) plane.
pub struct SvgDiagram<'a> {
    /// The branch polyline as (lambda, alpha) pairs.
    pub points: &'a [(f64, f64)],
    /// Folds marked with filled circles.
    pub folds: &'a [(f64, f64)],
    /// Minimal-branch jumps drawn as dashed verticals:
    /// (lambda, alpha_minus, alpha_plus).
    pub jumps: &'a [(f64, f64, f64)],
}

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    const W: f64 = 760.0;
    const H: f64 = 480.0;
    const L: f64 = 72.0;
    const R: f64 = 24.0;
    const T: f64 = 24.0;
    const B: f64 = 56.0;

    fn from(d: &SvgDiagram) -> Frame {
        let mut xs: Vec<f64> = d.points.iter().map(|p| p.0).collect();
        let mut ys: Vec<f64> = d.points.iter().map(|p| p.1).collect();
        xs.extend(d.folds.iter().map(|f| f.0));
        ys.extend(d.folds.iter().map(|f| f.1));
        for j in d.jumps {
            xs.push(j.0);
            ys.push(j.1);
            ys.push(j.2);
        }
        let span = |v: &[f64]| -> (f64, f64) {
            let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            if !lo.is_finite() || !hi.is_finite() {
                return (0.0, 1.0);
            }
            let mut pad = 0.05 * (hi - lo);
            if pad <= 1e-12 {
                pad = 0.5_f64.max(0.1 * hi.abs());
            }
            (lo - pad, hi + pad)
        };
        let (x0, x1) = span(&xs);
        let (y0, y1) = span(&ys);
        Frame { x0, x1, y0, y1 }
    }

    fn x(&self, v: f64) -> f64 {
        Frame::L + (v - self.x0) / (self.x1 - self.x0) * (Frame::W - Frame::L - Frame::R)
    }

    // SVG y grows downward; alpha grows upward.
    fn y(&self, v: f64) -> f64 {
        Frame::H - Frame::B - (v - self.y0) / (self.y1 - self.y0) * (Frame::H - Frame::T - Frame::B)
    }
}

/// Emit a minimal standalone SVG of the diagram.
pub fn diagram_svg(d: &SvgDiagram) -> String {
    let f = Frame::from(d);
    let mut s = String::new();
    s.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" \
         viewBox=\"0 0 {w} {h}\">\n",
        w = Frame::W,
        h = Frame::H
    ));
    s.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");

    // Axes.
    let (ax_y, ax_x0, ax_x1) = (Frame::H - Frame::B, Frame::L, Frame::W - Frame::R);
    s.push_str(&format!(
        "<line x1=\"{ax_x0}\" y1=\"{ax_y}\" x2=\"{ax_x1}\" y2=\"{ax_y}\" \
         stroke=\"black\" stroke-width=\"1\"/>\n"
    ));
    s.push_str(&format!(
        "<line x1=\"{ax_x0}\" y1=\"{}\" x2=\"{ax_x0}\" y2=\"{ax_y}\" \
         stroke=\"black\" stroke-width=\"1\"/>\n",
        Frame::T
    ));

    // Ticks and labels.
    for k in 0..=5 {
        let t = k as f64 / 5.0;
        let xv = f.x0 + t * (f.x1 - f.x0);
        let xp = f.x(xv);
        s.push_str(&format!(
            "<line x1=\"{xp:.2}\" y1=\"{ax_y}\" x2=\"{xp:.2}\" y2=\"{}\" \
             stroke=\"black\"/>\n",
            ax_y + 5.0
        ));
        s.push_str(&format!(
            "<text x=\"{xp:.2}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" \
             text-anchor=\"middle\">{xv:.3}</text>\n",
            ax_y + 20.0
        ));
        let yv = f.y0 + t * (f.y1 - f.y0);
        let yp = f.y(yv);
        s.push_str(&format!(
            "<line x1=\"{}\" y1=\"{yp:.2}\" x2=\"{ax_x0}\" y2=\"{yp:.2}\" \
             stroke=\"black\"/>\n",
            ax_x0 - 5.0
        ));
        s.push_str(&format!(
            "<text x=\"{}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"12\" \
             text-anchor=\"end\">{yv:.3}</text>\n",
            ax_x0 - 9.0,
            yp + 4.0
        ));
    }
    s.push_str(&format!(
        "<text x=\"{:.2}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"13\" \
         text-anchor=\"middle\">lambda</text>\n",
        0.5 * (ax_x0 + ax_x1),
        Frame::H - 14.0
    ));
    s.push_str(&format!(
        "<text x=\"18\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"13\" \
         text-anchor=\"middle\" transform=\"rotate(-90 18 {mid:.2})\">alpha</text>\n",
        0.5 * (Frame::T + ax_y),
        mid = 0.5 * (Frame::T + ax_y)
    ));

    // Branch polyline.
    if d.points.len() > 1 {
        let pts: Vec<String> = d
            .points
            .iter()
            .map(|p| format!("{:.2},{:.2}", f.x(p.0), f.y(p.1)))
            .collect();
        s.push_str(&format!(
            "<polyline points=\"{}\" fill=\"none\" stroke=\"#23537f\" \
             stroke-width=\"1.5\"/>\n",
            pts.join(" ")
        ));
    }

    // Jumps: dashed verticals.
    for &(l, a_minus, a_plus) in d.jumps {
        s.push_str(&format!(
            "<line x1=\"{x:.2}\" y1=\"{:.2}\" x2=\"{x:.2}\" y2=\"{:.2}\" \
             stroke=\"#777777\" stroke-width=\"1.5\" stroke-dasharray=\"6 4\"/>\n",
            f.y(a_minus),
            f.y(a_plus),
            x = f.x(l)
        ));
    }

    // Folds: filled circles on top.
    for &(l, a) in d.folds {
        s.push_str(&format!(
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"4\" fill=\"#b03a2e\"/>\n",
            f.x(l),
            f.y(a)
        ));
    }

    s.push_str("</svg>\n");
    s
}
