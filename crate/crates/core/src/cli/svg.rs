//! Standalone SVG rendering of verdict grids and threshold curves in the
//! `(w, s)` plane: colored cells by verdict, overlaid curve polylines, axes.

use crate::params::VerdictLabel;
use crate::thresholds::{Branch, RepulsiveClassifier, SweepResult};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 50.0;

const COLOR_SUB: &str = "#8f5fd0";
const COLOR_SUP: &str = "#58c5d8";
const COLOR_IND: &str = "#d8d8d8";

pub struct CurvePlot {
    pub label: String,
    /// Polyline in `(w, s)` coordinates.
    pub points: Vec<(f64, f64)>,
}

/// Boundary polylines of the constructed regions: `w = -g(s)` for P curves,
/// `w = +g(s)` for N curves.
pub fn curve_plots(cls: &RepulsiveClassifier) -> Vec<CurvePlot> {
    cls.curves()
        .into_iter()
        .map(|(label, curve)| {
            let points = curve
                .samples()
                .step_by(8)
                .map(|(s, g)| match curve.branch {
                    Branch::P => (-g, s),
                    Branch::N => (g, s),
                })
                .collect();
            CurvePlot {
                label: label.to_string(),
                points,
            }
        })
        .collect()
}

struct Frame {
    w_min: f64,
    w_max: f64,
    s_min: f64,
    s_max: f64,
}

impl Frame {
    fn x(&self, w: f64) -> f64 {
        MARGIN + (w - self.w_min) / (self.w_max - self.w_min) * (WIDTH - 2.0 * MARGIN)
    }

    fn y(&self, s: f64) -> f64 {
        // s increases upward.
        HEIGHT - MARGIN - (s - self.s_min) / (self.s_max - self.s_min) * (HEIGHT - 2.0 * MARGIN)
    }
}

/// Renders a standalone SVG document. An empty grid yields axes only.
pub fn emit_svg(sweep: Option<&SweepResult>, curves: &[CurvePlot]) -> String {
    let mut w_lo = f64::INFINITY;
    let mut w_hi = f64::NEG_INFINITY;
    let mut s_lo = f64::INFINITY;
    let mut s_hi = f64::NEG_INFINITY;
    if let Some(sweep) = sweep {
        w_lo = w_lo.min(sweep.grid.w_min);
        w_hi = w_hi.max(sweep.grid.w_max);
        s_lo = s_lo.min(sweep.grid.s_min);
        s_hi = s_hi.max(sweep.grid.s_max);
    }
    for c in curves {
        for (w, s) in &c.points {
            w_lo = w_lo.min(*w);
            w_hi = w_hi.max(*w);
            s_lo = s_lo.min(*s);
            s_hi = s_hi.max(*s);
        }
    }
    if !w_lo.is_finite() || w_lo >= w_hi {
        (w_lo, w_hi) = (-1.0, 1.0);
    }
    if !s_lo.is_finite() || s_lo >= s_hi {
        (s_lo, s_hi) = (0.0, 1.0);
    }
    let frame = Frame {
        w_min: w_lo,
        w_max: w_hi,
        s_min: s_lo,
        s_max: s_hi,
    };

    let mut out = String::with_capacity(1 << 16);
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    out.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");

    if let Some(sweep) = sweep {
        let cw = (WIDTH - 2.0 * MARGIN) / (sweep.grid.n_w as f64);
        let ch = (HEIGHT - 2.0 * MARGIN) / (sweep.grid.n_s as f64);
        for cell in &sweep.cells {
            let color = match cell.verdict.label {
                VerdictLabel::Subcritical => COLOR_SUB,
                VerdictLabel::Supercritical => COLOR_SUP,
                VerdictLabel::Indeterminate => COLOR_IND,
            };
            let x = frame.x(cell.w) - 0.5 * cw;
            let y = frame.y(cell.s) - 0.5 * ch;
            out.push_str(&format!(
                "<rect x=\"{x:.2}\" y=\"{y:.2}\" width=\"{cw:.2}\" height=\"{ch:.2}\" \
                 fill=\"{color}\"/>\n"
            ));
        }
    }

    for curve in curves {
        if curve.points.is_empty() {
            continue;
        }
        let mut path = String::new();
        for (i, (w, s)) in curve.points.iter().enumerate() {
            let cmd = if i == 0 { 'M' } else { 'L' };
            path.push_str(&format!("{cmd}{:.2},{:.2} ", frame.x(*w), frame.y(*s)));
        }
        out.push_str(&format!(
            "<path d=\"{path}\" fill=\"none\" stroke=\"black\" stroke-width=\"1.5\"/>\n"
        ));
        if let Some((w, s)) = curve.points.get(curve.points.len() / 2) {
            out.push_str(&format!(
                "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"12\">{}</text>\n",
                frame.x(*w) + 4.0,
                frame.y(*s) - 4.0,
                curve.label
            ));
        }
    }

    // Axes with end labels.
    let x0 = frame.x(frame.w_min);
    let x1 = frame.x(frame.w_max);
    let y0 = frame.y(frame.s_min);
    let y1 = frame.y(frame.s_max);
    out.push_str(&format!(
        "<line x1=\"{x0:.2}\" y1=\"{y0:.2}\" x2=\"{x1:.2}\" y2=\"{y0:.2}\" stroke=\"black\"/>\n"
    ));
    out.push_str(&format!(
        "<line x1=\"{x0:.2}\" y1=\"{y0:.2}\" x2=\"{x0:.2}\" y2=\"{y1:.2}\" stroke=\"black\"/>\n"
    ));
    out.push_str(&format!(
        "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"14\">w</text>\n",
        0.5 * (x0 + x1),
        y0 + 32.0
    ));
    out.push_str(&format!(
        "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"14\">s</text>\n",
        x0 - 32.0,
        0.5 * (y0 + y1)
    ));
    for (v, x, y, anchor) in [
        (frame.w_min, x0, y0 + 16.0, "middle"),
        (frame.w_max, x1, y0 + 16.0, "middle"),
    ] {
        out.push_str(&format!(
            "<text x=\"{x:.2}\" y=\"{y:.2}\" font-size=\"10\" text-anchor=\"{anchor}\">{v:.3}</text>\n"
        ));
    }
    for (v, y) in [(frame.s_min, y0), (frame.s_max, y1)] {
        out.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"10\" text-anchor=\"end\">{v:.3}</text>\n",
            x0 - 6.0,
            y + 4.0
        ));
    }
    out.push_str("</svg>\n");
    out
}
