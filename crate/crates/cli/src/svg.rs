//! Minimal deterministic SVG line charts.
//!
//! The emitter writes plain SVG with fixed formatting (`{:.2}` for every
//! coordinate) so that the same chart data always produces byte-identical
//! output. Axes can be logarithmic; tick positions are either derived (five
//! evenly spaced in transformed space) or pinned explicitly.

use std::fmt::Write as _;

pub const PALETTE: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

pub struct Series {
    pub label: String,
    pub color: &'static str,
    pub dashed: bool,
    pub points: Vec<(f64, f64)>,
}

pub struct Chart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub log_y: bool,
    /// Explicit x tick positions (data space). Empty means five evenly
    /// spaced ticks in transformed space.
    pub x_ticks: Vec<f64>,
    pub series: Vec<Series>,
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 55.0;

fn transform(v: f64, log: bool) -> f64 {
    if log {
        v.max(f64::MIN_POSITIVE).log10()
    } else {
        v
    }
}

/// Fixed-precision tick label: trims trailing zeros from a `{:.4}` render
/// so 8.0000 prints as 8 and 0.1250 as 0.125, deterministically.
fn tick_label(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e5 || v.abs() < 1e-3) {
        return format!("{v:.1e}");
    }
    let s = format!("{v:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    s.to_string()
}

pub fn render(chart: &Chart) -> String {
    let mut xs: Vec<f64> = Vec::new();
    let mut ys: Vec<f64> = Vec::new();
    for s in &chart.series {
        for &(x, y) in &s.points {
            xs.push(transform(x, chart.log_x));
            ys.push(transform(y, chart.log_y));
        }
    }
    for &t in &chart.x_ticks {
        xs.push(transform(t, chart.log_x));
    }
    let (x_min, x_max) = span(&xs);
    let (y_min, y_max) = span(&ys);

    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let to_px = |tx: f64, ty: f64| -> (f64, f64) {
        let fx = (tx - x_min) / (x_max - x_min);
        let fy = (ty - y_min) / (y_max - y_min);
        (MARGIN_LEFT + fx * plot_w, MARGIN_TOP + (1.0 - fy) * plot_h)
    };

    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH:.0}\" height=\"{HEIGHT:.0}\" viewBox=\"0 0 {WIDTH:.0} {HEIGHT:.0}\">"
    );
    let _ = writeln!(out, "<rect width=\"{WIDTH:.0}\" height=\"{HEIGHT:.0}\" fill=\"white\"/>");
    let _ = writeln!(
        out,
        "<text x=\"{:.2}\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">{}</text>",
        WIDTH / 2.0,
        escape(&chart.title)
    );

    // Frame.
    let _ = writeln!(
        out,
        "<rect x=\"{MARGIN_LEFT:.2}\" y=\"{MARGIN_TOP:.2}\" width=\"{plot_w:.2}\" height=\"{plot_h:.2}\" fill=\"none\" stroke=\"#333333\" stroke-width=\"1\"/>"
    );

    // X ticks: pinned positions or five evenly spaced in transformed space.
    let x_tick_pairs: Vec<(f64, String)> = if chart.x_ticks.is_empty() {
        (0..5)
            .map(|i| {
                let t = x_min + (x_max - x_min) * (i as f64) / 4.0;
                let data = if chart.log_x { 10f64.powf(t) } else { t };
                (t, tick_label(data))
            })
            .collect()
    } else {
        chart
            .x_ticks
            .iter()
            .map(|&v| (transform(v, chart.log_x), tick_label(v)))
            .collect()
    };
    for (t, label) in &x_tick_pairs {
        let (px, _) = to_px(*t, y_min);
        let y0 = MARGIN_TOP + plot_h;
        let _ = writeln!(
            out,
            "<line x1=\"{px:.2}\" y1=\"{y0:.2}\" x2=\"{px:.2}\" y2=\"{:.2}\" stroke=\"#333333\" stroke-width=\"1\"/>",
            y0 + 5.0
        );
        let _ = writeln!(
            out,
            "<text x=\"{px:.2}\" y=\"{:.2}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">{}</text>",
            y0 + 19.0,
            escape(label)
        );
    }

    // Y ticks: always five, evenly spaced in transformed space.
    for i in 0..5 {
        let t = y_min + (y_max - y_min) * (i as f64) / 4.0;
        let data = if chart.log_y { 10f64.powf(t) } else { t };
        let (_, py) = to_px(x_min, t);
        let _ = writeln!(
            out,
            "<line x1=\"{:.2}\" y1=\"{py:.2}\" x2=\"{MARGIN_LEFT:.2}\" y2=\"{py:.2}\" stroke=\"#333333\" stroke-width=\"1\"/>",
            MARGIN_LEFT - 5.0
        );
        let _ = writeln!(
            out,
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">{}</text>",
            MARGIN_LEFT - 8.0,
            py + 4.0,
            escape(&tick_label(data))
        );
    }

    // Axis labels.
    let _ = writeln!(
        out,
        "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">{}</text>",
        MARGIN_LEFT + plot_w / 2.0,
        HEIGHT - 12.0,
        escape(&chart.x_label)
    );
    let _ = writeln!(
        out,
        "<text x=\"16\" y=\"{:.2}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" transform=\"rotate(-90 16 {:.2})\">{}</text>",
        MARGIN_TOP + plot_h / 2.0,
        MARGIN_TOP + plot_h / 2.0,
        escape(&chart.y_label)
    );

    // Series polylines.
    for s in &chart.series {
        if s.points.is_empty() {
            continue;
        }
        let mut path = String::new();
        for &(x, y) in &s.points {
            let (px, py) = to_px(transform(x, chart.log_x), transform(y, chart.log_y));
            let _ = write!(path, "{px:.2},{py:.2} ");
        }
        let dash = if s.dashed { " stroke-dasharray=\"6,4\"" } else { "" };
        let _ = writeln!(
            out,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"2\"{dash}/>",
            path.trim_end(),
            s.color
        );
    }

    // Legend, top-right inside the frame.
    for (i, s) in chart.series.iter().enumerate() {
        let ly = MARGIN_TOP + 16.0 + 18.0 * i as f64;
        let lx = MARGIN_LEFT + plot_w - 150.0;
        let dash = if s.dashed { " stroke-dasharray=\"6,4\"" } else { "" };
        let _ = writeln!(
            out,
            "<line x1=\"{lx:.2}\" y1=\"{ly:.2}\" x2=\"{:.2}\" y2=\"{ly:.2}\" stroke=\"{}\" stroke-width=\"2\"{dash}/>",
            lx + 26.0,
            s.color
        );
        let _ = writeln!(
            out,
            "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"12\">{}</text>",
            lx + 32.0,
            ly + 4.0,
            escape(&s.label)
        );
    }

    out.push_str("</svg>\n");
    out
}

/// Range of the given values, widened so a flat series still spans a box.
fn span(values: &[f64]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in values {
        if v.is_finite() {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    if !lo.is_finite() || !hi.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
