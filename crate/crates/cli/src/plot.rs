//! Dependency-free SVG plotting. The renderer is a pure function of the
//! plot description, so identical inputs always produce identical bytes;
//! artifacts can be diffed and regression-tested directly.

use std::path::Path;

use crate::error::{CliError, Result};
use crate::files::write_text;

/// One named curve. `capped` marks runs that hit an iteration cap; their
/// points are drawn with a cross instead of a filled dot so truncated
/// measurements are visually distinct.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    /// Legend label.
    pub name: String,
    /// (x, y) samples in draw order.
    pub points: Vec<(f64, f64)>,
    /// Whether this series was truncated by an iteration cap.
    pub capped: bool,
}

/// A complete plot description: labels, axis scales, and the curves.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotSpec {
    /// Title drawn across the top.
    pub title: String,
    /// Horizontal axis label.
    pub x_label: String,
    /// Vertical axis label.
    pub y_label: String,
    /// Draw the x axis on a log10 scale (nonpositive x's are dropped).
    pub log_x: bool,
    /// Draw the y axis on a log10 scale (nonpositive y's are dropped).
    pub log_y: bool,
    /// The curves to draw.
    pub series: Vec<Series>,
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const MARGIN_L: f64 = 72.0;
const MARGIN_R: f64 = 24.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 56.0;
const TICKS: usize = 5;

const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];

fn axis_value(v: f64, log: bool) -> Option<f64> {
    if !v.is_finite() {
        return None;
    }
    if log {
        if v <= 0.0 {
            None
        } else {
            Some(v.log10())
        }
    } else {
        Some(v)
    }
}

fn tick_label(v: f64, log: bool) -> String {
    let shown = if log { 10f64.powf(v) } else { v };
    format!("{shown:.3e}")
}

/// Escapes the five XML-special characters for text nodes/attributes.
fn xml_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        match ch {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(ch),
        }
    }
    out
}

/// Renders the plot as an SVG document. Errors if no series contributes
/// at least one drawable point (a single point is fine — it gets a
/// marker and padded axes).
pub fn render_svg(spec: &PlotSpec) -> Result<String> {
    // Project every point onto axis coordinates, dropping the ones a log
    // scale cannot represent.
    let projected: Vec<Vec<(f64, f64)>> = spec
        .series
        .iter()
        .map(|s| {
            s.points
                .iter()
                .filter_map(|&(x, y)| {
                    Some((axis_value(x, spec.log_x)?, axis_value(y, spec.log_y)?))
                })
                .collect()
        })
        .collect();

    let mut xs: Vec<f64> = Vec::new();
    let mut ys: Vec<f64> = Vec::new();
    for pts in &projected {
        for &(x, y) in pts {
            xs.push(x);
            ys.push(y);
        }
    }
    if xs.is_empty() {
        return Err(CliError::Usage(
            "plot has no drawable points (log scales drop nonpositive values)".into(),
        ));
    }

    let pad = |lo: f64, hi: f64| -> (f64, f64) {
        if hi > lo {
            let m = 0.05 * (hi - lo);
            (lo - m, hi + m)
        } else {
            // Degenerate range (e.g. a single point): pad by a fixed unit.
            (lo - 1.0, hi + 1.0)
        }
    };
    let (x_lo, x_hi) = pad(
        xs.iter().cloned().fold(f64::INFINITY, f64::min),
        xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
    );
    let (y_lo, y_hi) = pad(
        ys.iter().cloned().fold(f64::INFINITY, f64::min),
        ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
    );

    let to_px = |x: f64, y: f64| -> (f64, f64) {
        let px = MARGIN_L + (x - x_lo) / (x_hi - x_lo) * (WIDTH - MARGIN_L - MARGIN_R);
        let py = HEIGHT - MARGIN_B - (y - y_lo) / (y_hi - y_lo) * (HEIGHT - MARGIN_T - MARGIN_B);
        (px, py)
    };

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    svg.push_str(&format!(
        "<text x=\"{:.2}\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" \
         font-size=\"16\">{}</text>\n",
        WIDTH / 2.0,
        xml_escape(&spec.title)
    ));

    // Axes.
    let (ox, oy) = (MARGIN_L, HEIGHT - MARGIN_B);
    svg.push_str(&format!(
        "<line x1=\"{ox:.2}\" y1=\"{oy:.2}\" x2=\"{:.2}\" y2=\"{oy:.2}\" stroke=\"black\"/>\n",
        WIDTH - MARGIN_R
    ));
    svg.push_str(&format!(
        "<line x1=\"{ox:.2}\" y1=\"{oy:.2}\" x2=\"{ox:.2}\" y2=\"{MARGIN_T:.2}\" stroke=\"black\"/>\n"
    ));

    // Ticks and grid labels.
    for k in 0..TICKS {
        let f = k as f64 / (TICKS - 1) as f64;
        let xv = x_lo + f * (x_hi - x_lo);
        let yv = y_lo + f * (y_hi - y_lo);
        let (px, _) = to_px(xv, y_lo);
        let (_, py) = to_px(x_lo, yv);
        svg.push_str(&format!(
            "<line x1=\"{px:.2}\" y1=\"{oy:.2}\" x2=\"{px:.2}\" y2=\"{:.2}\" stroke=\"black\"/>\n",
            oy + 5.0
        ));
        svg.push_str(&format!(
            "<text x=\"{px:.2}\" y=\"{:.2}\" text-anchor=\"middle\" font-family=\"sans-serif\" \
             font-size=\"10\">{}</text>\n",
            oy + 18.0,
            xml_escape(&tick_label(xv, spec.log_x))
        ));
        svg.push_str(&format!(
            "<line x1=\"{:.2}\" y1=\"{py:.2}\" x2=\"{ox:.2}\" y2=\"{py:.2}\" stroke=\"black\"/>\n",
            ox - 5.0
        ));
        svg.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\" font-family=\"sans-serif\" \
             font-size=\"10\">{}</text>\n",
            ox - 8.0,
            py + 3.0,
            xml_escape(&tick_label(yv, spec.log_y))
        ));
    }

    // Axis labels.
    svg.push_str(&format!(
        "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\" font-family=\"sans-serif\" \
         font-size=\"12\">{}</text>\n",
        (MARGIN_L + WIDTH - MARGIN_R) / 2.0,
        HEIGHT - 12.0,
        xml_escape(&spec.x_label)
    ));
    svg.push_str(&format!(
        "<text x=\"16\" y=\"{:.2}\" text-anchor=\"middle\" font-family=\"sans-serif\" \
         font-size=\"12\" transform=\"rotate(-90 16 {:.2})\">{}</text>\n",
        (MARGIN_T + HEIGHT - MARGIN_B) / 2.0,
        (MARGIN_T + HEIGHT - MARGIN_B) / 2.0,
        xml_escape(&spec.y_label)
    ));

    // Curves.
    for (idx, (series, pts)) in spec.series.iter().zip(&projected).enumerate() {
        let color = PALETTE[idx % PALETTE.len()];
        if pts.len() > 1 {
            let path: Vec<String> = pts
                .iter()
                .map(|&(x, y)| {
                    let (px, py) = to_px(x, y);
                    format!("{px:.2},{py:.2}")
                })
                .collect();
            svg.push_str(&format!(
                "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>\n",
                path.join(" ")
            ));
        }
        for &(x, y) in pts {
            let (px, py) = to_px(x, y);
            if series.capped {
                // A cross marks points truncated by the iteration cap.
                svg.push_str(&format!(
                    "<path d=\"M {:.2} {:.2} L {:.2} {:.2} M {:.2} {:.2} L {:.2} {:.2}\" \
                     stroke=\"{color}\" stroke-width=\"1.5\" class=\"capped\"/>\n",
                    px - 3.5,
                    py - 3.5,
                    px + 3.5,
                    py + 3.5,
                    px - 3.5,
                    py + 3.5,
                    px + 3.5,
                    py - 3.5
                ));
            } else {
                svg.push_str(&format!(
                    "<circle cx=\"{px:.2}\" cy=\"{py:.2}\" r=\"2.5\" fill=\"{color}\"/>\n"
                ));
            }
        }
    }

    // Legend.
    for (idx, series) in spec.series.iter().enumerate() {
        let color = PALETTE[idx % PALETTE.len()];
        let y = MARGIN_T + 14.0 * idx as f64;
        svg.push_str(&format!(
            "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"10\" height=\"10\" fill=\"{color}\"/>\n",
            WIDTH - MARGIN_R - 150.0,
            y
        ));
        let suffix = if series.capped { " (capped)" } else { "" };
        svg.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"11\">{}{}</text>\n",
            WIDTH - MARGIN_R - 136.0,
            y + 9.0,
            xml_escape(&series.name),
            suffix
        ));
    }

    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Renders the plot and writes it to `path`.
pub fn emit_plot(spec: &PlotSpec, path: &Path) -> Result<()> {
    write_text(path, &render_svg(spec)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn demo_spec() -> PlotSpec {
        PlotSpec {
            title: "loss".into(),
            x_label: "iteration".into(),
            y_label: "loss".into(),
            log_x: false,
            log_y: true,
            series: vec![
                Series {
                    name: "run a".into(),
                    points: vec![(0.0, 1.0), (1.0, 0.5), (2.0, 0.25)],
                    capped: false,
                },
                Series {
                    name: "run b".into(),
                    points: vec![(0.0, 1.0), (1.0, 0.9)],
                    capped: true,
                },
            ],
        }
    }

    #[test]
    fn identical_specs_render_identical_bytes() {
        let a = render_svg(&demo_spec()).unwrap();
        let b = render_svg(&demo_spec()).unwrap();
        assert_eq!(a, b, "rendering must be deterministic");
        assert!(a.starts_with("<svg"), "output should be an SVG document");
        assert!(a.ends_with("</svg>\n"));
    }

    #[test]
    fn single_point_is_a_valid_plot() {
        let spec = PlotSpec {
            title: "one".into(),
            x_label: "x".into(),
            y_label: "y".into(),
            log_x: false,
            log_y: false,
            series: vec![Series {
                name: "solo".into(),
                points: vec![(3.0, 4.0)],
                capped: false,
            }],
        };
        let svg = render_svg(&spec).unwrap();
        assert!(svg.contains("<circle"), "the lone point should get a marker");
        assert!(!svg.contains("<polyline"), "no line segments from one point");
    }

    #[test]
    fn capped_series_use_cross_markers() {
        let svg = render_svg(&demo_spec()).unwrap();
        assert!(svg.contains("class=\"capped\""), "capped points need distinct markers");
        assert!(svg.contains("<circle"), "uncapped points keep dot markers");
        assert!(svg.contains("(capped)"), "legend should flag the capped series");
    }

    #[test]
    fn log_axes_drop_nonpositive_points() {
        let mut spec = demo_spec();
        spec.series[0].points.push((3.0, 0.0));
        spec.series[0].points.push((4.0, -1.0));
        let svg = render_svg(&spec).unwrap();
        // Three finite-log points from series a, two from series b.
        let markers = svg.matches("<circle").count() + svg.matches("class=\"capped\"").count();
        assert_eq!(markers, 5, "nonpositive y's must not be drawn on a log axis");

        let empty = PlotSpec {
            series: vec![Series {
                name: "gone".into(),
                points: vec![(1.0, -2.0)],
                capped: false,
            }],
            ..demo_spec()
        };
        assert!(render_svg(&empty).is_err(), "a plot with nothing drawable is an error");
    }

    #[test]
    fn titles_are_xml_escaped() {
        let mut spec = demo_spec();
        spec.title = "a<b & \"c\"".into();
        let svg = render_svg(&spec).unwrap();
        assert!(svg.contains("a&lt;b &amp; &quot;c&quot;"));
        assert!(!svg.contains("a<b"));
    }
}
