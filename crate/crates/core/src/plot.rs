//! Minimal SVG output: line charts and lattice heatmaps built from
//! polylines, circles and text.

use std::fmt::Write as _;

use crate::packing::Packing;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 50.0;

pub struct Series<'a> {
    pub label: &'a str,
    pub color: &'a str,
    pub points: &'a [(f64, f64)],
}

fn finite_bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if hi - lo <= 0.0 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Line chart of one or more series. Non-finite points break the line.
pub fn line_chart(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let (x0, x1) = finite_bounds(series.iter().flat_map(|s| s.points.iter().map(|p| p.0)));
    let (y0, y1) = finite_bounds(series.iter().flat_map(|s| s.points.iter().map(|p| p.1)));
    let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let sy = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<polyline fill="none" stroke="black" points="{m},{t} {m},{b} {r},{b}"/>"#,
        m = MARGIN,
        t = MARGIN,
        b = HEIGHT - MARGIN,
        r = WIDTH - MARGIN
    );
    let _ = writeln!(svg, r#"<text x="{}" y="20" text-anchor="middle">{}</text>"#, WIDTH / 2.0, escape(title));
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 10.0,
        escape(x_label)
    );
    let _ = writeln!(
        svg,
        r#"<text x="15" y="{y}" text-anchor="middle" transform="rotate(-90 15 {y})">{}</text>"#,
        escape(y_label),
        y = HEIGHT / 2.0
    );
    for (v, label_x, label_y, anchor) in [
        (x0, sx(x0), HEIGHT - MARGIN + 15.0, "middle"),
        (x1, sx(x1), HEIGHT - MARGIN + 15.0, "middle"),
    ] {
        let _ = writeln!(svg, r#"<text x="{label_x}" y="{label_y}" text-anchor="{anchor}" font-size="10">{v:.3}</text>"#);
    }
    for v in [y0, y1] {
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" text-anchor="end" font-size="10">{v:.3}</text>"#,
            MARGIN - 4.0,
            sy(v)
        );
    }
    for (k, s) in series.iter().enumerate() {
        let mut segments: Vec<Vec<String>> = vec![Vec::new()];
        for &(x, y) in s.points {
            if x.is_finite() && y.is_finite() {
                segments.last_mut().expect("non-empty").push(format!("{:.2},{:.2}", sx(x), sy(y)));
            } else if !segments.last().expect("non-empty").is_empty() {
                segments.push(Vec::new());
            }
        }
        for seg in segments.iter().filter(|s| !s.is_empty()) {
            let _ = writeln!(
                svg,
                r#"<polyline fill="none" stroke="{}" stroke-width="1.5" points="{}"/>"#,
                s.color,
                seg.join(" ")
            );
        }
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" fill="{}" font-size="11">{}</text>"#,
            WIDTH - MARGIN - 120.0,
            MARGIN + 14.0 * k as f64,
            s.color,
            escape(s.label)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

/// Maps `t` in [0, 1] onto a white-to-red ramp.
fn ramp(t: f64) -> String {
    let t = t.clamp(0.0, 1.0);
    let c = (255.0 * (1.0 - t)).round() as u8;
    format!("rgb(255,{c},{c})")
}

fn normalized(values: &[f64]) -> Vec<f64> {
    // infinite values saturate the scale, undefined ones sit at zero
    let (lo, hi) = finite_bounds(values.iter().copied());
    values
        .iter()
        .map(|&v| {
            if v.is_nan() {
                0.0
            } else if v == f64::INFINITY {
                1.0
            } else if v == f64::NEG_INFINITY {
                0.0
            } else {
                (v - lo) / (hi - lo)
            }
        })
        .collect()
}

/// Draws each particle as a circle: fill encodes `fill_values`, outline
/// width encodes `stroke_values`. `marked` particles get a dashed outline.
pub fn lattice_heatmap(packing: &Packing, fill_values: &[f64], stroke_values: &[f64], marked: &[usize], title: &str) -> String {
    let scale = (WIDTH - 2.0 * MARGIN) / packing.sim_box.width;
    let height = packing.sim_box.height * scale + 2.0 * MARGIN;
    let radius = 0.5 * packing.lattice.diameter * scale;
    let fill = normalized(fill_values);
    let stroke = normalized(stroke_values);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height:.1}" viewBox="0 0 {WIDTH} {height:.1}">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(svg, r#"<text x="{}" y="20" text-anchor="middle">{}</text>"#, WIDTH / 2.0, escape(title));
    for (i, p) in packing.positions.iter().enumerate() {
        let cx = MARGIN + p[0] * scale;
        let cy = height - MARGIN - p[1] * scale;
        let f = fill.get(i).copied().unwrap_or(0.0);
        let w = 1.0 + 7.0 * stroke.get(i).copied().unwrap_or(0.0);
        let dash = if marked.contains(&i) { r#" stroke-dasharray="4 2""# } else { "" };
        let _ = writeln!(
            svg,
            r#"<circle data-index="{i}" cx="{cx:.2}" cy="{cy:.2}" r="{radius:.2}" fill="{}" stroke="black" stroke-width="{w:.2}"{dash}/>"#,
            ramp(f)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::packing::{build_lattice, LatticeSpec};

    #[test]
    fn heatmap_has_one_glyph_per_particle() {
        let p = build_lattice(&LatticeSpec::default()).unwrap();
        let mut m: Vec<f64> = (0..30).map(|i| i as f64).collect();
        m[3] = f64::INFINITY;
        m[4] = f64::NAN;
        let svg = lattice_heatmap(&p, &m, &m, &[2, 26], "map");
        assert_eq!(svg.matches("<circle").count(), 30);
        assert_eq!(svg.matches("stroke-dasharray").count(), 2);
    }

    #[test]
    fn chart_breaks_lines_at_gaps() {
        let pts = [(0.0, 1.0), (1.0, 2.0), (2.0, f64::NAN), (3.0, 1.0), (4.0, 0.5)];
        let svg = line_chart("t", "x", "y", &[Series { label: "a", color: "blue", points: &pts }]);
        assert_eq!(svg.matches("stroke=\"blue\"").count(), 2);
        assert!(svg.starts_with("<svg"));
    }
}
