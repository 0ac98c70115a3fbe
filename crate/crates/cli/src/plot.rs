//! Minimal static SVG line plots. Not part of any numerical output.

use std::fmt::Write;

const PANEL_W: f64 = 640.0;
const PANEL_H: f64 = 260.0;
const MARGIN: f64 = 48.0;
const COLORS: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#7f7f7f"];

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

pub struct Panel {
    pub y_label: String,
    pub series: Vec<Series>,
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) =
        values.filter(|v| v.is_finite()).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 * lo.abs().max(1.0) {
        return (lo - 0.5, hi + 0.5);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

/// Vertically stacked panels sharing the x axis.
pub fn render(title: &str, x_label: &str, panels: &[Panel]) -> String {
    let (x0, x1) = bounds(panels.iter().flat_map(|p| p.series.iter()).flat_map(|s| s.points.iter().map(|p| p.0)));
    let height = MARGIN + panels.len() as f64 * (PANEL_H + MARGIN);
    let width = PANEL_W + 2.0 * MARGIN + 120.0;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(svg, r#"<text x="{}" y="20" font-size="14">{}</text>"#, MARGIN, escape(title));
    for (k, panel) in panels.iter().enumerate() {
        let top = MARGIN + k as f64 * (PANEL_H + MARGIN);
        let (y0, y1) = bounds(panel.series.iter().flat_map(|s| s.points.iter().map(|p| p.1)));
        let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * PANEL_W;
        let sy = |y: f64| top + PANEL_H - (y - y0) / (y1 - y0) * PANEL_H;
        let _ = writeln!(
            svg,
            r#"<rect x="{MARGIN}" y="{top}" width="{PANEL_W}" height="{PANEL_H}" fill="none" stroke="black"/>"#
        );
        let _ = writeln!(svg, r#"<text x="{}" y="{}">{:.3}</text>"#, 4.0, top + 10.0, y1);
        let _ = writeln!(svg, r#"<text x="{}" y="{}">{:.3}</text>"#, 4.0, top + PANEL_H, y0);
        let _ = writeln!(svg, r#"<text x="{}" y="{}">{}</text>"#, MARGIN + 4.0, top - 6.0, escape(&panel.y_label));
        if y0 < 0.0 && y1 > 0.0 {
            let _ = writeln!(
                svg,
                r##"<line x1="{MARGIN}" x2="{}" y1="{y}" y2="{y}" stroke="#bbb"/>"##,
                MARGIN + PANEL_W,
                y = sy(0.0)
            );
        }
        for (i, s) in panel.series.iter().enumerate() {
            let color = COLORS[i % COLORS.len()];
            let pts: Vec<String> = s
                .points
                .iter()
                .filter(|p| p.0.is_finite() && p.1.is_finite())
                .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
                .collect();
            let _ = writeln!(
                svg,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                pts.join(" ")
            );
            let ly = top + 14.0 + 16.0 * i as f64;
            let _ = writeln!(
                svg,
                r#"<text x="{}" y="{ly}" fill="{color}">{}</text>"#,
                MARGIN + PANEL_W + 10.0,
                escape(&s.label)
            );
        }
    }
    let bottom = height - 14.0;
    let _ = writeln!(svg, r#"<text x="{MARGIN}" y="{bottom}">{x0:.3}</text>"#);
    let _ = writeln!(svg, r#"<text x="{}" y="{bottom}">{}</text>"#, MARGIN + PANEL_W / 2.0, escape(x_label));
    let _ = writeln!(svg, r#"<text x="{}" y="{bottom}" text-anchor="end">{x1:.3}</text>"#, MARGIN + PANEL_W);
    svg.push_str("</svg>\n");
    svg
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_one_polyline_per_series() {
        let panel = Panel {
            y_label: "Re λ".into(),
            series: vec![
                Series { label: "a".into(), points: vec![(0.0, 1.0), (1.0, -1.0)] },
                Series { label: "b<c".into(), points: vec![(0.0, 0.0), (1.0, f64::NAN)] },
            ],
        };
        let svg = render("t", "x", &[panel]);
        assert!(svg.starts_with("<svg"));
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("b&lt;c"));
        assert!(!svg.contains("NaN"));
    }

    #[test]
    fn flat_data_gets_a_range() {
        assert_eq!(bounds([2.0, 2.0].into_iter()), (1.5, 2.5));
        assert_eq!(bounds(std::iter::empty()), (0.0, 1.0));
    }
}
