//! Minimal deterministic SVG line plots for curve data.

use crate::metrics::curves::CurveData;

const W: f64 = 640.0;
const H: f64 = 480.0;
const MARGIN: f64 = 56.0;
const COLORS: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#7f7f7f",
];

fn fmt(v: f64) -> String {
    // fixed decimals keep output byte-stable across runs
    format!("{v:.2}")
}

/// Render curves into a standalone SVG document. Axes are scaled to the
/// data's bounding box (padded to unit ranges for degenerate extents).
pub fn render_curves_svg(curves: &[CurveData], title: &str, x_label: &str, y_label: &str) -> String {
    let all_x = curves.iter().flat_map(|c| c.x.iter().copied());
    let all_y = curves.iter().flat_map(|c| c.y.iter().copied());
    let (mut x0, mut x1) = all_x.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    });
    let (mut y0, mut y1) = all_y.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    });
    if !x0.is_finite() || x1 - x0 < 1e-12 {
        x0 = 0.0;
        x1 = 1.0;
    }
    if !y0.is_finite() || y1 - y0 < 1e-12 {
        y0 = 0.0;
        y1 = 1.0;
    }
    let sx = |v: f64| MARGIN + (v - x0) / (x1 - x0) * (W - 2.0 * MARGIN);
    let sy = |v: f64| H - MARGIN - (v - y0) / (y1 - y0) * (H - 2.0 * MARGIN);

    let mut s = String::new();
    s.push_str(&format!(
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    ));
    s.push('\n');
    s.push_str(r#"<rect width="100%" height="100%" fill="white"/>"#);
    s.push('\n');
    // axes
    s.push_str(&format!(
        r#"<line x1="{m}" y1="{b}" x2="{r}" y2="{b}" stroke="black"/>"#,
        m = fmt(MARGIN),
        b = fmt(H - MARGIN),
        r = fmt(W - MARGIN)
    ));
    s.push('\n');
    s.push_str(&format!(
        r#"<line x1="{m}" y1="{t}" x2="{m}" y2="{b}" stroke="black"/>"#,
        m = fmt(MARGIN),
        t = fmt(MARGIN),
        b = fmt(H - MARGIN)
    ));
    s.push('\n');
    // axis extent labels
    s.push_str(&format!(
        r#"<text x="{x}" y="{y}" font-size="11" text-anchor="start">{v}</text>"#,
        x = fmt(MARGIN),
        y = fmt(H - MARGIN + 16.0),
        v = fmt(x0)
    ));
    s.push_str(&format!(
        r#"<text x="{x}" y="{y}" font-size="11" text-anchor="end">{v}</text>"#,
        x = fmt(W - MARGIN),
        y = fmt(H - MARGIN + 16.0),
        v = fmt(x1)
    ));
    s.push_str(&format!(
        r#"<text x="{x}" y="{y}" font-size="11" text-anchor="end">{v}</text>"#,
        x = fmt(MARGIN - 6.0),
        y = fmt(H - MARGIN),
        v = fmt(y0)
    ));
    s.push_str(&format!(
        r#"<text x="{x}" y="{y}" font-size="11" text-anchor="end">{v}</text>"#,
        x = fmt(MARGIN - 6.0),
        y = fmt(MARGIN + 4.0),
        v = fmt(y1)
    ));
    s.push('\n');
    s.push_str(&format!(
        r#"<text x="{x}" y="24" font-size="14" text-anchor="middle">{title}</text>"#,
        x = fmt(W / 2.0)
    ));
    s.push_str(&format!(
        r#"<text x="{x}" y="{y}" font-size="12" text-anchor="middle">{x_label}</text>"#,
        x = fmt(W / 2.0),
        y = fmt(H - 12.0)
    ));
    s.push_str(&format!(
        r#"<text x="14" y="{y}" font-size="12" text-anchor="middle" transform="rotate(-90 14 {y})">{y_label}</text>"#,
        y = fmt(H / 2.0)
    ));
    s.push('\n');

    for (i, c) in curves.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let points: Vec<String> = c
            .x
            .iter()
            .zip(&c.y)
            .map(|(&x, &y)| format!("{},{}", fmt(sx(x)), fmt(sy(y))))
            .collect();
        s.push_str(&format!(
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            points.join(" ")
        ));
        s.push('\n');
        let legend = match c.auc {
            Some(a) => format!("{} (auc={})", c.label, fmt(a)),
            None => c.label.clone(),
        };
        s.push_str(&format!(
            r#"<text x="{x}" y="{y}" font-size="12" fill="{color}">{legend}</text>"#,
            x = fmt(W - MARGIN - 170.0),
            y = fmt(MARGIN + 18.0 * (i as f64 + 1.0)),
        ));
        s.push('\n');
    }
    s.push_str("</svg>\n");
    s
}
