use std::fmt::Write as _;

const SIZE: f64 = 600.0;
const MARGIN: f64 = 30.0;

/// Scatter of target points (blue) under the fitted neurons (red).
pub fn scatter_overlay(targets: &[Vec<f64>], neurons: &[Vec<f64>], title: &str) -> String {
    let all = targets.iter().chain(neurons);
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for p in all {
        x0 = x0.min(p[0]);
        x1 = x1.max(p[0]);
        y0 = y0.min(p[1]);
        y1 = y1.max(p[1]);
    }
    let span = (x1 - x0).max(y1 - y0).max(1e-9);
    let scale = (SIZE - 2.0 * MARGIN) / span;
    let px = |x: f64| MARGIN + (x - x0) * scale;
    // SVG y grows downward
    let py = |y: f64| SIZE - MARGIN - (y - y0) * scale;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{MARGIN}" y="20" font-family="sans-serif" font-size="14">{title}</text>"#
    );
    let _ = writeln!(out, r##"<g fill="#1f77b4" fill-opacity="0.7">"##);
    for p in targets {
        let _ = writeln!(out, r#"<circle cx="{:.2}" cy="{:.2}" r="3"/>"#, px(p[0]), py(p[1]));
    }
    let _ = writeln!(out, "</g>");
    let _ = writeln!(out, r##"<g fill="#d62728" fill-opacity="0.8">"##);
    for p in neurons {
        let _ = writeln!(out, r#"<circle cx="{:.2}" cy="{:.2}" r="2.5"/>"#, px(p[0]), py(p[1]));
    }
    let _ = writeln!(out, "</g>");
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_circle_per_point() {
        let svg = scatter_overlay(&[vec![0.0, 0.0], vec![1.0, 1.0]], &[vec![0.5, 0.5]], "t");
        assert_eq!(svg.matches("<circle").count(), 3);
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
    }
}
