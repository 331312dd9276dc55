//! Minimal SVG overlay of an estimated density (dashed) and the asymptotic
//! density (solid).

use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 40.0;

pub fn density_overlay(grid: &[f64], estimate: &[f64], reference: &[f64], title: &str) -> String {
    let (lo, hi) = (grid[0], grid[grid.len() - 1]);
    let top = estimate
        .iter()
        .chain(reference)
        .fold(0.0_f64, |m, &v| m.max(v))
        .max(1e-12)
        * 1.05;
    let sx = |x: f64| MARGIN + (x - lo) / (hi - lo) * (WIDTH - 2.0 * MARGIN);
    let sy = |y: f64| HEIGHT - MARGIN - y / top * (HEIGHT - 2.0 * MARGIN);
    let path = |ys: &[f64]| {
        let mut s = String::new();
        for (x, y) in grid.iter().zip(ys) {
            let _ = write!(s, "{:.2},{:.2} ", sx(*x), sy(*y));
        }
        s.trim_end().to_string()
    };

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<line x1="{m}" y1="{b}" x2="{r}" y2="{b}" stroke="black"/>"#,
        m = MARGIN,
        b = HEIGHT - MARGIN,
        r = WIDTH - MARGIN
    );
    let _ = writeln!(
        out,
        r#"<line x1="{m}" y1="{m}" x2="{m}" y2="{b}" stroke="black"/>"#,
        m = MARGIN,
        b = HEIGHT - MARGIN
    );
    for tick in [lo, 0.5 * (lo + hi), hi] {
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" font-size="12" text-anchor="middle">{tick}</text>"#,
            sx(tick),
            HEIGHT - MARGIN + 16.0
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="24" font-size="14" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    let _ = writeln!(
        out,
        r#"<polyline fill="none" stroke="black" stroke-width="1.5" points="{}"/>"#,
        path(reference)
    );
    let _ = writeln!(
        out,
        r#"<polyline fill="none" stroke="black" stroke-width="1.5" stroke-dasharray="6,4" points="{}"/>"#,
        path(estimate)
    );
    out.push_str("</svg>\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
