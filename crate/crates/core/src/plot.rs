//! Minimal standalone SVG line charts for sweep results.

use std::fmt::Write;

use crate::experiments::{Scheme, SweepKind, SweepResult};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 60.0;

fn color(scheme: Scheme) -> &'static str {
    match scheme {
        Scheme::MaNoma => "#d62728",
        Scheme::FpaNoma => "#1f77b4",
        Scheme::MaOma => "#ff7f0e",
        Scheme::FpaOma => "#2ca02c",
    }
}

fn axis_label(kind: SweepKind) -> &'static str {
    match kind {
        SweepKind::P2 => "P2 / Pmax",
        SweepKind::Blocklength => "blocklength N",
        SweepKind::T0 => "T0 (bits/channel use)",
    }
}

/// Mean `T1` against the sweep value, one polyline per scheme.
pub fn sweep_svg(kind: SweepKind, results: &[SweepResult]) -> String {
    let finite: Vec<&SweepResult> = results.iter().filter(|r| r.mean_t1.is_finite()).collect();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for r in &finite {
        x0 = x0.min(r.sweep_value);
        x1 = x1.max(r.sweep_value);
        y0 = y0.min(r.mean_t1);
        y1 = y1.max(r.mean_t1);
    }
    if finite.is_empty() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    if y1 <= y0 {
        y1 = y0 + 1.0;
    }
    let pad = 0.05 * (y1 - y0);
    let (y0, y1) = (y0 - pad, y1 + pad);
    let px = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let py = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        WIDTH - 2.0 * MARGIN,
        HEIGHT - 2.0 * MARGIN
    );
    for i in 0..=4 {
        let fx = x0 + (x1 - x0) * f64::from(i) / 4.0;
        let fy = y0 + (y1 - y0) * f64::from(i) / 4.0;
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#, px(fx), HEIGHT - MARGIN + 18.0, trim(fx));
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#, MARGIN - 6.0, py(fy) + 4.0, trim(fy));
    }
    let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#, WIDTH / 2.0, HEIGHT - 15.0, axis_label(kind));
    let _ = writeln!(
        s,
        r#"<text x="15" y="{:.1}" text-anchor="middle" transform="rotate(-90 15 {:.1})">mean T1 (bits/channel use)</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0
    );

    let mut schemes: Vec<Scheme> = Vec::new();
    for r in results {
        if !schemes.contains(&r.scheme) {
            schemes.push(r.scheme);
        }
    }
    for (i, &scheme) in schemes.iter().enumerate() {
        let points: Vec<String> = finite
            .iter()
            .filter(|r| r.scheme == scheme)
            .map(|r| format!("{:.2},{:.2}", px(r.sweep_value), py(r.mean_t1)))
            .collect();
        let c = color(scheme);
        let _ = writeln!(s, r#"<polyline fill="none" stroke="{c}" stroke-width="2" points="{}"/>"#, points.join(" "));
        let ly = MARGIN + 16.0 + 16.0 * i as f64;
        let lx = WIDTH - MARGIN - 110.0;
        let _ = writeln!(s, r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{c}" stroke-width="2"/>"#, lx + 20.0);
        let _ = writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, lx + 26.0, ly + 4.0, scheme.name());
    }
    s.push_str("</svg>\n");
    s
}

fn trim(v: f64) -> String {
    let s = format!("{v:.3}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_one_polyline_per_scheme() {
        let rows: Vec<SweepResult> = [Scheme::MaNoma, Scheme::FpaNoma]
            .into_iter()
            .flat_map(|scheme| {
                [1.0, 2.0, 3.0].into_iter().map(move |v| SweepResult {
                    sweep_value: v,
                    scheme,
                    mean_t1: 10.0 - v,
                    stderr_t1: 0.1,
                    mean_t2: v,
                    feasible_rate: 1.0,
                    trials: 10,
                })
            })
            .collect();
        let svg = sweep_svg(SweepKind::T0, &rows);
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("fpa_noma"));
    }
}
