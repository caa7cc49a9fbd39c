//! Self-contained SVG plots.

use std::fmt::Write;

use crate::experiments::{PhaseDiagram, ThresholdFit};

/// Heatmap color ramp: success probability `0, 0.25, 0.5, 0.75, 1` maps to
/// these RGB stops, interpolated linearly in between.
pub const COLOR_STOPS: [(f64, [u8; 3]); 5] = [
    (0.0, [68, 1, 84]),
    (0.25, [59, 82, 139]),
    (0.5, [33, 145, 140]),
    (0.75, [94, 201, 98]),
    (1.0, [253, 231, 37]),
];

/// `#rrggbb` for `p`, clamped to `[0, 1]`.
pub fn color_ramp(p: f64) -> String {
    let p = if p.is_nan() { 0.0 } else { p.clamp(0.0, 1.0) };
    let k = COLOR_STOPS
        .windows(2)
        .position(|w| p <= w[1].0)
        .unwrap_or(COLOR_STOPS.len() - 2);
    let ((p0, c0), (p1, c1)) = (COLOR_STOPS[k], COLOR_STOPS[k + 1]);
    let t = (p - p0) / (p1 - p0);
    let mix = |a: u8, b: u8| (a as f64 + t * (b as f64 - a as f64)).round() as u8;
    format!(
        "#{:02x}{:02x}{:02x}",
        mix(c0[0], c1[0]),
        mix(c0[1], c1[1]),
        mix(c0[2], c1[2])
    )
}

const CELL: f64 = 18.0;
const MARGIN: f64 = 48.0;

/// Success heatmap: `m` on the horizontal axis, `s` increasing upward.
pub fn phase_heatmap_svg(d: &PhaseDiagram) -> String {
    let (rows, cols) = (d.s_grid.len(), d.m_grid.len());
    let width = 2.0 * MARGIN + cols as f64 * CELL;
    let height = 2.0 * MARGIN + rows as f64 * CELL;
    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
    )
    .unwrap();
    writeln!(
        out,
        r#"<text x="{MARGIN}" y="20" font-family="sans-serif" font-size="12">recovery rate, n={} dist={} trials={}</text>"#,
        d.n,
        d.dist.name(),
        d.trials_per_cell
    )
    .unwrap();
    for i in 0..rows {
        let y = MARGIN + (rows - 1 - i) as f64 * CELL;
        for j in 0..cols {
            let x = MARGIN + j as f64 * CELL;
            writeln!(
                out,
                r#"<rect x="{x}" y="{y}" width="{CELL}" height="{CELL}" fill="{}"><title>s={} m={} p={}</title></rect>"#,
                color_ramp(d.success(i, j)),
                d.s_grid[i],
                d.m_grid[j],
                d.success(i, j)
            )
            .unwrap();
        }
        writeln!(
            out,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="10" text-anchor="end">{}</text>"#,
            MARGIN - 4.0,
            y + 0.7 * CELL,
            d.s_grid[i]
        )
        .unwrap();
    }
    for (j, m) in d.m_grid.iter().enumerate() {
        writeln!(
            out,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="8" text-anchor="middle">{m}</text>"#,
            MARGIN + (j as f64 + 0.5) * CELL,
            MARGIN + rows as f64 * CELL + 12.0
        )
        .unwrap();
    }
    out.push_str("</svg>\n");
    out
}

/// Contour crossings `m*(s)` as points with the fitted curve as a polyline.
pub fn threshold_scatter_svg(fit: &ThresholdFit, n: usize) -> String {
    let (w, h) = (400.0, 300.0);
    let s_max = fit.s_points_used.iter().copied().max().unwrap_or(1) as f64;
    let m_max = fit
        .m_star
        .iter()
        .copied()
        .chain(fit.s_points_used.iter().map(|&s| fit.predict(n, s)))
        .fold(1.0, f64::max);
    let px = |s: f64| MARGIN + s / s_max * (w - 2.0 * MARGIN);
    let py = |m: f64| h - MARGIN - m / m_max * (h - 2.0 * MARGIN);
    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    )
    .unwrap();
    writeln!(
        out,
        r#"<text x="{MARGIN}" y="20" font-family="sans-serif" font-size="12">m* = {:.3} s ln({:.3} n / s), n={n}</text>"#,
        fit.a, fit.b
    )
    .unwrap();
    let steps = 64;
    let curve: Vec<String> = (1..=steps)
        .map(|k| {
            let s = s_max * k as f64 / steps as f64;
            let m = fit.a * s * (fit.b * n as f64 / s).ln();
            format!("{:.2},{:.2}", px(s), py(m))
        })
        .collect();
    writeln!(
        out,
        r#"<polyline fill="none" stroke="{}" stroke-width="1.5" points="{}"/>"#,
        color_ramp(0.5),
        curve.join(" ")
    )
    .unwrap();
    for (&s, &m) in fit.s_points_used.iter().zip(&fit.m_star) {
        writeln!(
            out,
            r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{}"><title>s={s} m*={m}</title></circle>"#,
            px(s as f64),
            py(m),
            color_ramp(0.0)
        )
        .unwrap();
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ramp_hits_stops() {
        assert_eq!(color_ramp(0.0), "#440154");
        assert_eq!(color_ramp(1.0), "#fde725");
        assert_eq!(color_ramp(0.5), "#21918c");
        assert_eq!(color_ramp(7.0), "#fde725");
    }
}
