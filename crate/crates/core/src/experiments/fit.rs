use super::phase::PhaseDiagram;
use crate::error::{Error, Result};

pub const DEFAULT_CONTOUR_LEVEL: f64 = 0.5;

const B_MAX: f64 = 1e4;
const B_GRID: usize = 2_000;

/// `m*(s) = a s ln(b n / s)` fitted to contour crossings.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdFit {
    pub a: f64,
    pub b: f64,
    pub contour_level: f64,
    /// Root-mean-square of `m*(s) - a s ln(b n / s)`.
    pub residual: f64,
    pub s_points_used: Vec<usize>,
    pub m_star: Vec<f64>,
}

impl ThresholdFit {
    pub fn predict(&self, n: usize, s: usize) -> f64 {
        self.a * s as f64 * (self.b * n as f64 / s as f64).ln()
    }

    pub fn mean_m_star(&self) -> f64 {
        self.m_star.iter().sum::<f64>() / self.m_star.len() as f64
    }
}

/// For each nonzero `s`, the `m` where success first rises through `level`,
/// interpolated linearly between grid points. Rows that never cross, or
/// already start at or above `level`, are skipped.
pub fn contour_crossings(diagram: &PhaseDiagram, level: f64) -> Vec<(usize, f64)> {
    let mut out = Vec::new();
    for (i, &s) in diagram.s_grid.iter().enumerate() {
        if s == 0 {
            continue;
        }
        let p = diagram.success_row(i);
        if p[0] >= level {
            continue;
        }
        if let Some(j) = (1..p.len()).find(|&j| p[j - 1] < level && p[j] >= level) {
            let (m0, m1) = (diagram.m_grid[j - 1] as f64, diagram.m_grid[j] as f64);
            out.push((s, m0 + (level - p[j - 1]) / (p[j] - p[j - 1]) * (m1 - m0)));
        }
    }
    out
}

fn sse_at(b: f64, n: f64, pts: &[(usize, f64)]) -> (f64, f64) {
    let g: Vec<f64> = pts
        .iter()
        .map(|&(s, _)| s as f64 * (b * n / s as f64).ln())
        .collect();
    let a = pts.iter().zip(&g).map(|(p, g)| p.1 * g).sum::<f64>() / g.iter().map(|g| g * g).sum::<f64>();
    let sse = pts.iter().zip(&g).map(|(p, g)| (p.1 - a * g).powi(2)).sum();
    (a, sse)
}

/// Least-squares fit of `m* = a s ln(b n / s)`: for each `b` the best `a` is
/// closed-form, and `b` is found by a log-spaced scan over
/// `(max s / n, 1e4]` followed by golden-section refinement.
pub fn fit_contour(n: usize, points: &[(usize, f64)], contour_level: f64) -> Result<ThresholdFit> {
    if points.len() < 2 {
        return Err(Error::Underdetermined(format!(
            "threshold fit needs at least 2 contour crossings, have {}",
            points.len()
        )));
    }
    if points.iter().any(|&(s, m)| s == 0 || s > n || !(m > 0.0)) {
        return Err(Error::Input("contour points need 1 <= s <= n and m* > 0".into()));
    }
    let nf = n as f64;
    let s_max = points.iter().map(|p| p.0).max().expect("nonempty") as f64;
    // Keep ln(b n / s) positive for every s.
    let lo = (s_max / nf).ln() + 1e-6;
    let hi = B_MAX.ln();
    let objective = |t: f64| {
        let (a, sse) = sse_at(t.exp(), nf, points);
        if a > 0.0 {
            sse
        } else {
            f64::INFINITY
        }
    };

    let step = (hi - lo) / B_GRID as f64;
    let best = (0..=B_GRID)
        .map(|k| lo + k as f64 * step)
        .min_by(|x, y| objective(*x).total_cmp(&objective(*y)))
        .expect("nonempty scan");
    let (mut x0, mut x1) = ((best - step).max(lo), (best + step).min(hi));
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..100 {
        let c = x1 - phi * (x1 - x0);
        let d = x0 + phi * (x1 - x0);
        if objective(c) <= objective(d) {
            x1 = d;
        } else {
            x0 = c;
        }
    }
    let t = 0.5 * (x0 + x1);
    let b = t.exp();
    let (a, sse) = sse_at(b, nf, points);
    if !(a > 0.0) || !sse.is_finite() {
        return Err(Error::Numerical("threshold fit found no positive a".into()));
    }
    Ok(ThresholdFit {
        a,
        b,
        contour_level,
        residual: (sse / points.len() as f64).sqrt(),
        s_points_used: points.iter().map(|p| p.0).collect(),
        m_star: points.iter().map(|p| p.1).collect(),
    })
}

pub fn fit_threshold(diagram: &PhaseDiagram, contour_level: f64) -> Result<ThresholdFit> {
    if !(contour_level > 0.0 && contour_level < 1.0) {
        return Err(Error::Parameter(format!(
            "contour level {contour_level} outside (0, 1)"
        )));
    }
    fit_contour(
        diagram.n,
        &contour_crossings(diagram, contour_level),
        contour_level,
    )
}

/// Least-squares slope of `ln m*` against `ln s`.
pub fn scaling_exponent_from(points: &[(usize, f64)]) -> Result<f64> {
    let usable: Vec<(f64, f64)> = points
        .iter()
        .filter(|&&(s, m)| s > 0 && m > 0.0)
        .map(|&(s, m)| ((s as f64).ln(), m.ln()))
        .collect();
    let span = usable.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max)
        - usable.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    if usable.len() < 3 || span < 4f64.ln() - 1e-12 {
        return Err(Error::Underdetermined(format!(
            "scaling exponent needs 3 crossings spanning 4x in s, have {}",
            usable.len()
        )));
    }
    let k = usable.len() as f64;
    let mx = usable.iter().map(|p| p.0).sum::<f64>() / k;
    let my = usable.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = usable.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = usable.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

/// Scaling exponent of the default-level contour of `diagram`.
pub fn scaling_exponent(diagram: &PhaseDiagram) -> Result<f64> {
    scaling_exponent_from(&contour_crossings(diagram, DEFAULT_CONTOUR_LEVEL))
}
