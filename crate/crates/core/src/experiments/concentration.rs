use rayon::prelude::*;

use crate::ensembles::EntryDistribution;
use crate::error::{Error, Result};
use crate::rng;

/// Statistics of `||Ax||_1` over the trials at one `m`.
#[derive(Debug, Clone, PartialEq)]
pub struct MStats {
    pub m: usize,
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
    /// Per delta: fraction of trials outside `[lower_ref - delta, 1 + delta]`.
    pub outside_band: Vec<f64>,
    /// Per delta: fraction of trials with `|value - mean| > delta`.
    pub off_mean: Vec<f64>,
}

impl MStats {
    pub fn std_error(&self, trials: usize) -> f64 {
        self.std / (trials as f64).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConcentrationReport {
    pub dist: EntryDistribution,
    pub x: Vec<f64>,
    pub m_values: Vec<usize>,
    pub delta_values: Vec<f64>,
    /// `1 / (16 c3^2)` for the law's moment constant `c3`.
    pub lower_ref: f64,
    pub trials: usize,
    pub seed: u64,
    pub stats: Vec<MStats>,
}

impl ConcentrationReport {
    /// Every mean is at most `1 + 4` standard errors.
    pub fn jensen_holds(&self) -> bool {
        self.stats
            .iter()
            .all(|st| st.mean <= 1.0 + 4.0 * st.std_error(self.trials))
    }

    /// Whether the off-mean rate for `delta_values[d]` is nonincreasing in
    /// `m` up to three binomial standard deviations.
    pub fn off_mean_decays(&self, d: usize) -> bool {
        let t = self.trials as f64;
        self.stats.windows(2).all(|w| {
            let (p, q) = (w[0].off_mean[d], w[1].off_mean[d]);
            let sigma = (p * (1.0 - p) / t + q * (1.0 - q) / t).sqrt().max(1.0 / t);
            q <= p + 3.0 * sigma
        })
    }
}

/// Draw `trials` matrices per `m` and record `||Ax||_1`.
///
/// Only the columns on the support of `x` are drawn. Trial `t` at `m` uses
/// the stream `(seed, m, t)`, so results are independent of thread count.
pub fn concentration_experiment(
    x: &[f64],
    dist: &EntryDistribution,
    m_values: &[usize],
    delta_values: &[f64],
    trials: usize,
    seed: u64,
) -> Result<ConcentrationReport> {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if x.is_empty() || (norm - 1.0).abs() > 1e-12 {
        return Err(Error::Input(format!(
            "probe must be a unit vector, has norm {norm}"
        )));
    }
    if trials < 100 {
        return Err(Error::Parameter(format!(
            "need at least 100 trials, got {trials}"
        )));
    }
    if m_values.is_empty() || m_values.contains(&0) {
        return Err(Error::Parameter("m values must be nonempty and positive".into()));
    }
    if delta_values.iter().any(|d| !(*d > 0.0)) {
        return Err(Error::Parameter("delta values must be positive".into()));
    }
    let lower_ref = 1.0 / (16.0 * dist.moment_constant_c3 * dist.moment_constant_c3);
    let active: Vec<f64> = x.iter().copied().filter(|v| *v != 0.0).collect();

    let stats = m_values
        .iter()
        .map(|&m| {
            let values: Vec<f64> = (0..trials as u64)
                .into_par_iter()
                .map(|t| {
                    let mut rng = rng::stream(seed, &[m as u64, t]);
                    let total: f64 = (0..m)
                        .map(|_| {
                            active
                                .iter()
                                .map(|&v| dist.sample(&mut rng) * v)
                                .sum::<f64>()
                                .abs()
                        })
                        .sum();
                    total / m as f64
                })
                .collect();
            summarize(m, &values, lower_ref, delta_values)
        })
        .collect();

    Ok(ConcentrationReport {
        dist: *dist,
        x: x.to_vec(),
        m_values: m_values.to_vec(),
        delta_values: delta_values.to_vec(),
        lower_ref,
        trials,
        seed,
        stats,
    })
}

fn summarize(m: usize, values: &[f64], lower_ref: f64, deltas: &[f64]) -> MStats {
    let t = values.len() as f64;
    let mean = values.iter().sum::<f64>() / t;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (t - 1.0);
    let rate = |pred: &dyn Fn(f64) -> bool| values.iter().filter(|&&v| pred(v)).count() as f64 / t;
    MStats {
        m,
        mean,
        std: var.sqrt(),
        min: values.iter().copied().fold(f64::INFINITY, f64::min),
        max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        outside_band: deltas
            .iter()
            .map(|&d| rate(&|v| v < lower_ref - d || v > 1.0 + d))
            .collect(),
        off_mean: deltas.iter().map(|&d| rate(&|v| (v - mean).abs() > d)).collect(),
    }
}

/// Whether `std(m)` scales like `m^(-1/2)` within a factor of 2.
///
/// For consecutive `m_i < m_j` the ratio `std(m_j)/std(m_i)` must lie in
/// `[r/2, 2r]` with target `r = sqrt(m_i/m_j)`; for a quadrupling that is
/// `[0.25, 1.0]` around `0.5`.
pub fn std_scaling_check(report: &ConcentrationReport) -> Result<bool> {
    let ms = &report.m_values;
    if ms.len() < 3 || ms.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Parameter(
            "std scaling needs at least 3 increasing m values".into(),
        ));
    }
    if (ms[ms.len() - 1] as f64) < 8.0 * ms[0] as f64 {
        return Err(Error::Parameter(
            "m values must span at least a factor of 8".into(),
        ));
    }
    if let Some(st) = report
        .stats
        .iter()
        .find(|st| !(st.std > 0.0) || !st.std.is_finite())
    {
        return Err(Error::Degenerate(format!(
            "std {} at m = {} is degenerate",
            st.std, st.m
        )));
    }
    Ok(report.stats.windows(2).all(|w| {
        let target = (w[0].m as f64 / w[1].m as f64).sqrt();
        let ratio = w[1].std / w[0].std;
        (0.5 * target..=2.0 * target).contains(&ratio)
    }))
}
