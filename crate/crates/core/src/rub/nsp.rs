//! Null space property of order `s`: every nonzero `h` with `A h = 0` has
//! `sum of its s largest |h_j|  <  ||h||_1 / 2`. It holds exactly when every
//! `s`-sparse signal is the unique l1 minimizer of its measurements.

use nalgebra::DVector;
use rand::Rng;
use rand_distr::StandardNormal;

use super::null_space;
use super::sphere::{branch_and_bound, Arc, DEFAULT_GRID_DENSITY};
use crate::ensembles::{MeasurementMatrix, SparseSignal};
use crate::error::{Error, Result};
use crate::rng;

/// Margins at or below this count as violations (the inequality is strict).
pub const NSP_TOL: f64 = 1e-12;
const NSP_ROUNDS: usize = 60;

#[derive(Debug, Clone, PartialEq)]
pub enum NspOutcome {
    /// Proven over the whole kernel sphere; `margin` is a certified lower
    /// bound on `||h||_1 / 2 - top_s(h)` over unit kernel vectors.
    HoldsCertified { margin: f64 },
    /// No violation among the sampled kernel directions.
    HoldsSampled { margin: f64, samples: usize },
    /// `witness` is a unit kernel vector violating the property.
    Fails { witness: Vec<f64> },
}

impl NspOutcome {
    pub fn holds(&self) -> bool {
        !matches!(self, NspOutcome::Fails { .. })
    }

    pub fn name(&self) -> &'static str {
        match self {
            NspOutcome::HoldsCertified { .. } => "holds_certified",
            NspOutcome::HoldsSampled { .. } => "holds_sampled",
            NspOutcome::Fails { .. } => "fails",
        }
    }
}

fn top_s_mass(h: &[f64], s: usize) -> f64 {
    let mut mags: Vec<f64> = h.iter().map(|v| v.abs()).collect();
    mags.sort_by(|a, b| b.total_cmp(a));
    mags.iter().take(s).sum()
}

/// `||h||_1 / 2 - (sum of the s largest |h_j|)`.
pub fn nsp_margin(h: &[f64], s: usize) -> f64 {
    0.5 * h.iter().map(|v| v.abs()).sum::<f64>() - top_s_mass(h, s)
}

/// Decide the null space property of order `s` for `a`.
///
/// Kernel dimension 0 or 1 is decided exactly, dimension 2 by branch and
/// bound on the kernel circle (the margin is Lipschitz with constant
/// `sqrt(n)/2 + sqrt(s)`), and higher dimensions by sampling
/// `sample_budget` random unit kernel vectors.
pub fn nsp_oracle(a: &MeasurementMatrix, s: usize, sample_budget: usize, seed: u64) -> Result<NspOutcome> {
    if s > a.n {
        return Err(Error::Parameter(format!("order {s} exceeds dimension {}", a.n)));
    }
    let (_, kernel) = null_space(&a.to_dmatrix());
    let n = a.n;
    match kernel.len() {
        0 => Ok(NspOutcome::HoldsCertified {
            margin: f64::INFINITY,
        }),
        1 => {
            let h: Vec<f64> = kernel[0].iter().copied().collect();
            let margin = nsp_margin(&h, s);
            Ok(if margin <= NSP_TOL {
                NspOutcome::Fails { witness: h }
            } else {
                NspOutcome::HoldsCertified { margin }
            })
        }
        2 => {
            let (v1, v2) = (&kernel[0], &kernel[1]);
            let embed = |c: &[f64]| -> Vec<f64> { (v1 * c[0] + v2 * c[1]).iter().copied().collect() };
            let lip = 0.5 * (n as f64).sqrt() + (s as f64).sqrt();
            let res = branch_and_bound(
                |c| nsp_margin(&embed(c), s),
                lip,
                Arc::half_circle(DEFAULT_GRID_DENSITY),
                NSP_ROUNDS,
            );
            Ok(if res.best <= NSP_TOL {
                NspOutcome::Fails {
                    witness: embed(&res.argmin),
                }
            } else if res.lower > NSP_TOL {
                NspOutcome::HoldsCertified { margin: res.lower }
            } else {
                NspOutcome::HoldsSampled {
                    margin: res.best,
                    samples: 0,
                }
            })
        }
        d => {
            if sample_budget == 0 {
                return Err(Error::Parameter("sample budget must be positive".into()));
            }
            let mut rng = rng::root(seed);
            let mut worst = f64::INFINITY;
            for _ in 0..sample_budget {
                let coef: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
                let h = kernel
                    .iter()
                    .zip(&coef)
                    .fold(DVector::zeros(n), |acc, (v, c)| acc + v * *c)
                    .normalize();
                let h: Vec<f64> = h.iter().copied().collect();
                let margin = nsp_margin(&h, s);
                if margin <= NSP_TOL {
                    return Ok(NspOutcome::Fails { witness: h });
                }
                worst = worst.min(margin);
            }
            Ok(NspOutcome::HoldsSampled {
                margin: worst,
                samples: sample_budget,
            })
        }
    }
}

/// From a violating kernel vector `h`, the `s`-sparse signal `x = h_S` on the
/// top-`s` coordinates and the competing feasible point `-h_{S^c}`, which has
/// the same measurements and no larger l1 norm.
pub fn nsp_counterexample(witness: &[f64], s: usize) -> Result<(SparseSignal, Vec<f64>)> {
    let mut order: Vec<usize> = (0..witness.len()).collect();
    order.sort_by(|&a, &b| witness[b].abs().total_cmp(&witness[a].abs()).then(a.cmp(&b)));
    let mut head: Vec<usize> = order.into_iter().take(s).filter(|&j| witness[j] != 0.0).collect();
    head.sort_unstable();
    let values = head.iter().map(|&j| witness[j]).collect();
    let x = SparseSignal::new(witness.len(), head.clone(), values)?;
    let alt = witness
        .iter()
        .enumerate()
        .map(|(j, &v)| if head.contains(&j) { 0.0 } else { -v })
        .collect();
    Ok((x, alt))
}
