use itertools::Itertools;
use rand::seq::index;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::opnorm::{opnorm_l2_to_l1_exact, OPNORM_MAX_ROWS};
use super::sphere::{sphere_min_l1, CERTIFIED_MAX_DIM, DEFAULT_GRID_DENSITY, DEFAULT_REFINE_ITERS};
use crate::ensembles::MeasurementMatrix;
use crate::error::{Error, Result};
use crate::rng;

/// Default cap on the number of supports enumerated by the exact method.
pub const EXACT_SUPPORT_BUDGET: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RubMethod {
    /// Enumerate every support; certified bounds.
    ExactTiny,
    /// Random sparse unit vectors; `lower` over-estimates the minimum and
    /// `upper` under-estimates the maximum.
    MonteCarlo,
}

impl RubMethod {
    pub fn name(&self) -> &'static str {
        match self {
            RubMethod::ExactTiny => "exact_tiny",
            RubMethod::MonteCarlo => "monte_carlo",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "exact_tiny" | "exact" => Ok(RubMethod::ExactTiny),
            "monte_carlo" => Ok(RubMethod::MonteCarlo),
            other => Err(Error::Parameter(format!("unknown RUB method '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RubEstimate {
    pub sparsity_level: usize,
    pub lower: f64,
    pub upper: f64,
    pub method: RubMethod,
    /// Supports enumerated (exact) or vectors sampled (Monte Carlo).
    pub samples_or_supports: usize,
    pub lower_is_certified: bool,
    pub upper_is_certified: bool,
    pub seed: u64,
}

/// Estimate the RUB constants of `a` at sparsity level `k`.
///
/// `ExactTiny` needs `k <= 3`, `m <= 16` and `C(n, k) <= budget`; its lower
/// constant is the smallest certified lower bound of the per-support sphere
/// minima and its upper constant the largest exact `l2 -> l1` norm.
/// `MonteCarlo` evaluates `budget` random unit vectors with uniform support.
pub fn rub_constants(
    a: &MeasurementMatrix,
    k: usize,
    method: RubMethod,
    budget: usize,
    seed: u64,
) -> Result<RubEstimate> {
    if k == 0 || k > a.n {
        return Err(Error::Parameter(format!(
            "sparsity level {k} outside 1..={}",
            a.n
        )));
    }
    match method {
        RubMethod::ExactTiny => exact(a, k, budget, seed),
        RubMethod::MonteCarlo => monte_carlo(a, k, budget, seed),
    }
}

fn binomial(n: usize, k: usize) -> Option<usize> {
    (0..k).try_fold(1usize, |acc, i| acc.checked_mul(n - i).map(|v| v / (i + 1)))
}

fn exact(a: &MeasurementMatrix, k: usize, budget: usize, seed: u64) -> Result<RubEstimate> {
    if k > CERTIFIED_MAX_DIM {
        return Err(Error::Size(format!(
            "exact RUB needs k <= {CERTIFIED_MAX_DIM}, got {k}"
        )));
    }
    if a.m > OPNORM_MAX_ROWS {
        return Err(Error::Size(format!(
            "exact RUB needs m <= {OPNORM_MAX_ROWS}, got {}",
            a.m
        )));
    }
    let supports = binomial(a.n, k)
        .filter(|&c| c <= budget)
        .ok_or_else(|| Error::Size(format!("C({}, {k}) supports exceed the budget of {budget}", a.n)))?;

    let all: Vec<Vec<usize>> = (0..a.n).combinations(k).collect();
    let per_support: Vec<(f64, f64)> = all
        .par_iter()
        .map(|cols| {
            let sub = a.select_columns(cols);
            let low = sphere_min_l1(&sub, DEFAULT_GRID_DENSITY, DEFAULT_REFINE_ITERS)?;
            let high = opnorm_l2_to_l1_exact(&sub)?;
            let low = low
                .lower_bound
                .ok_or_else(|| Error::Numerical("uncertified sphere minimum".into()))?;
            Ok((low, high))
        })
        .collect::<Result<_>>()?;
    let lower = per_support.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let upper = per_support.iter().map(|p| p.1).fold(0.0, f64::max);
    Ok(RubEstimate {
        sparsity_level: k,
        lower,
        upper,
        method: RubMethod::ExactTiny,
        samples_or_supports: supports,
        lower_is_certified: true,
        upper_is_certified: true,
        seed,
    })
}

fn monte_carlo(a: &MeasurementMatrix, k: usize, budget: usize, seed: u64) -> Result<RubEstimate> {
    if budget == 0 {
        return Err(Error::Parameter("Monte Carlo budget must be positive".into()));
    }
    let values: Vec<f64> = (0..budget as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = rng::stream(seed, &[t]);
            let support = index::sample(&mut rng, a.n, k).into_vec();
            let mut coef: Vec<f64> = (0..k).map(|_| rng.sample(StandardNormal)).collect();
            let norm = coef.iter().map(|c| c * c).sum::<f64>().sqrt();
            coef.iter_mut().for_each(|c| *c /= norm);
            (0..a.m)
                .map(|i| {
                    support
                        .iter()
                        .zip(&coef)
                        .map(|(&j, c)| a.get(i, j) * c)
                        .sum::<f64>()
                        .abs()
                })
                .sum()
        })
        .collect();
    Ok(RubEstimate {
        sparsity_level: k,
        lower: values.iter().copied().fold(f64::INFINITY, f64::min),
        upper: values.iter().copied().fold(0.0, f64::max),
        method: RubMethod::MonteCarlo,
        samples_or_supports: budget,
        lower_is_certified: false,
        upper_is_certified: false,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::{sample_matrix, EntryDistribution};
    use approx::assert_relative_eq;

    #[test]
    fn identity_constants() {
        let a = MeasurementMatrix::identity(5).unwrap();
        for k in 1..=3 {
            let r = rub_constants(&a, k, RubMethod::ExactTiny, EXACT_SUPPORT_BUDGET, 0).unwrap();
            assert_relative_eq!(r.lower, 1.0, epsilon = 1e-9);
            assert_relative_eq!(r.upper, (k as f64).sqrt(), epsilon = 1e-12);
            assert!(r.lower_is_certified && r.upper_is_certified);
        }
    }

    #[test]
    fn one_sparse_constants_are_column_norms() {
        let a = sample_matrix(5, 7, &EntryDistribution::laplace(), 9).unwrap();
        let norms: Vec<f64> = (0..7)
            .map(|j| a.column(j).iter().map(|v| v.abs()).sum())
            .collect();
        let r = rub_constants(&a, 1, RubMethod::ExactTiny, EXACT_SUPPORT_BUDGET, 0).unwrap();
        assert_eq!(r.lower, norms.iter().copied().fold(f64::INFINITY, f64::min));
        assert_relative_eq!(
            r.upper,
            norms.iter().copied().fold(0.0, f64::max),
            epsilon = 1e-15
        );
        assert_eq!(r.samples_or_supports, 7);
    }

    #[test]
    fn monte_carlo_brackets_inside_exact() {
        let a = sample_matrix(6, 8, &EntryDistribution::laplace(), 21).unwrap();
        let ex = rub_constants(&a, 2, RubMethod::ExactTiny, EXACT_SUPPORT_BUDGET, 0).unwrap();
        let mc = rub_constants(&a, 2, RubMethod::MonteCarlo, 20_000, 5).unwrap();
        assert!(mc.lower >= ex.lower);
        assert!(mc.upper <= ex.upper + 1e-15);
        assert!(!mc.lower_is_certified && !mc.upper_is_certified);
    }

    #[test]
    fn exact_caps() {
        let a = sample_matrix(17, 4, &EntryDistribution::gaussian(), 1).unwrap();
        assert!(matches!(
            rub_constants(&a, 1, RubMethod::ExactTiny, 100, 0),
            Err(Error::Size(_))
        ));
        let b = sample_matrix(4, 8, &EntryDistribution::gaussian(), 1).unwrap();
        assert!(matches!(
            rub_constants(&b, 4, RubMethod::ExactTiny, 1000, 0),
            Err(Error::Size(_))
        ));
        assert!(matches!(
            rub_constants(&b, 3, RubMethod::ExactTiny, 10, 0),
            Err(Error::Size(_))
        ));
        assert!(matches!(
            rub_constants(&b, 0, RubMethod::MonteCarlo, 10, 0),
            Err(Error::Parameter(_))
        ));
    }
}
