//! Brute-force l1 oracle by enumeration of basic solutions.
//!
//! Every vertex of `{(u, v) >= 0 : A(u - v) = y}` uses at most `rank(A)`
//! linearly independent columns of `A`, and the l1 objective is minimized at a
//! vertex. Enumerating all `rank`-subsets of columns, solving each square (or
//! tall, consistent) subsystem and keeping the cheapest feasible solution
//! therefore gives the exact optimum.

use std::cmp::Ordering;

use itertools::Itertools;
use nalgebra::{DMatrix, DVector};

use super::{inf_norm, l1, RecoveryResult, SolveStatus};
use crate::ensembles::MeasurementMatrix;
use crate::error::{Error, Result};

pub const ORACLE_MAX_N: usize = 12;
pub const ORACLE_MAX_M: usize = 10;

const RANK_TOL: f64 = 1e-10;
const TIE_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct OracleSolution {
    /// The lexicographically smallest optimal basic solution.
    pub result: RecoveryResult,
    /// Every distinct optimal basic solution, sorted lexicographically.
    pub optima: Vec<Vec<f64>>,
}

impl OracleSolution {
    pub fn is_unique(&self) -> bool {
        self.optima.len() == 1
    }
}

fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        if (x - y).abs() > TIE_TOL {
            return x.partial_cmp(y).unwrap_or(Ordering::Equal);
        }
    }
    Ordering::Equal
}

fn rank(mat: &DMatrix<f64>) -> usize {
    if mat.is_empty() {
        return 0;
    }
    let svd = mat.clone().svd(false, false);
    let top = svd.singular_values.max();
    svd.singular_values
        .iter()
        .filter(|&&s| s > RANK_TOL * top.max(1.0))
        .count()
}

pub fn l1_oracle(a: &MeasurementMatrix, y: &[f64]) -> Result<OracleSolution> {
    if a.n > ORACLE_MAX_N || a.m > ORACLE_MAX_M {
        return Err(Error::Size(format!(
            "oracle limited to m <= {ORACLE_MAX_M}, n <= {ORACLE_MAX_N}; got {}x{}",
            a.m, a.n
        )));
    }
    if y.len() != a.m {
        return Err(Error::Dimension("measurement length does not match rows".into()));
    }
    let full = a.to_dmatrix();
    let r = rank(&full);
    let rhs = DVector::from_column_slice(y);
    let feas_tol = 1e-9 * (1.0 + inf_norm(y));

    let mut candidates: Vec<Vec<f64>> = Vec::new();
    if r == 0 {
        if inf_norm(y) <= feas_tol {
            candidates.push(vec![0.0; a.n]);
        }
    } else {
        for cols in (0..a.n).combinations(r) {
            let sub = a.select_columns(&cols);
            if rank(&sub) < r {
                continue;
            }
            let svd = sub.clone().svd(true, true);
            let Ok(coef) = svd.solve(&rhs, RANK_TOL) else {
                continue;
            };
            let resid = (&sub * &coef - &rhs).amax();
            if resid > feas_tol {
                continue;
            }
            let mut z = vec![0.0; a.n];
            for (k, &j) in cols.iter().enumerate() {
                z[j] = if coef[k].abs() <= 1e-14 { 0.0 } else { coef[k] };
            }
            candidates.push(z);
        }
    }

    if candidates.is_empty() {
        let result = RecoveryResult::from_solution(a, y, vec![0.0; a.n], 0, SolveStatus::Infeasible);
        return Ok(OracleSolution {
            result,
            optima: Vec::new(),
        });
    }

    let best = candidates.iter().map(|z| l1(z)).fold(f64::INFINITY, f64::min);
    let mut optima: Vec<Vec<f64>> = candidates
        .into_iter()
        .filter(|z| l1(z) <= best + TIE_TOL * best.max(1.0))
        .collect();
    optima.sort_by(|p, q| lex_cmp(p, q));
    optima.dedup_by(|p, q| lex_cmp(p, q) == Ordering::Equal);

    let result = RecoveryResult::from_solution(a, y, optima[0].clone(), 0, SolveStatus::Optimal);
    Ok(OracleSolution { result, optima })
}
