//! Equality-constrained l1 minimization (basis pursuit).
//!
//! [`l1_minimize`] solves `min ||z||_1 s.t. A z = y` as a split-variable
//! linear program with a dense revised simplex, then certifies the answer
//! with the primal residual and a duality gap. [`l1_oracle`] enumerates basic
//! solutions and is exact for desk-scale problems.

mod oracle;
mod simplex;

pub use oracle::{l1_oracle, OracleSolution, ORACLE_MAX_M, ORACLE_MAX_N};

use crate::ensembles::{MeasurementMatrix, SparseSignal};
use crate::error::{Error, Result};
use simplex::{LpStatus, SplitLp};

pub const DEFAULT_OPT_TOL: f64 = 1e-8;
pub const DEFAULT_REC_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    MaxIter,
    Infeasible,
}

impl SolveStatus {
    pub fn name(&self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::MaxIter => "max_iter",
            SolveStatus::Infeasible => "infeasible",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryResult {
    pub solution: Vec<f64>,
    /// `||solution||_1`.
    pub objective: f64,
    /// `||A solution - y||_inf`.
    pub feasibility_residual: f64,
    /// Objective minus a dual lower bound; zero for enumerated solutions.
    pub duality_gap: f64,
    pub iterations: usize,
    pub status: SolveStatus,
}

impl RecoveryResult {
    fn from_solution(
        a: &MeasurementMatrix,
        y: &[f64],
        solution: Vec<f64>,
        iterations: usize,
        status: SolveStatus,
    ) -> Self {
        let objective = l1(&solution);
        let feasibility_residual = residual_inf(a, &solution, y);
        Self {
            solution,
            objective,
            feasibility_residual,
            duality_gap: 0.0,
            iterations,
            status,
        }
    }
}

/// Solver tolerances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub feas_tol: f64,
    pub opt_tol: f64,
    pub rec_tol: f64,
}

impl Tolerances {
    /// `feas_tol = 1e-9 (1 + ||y||_inf)`, `opt_tol = 1e-8`, `rec_tol = 1e-6`.
    pub fn default_for(y: &[f64]) -> Self {
        Self {
            feas_tol: default_feas_tol(y),
            opt_tol: DEFAULT_OPT_TOL,
            rec_tol: DEFAULT_REC_TOL,
        }
    }
}

pub fn default_feas_tol(y: &[f64]) -> f64 {
    1e-9 * (1.0 + inf_norm(y))
}

pub(crate) fn l1(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).sum()
}

pub(crate) fn l2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub(crate) fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

pub(crate) fn residual_inf(a: &MeasurementMatrix, z: &[f64], y: &[f64]) -> f64 {
    a.apply(z)
        .iter()
        .zip(y)
        .fold(0.0, |acc, (p, q)| acc.max((p - q).abs()))
}

fn validate(a: &MeasurementMatrix, y: &[f64]) -> Result<()> {
    if y.len() != a.m {
        return Err(Error::Dimension(format!(
            "measurement length {} does not match {} rows",
            y.len(),
            a.m
        )));
    }
    if y.iter().chain(&a.entries).any(|v| !v.is_finite()) {
        return Err(Error::Input("non-finite value in A or y".into()));
    }
    Ok(())
}

/// Solve `min ||z||_1 s.t. A z = y`.
///
/// The problem is rescaled so that `max |A_ij| = 1` and rows are flipped so
/// that the right-hand side is nonnegative; neither changes the minimizer.
/// An `optimal` result satisfies `||A z - y||_inf <= feas_tol` and its
/// duality gap is at most `opt_tol * max(1, ||z||_1)`; a basis that fails
/// either check is reported as a numerical error.
pub fn l1_minimize(a: &MeasurementMatrix, y: &[f64], feas_tol: f64, opt_tol: f64) -> Result<RecoveryResult> {
    validate(a, y)?;
    if !(feas_tol > 0.0 && opt_tol > 0.0) {
        return Err(Error::Parameter("tolerances must be positive".into()));
    }
    let (m, n) = (a.m, a.n);
    let scale = inf_norm(&a.entries);
    if scale == 0.0 {
        let status = if inf_norm(y) <= feas_tol {
            SolveStatus::Optimal
        } else {
            SolveStatus::Infeasible
        };
        return Ok(RecoveryResult::from_solution(a, y, vec![0.0; n], 0, status));
    }

    let signs: Vec<f64> = y.iter().map(|v| if *v < 0.0 { -1.0 } else { 1.0 }).collect();
    let mut cols = vec![0.0; m * n];
    for i in 0..m {
        let f = signs[i] / scale;
        for (j, v) in a.row(i).iter().enumerate() {
            cols[j * m + i] = v * f;
        }
    }
    let b: Vec<f64> = y.iter().map(|v| v.abs() / scale).collect();

    let max_iter = 50 * (m + n) + 1000;
    let lp = SplitLp::new(m, n, &cols, &b).solve(max_iter, feas_tol / scale)?;
    let status = match lp.status {
        LpStatus::Optimal => SolveStatus::Optimal,
        LpStatus::Infeasible => SolveStatus::Infeasible,
        LpStatus::IterationLimit => SolveStatus::MaxIter,
    };
    let mut result = RecoveryResult::from_solution(a, y, lp.z, lp.iterations, status);

    if status == SolveStatus::Optimal {
        // Scale the dual into the feasible region |A^T pi|_inf <= 1 to get a
        // valid lower bound b^T pi.
        let worst = (0..n)
            .map(|j| {
                cols[j * m..(j + 1) * m]
                    .iter()
                    .zip(&lp.dual)
                    .map(|(c, p)| c * p)
                    .sum::<f64>()
                    .abs()
            })
            .fold(0.0, f64::max);
        let bound = b.iter().zip(&lp.dual).map(|(p, q)| p * q).sum::<f64>() / worst.max(1.0);
        result.duality_gap = (result.objective - bound).max(0.0);

        if result.feasibility_residual > feas_tol {
            return Err(Error::Numerical(format!(
                "simplex basis residual {:e} exceeds feas_tol {:e}",
                result.feasibility_residual, feas_tol
            )));
        }
        if result.duality_gap > opt_tol * result.objective.max(1.0) {
            return Err(Error::Numerical(format!(
                "duality gap {:e} exceeds opt_tol",
                result.duality_gap
            )));
        }
    }
    Ok(result)
}

/// [`l1_minimize`] with the default tolerances for `y`.
pub fn l1_minimize_default(a: &MeasurementMatrix, y: &[f64]) -> Result<RecoveryResult> {
    let tol = Tolerances::default_for(y);
    l1_minimize(a, y, tol.feas_tol, tol.opt_tol)
}

/// `||z_hat - x||_2 <= rec_tol * max(1, ||x||_2)`.
pub fn check_exact_recovery(result: &RecoveryResult, x: &SparseSignal, rec_tol: f64) -> Result<bool> {
    if result.solution.len() != x.n {
        return Err(Error::Dimension(format!(
            "solution length {} does not match signal length {}",
            result.solution.len(),
            x.n
        )));
    }
    let mut diff = result.solution.clone();
    for (&j, &v) in x.support.iter().zip(&x.values) {
        diff[j] -= v;
    }
    Ok(l2(&diff) <= rec_tol * x.l2_norm().max(1.0))
}
