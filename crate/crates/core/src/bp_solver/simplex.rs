//! Two-phase revised simplex for `min sum(u + v)  s.t.  A u - A v = b, u, v >= 0`.
//!
//! Columns `0..n` are `u`, `n..2n` are `v` (the negated columns of `A`) and
//! `2n..2n+m` are phase-one artificials. The basis inverse is kept explicitly
//! and updated by Gauss-Jordan row operations; it is rebuilt from an LU
//! factorization every [`REFACTOR_EVERY`] pivots and before the final answer.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

const REFACTOR_EVERY: usize = 64;
/// Consecutive degenerate pivots before switching to Bland's rule.
const DEGENERATE_LIMIT: usize = 40;
const PIVOT_TOL: f64 = 1e-9;
const COST_TOL: f64 = 1e-10;
/// Re-solve rounds after a refactor reveals lost optimality or feasibility.
const MAX_CLEANUPS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum LpStatus {
    Optimal,
    Infeasible,
    IterationLimit,
}

#[derive(Debug, Clone)]
pub(crate) struct LpSolution {
    pub z: Vec<f64>,
    /// Dual vector of the final basis (phase-two costs).
    pub dual: Vec<f64>,
    pub iterations: usize,
    pub status: LpStatus,
}

pub(crate) struct SplitLp<'a> {
    m: usize,
    n: usize,
    /// Column-major copy of the (row-sign-normalized) constraint matrix.
    cols: &'a [f64],
    b: &'a [f64],
}

impl<'a> SplitLp<'a> {
    /// `cols` is column-major `m x n`; `b` must be nonnegative.
    pub fn new(m: usize, n: usize, cols: &'a [f64], b: &'a [f64]) -> Self {
        debug_assert_eq!(cols.len(), m * n);
        debug_assert!(b.iter().all(|v| *v >= 0.0));
        Self { m, n, cols, b }
    }

    fn column(&self, j: usize) -> &[f64] {
        &self.cols[j * self.m..(j + 1) * self.m]
    }

    /// Entries of variable `var`'s column, written into `out`.
    fn load_column(&self, var: usize, out: &mut [f64]) {
        let (n, m) = (self.n, self.m);
        if var < n {
            out.copy_from_slice(self.column(var));
        } else if var < 2 * n {
            for (o, a) in out.iter_mut().zip(self.column(var - n)) {
                *o = -a;
            }
        } else {
            out.fill(0.0);
            out[var - 2 * n] = 1.0;
        }
        debug_assert_eq!(out.len(), m);
    }

    pub fn solve(&self, max_iter: usize, infeas_tol: f64) -> Result<LpSolution> {
        let mut state = Tableau::new(self);
        let mut iterations = 0;

        // Phase one: drive the artificials to zero.
        let phase1 = state.run(self, Phase::One, max_iter, &mut iterations)?;
        if phase1 == RunOutcome::IterationLimit {
            return Ok(state.finish(self, iterations, LpStatus::IterationLimit));
        }
        state.refactor(self)?;
        let artificial_mass: f64 = state
            .basis
            .iter()
            .zip(&state.xb)
            .filter(|(&var, _)| var >= 2 * self.n)
            .map(|(_, &x)| x.max(0.0))
            .sum();
        if artificial_mass > infeas_tol {
            return Ok(state.finish(self, iterations, LpStatus::Infeasible));
        }
        state.evict_artificials(self)?;

        // Phase two, with cleanup rounds after a fresh factorization.
        for _ in 0..MAX_CLEANUPS {
            let outcome = state.run(self, Phase::Two, max_iter, &mut iterations)?;
            if outcome == RunOutcome::IterationLimit {
                return Ok(state.finish(self, iterations, LpStatus::IterationLimit));
            }
            state.refactor(self)?;
            state.refine(self)?;
            if state.is_clean(self) {
                break;
            }
            state.clamp_primal();
        }
        Ok(state.finish(self, iterations, LpStatus::Optimal))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    One,
    Two,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum RunOutcome {
    Optimal,
    IterationLimit,
}

struct Tableau {
    m: usize,
    n: usize,
    /// Variable in each basis position.
    basis: Vec<usize>,
    /// Basis position of each variable, or `usize::MAX`.
    position: Vec<usize>,
    /// Row-major `m x m` basis inverse.
    binv: Vec<f64>,
    xb: Vec<f64>,
    since_refactor: usize,
    // Scratch buffers.
    dual: Vec<f64>,
    col: Vec<f64>,
    dir: Vec<f64>,
}

impl Tableau {
    fn new(lp: &SplitLp<'_>) -> Self {
        let (m, n) = (lp.m, lp.n);
        let basis: Vec<usize> = (0..m).map(|i| 2 * n + i).collect();
        let mut position = vec![usize::MAX; 2 * n + m];
        for (i, &v) in basis.iter().enumerate() {
            position[v] = i;
        }
        let mut binv = vec![0.0; m * m];
        for i in 0..m {
            binv[i * m + i] = 1.0;
        }
        Self {
            m,
            n,
            basis,
            position,
            binv,
            xb: lp.b.to_vec(),
            since_refactor: 0,
            dual: vec![0.0; m],
            col: vec![0.0; m],
            dir: vec![0.0; m],
        }
    }

    fn cost(phase: Phase, var: usize, n: usize) -> f64 {
        match phase {
            Phase::One => {
                if var >= 2 * n {
                    1.0
                } else {
                    0.0
                }
            }
            Phase::Two => {
                if var >= 2 * n {
                    0.0
                } else {
                    1.0
                }
            }
        }
    }

    /// `dual = c_B^T B^{-1}`.
    fn compute_dual(&mut self, phase: Phase, n: usize) {
        let m = self.m;
        self.dual.fill(0.0);
        for (i, &var) in self.basis.iter().enumerate() {
            let c = Self::cost(phase, var, n);
            if c != 0.0 {
                let row = &self.binv[i * m..(i + 1) * m];
                for (d, r) in self.dual.iter_mut().zip(row) {
                    *d += c * r;
                }
            }
        }
    }

    /// Entering variable by Dantzig's rule, or Bland's rule when `bland`.
    fn price(&self, lp: &SplitLp<'_>, phase: Phase, bland: bool) -> Option<usize> {
        let n = lp.n;
        let mut best: Option<(usize, f64)> = None;
        let mut consider = |var: usize, d: f64| {
            if d < -COST_TOL && self.position[var] == usize::MAX {
                match best {
                    None => best = Some((var, d)),
                    Some((bv, bd)) => {
                        let better = if bland { var < bv } else { d < bd };
                        if better {
                            best = Some((var, d));
                        }
                    }
                }
            }
        };
        for j in 0..n {
            let t: f64 = lp.column(j).iter().zip(&self.dual).map(|(a, p)| a * p).sum();
            let c = Self::cost(phase, j, n);
            consider(j, c - t);
            consider(n + j, c + t);
        }
        best.map(|(v, _)| v)
    }

    /// `dir = B^{-1} col`.
    fn ftran(&mut self) {
        let m = self.m;
        for i in 0..m {
            let row = &self.binv[i * m..(i + 1) * m];
            self.dir[i] = row.iter().zip(&self.col).map(|(a, b)| a * b).sum();
        }
    }

    /// Leaving basis position by the minimum ratio test.
    fn ratio_test(&self, phase: Phase, bland: bool) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for i in 0..self.m {
            // Artificials left after phase one sit on redundant rows.
            if phase == Phase::Two && self.basis[i] >= 2 * self.n {
                continue;
            }
            let w = self.dir[i];
            if w > PIVOT_TOL {
                let ratio = self.xb[i].max(0.0) / w;
                best = match best {
                    None => Some((i, ratio)),
                    Some((bi, br)) => {
                        let tie = (ratio - br).abs() <= 1e-12 * (1.0 + br);
                        let take = if ratio < br && !tie {
                            true
                        } else if tie {
                            if bland {
                                self.basis[i] < self.basis[bi]
                            } else {
                                w > self.dir[bi]
                            }
                        } else {
                            false
                        };
                        if take {
                            Some((i, ratio))
                        } else {
                            Some((bi, br))
                        }
                    }
                };
            }
        }
        best.map(|(i, _)| i)
    }

    fn pivot(&mut self, r: usize, entering: usize, step: f64) {
        let m = self.m;
        for i in 0..m {
            self.xb[i] -= step * self.dir[i];
        }
        self.xb[r] = step;

        let w_r = self.dir[r];
        for k in 0..m {
            self.binv[r * m + k] /= w_r;
        }
        for i in 0..m {
            if i == r {
                continue;
            }
            let f = self.dir[i];
            if f != 0.0 {
                for k in 0..m {
                    self.binv[i * m + k] -= f * self.binv[r * m + k];
                }
            }
        }
        let leaving = self.basis[r];
        self.position[leaving] = usize::MAX;
        self.basis[r] = entering;
        self.position[entering] = r;
        self.since_refactor += 1;
    }

    fn run(
        &mut self,
        lp: &SplitLp<'_>,
        phase: Phase,
        max_iter: usize,
        iterations: &mut usize,
    ) -> Result<RunOutcome> {
        let mut degenerate = 0;
        loop {
            if *iterations >= max_iter {
                return Ok(RunOutcome::IterationLimit);
            }
            if self.since_refactor >= REFACTOR_EVERY {
                self.refactor(lp)?;
            }
            let bland = degenerate >= DEGENERATE_LIMIT;
            self.compute_dual(phase, lp.n);
            let Some(entering) = self.price(lp, phase, bland) else {
                return Ok(RunOutcome::Optimal);
            };
            lp.load_column(entering, &mut self.col);
            self.ftran();
            let Some(r) = self.ratio_test(phase, bland) else {
                // The objective is bounded below by zero in both phases.
                return Err(Error::Numerical("simplex ratio test found no pivot".into()));
            };
            let step = self.xb[r].max(0.0) / self.dir[r];
            if step <= 1e-14 {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
            self.pivot(r, entering, step);
            *iterations += 1;
        }
    }

    /// Rebuild `B^{-1}` and `x_B` from scratch.
    fn refactor(&mut self, lp: &SplitLp<'_>) -> Result<()> {
        let m = self.m;
        let mut bmat = DMatrix::<f64>::zeros(m, m);
        for (k, &var) in self.basis.iter().enumerate() {
            lp.load_column(var, &mut self.col);
            for i in 0..m {
                bmat[(i, k)] = self.col[i];
            }
        }
        let inv = bmat
            .lu()
            .try_inverse()
            .ok_or_else(|| Error::Numerical("simplex basis became singular".into()))?;
        for i in 0..m {
            for k in 0..m {
                self.binv[i * m + k] = inv[(i, k)];
            }
        }
        for i in 0..m {
            self.xb[i] = (0..m).map(|k| self.binv[i * m + k] * lp.b[k]).sum();
        }
        self.since_refactor = 0;
        Ok(())
    }

    /// One round of iterative refinement on `B x_B = b`.
    fn refine(&mut self, lp: &SplitLp<'_>) -> Result<()> {
        let m = self.m;
        let mut residual = lp.b.to_vec();
        for (k, &var) in self.basis.iter().enumerate() {
            lp.load_column(var, &mut self.col);
            for (r, c) in residual.iter_mut().zip(&self.col) {
                *r -= c * self.xb[k];
            }
        }
        for i in 0..m {
            let corr: f64 = (0..m).map(|k| self.binv[i * m + k] * residual[k]).sum();
            self.xb[i] += corr;
        }
        Ok(())
    }

    /// Pivot basic artificials out wherever a structural column allows it.
    /// Rows where none does are redundant; their artificial stays basic at 0.
    fn evict_artificials(&mut self, lp: &SplitLp<'_>) -> Result<()> {
        let (m, n) = (self.m, lp.n);
        for r in 0..m {
            if self.basis[r] < 2 * n {
                continue;
            }
            let row = self.binv[r * m..(r + 1) * m].to_vec();
            let mut best: Option<(usize, f64)> = None;
            for j in 0..n {
                if self.position[j] != usize::MAX || self.position[n + j] != usize::MAX {
                    continue;
                }
                let w: f64 = lp.column(j).iter().zip(&row).map(|(a, b)| a * b).sum();
                if w.abs() > PIVOT_TOL && best.is_none_or(|(_, bw)| w.abs() > bw.abs()) {
                    best = Some((j, w));
                }
            }
            if let Some((j, w)) = best {
                let var = if w > 0.0 { j } else { n + j };
                lp.load_column(var, &mut self.col);
                self.ftran();
                self.pivot(r, var, 0.0);
            }
        }
        self.refactor(lp)
    }

    fn is_clean(&mut self, lp: &SplitLp<'_>) -> bool {
        if self.xb.iter().any(|&x| x < -1e-9) {
            return false;
        }
        self.compute_dual(Phase::Two, lp.n);
        self.price(lp, Phase::Two, false).is_none()
    }

    fn clamp_primal(&mut self) {
        for x in &mut self.xb {
            if *x < 0.0 {
                *x = 0.0;
            }
        }
    }

    fn finish(mut self, lp: &SplitLp<'_>, iterations: usize, status: LpStatus) -> LpSolution {
        let n = lp.n;
        let mut z = vec![0.0; n];
        for (&var, &x) in self.basis.iter().zip(&self.xb) {
            let x = x.max(0.0);
            if var < n {
                z[var] += x;
            } else if var < 2 * n {
                z[var - n] -= x;
            }
        }
        self.compute_dual(Phase::Two, n);
        LpSolution {
            z,
            dual: self.dual,
            iterations,
            status,
        }
    }
}
