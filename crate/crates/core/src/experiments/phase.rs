use rayon::prelude::*;

use crate::bp_solver::{check_exact_recovery, l1_minimize_default, DEFAULT_REC_TOL};
use crate::ensembles::{measure, sample_matrix_with, sample_sparse_signal_with, EntryDistribution, ValueLaw};
use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseDiagram {
    pub n: usize,
    pub s_grid: Vec<usize>,
    pub m_grid: Vec<usize>,
    /// `successes[i][j]`: recovered trials at `(s_grid[i], m_grid[j])`.
    pub successes: Vec<Vec<usize>>,
    pub trials_per_cell: usize,
    pub dist: EntryDistribution,
    pub value_law: ValueLaw,
    pub master_seed: u64,
}

/// A pair of cells at one `s` where success drops by more than 3 binomial
/// standard deviations as `m` grows.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotonicityViolation {
    pub s: usize,
    pub m_low: usize,
    pub m_high: usize,
    pub drop: f64,
    pub sigma: f64,
}

impl PhaseDiagram {
    pub fn success(&self, i: usize, j: usize) -> f64 {
        self.successes[i][j] as f64 / self.trials_per_cell as f64
    }

    /// Success probabilities for `s_grid[i]` across `m_grid`.
    pub fn success_row(&self, i: usize) -> Vec<f64> {
        (0..self.m_grid.len()).map(|j| self.success(i, j)).collect()
    }

    pub fn monotonicity_violations(&self) -> Vec<MonotonicityViolation> {
        let t = self.trials_per_cell as f64;
        let mut out = Vec::new();
        for (i, &s) in self.s_grid.iter().enumerate() {
            for lo in 0..self.m_grid.len() {
                for hi in lo + 1..self.m_grid.len() {
                    let (p, q) = (self.success(i, lo), self.success(i, hi));
                    let pooled = 0.5 * (p + q);
                    let sigma = (2.0 * pooled * (1.0 - pooled) / t).sqrt().max(1.0 / t);
                    if p - q > 3.0 * sigma {
                        out.push(MonotonicityViolation {
                            s,
                            m_low: self.m_grid[lo],
                            m_high: self.m_grid[hi],
                            drop: p - q,
                            sigma,
                        });
                    }
                }
            }
        }
        out
    }
}

fn run_trial(
    n: usize,
    s: usize,
    m: usize,
    dist: &EntryDistribution,
    law: ValueLaw,
    seed: u64,
    t: usize,
) -> Result<bool> {
    let mut rng = rng::stream(seed, &[s as u64, m as u64, t as u64]);
    let a = sample_matrix_with(m, n, dist, &mut rng)?;
    let x = sample_sparse_signal_with(n, s, law, &mut rng)?;
    let y = measure(&a, &x)?;
    match l1_minimize_default(&a, &y) {
        Ok(res) => check_exact_recovery(&res, &x, DEFAULT_REC_TOL),
        // An uncertified solve is a failed recovery, not a failed experiment.
        Err(Error::Numerical(_)) => Ok(false),
        Err(e) => Err(e),
    }
}

/// Empirical recovery probability on the `(s, m)` grid.
///
/// Trial `t` of cell `(s, m)` draws `A` then `x` from the stream
/// `(master_seed, s, m, t)`; cells run in parallel and are reduced in grid
/// order.
pub fn phase_diagram(
    n: usize,
    s_grid: &[usize],
    m_grid: &[usize],
    dist: &EntryDistribution,
    value_law: ValueLaw,
    trials_per_cell: usize,
    master_seed: u64,
) -> Result<PhaseDiagram> {
    if s_grid.is_empty() || m_grid.is_empty() {
        return Err(Error::Parameter("s and m grids must be nonempty".into()));
    }
    if s_grid.windows(2).any(|w| w[0] >= w[1]) || m_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Parameter("grids must be strictly ascending".into()));
    }
    if m_grid[0] == 0 || n == 0 {
        return Err(Error::Parameter("n and every m must be positive".into()));
    }
    if let Some(&s) = s_grid.last().filter(|&&s| s > n) {
        return Err(Error::Parameter(format!("sparsity {s} exceeds n = {n}")));
    }
    if trials_per_cell == 0 {
        return Err(Error::Parameter("need at least one trial per cell".into()));
    }

    let jobs: Vec<(usize, usize, usize)> = (0..s_grid.len())
        .flat_map(|i| (0..m_grid.len()).flat_map(move |j| (0..trials_per_cell).map(move |t| (i, j, t))))
        .collect();
    let outcomes: Vec<bool> = jobs
        .par_iter()
        .map(|&(i, j, t)| run_trial(n, s_grid[i], m_grid[j], dist, value_law, master_seed, t))
        .collect::<Result<_>>()?;

    let mut successes = vec![vec![0usize; m_grid.len()]; s_grid.len()];
    for (&(i, j, _), ok) in jobs.iter().zip(outcomes) {
        successes[i][j] += ok as usize;
    }
    Ok(PhaseDiagram {
        n,
        s_grid: s_grid.to_vec(),
        m_grid: m_grid.to_vec(),
        successes,
        trials_per_cell,
        dist: *dist,
        value_law,
        master_seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_sparsity_and_square_cells_succeed() {
        let d = phase_diagram(
            12,
            &[0, 2],
            &[4, 12],
            &EntryDistribution::laplace(),
            ValueLaw::Gaussian,
            10,
            5,
        )
        .unwrap();
        assert_eq!(d.successes[0], vec![10, 10]);
        assert_eq!(d.successes[1][1], 10);
        assert!(d.success_row(1).iter().all(|p| (0.0..=1.0).contains(p)));
    }

    #[test]
    fn grid_validation() {
        let g = EntryDistribution::gaussian();
        assert!(phase_diagram(8, &[], &[4], &g, ValueLaw::Gaussian, 5, 0).is_err());
        assert!(phase_diagram(8, &[2, 1], &[4], &g, ValueLaw::Gaussian, 5, 0).is_err());
        assert!(phase_diagram(8, &[9], &[4], &g, ValueLaw::Gaussian, 5, 0).is_err());
    }

    #[test]
    fn violations_flag_large_drops() {
        let mut d = phase_diagram(
            6,
            &[1],
            &[3, 6],
            &EntryDistribution::gaussian(),
            ValueLaw::Unit,
            20,
            1,
        )
        .unwrap();
        d.successes[0] = vec![20, 0];
        assert_eq!(d.monotonicity_violations().len(), 1);
        d.successes[0] = vec![11, 10];
        assert!(d.monotonicity_violations().is_empty());
    }
}
