//! Entry distributions, measurement matrices and sparse test signals.

mod dist;
pub mod io;

use std::collections::BTreeSet;

use nalgebra::DMatrix;
use rand::seq::index;
use rand::Rng;
use rand_distr::StandardNormal;

pub use dist::{DistKind, EntryDistribution, DEFAULT_MIXTURE_WEIGHT};

use crate::error::{Error, Result};
use crate::rng;

/// Where a matrix came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Provenance {
    Sampled {
        dist: EntryDistribution,
        seed: u64,
    },
    /// Entries supplied directly (fixtures, loaded files without a law).
    Explicit,
}

/// Dense `m x n` matrix stored row-major.
///
/// Sampled matrices hold `xi_ij / m` where the `xi_ij` are i.i.d. draws of a
/// unit-variance law, so each stored entry has variance `1 / m^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementMatrix {
    pub m: usize,
    pub n: usize,
    pub entries: Vec<f64>,
    pub provenance: Provenance,
}

impl MeasurementMatrix {
    /// Wrap explicit row-major entries.
    pub fn from_row_major(m: usize, n: usize, entries: Vec<f64>) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::Dimension(format!("matrix must be non-empty, got {m}x{n}")));
        }
        if entries.len() != m * n {
            return Err(Error::Dimension(format!(
                "expected {} entries for {m}x{n}, got {}",
                m * n,
                entries.len()
            )));
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::Input("matrix entries must be finite".into()));
        }
        Ok(Self {
            m,
            n,
            entries,
            provenance: Provenance::Explicit,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let m = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        Self::from_row_major(m, n, rows.concat())
    }

    pub fn identity(n: usize) -> Result<Self> {
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            entries[i * n + i] = 1.0;
        }
        Self::from_row_major(n, n, entries)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    /// Copy of column `j`.
    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.m).map(|i| self.get(i, j)).collect()
    }

    /// `m x |cols|` submatrix `A_S`, row-major.
    pub fn select_columns(&self, cols: &[usize]) -> DMatrix<f64> {
        DMatrix::from_fn(self.m, cols.len(), |i, k| self.get(i, cols[k]))
    }

    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.m, self.n, &self.entries)
    }

    pub fn from_dmatrix(a: &DMatrix<f64>) -> Result<Self> {
        let entries = (0..a.nrows())
            .flat_map(|i| (0..a.ncols()).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)])
            .collect();
        Self::from_row_major(a.nrows(), a.ncols(), entries)
    }

    /// Dense product `A z`.
    pub fn apply(&self, z: &[f64]) -> Vec<f64> {
        debug_assert_eq!(z.len(), self.n);
        (0..self.m)
            .map(|i| self.row(i).iter().zip(z).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Same matrix with every entry multiplied by `alpha`.
    pub fn scaled(&self, alpha: f64) -> Self {
        Self {
            m: self.m,
            n: self.n,
            entries: self.entries.iter().map(|v| v * alpha).collect(),
            provenance: Provenance::Explicit,
        }
    }
}

/// Law of the nonzero values of a test signal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValueLaw {
    Gaussian,
    Rademacher,
    /// Every nonzero equals 1.
    Unit,
}

impl ValueLaw {
    pub fn name(&self) -> &'static str {
        match self {
            ValueLaw::Gaussian => "gaussian",
            ValueLaw::Rademacher => "rademacher",
            ValueLaw::Unit => "unit",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "gaussian" => Ok(ValueLaw::Gaussian),
            "rademacher" => Ok(ValueLaw::Rademacher),
            "unit" => Ok(ValueLaw::Unit),
            other => Err(Error::Parameter(format!("unknown value law '{other}'"))),
        }
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            ValueLaw::Gaussian => loop {
                let v: f64 = rng.sample(StandardNormal);
                if v != 0.0 {
                    return v;
                }
            },
            ValueLaw::Rademacher => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            ValueLaw::Unit => 1.0,
        }
    }
}

/// An `s`-sparse vector in `R^n` stored as (support, values).
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSignal {
    pub n: usize,
    pub support: Vec<usize>,
    pub values: Vec<f64>,
}

impl SparseSignal {
    pub fn new(n: usize, support: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        if support.len() != values.len() {
            return Err(Error::Dimension("support and values differ in length".into()));
        }
        if support.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Input("support must be strictly increasing".into()));
        }
        if support.last().is_some_and(|&j| j >= n) {
            return Err(Error::Dimension(format!(
                "support index out of range for n = {n}"
            )));
        }
        if values.iter().any(|v| *v == 0.0 || !v.is_finite()) {
            return Err(Error::Input("signal values must be finite and nonzero".into()));
        }
        Ok(Self { n, support, values })
    }

    pub fn zero(n: usize) -> Self {
        Self {
            n,
            support: Vec::new(),
            values: Vec::new(),
        }
    }

    /// Keep the nonzero coordinates of a dense vector.
    pub fn from_dense(x: &[f64]) -> Result<Self> {
        let (support, values) = x
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(j, v)| (j, *v))
            .unzip();
        Self::new(x.len(), support, values)
    }

    pub fn sparsity(&self) -> usize {
        self.support.len()
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.n];
        for (&j, &v) in self.support.iter().zip(&self.values) {
            x[j] = v;
        }
        x
    }

    pub fn support_set(&self) -> BTreeSet<usize> {
        self.support.iter().copied().collect()
    }

    pub fn l1_norm(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).sum()
    }

    pub fn l2_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Sample `A = (xi_ij / m)` with i.i.d. draws in row-major order from the
/// root stream of `seed`.
pub fn sample_matrix(m: usize, n: usize, dist: &EntryDistribution, seed: u64) -> Result<MeasurementMatrix> {
    let mut rng = rng::root(seed);
    sample_matrix_with(m, n, dist, &mut rng).map(|mut a| {
        a.provenance = Provenance::Sampled { dist: *dist, seed };
        a
    })
}

/// Sample from an existing stream (used by experiments with derived streams).
pub fn sample_matrix_with<R: Rng + ?Sized>(
    m: usize,
    n: usize,
    dist: &EntryDistribution,
    rng: &mut R,
) -> Result<MeasurementMatrix> {
    if m == 0 || n == 0 {
        return Err(Error::Dimension(format!("matrix must be non-empty, got {m}x{n}")));
    }
    let inv_m = 1.0 / m as f64;
    let entries = (0..m * n).map(|_| dist.sample(rng) * inv_m).collect();
    Ok(MeasurementMatrix {
        m,
        n,
        entries,
        provenance: Provenance::Explicit,
    })
}

/// Uniform random support of size `s` with i.i.d. nonzero values.
pub fn sample_sparse_signal(n: usize, s: usize, law: ValueLaw, seed: u64) -> Result<SparseSignal> {
    sample_sparse_signal_with(n, s, law, &mut rng::root(seed))
}

pub fn sample_sparse_signal_with<R: Rng + ?Sized>(
    n: usize,
    s: usize,
    law: ValueLaw,
    rng: &mut R,
) -> Result<SparseSignal> {
    if s > n {
        return Err(Error::Dimension(format!("sparsity {s} exceeds dimension {n}")));
    }
    let mut support = index::sample(rng, n, s).into_vec();
    support.sort_unstable();
    let values = support.iter().map(|_| law.draw(rng)).collect();
    Ok(SparseSignal { n, support, values })
}

/// `y = A x`, summing only over the support of `x`.
pub fn measure(a: &MeasurementMatrix, x: &SparseSignal) -> Result<Vec<f64>> {
    if x.n != a.n {
        return Err(Error::Dimension(format!(
            "signal length {} does not match matrix width {}",
            x.n, a.n
        )));
    }
    Ok((0..a.m)
        .map(|i| {
            x.support
                .iter()
                .zip(&x.values)
                .map(|(&j, &v)| a.get(i, j) * v)
                .sum()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn sampling_is_deterministic() {
        let d = EntryDistribution::laplace();
        let a = sample_matrix(2, 2, &d, 42).unwrap();
        let b = sample_matrix(2, 2, &d, 42).unwrap();
        let bits = |m: &MeasurementMatrix| m.entries.iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
        assert_ne!(bits(&a), bits(&sample_matrix(2, 2, &d, 43).unwrap()));
    }

    #[test]
    fn zero_dimensions_rejected() {
        let d = EntryDistribution::gaussian();
        assert!(matches!(sample_matrix(0, 3, &d, 1), Err(Error::Dimension(_))));
        assert!(matches!(sample_matrix(3, 0, &d, 1), Err(Error::Dimension(_))));
    }

    #[test]
    fn signal_edge_cases() {
        let z = sample_sparse_signal(5, 0, ValueLaw::Gaussian, 3).unwrap();
        assert!(z.support.is_empty());
        assert_eq!(z.to_dense(), vec![0.0; 5]);

        let full = sample_sparse_signal(5, 5, ValueLaw::Unit, 3).unwrap();
        assert_eq!(full.support, vec![0, 1, 2, 3, 4]);
        assert!(full.values.iter().all(|&v| v == 1.0));

        let signs = sample_sparse_signal(5, 5, ValueLaw::Rademacher, 3).unwrap();
        assert!(signs.values.iter().all(|&v| v.abs() == 1.0));

        assert!(matches!(
            sample_sparse_signal(3, 4, ValueLaw::Unit, 0),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn support_is_uniform() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let trials = 100_000;
        let mut counts = [0usize; 10];
        for _ in 0..trials {
            let x = sample_sparse_signal_with(10, 2, ValueLaw::Unit, &mut rng).unwrap();
            for j in x.support {
                counts[j] += 1;
            }
        }
        for c in counts {
            let freq = c as f64 / trials as f64;
            assert!((freq - 0.2).abs() <= 0.2 * 0.02, "frequency {freq}");
        }
    }

    #[test]
    #[allow(clippy::needless_range_loop)] // the oracle is the textbook double loop
    fn measure_matches_naive_product() {
        let a = sample_matrix(3, 5, &EntryDistribution::gaussian(), 5).unwrap();
        let x = SparseSignal::new(5, vec![1, 4], vec![0.3, -1.7]).unwrap();
        let y = measure(&a, &x).unwrap();
        let dense = x.to_dense();
        for i in 0..3 {
            let mut naive = 0.0;
            for j in 0..5 {
                naive += a.get(i, j) * dense[j];
            }
            assert!((y[i] - naive).abs() <= 1e-15);
        }
    }

    #[test]
    fn measure_identity_and_zero() {
        let id = MeasurementMatrix::identity(4).unwrap();
        let x = SparseSignal::new(4, vec![0, 2], vec![2.5, -1.0]).unwrap();
        assert_eq!(measure(&id, &x).unwrap(), x.to_dense());
        assert_eq!(measure(&id, &SparseSignal::zero(4)).unwrap(), vec![0.0; 4]);
        assert!(measure(&id, &SparseSignal::zero(5)).is_err());
    }

    #[test]
    fn signal_validation() {
        assert!(SparseSignal::new(4, vec![2, 1], vec![1.0, 1.0]).is_err());
        assert!(SparseSignal::new(4, vec![1, 4], vec![1.0, 1.0]).is_err());
        assert!(SparseSignal::new(4, vec![1], vec![0.0]).is_err());
    }
}
