//! Restricted uniform boundedness (RUB) and the machinery of the
//! RUB-implies-recovery argument.
//!
//! A matrix has the RUB at level `k` with constants `(c1, c2)` when
//! `c1 ||x||_2 <= ||Ax||_1 <= c2 ||x||_2` for every `k`-sparse `x`. If this
//! holds at level `s + ceil(lambda * s)` with `lambda > (c2 / c1)^2`, every
//! `s`-sparse signal is the unique l1 minimizer of its measurements.

mod constants;
mod nsp;
mod opnorm;
mod sphere;

use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector};

pub use constants::{rub_constants, RubEstimate, RubMethod, EXACT_SUPPORT_BUDGET};
pub use nsp::{nsp_counterexample, nsp_margin, nsp_oracle, NspOutcome, NSP_TOL};
pub use opnorm::{opnorm_l2_to_l1_exact, opnorm_with_maximizer, OPNORM_MAX_ROWS};
pub use sphere::{sphere_min_l1, SphereMin, CERTIFIED_MAX_DIM, DEFAULT_GRID_DENSITY, DEFAULT_REFINE_ITERS};

use crate::ensembles::SparseSignal;
use crate::error::{Error, Result};

const RANK_TOL: f64 = 1e-10;

/// Rank and an orthonormal basis of the null space of `mat`.
pub(crate) fn null_space(mat: &DMatrix<f64>) -> (usize, Vec<DVector<f64>>) {
    let (m, n) = mat.shape();
    // Pad to at least n rows so the SVD returns a full right basis.
    let padded = if m < n {
        let mut p = DMatrix::zeros(n, n);
        p.view_mut((0, 0), (m, n)).copy_from(mat);
        p
    } else {
        mat.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let top = svd.singular_values.max();
    let cutoff = RANK_TOL * top.max(1.0);
    let mut rank = 0;
    let mut kernel = Vec::new();
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if s > cutoff {
            rank += 1;
        } else {
            kernel.push(v_t.row(i).transpose());
        }
    }
    (rank, kernel)
}

/// Block size `ceil(lambda * s)`.
pub fn block_size_for(lambda: f64, s: usize) -> usize {
    (lambda * s as f64).ceil() as usize
}

/// Sparsity level `s + ceil(lambda * s)` at which the certificate is checked.
pub fn certificate_level(s: usize, lambda: f64) -> usize {
    s + block_size_for(lambda, s)
}

/// Whether `lambda > (c2 / c1)^2`, strictly.
///
/// `c1 <= 0` means the RUB lower bound is degenerate and the certificate
/// cannot be evaluated; that is reported as [`Error::Degenerate`].
pub fn theorem1_certificate(c1: f64, c2: f64, lambda: f64) -> Result<bool> {
    if !(c1 > 0.0) || !c1.is_finite() {
        return Err(Error::Degenerate(format!(
            "RUB lower constant {c1} is not positive"
        )));
    }
    if !(c2 >= c1) || !c2.is_finite() {
        return Err(Error::Parameter(format!(
            "upper constant {c2} below lower constant {c1}"
        )));
    }
    if !(lambda > 0.0) {
        return Err(Error::Parameter(format!("lambda {lambda} must be positive")));
    }
    let ratio = c2 / c1;
    Ok(lambda > ratio * ratio)
}

/// `I_0` plus the blocks `I_1, I_2, ...` of its complement, in order of
/// decreasing magnitude.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockDecomposition {
    pub i0: Vec<usize>,
    pub blocks: Vec<Vec<usize>>,
    pub block_size: usize,
}

impl BlockDecomposition {
    /// `I_0 ∪ I_1`.
    pub fn head(&self) -> Vec<usize> {
        let mut out = self.i0.clone();
        if let Some(first) = self.blocks.first() {
            out.extend(first);
        }
        out.sort_unstable();
        out
    }
}

/// Split the complement of `i0` into blocks of `block_size` indices, taking
/// indices in nonincreasing `|h_j|` order with ties broken by ascending index.
/// The last block may be short.
pub fn block_decompose(h: &[f64], i0: &[usize], block_size: usize) -> Result<BlockDecomposition> {
    if block_size == 0 {
        return Err(Error::Parameter("block_size must be at least 1".into()));
    }
    let n = h.len();
    let head: BTreeSet<usize> = i0.iter().copied().collect();
    if head.iter().next_back().is_some_and(|&j| j >= n) {
        return Err(Error::Dimension(format!("index set exceeds dimension {n}")));
    }
    let mut rest: Vec<usize> = (0..n).filter(|j| !head.contains(j)).collect();
    rest.sort_by(|&a, &b| h[b].abs().total_cmp(&h[a].abs()).then(a.cmp(&b)));
    Ok(BlockDecomposition {
        i0: head.into_iter().collect(),
        blocks: rest.chunks(block_size).map(<[usize]>::to_vec).collect(),
        block_size,
    })
}

/// With `h = z_hat - x` and `I_0 = supp(x)`: `||h_{I_0^c}||_1 <= ||h_{I_0}||_1 + 1e-12`.
pub fn cone_constraint_holds(x: &SparseSignal, z_hat: &[f64]) -> Result<bool> {
    if z_hat.len() != x.n {
        return Err(Error::Dimension(format!(
            "estimate length {} does not match signal length {}",
            z_hat.len(),
            x.n
        )));
    }
    let mut h = z_hat.to_vec();
    for (&j, &v) in x.support.iter().zip(&x.values) {
        h[j] -= v;
    }
    let on: f64 = x.support.iter().map(|&j| h[j].abs()).sum();
    let total: f64 = h.iter().map(|v| v.abs()).sum();
    Ok(total - on <= on + 1e-12)
}
