use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Row count cap for sign enumeration.
pub const OPNORM_MAX_ROWS: usize = 16;

/// `max_{||x||_2 = 1} ||B x||_1`.
///
/// By duality `||Bx||_1 = max_sigma <sigma, Bx>`, so the maximum equals
/// `max_sigma ||B^T sigma||_2` over the `2^m` sign vectors. Only half of them
/// are visited (`sigma` and `-sigma` agree) and consecutive sign vectors
/// differ in one entry (Gray code), so each step costs `O(k)`.
pub fn opnorm_l2_to_l1_exact(b: &DMatrix<f64>) -> Result<f64> {
    opnorm_with_maximizer(b).map(|(v, _)| v)
}

/// Like [`opnorm_l2_to_l1_exact`], also returning a unit maximizer.
pub fn opnorm_with_maximizer(b: &DMatrix<f64>) -> Result<(f64, Vec<f64>)> {
    let (m, k) = b.shape();
    if m > OPNORM_MAX_ROWS {
        return Err(Error::Size(format!(
            "sign enumeration limited to {OPNORM_MAX_ROWS} rows, got {m}"
        )));
    }
    if m == 0 || k == 0 {
        return Ok((0.0, vec![0.0; k]));
    }
    let mut sigma = vec![1.0; m];
    let mut v: Vec<f64> = (0..k).map(|c| b.column(c).sum()).collect();
    let norm2 = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>();
    let mut best = norm2(&v);
    let mut best_v = v.clone();

    // Last sign stays +1.
    let steps: u64 = 1 << (m - 1);
    for i in 1..steps {
        let g = i.trailing_zeros() as usize;
        let f = -2.0 * sigma[g];
        for (c, vc) in v.iter_mut().enumerate() {
            *vc += f * b[(g, c)];
        }
        sigma[g] = -sigma[g];
        let val = norm2(&v);
        if val > best {
            best = val;
            best_v.copy_from_slice(&v);
        }
    }
    let norm = best.sqrt();
    let x = if norm > 0.0 {
        best_v.iter().map(|c| c / norm).collect()
    } else {
        let mut e = vec![0.0; k];
        e[0] = 1.0;
        e
    };
    Ok((norm, x))
}

/// Upper bound on the Lipschitz constant of `x -> ||Bx||_1` in l2: the exact
/// operator norm when enumeration is affordable, else `sum_i ||b_i||_2`.
pub(crate) fn lipschitz_bound(b: &DMatrix<f64>) -> f64 {
    if b.nrows() <= OPNORM_MAX_ROWS {
        opnorm_l2_to_l1_exact(b).expect("within cap")
    } else {
        b.row_iter().map(|r| r.norm()).sum()
    }
}
