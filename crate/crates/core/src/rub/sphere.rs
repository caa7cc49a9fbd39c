//! Minimum of `||Bx||_1` over the unit sphere.
//!
//! For `k <= 3` columns the sphere is covered by angular arcs (`k = 2`) or
//! projected cube-face squares (`k = 3`) and searched by
//! branch and bound: every cell carries the bound `f(center) - L * radius`,
//! where `L` bounds the Lipschitz constant of `f` and `radius` bounds the
//! chord distance from the center to any point of the cell. The smallest such
//! bound over all live and pruned cells is a certified lower bound on the
//! minimum. Larger `k` falls back to a multi-start projected subgradient
//! descent whose answer is only an upper estimate.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use super::null_space;
use super::opnorm::lipschitz_bound;
use crate::error::{Error, Result};
use crate::rng;

pub const CERTIFIED_MAX_DIM: usize = 3;
pub const DEFAULT_GRID_DENSITY: usize = 32;
pub const DEFAULT_REFINE_ITERS: usize = 48;

const MAX_LIVE_CELLS: usize = 1 << 18;
const GAP_TOL: f64 = 1e-12;
const HEURISTIC_SEED: u64 = 0x5eed_5ee0;

#[derive(Debug, Clone, PartialEq)]
pub struct SphereMin {
    /// Best value found; never below the true minimum.
    pub value: f64,
    /// Certified lower bound on the minimum (certified modes only).
    pub lower_bound: Option<f64>,
    pub argmin: Vec<f64>,
    pub certified: bool,
}

impl SphereMin {
    fn exact(value: f64, argmin: Vec<f64>) -> Self {
        Self {
            value,
            lower_bound: Some(value),
            argmin,
            certified: true,
        }
    }
}

pub(crate) trait Cell: Sized {
    fn center(&self) -> Vec<f64>;
    fn radius(&self) -> f64;
    fn split(&self) -> Vec<Self>;
}

/// Interval of angles on the half circle.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Arc {
    lo: f64,
    hi: f64,
}

impl Arc {
    /// `[0, pi)` cut into `pieces`; enough because `f(-x) = f(x)`.
    pub(crate) fn half_circle(pieces: usize) -> Vec<Self> {
        let h = PI / pieces as f64;
        (0..pieces)
            .map(|i| Arc {
                lo: i as f64 * h,
                hi: (i + 1) as f64 * h,
            })
            .collect()
    }
}

impl Cell for Arc {
    fn center(&self) -> Vec<f64> {
        let t = 0.5 * (self.lo + self.hi);
        vec![t.cos(), t.sin()]
    }

    fn radius(&self) -> f64 {
        0.5 * (self.hi - self.lo)
    }

    fn split(&self) -> Vec<Self> {
        let mid = 0.5 * (self.lo + self.hi);
        vec![Arc { lo: self.lo, hi: mid }, Arc { lo: mid, hi: self.hi }]
    }
}

/// Square `[u0, u1] x [v0, v1]` on one face of the cube `[-1, 1]^3`,
/// projected radially onto the sphere. Radial projection from outside the
/// unit ball is 1-Lipschitz, so half the square's diagonal bounds the radius.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Patch {
    /// Axis held at +1.
    face: usize,
    u: (f64, f64),
    v: (f64, f64),
}

impl Patch {
    /// The faces `x = 1`, `y = 1`, `z = 1`, each cut into `pieces^2`
    /// squares: one representative of every antipodal pair.
    pub(crate) fn half_sphere(pieces: usize) -> Vec<Self> {
        let h = 2.0 / pieces as f64;
        let edge = |i: usize| (-1.0 + i as f64 * h, -1.0 + (i + 1) as f64 * h);
        let mut cells = Vec::with_capacity(3 * pieces * pieces);
        for face in 0..3 {
            for i in 0..pieces {
                for j in 0..pieces {
                    cells.push(Patch {
                        face,
                        u: edge(i),
                        v: edge(j),
                    });
                }
            }
        }
        cells
    }
}

impl Cell for Patch {
    fn center(&self) -> Vec<f64> {
        let u = 0.5 * (self.u.0 + self.u.1);
        let v = 0.5 * (self.v.0 + self.v.1);
        let mut p = match self.face {
            0 => vec![1.0, u, v],
            1 => vec![u, 1.0, v],
            _ => vec![u, v, 1.0],
        };
        let norm = p.iter().map(|c| c * c).sum::<f64>().sqrt();
        p.iter_mut().for_each(|c| *c /= norm);
        p
    }

    fn radius(&self) -> f64 {
        0.5 * (self.u.1 - self.u.0).hypot(self.v.1 - self.v.0)
    }

    fn split(&self) -> Vec<Self> {
        let um = 0.5 * (self.u.0 + self.u.1);
        let vm = 0.5 * (self.v.0 + self.v.1);
        let mut out = Vec::with_capacity(4);
        for u in [(self.u.0, um), (um, self.u.1)] {
            for v in [(self.v.0, vm), (vm, self.v.1)] {
                out.push(Patch {
                    face: self.face,
                    u,
                    v,
                });
            }
        }
        out
    }
}

#[derive(Debug, Clone)]
pub(crate) struct BoundResult {
    pub best: f64,
    pub argmin: Vec<f64>,
    pub lower: f64,
}

pub(crate) fn branch_and_bound<C: Cell>(
    f: impl Fn(&[f64]) -> f64,
    lipschitz: f64,
    cells: Vec<C>,
    rounds: usize,
) -> BoundResult {
    let eval = |cells: Vec<C>| -> Vec<(C, f64, f64)> {
        cells
            .into_iter()
            .map(|c| {
                let v = f(&c.center());
                let lb = v - lipschitz * c.radius();
                (c, v, lb)
            })
            .collect()
    };
    let mut live = eval(cells);
    let mut best = f64::INFINITY;
    let mut argmin = Vec::new();
    let mut pruned_lower = f64::INFINITY;

    for round in 0..=rounds {
        for (c, v, _) in &live {
            if *v < best {
                best = *v;
                argmin = c.center();
            }
        }
        let live_lower = live.iter().map(|(_, _, lb)| *lb).fold(f64::INFINITY, f64::min);
        let lower = live_lower.min(pruned_lower);
        if best - lower <= GAP_TOL * (1.0 + best.abs()) || round == rounds {
            break;
        }
        let mut keep = Vec::new();
        for (c, _, lb) in live {
            if lb < best {
                keep.push(c);
            } else {
                pruned_lower = pruned_lower.min(lb);
            }
        }
        if keep.len() * 4 > MAX_LIVE_CELLS {
            // Out of budget: report the bound as it stands.
            live = eval(keep);
            break;
        }
        live = eval(keep.iter().flat_map(Cell::split).collect());
    }
    for (c, v, _) in &live {
        if *v < best {
            best = *v;
            argmin = c.center();
        }
    }
    let lower = live
        .iter()
        .map(|(_, _, lb)| *lb)
        .fold(pruned_lower, f64::min)
        .min(best);
    BoundResult { best, argmin, lower }
}

fn l1_of_product(b: &DMatrix<f64>, x: &[f64]) -> f64 {
    (0..b.nrows())
        .map(|i| (0..b.ncols()).map(|c| b[(i, c)] * x[c]).sum::<f64>().abs())
        .sum()
}

/// `min_{||x||_2 = 1} ||Bx||_1`.
///
/// `grid_density` is the number of initial cells per angle, `refine_iters`
/// the number of branch-and-bound rounds (or subgradient rounds for `k > 3`).
pub fn sphere_min_l1(b: &DMatrix<f64>, grid_density: usize, refine_iters: usize) -> Result<SphereMin> {
    if grid_density == 0 {
        return Err(Error::Parameter("grid_density must be positive".into()));
    }
    let k = b.ncols();
    if k == 0 {
        return Err(Error::Parameter("matrix has no columns".into()));
    }
    let (rank, kernel) = null_space(b);
    if rank < k {
        return Ok(SphereMin::exact(0.0, kernel[0].iter().copied().collect()));
    }
    let f = |x: &[f64]| l1_of_product(b, x);
    match k {
        1 => Ok(SphereMin::exact(b.column(0).abs().sum(), vec![1.0])),
        2 | 3 => {
            let lip = lipschitz_bound(b);
            let res = if k == 2 {
                branch_and_bound(f, lip, Arc::half_circle(grid_density), refine_iters)
            } else {
                branch_and_bound(f, lip, Patch::half_sphere(grid_density), refine_iters)
            };
            Ok(SphereMin {
                value: res.best,
                lower_bound: Some(res.lower.max(0.0)),
                argmin: res.argmin,
                certified: true,
            })
        }
        _ => Ok(subgradient_min(b, grid_density, refine_iters)),
    }
}

/// Multi-start projected subgradient descent on the sphere (heuristic).
fn subgradient_min(b: &DMatrix<f64>, starts: usize, rounds: usize) -> SphereMin {
    let k = b.ncols();
    let mut rng = rng::stream(HEURISTIC_SEED, &[b.nrows() as u64, k as u64]);
    let f = |x: &DVector<f64>| (b * x).abs().sum();

    let mut inits: Vec<DVector<f64>> = (0..k)
        .map(|j| {
            let mut e = DVector::zeros(k);
            e[j] = 1.0;
            e
        })
        .collect();
    for _ in 0..starts.max(8) {
        let g = DVector::from_fn(k, |_, _| rng.sample::<f64, _>(StandardNormal));
        inits.push(g.normalize());
    }

    let iters = rounds.max(50) * 4;
    let mut best = f64::INFINITY;
    let mut best_x = inits[0].clone();
    for mut x in inits {
        let mut local = f(&x);
        for t in 0..iters {
            let bx = b * &x;
            let signs = bx.map(|v| {
                if v > 0.0 {
                    1.0
                } else if v < 0.0 {
                    -1.0
                } else {
                    0.0
                }
            });
            let g = b.transpose() * signs;
            let tangent = &g - &x * g.dot(&x);
            let norm = tangent.norm();
            if norm < 1e-14 {
                break;
            }
            let step = 0.3 / ((t + 1) as f64).sqrt();
            x = (&x - tangent * (step / norm)).normalize();
            let v = f(&x);
            if v < local {
                local = v;
            }
            if v < best {
                best = v;
                best_x = x.clone();
            }
        }
        if local < best {
            best = local;
        }
    }
    SphereMin {
        value: best,
        lower_bound: None,
        argmin: best_x.iter().copied().collect(),
        certified: false,
    }
}
