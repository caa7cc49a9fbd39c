//! Zero-mean, unit-variance entry laws.

use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};
use std::fmt;

use rand::Rng;
use rand_distr::{Exp1, StandardNormal};
use statrs::function::erf::erfc;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// Default weight of the Laplace component in [`DistKind::CustomMixture`].
pub const DEFAULT_MIXTURE_WEIGHT: f64 = 0.5;

/// Largest moment order scanned when computing the moment constant.
const MOMENT_SCAN_MAX_P: f64 = 64.0;
const MOMENT_SCAN_STEP: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DistKind {
    /// Laplace with scale 1/sqrt(2).
    Laplace,
    /// Rademacher sign times a centred Exponential(1), `sigma * (E - 1)`.
    SymmetrizedExponential,
    Gaussian,
    Rademacher,
    /// With probability `laplace_weight` a unit-variance Laplace draw,
    /// otherwise a standard normal draw.
    CustomMixture {
        laplace_weight: f64,
    },
}

impl DistKind {
    pub const BUILTIN_NAMES: [&'static str; 5] = [
        "laplace",
        "symmetrized_exponential",
        "gaussian",
        "rademacher",
        "custom_mixture",
    ];

    pub fn name(&self) -> &'static str {
        match self {
            DistKind::Laplace => "laplace",
            DistKind::SymmetrizedExponential => "symmetrized_exponential",
            DistKind::Gaussian => "gaussian",
            DistKind::Rademacher => "rademacher",
            DistKind::CustomMixture { .. } => "custom_mixture",
        }
    }

    /// Binary-format tag. Tag 0 is reserved for explicit (non-sampled) matrices.
    pub fn tag(&self) -> u8 {
        match self {
            DistKind::Laplace => 1,
            DistKind::SymmetrizedExponential => 2,
            DistKind::Gaussian => 3,
            DistKind::Rademacher => 4,
            DistKind::CustomMixture { .. } => 5,
        }
    }

    /// The kind's single real parameter (mixture weight), 0 for the others.
    pub fn param(&self) -> f64 {
        match self {
            DistKind::CustomMixture { laplace_weight } => *laplace_weight,
            _ => 0.0,
        }
    }

    pub fn from_tag(tag: u8, param: f64) -> Result<Self> {
        Ok(match tag {
            1 => DistKind::Laplace,
            2 => DistKind::SymmetrizedExponential,
            3 => DistKind::Gaussian,
            4 => DistKind::Rademacher,
            5 => DistKind::CustomMixture {
                laplace_weight: param,
            },
            _ => return Err(Error::Format(format!("unknown distribution tag {tag}"))),
        })
    }
}

impl fmt::Display for DistKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A zero-mean, unit-variance sub-exponential law together with its scale
/// metadata.
///
/// * `scale` is the parameter of the underlying family that makes the variance
///   exactly one (Laplace `b = 1/sqrt(2)`, 1 for the other kinds).
/// * `psi1_scale` is the Orlicz norm `inf { K : E exp(|X|/K) <= 2 }`.
/// * `moment_constant_c3` is `sup_{p >= 1} (E|X|^p)^(1/p) / p`, scanned over
///   `p` in `[1, 64]` on a 0.01 grid.
///
/// | kind                    | psi1_scale                 | c3          |
/// |-------------------------|----------------------------|-------------|
/// | laplace                 | `2b = sqrt(2)` (closed form) | `b`       |
/// | symmetrized_exponential | solved numerically         | `2/e`       |
/// | gaussian                | solved numerically (~1.35) | `sqrt(2/pi)`|
/// | rademacher              | `1/ln 2` (closed form)     | 1           |
/// | custom_mixture          | solved numerically         | scanned     |
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntryDistribution {
    pub kind: DistKind,
    pub scale: f64,
    pub psi1_scale: f64,
    pub moment_constant_c3: f64,
}

impl EntryDistribution {
    pub fn new(kind: DistKind) -> Result<Self> {
        if let DistKind::CustomMixture { laplace_weight } = kind {
            if !(0.0..=1.0).contains(&laplace_weight) {
                return Err(Error::Parameter(format!(
                    "mixture weight {laplace_weight} outside [0, 1]"
                )));
            }
        }
        let scale = match kind {
            DistKind::Laplace => FRAC_1_SQRT_2,
            _ => 1.0,
        };
        let psi1_scale = match kind {
            DistKind::Laplace => 2.0 * FRAC_1_SQRT_2,
            DistKind::Rademacher => 1.0 / std::f64::consts::LN_2,
            _ => solve_psi1(|k| abs_mgf(kind, k))?,
        };
        let moment_constant_c3 = moment_constant(kind);
        Ok(Self {
            kind,
            scale,
            psi1_scale,
            moment_constant_c3,
        })
    }

    pub fn laplace() -> Self {
        Self::new(DistKind::Laplace).expect("laplace is valid")
    }

    pub fn symmetrized_exponential() -> Self {
        Self::new(DistKind::SymmetrizedExponential).expect("valid law")
    }

    pub fn gaussian() -> Self {
        Self::new(DistKind::Gaussian).expect("valid law")
    }

    pub fn rademacher() -> Self {
        Self::new(DistKind::Rademacher).expect("valid law")
    }

    pub fn custom_mixture(laplace_weight: f64) -> Result<Self> {
        Self::new(DistKind::CustomMixture { laplace_weight })
    }

    /// All five built-in laws (the mixture at its default weight).
    pub fn builtins() -> Vec<Self> {
        vec![
            Self::laplace(),
            Self::symmetrized_exponential(),
            Self::gaussian(),
            Self::rademacher(),
            Self::custom_mixture(DEFAULT_MIXTURE_WEIGHT).expect("default weight is valid"),
        ]
    }

    /// Parse a law by name; `custom_mixture` takes the default weight.
    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "laplace" => Ok(Self::laplace()),
            "symmetrized_exponential" | "symexp" => Ok(Self::symmetrized_exponential()),
            "gaussian" => Ok(Self::gaussian()),
            "rademacher" => Ok(Self::rademacher()),
            "custom_mixture" => Self::custom_mixture(DEFAULT_MIXTURE_WEIGHT),
            other => Err(Error::Parameter(format!("unknown distribution '{other}'"))),
        }
    }

    pub fn name(&self) -> &'static str {
        self.kind.name()
    }

    /// One raw draw (mean 0, variance 1).
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.kind {
            DistKind::Laplace => sample_laplace(rng, self.scale),
            DistKind::SymmetrizedExponential => {
                let e: f64 = rng.sample(Exp1);
                if rng.random::<bool>() {
                    e - 1.0
                } else {
                    1.0 - e
                }
            }
            DistKind::Gaussian => rng.sample(StandardNormal),
            DistKind::Rademacher => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            DistKind::CustomMixture { laplace_weight } => {
                if rng.random::<f64>() < laplace_weight {
                    sample_laplace(rng, FRAC_1_SQRT_2)
                } else {
                    rng.sample(StandardNormal)
                }
            }
        }
    }

    /// Analytic `E|X|`.
    pub fn mean_abs(&self) -> f64 {
        ln_abs_moment(self.kind, 1.0).exp()
    }

    /// Analytic `E|X|^p` for `p > 0`.
    pub fn abs_moment(&self, p: f64) -> f64 {
        ln_abs_moment(self.kind, p).exp()
    }

    /// `E exp(|X|/k)`; infinite when the expectation diverges.
    pub fn abs_mgf(&self, k: f64) -> f64 {
        abs_mgf(self.kind, k)
    }
}

fn sample_laplace<R: Rng + ?Sized>(rng: &mut R, b: f64) -> f64 {
    loop {
        let u = rng.random::<f64>() - 0.5;
        let tail = 1.0 - 2.0 * u.abs();
        if tail > 0.0 {
            return -b * u.signum() * tail.ln();
        }
    }
}

fn std_normal_cdf(t: f64) -> f64 {
    0.5 * erfc(-t / SQRT_2)
}

/// `E exp(|X|/k)` per law.
fn abs_mgf(kind: DistKind, k: f64) -> f64 {
    if k <= 0.0 {
        return f64::INFINITY;
    }
    let laplace = |b: f64| {
        if k <= b {
            f64::INFINITY
        } else {
            1.0 / (1.0 - b / k)
        }
    };
    let gaussian = || 2.0 * (0.5 / (k * k)).exp() * std_normal_cdf(1.0 / k);
    match kind {
        DistKind::Laplace => laplace(FRAC_1_SQRT_2),
        DistKind::Gaussian => gaussian(),
        DistKind::Rademacher => (1.0 / k).exp(),
        DistKind::SymmetrizedExponential => {
            // |E - 1| splits at E = 1 into a bounded piece and an Exp(1) tail.
            if k <= 1.0 {
                return f64::INFINITY;
            }
            let r = 1.0 + 1.0 / k;
            let body = (1.0 / k).exp() * (1.0 - (-r).exp()) / r;
            let tail = (-1.0f64).exp() * k / (k - 1.0);
            body + tail
        }
        DistKind::CustomMixture { laplace_weight } => {
            let w = laplace_weight;
            let l = if w > 0.0 { w * laplace(FRAC_1_SQRT_2) } else { 0.0 };
            l + (1.0 - w) * gaussian()
        }
    }
}

/// Smallest `k` with `mgf(k) <= 2`, by bisection. `mgf` is decreasing in `k`.
fn solve_psi1(mgf: impl Fn(f64) -> f64) -> Result<f64> {
    let mut lo = 1e-3;
    let mut hi = 1.0;
    while mgf(hi) > 2.0 {
        hi *= 2.0;
        if hi > 1e6 {
            return Err(Error::Numerical("psi1 norm search diverged".into()));
        }
    }
    while hi - lo > 1e-13 * hi {
        let mid = 0.5 * (lo + hi);
        if mgf(mid) > 2.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

/// `ln E|X|^p`.
fn ln_abs_moment(kind: DistKind, p: f64) -> f64 {
    let laplace = |b: f64| p * b.ln() + ln_gamma(p + 1.0);
    let gaussian = || 0.5 * p * 2f64.ln() + ln_gamma(0.5 * (p + 1.0)) - 0.5 * PI.ln();
    match kind {
        DistKind::Laplace => laplace(FRAC_1_SQRT_2),
        DistKind::Gaussian => gaussian(),
        DistKind::Rademacher => 0.0,
        DistKind::SymmetrizedExponential => {
            // E|E-1|^p = e^{-1} * ( int_0^1 t^p e^t dt + Gamma(p+1) ),
            // and int_0^1 t^p e^t dt = sum_k 1 / (k! (p + k + 1)).
            let mut series = 0.0;
            let mut inv_fact = 1.0;
            for k in 0..60 {
                if k > 0 {
                    inv_fact /= k as f64;
                }
                series += inv_fact / (p + k as f64 + 1.0);
            }
            -1.0 + (series + ln_gamma(p + 1.0).exp()).ln()
        }
        DistKind::CustomMixture { laplace_weight: w } => {
            let l = laplace(FRAC_1_SQRT_2);
            let g = gaussian();
            let hi = l.max(g);
            hi + (w * (l - hi).exp() + (1.0 - w) * (g - hi).exp()).ln()
        }
    }
}

fn moment_constant(kind: DistKind) -> f64 {
    let steps = ((MOMENT_SCAN_MAX_P - 1.0) / MOMENT_SCAN_STEP).round() as usize;
    (0..=steps)
        .map(|i| {
            let p = 1.0 + i as f64 * MOMENT_SCAN_STEP;
            (ln_abs_moment(kind, p) / p).exp() / p
        })
        .fold(0.0, f64::max)
}
