//! Monte Carlo experiments: concentration of `||Ax||_1` for a fixed unit
//! probe, recovery phase diagrams, and threshold-law fitting.

mod concentration;
mod fit;
mod phase;

pub use concentration::{concentration_experiment, std_scaling_check, ConcentrationReport, MStats};
pub use fit::{
    contour_crossings, fit_contour, fit_threshold, scaling_exponent, scaling_exponent_from, ThresholdFit,
    DEFAULT_CONTOUR_LEVEL,
};
pub use phase::{phase_diagram, MonotonicityViolation, PhaseDiagram};
