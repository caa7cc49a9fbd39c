//! Sparse recovery laboratory.
//!
//! Random measurement ensembles with sub-exponential entries, an exact
//! l1-minimization solver with a brute-force oracle, restricted uniform
//! boundedness (RUB) analysis, epsilon-nets of the sparse unit sphere, and
//! the Monte Carlo experiments that tie them together.

// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bp_solver;
pub mod ensembles;
pub mod error;
pub mod experiments;
pub mod net;
pub mod report;
pub mod rng;
pub mod rub;

pub use bp_solver::{
    check_exact_recovery, l1_minimize, l1_minimize_default, l1_oracle, OracleSolution, RecoveryResult,
    SolveStatus, Tolerances,
};
pub use ensembles::{
    measure, sample_matrix, sample_sparse_signal, DistKind, EntryDistribution, MeasurementMatrix, Provenance,
    SparseSignal, ValueLaw,
};
pub use error::{Error, Result};
pub use experiments::{
    concentration_experiment, fit_threshold, phase_diagram, scaling_exponent, std_scaling_check,
    ConcentrationReport, PhaseDiagram, ThresholdFit,
};
pub use net::{build_sparse_net, build_support_net, verify_covering, EpsilonNet};
pub use rub::{
    block_decompose, cone_constraint_holds, nsp_oracle, opnorm_l2_to_l1_exact, rub_constants, sphere_min_l1,
    theorem1_certificate, BlockDecomposition, NspOutcome, RubEstimate, RubMethod, SphereMin,
};
