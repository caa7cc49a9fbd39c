//! Per-command parameter schemas. Flags, config-file keys and run-record
//! snapshots all come from these tables.

use std::fmt;

pub const SCHEMA_VERSION: u32 = 1;

pub const DIST_CHOICES: &[&str] = &[
    "laplace",
    "symmetrized_exponential",
    "gaussian",
    "rademacher",
    "custom_mixture",
];
pub const LAW_CHOICES: &[&str] = &["gaussian", "rademacher", "unit"];
pub const RUB_METHOD_CHOICES: &[&str] = &["exact_tiny", "monte_carlo"];
pub const FORMAT_CHOICES: &[&str] = &["csv", "bin"];
pub const PROBE_CHOICES: &[&str] = &["e1", "flat"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum CommandName {
    GenMatrix,
    Recover,
    Rub,
    Nsp,
    Net,
    Concentration,
    PhaseDiagram,
    Fit,
}

impl CommandName {
    pub const ALL: [CommandName; 8] = [
        CommandName::GenMatrix,
        CommandName::Recover,
        CommandName::Rub,
        CommandName::Nsp,
        CommandName::Net,
        CommandName::Concentration,
        CommandName::PhaseDiagram,
        CommandName::Fit,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            CommandName::GenMatrix => "gen-matrix",
            CommandName::Recover => "recover",
            CommandName::Rub => "rub",
            CommandName::Nsp => "nsp",
            CommandName::Net => "net",
            CommandName::Concentration => "concentration",
            CommandName::PhaseDiagram => "phase-diagram",
            CommandName::Fit => "fit",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.as_str() == name)
    }

    pub fn about(&self) -> &'static str {
        match self {
            CommandName::GenMatrix => "Sample a measurement matrix A = (xi_ij / m)",
            CommandName::Recover => "Recover a saved signal from its measurements by l1 minimization",
            CommandName::Rub => "Estimate RUB constants at a sparsity level",
            CommandName::Nsp => "Check the null space property of a matrix",
            CommandName::Net => "Build and verify an epsilon-net of the sparse unit sphere",
            CommandName::Concentration => "Concentration of ||Ax||_1 for a fixed unit probe",
            CommandName::PhaseDiagram => "Monte Carlo recovery phase diagram",
            CommandName::Fit => "Fit m*(s) = a s ln(b n / s) to a saved phase diagram",
        }
    }
}

impl fmt::Display for CommandName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Count,
    Seed,
    Real,
    /// One of a fixed set of words.
    Choice(&'static [&'static str]),
    Path,
    /// Comma-separated counts; items may be ranges `start:step:end`.
    CountList,
    RealList,
}

impl Kind {
    pub fn value_name(&self) -> &'static str {
        match self {
            Kind::Count => "N",
            Kind::Seed => "SEED",
            Kind::Real => "X",
            Kind::Choice(_) => "NAME",
            Kind::Path => "PATH",
            Kind::CountList => "LIST",
            Kind::RealList => "LIST",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ParamSpec {
    pub key: &'static str,
    pub kind: Kind,
    /// `None` means optional without a default (or required, see `required`).
    pub default: Option<&'static str>,
    pub required: bool,
    pub help: &'static str,
}

const fn p(key: &'static str, kind: Kind, default: Option<&'static str>, help: &'static str) -> ParamSpec {
    ParamSpec {
        key,
        kind,
        default,
        required: false,
        help,
    }
}

const fn req(key: &'static str, kind: Kind, help: &'static str) -> ParamSpec {
    ParamSpec {
        key,
        kind,
        default: None,
        required: true,
        help,
    }
}

const SEED: ParamSpec = p("seed", Kind::Seed, Some("0"), "Master seed");
const DIST: ParamSpec = p(
    "dist",
    Kind::Choice(DIST_CHOICES),
    Some("laplace"),
    "Entry distribution",
);
const MATRIX_SOURCE: [ParamSpec; 4] = [
    p(
        "matrix",
        Kind::Path,
        None,
        "Matrix file (csv or bin); alternative to sampling with --m/--n",
    ),
    p("m", Kind::Count, None, "Rows of a sampled matrix"),
    p("n", Kind::Count, None, "Columns of a sampled matrix"),
    DIST,
];

pub fn schema(cmd: CommandName) -> Vec<ParamSpec> {
    let mut out = match cmd {
        CommandName::GenMatrix => vec![
            req("m", Kind::Count, "Number of measurements (rows)"),
            req("n", Kind::Count, "Signal dimension (columns)"),
            DIST,
            p(
                "format",
                Kind::Choice(FORMAT_CHOICES),
                Some("csv"),
                "Output format",
            ),
            p("out", Kind::Path, Some("matrix.csv"), "Output file"),
        ],
        CommandName::Recover => vec![
            req("matrix", Kind::Path, "Matrix file (csv or bin)"),
            req("signal", Kind::Path, "Signal file; measurements are y = A x"),
            p(
                "feas-tol",
                Kind::Real,
                None,
                "Feasibility tolerance (default 1e-9 (1 + ||y||_inf))",
            ),
            p("opt-tol", Kind::Real, Some("1e-8"), "Optimality tolerance"),
            p("rec-tol", Kind::Real, Some("1e-6"), "Exact-recovery tolerance"),
            p("out", Kind::Path, Some("recovery.csv"), "Recovery summary"),
            p(
                "solution-out",
                Kind::Path,
                Some("solution.csv"),
                "Recovered signal",
            ),
        ],
        CommandName::Rub => {
            let mut v = MATRIX_SOURCE.to_vec();
            v.extend([
                p(
                    "k",
                    Kind::Count,
                    None,
                    "Sparsity level (default s + ceil(lambda s))",
                ),
                p("s", Kind::Count, None, "Signal sparsity for the certificate"),
                p(
                    "lambda",
                    Kind::Real,
                    None,
                    "Block ratio lambda for the certificate",
                ),
                p(
                    "method",
                    Kind::Choice(RUB_METHOD_CHOICES),
                    Some("exact_tiny"),
                    "Estimation method",
                ),
                p(
                    "budget",
                    Kind::Count,
                    Some("100000"),
                    "Support cap (exact) or sample count (Monte Carlo)",
                ),
                p("out", Kind::Path, Some("rub.csv"), "Output file"),
            ]);
            v
        }
        CommandName::Nsp => {
            let mut v = MATRIX_SOURCE.to_vec();
            v.extend([
                req("s", Kind::Count, "Order of the null space property"),
                p(
                    "budget",
                    Kind::Count,
                    Some("10000"),
                    "Kernel samples when the kernel has dimension >= 3",
                ),
                p("out", Kind::Path, Some("nsp.csv"), "Output file"),
            ]);
            v
        }
        CommandName::Net => vec![
            req("n", Kind::Count, "Ambient dimension"),
            req("s", Kind::Count, "Sparsity"),
            p("epsilon", Kind::Real, Some("0.5"), "Net radius, in (0, 1]"),
            p(
                "probes",
                Kind::Count,
                Some("10000"),
                "Random probes for the covering check",
            ),
            p("out", Kind::Path, Some("net.csv"), "Output file"),
        ],
        CommandName::Concentration => vec![
            DIST,
            p("n", Kind::Count, Some("1"), "Probe dimension"),
            p(
                "probe",
                Kind::Choice(PROBE_CHOICES),
                Some("e1"),
                "Unit probe: first axis or flat 1/sqrt(n)",
            ),
            p("m", Kind::CountList, Some("50,200,800"), "Measurement counts"),
            p(
                "delta",
                Kind::RealList,
                Some("0.05,0.1,0.2"),
                "Deviation thresholds",
            ),
            p(
                "trials",
                Kind::Count,
                Some("10000"),
                "Matrices per m (at least 100)",
            ),
            p("out", Kind::Path, Some("concentration.csv"), "Output file"),
        ],
        CommandName::PhaseDiagram => vec![
            req("n", Kind::Count, "Signal dimension"),
            req("s", Kind::CountList, "Sparsity grid, ascending"),
            req("m", Kind::CountList, "Measurement grid, ascending"),
            DIST,
            p(
                "value-law",
                Kind::Choice(LAW_CHOICES),
                Some("gaussian"),
                "Law of the nonzero signal values",
            ),
            p("trials", Kind::Count, Some("100"), "Trials per cell"),
            p("out", Kind::Path, Some("phase.csv"), "Output file"),
            p("svg", Kind::Path, None, "Optional heatmap"),
        ],
        CommandName::Fit => vec![
            req("input", Kind::Path, "Phase diagram CSV"),
            p("level", Kind::Real, Some("0.5"), "Contour level, in (0, 1)"),
            p("out", Kind::Path, Some("fit.csv"), "Output file"),
            p("svg", Kind::Path, None, "Optional scatter plot"),
        ],
    };
    if !matches!(cmd, CommandName::Recover | CommandName::Fit) {
        out.push(SEED);
    }
    out
}
