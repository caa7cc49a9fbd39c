//! Command bodies. Each returns the files to write and a short summary;
//! nothing touches the filesystem until the whole command has succeeded.

use std::path::{Path, PathBuf};

use sparselab_core::ensembles::io::{
    matrix_from_bytes, matrix_from_csv, matrix_to_bytes, matrix_to_csv, signal_from_csv, signal_to_csv,
    MATRIX_MAGIC,
};
use sparselab_core::experiments::{contour_crossings, scaling_exponent_from};
use sparselab_core::net::{densify, net_to_csv};
use sparselab_core::report::{
    concentration_to_csv, fit_to_csv, nsp_to_csv, phase_from_csv, phase_heatmap_svg, phase_to_csv,
    recovery_to_csv, rub_to_csv, threshold_scatter_svg,
};
use sparselab_core::rub::nsp_counterexample;
use sparselab_core::{
    build_sparse_net, check_exact_recovery, concentration_experiment, fit_threshold, l1_minimize, measure,
    nsp_oracle, phase_diagram, rub_constants, sample_matrix, std_scaling_check, theorem1_certificate,
    verify_covering, EntryDistribution, Error, MeasurementMatrix, NspOutcome, RubMethod, SparseSignal,
    ValueLaw,
};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::resolve;
use crate::schema::CommandName;

/// Densification rounds before a failed covering check is final.
const MAX_DENSIFY_ROUNDS: u64 = 4;

#[derive(Debug, Default)]
pub struct Outcome {
    pub files: Vec<(PathBuf, Vec<u8>)>,
    pub summary: Vec<String>,
    /// Internal checks that did not hold; nonempty means exit code 5.
    pub failed: Vec<String>,
}

impl Outcome {
    fn file(&mut self, base: &Path, path: &str, bytes: impl Into<Vec<u8>>) {
        self.files.push((resolve(base, path), bytes.into()));
    }
}

fn dist(c: &RunConfig) -> Result<EntryDistribution, CliError> {
    Ok(EntryDistribution::from_name(c.text("dist").unwrap_or("laplace"))?)
}

pub fn load_matrix(path: &str) -> Result<MeasurementMatrix, CliError> {
    let bytes =
        std::fs::read(path).map_err(|e| CliError::Config(format!("cannot read matrix {path}: {e}")))?;
    if bytes.starts_with(MATRIX_MAGIC) {
        Ok(matrix_from_bytes(&bytes)?)
    } else {
        let text =
            String::from_utf8(bytes).map_err(|_| Error::Format(format!("{path} is neither csv nor bin")))?;
        Ok(matrix_from_csv(&text)?)
    }
}

fn read_text(path: &str) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {path}: {e}")))
}

fn matrix_for(c: &RunConfig) -> Result<MeasurementMatrix, CliError> {
    match c.text("matrix") {
        Some(path) => load_matrix(path),
        None => Ok(sample_matrix(
            c.count("m").expect("validated"),
            c.count("n").expect("validated"),
            &dist(c)?,
            c.seed(),
        )?),
    }
}

pub fn execute(c: &RunConfig, base: &Path) -> Result<Outcome, CliError> {
    let mut out = Outcome::default();
    let out_path = c
        .text("out")
        .expect("every command has a default output")
        .to_string();
    match c.command {
        CommandName::GenMatrix => {
            let (m, n) = (c.count("m").expect("required"), c.count("n").expect("required"));
            let a = sample_matrix(m, n, &dist(c)?, c.seed())?;
            let bytes = match c.text("format") {
                Some("bin") => matrix_to_bytes(&a),
                _ => matrix_to_csv(&a).into_bytes(),
            };
            out.file(base, &out_path, bytes);
            out.summary
                .push(format!("{m}x{n} {} matrix, seed {}", a_dist_name(&a), c.seed()));
        }
        CommandName::Recover => {
            let a = load_matrix(c.text("matrix").expect("required"))?;
            let x = signal_from_csv(&read_text(c.text("signal").expect("required"))?)?;
            let y = measure(&a, &x)?;
            let feas_tol = c
                .real("feas-tol")
                .unwrap_or_else(|| sparselab_core::bp_solver::default_feas_tol(&y));
            let result = l1_minimize(&a, &y, feas_tol, c.real("opt-tol").expect("default"))?;
            let ok = check_exact_recovery(&result, &x, c.real("rec-tol").expect("default"))?;
            out.file(
                base,
                &out_path,
                recovery_to_csv(&result, Some((&x.to_dense(), ok)))?,
            );
            let solution = SparseSignal::from_dense(&result.solution)?;
            out.file(
                base,
                c.text("solution-out").expect("default"),
                signal_to_csv(&solution)?,
            );
            out.summary.push(format!(
                "status {}, objective {}, residual {:e}, recovered {ok}",
                result.status.name(),
                result.objective,
                result.feasibility_residual
            ));
        }
        CommandName::Rub => {
            let a = matrix_for(c)?;
            let k = match (c.count("k"), c.count("s"), c.real("lambda")) {
                (Some(k), _, _) => k,
                (None, Some(s), Some(l)) => sparselab_core::rub::certificate_level(s, l),
                _ => unreachable!("validated"),
            };
            let method = RubMethod::from_name(c.text("method").expect("default"))?;
            let est = rub_constants(&a, k, method, c.count("budget").expect("default"), c.seed())?;
            out.file(base, &out_path, rub_to_csv(&est)?);
            out.summary.push(format!(
                "level {k}: lower {} upper {} ({}, {} {})",
                est.lower,
                est.upper,
                method.name(),
                est.samples_or_supports,
                if method == RubMethod::ExactTiny {
                    "supports"
                } else {
                    "samples"
                }
            ));
            if let (Some(s), Some(lambda)) = (c.count("s"), c.real("lambda")) {
                let line = match theorem1_certificate(est.lower, est.upper, lambda) {
                    Ok(true) => format!("certificate holds: lambda {lambda} > (c2/c1)^2, so every {s}-sparse signal is recovered"),
                    Ok(false) => format!(
                        "certificate fails: lambda {lambda} <= (c2/c1)^2 = {}",
                        (est.upper / est.lower).powi(2)
                    ),
                    Err(Error::Degenerate(msg)) => format!("certificate not evaluable (degenerate RUB): {msg}"),
                    Err(e) => return Err(e.into()),
                };
                out.summary.push(line);
                if method == RubMethod::MonteCarlo {
                    out.summary
                        .push("Monte Carlo constants are not certified bounds".into());
                }
            }
        }
        CommandName::Nsp => {
            let a = matrix_for(c)?;
            let s = c.count("s").expect("required");
            let outcome = nsp_oracle(&a, s, c.count("budget").expect("default"), c.seed())?;
            out.file(base, &out_path, nsp_to_csv(&outcome, s)?);
            out.summary.push(format!("order {s}: {}", outcome.name()));
            if let NspOutcome::Fails { witness } = &outcome {
                let (x, alt) = nsp_counterexample(witness, s)?;
                out.summary.push(format!(
                    "witness {witness:?}; x on {:?} shares measurements with {alt:?}",
                    x.support
                ));
            }
        }
        CommandName::Net => {
            let (n, s) = (c.count("n").expect("required"), c.count("s").expect("required"));
            let eps = c.real("epsilon").expect("default");
            let probes = c.count("probes").expect("default");
            let seed = c.seed();
            let mut net = build_sparse_net(n, s, eps, seed)?;
            let mut dist = verify_covering(&net, probes, seed ^ 1)?;
            let mut round = 0;
            while dist > eps && round < MAX_DENSIFY_ROUNDS {
                let added = densify(&mut net, probes, seed.wrapping_add(2 + 2 * round))?;
                dist = verify_covering(&net, probes, seed.wrapping_add(3 + 2 * round))?;
                out.summary.push(format!("densified with {added} points"));
                round += 1;
            }
            out.file(base, &out_path, net_to_csv(&net)?);
            out.summary.push(format!(
                "{} points (bound {:.1}), max {} per support (packing bound {:.1}), covering distance {dist}",
                net.len(),
                net.cardinality_bound(),
                net.per_support_sizes.values().max().copied().unwrap_or(0),
                net.packing_bound()
            ));
            if dist > eps {
                out.failed
                    .push(format!("covering distance {dist} exceeds epsilon {eps}"));
            }
        }
        CommandName::Concentration => {
            let n = c.count("n").expect("default");
            let x: Vec<f64> = match c.text("probe") {
                Some("flat") => vec![1.0 / (n as f64).sqrt(); n],
                _ => (0..n).map(|j| if j == 0 { 1.0 } else { 0.0 }).collect(),
            };
            let report = concentration_experiment(
                &x,
                &dist(c)?,
                c.counts("m").expect("default"),
                c.reals("delta").expect("default"),
                c.count("trials").expect("default"),
                c.seed(),
            )?;
            out.file(base, &out_path, concentration_to_csv(&report)?);
            for st in &report.stats {
                out.summary
                    .push(format!("m {}: mean {} std {}", st.m, st.mean, st.std));
            }
            match std_scaling_check(&report) {
                Ok(ok) => out.summary.push(format!("std ~ m^(-1/2) within factor 2: {ok}")),
                Err(e) => out.summary.push(format!("std scaling not checked: {e}")),
            }
            if !report.jensen_holds() {
                out.failed.push("a mean exceeds 1 + 4 standard errors".into());
            }
        }
        CommandName::PhaseDiagram => {
            let law = ValueLaw::from_name(c.text("value-law").expect("default"))?;
            let d = phase_diagram(
                c.count("n").expect("required"),
                c.counts("s").expect("required"),
                c.counts("m").expect("required"),
                &dist(c)?,
                law,
                c.count("trials").expect("default"),
                c.seed(),
            )?;
            out.file(base, &out_path, phase_to_csv(&d)?);
            if let Some(svg) = c.text("svg") {
                out.file(base, svg, phase_heatmap_svg(&d));
            }
            let flags = d.monotonicity_violations();
            out.summary.push(format!(
                "{} cells x {} trials, {} monotonicity flags beyond 3 sigma",
                d.s_grid.len() * d.m_grid.len(),
                d.trials_per_cell,
                flags.len()
            ));
            for v in flags.iter().take(5) {
                out.summary.push(format!(
                    "flag: s {} success drops {:.3} from m {} to m {}",
                    v.s, v.drop, v.m_low, v.m_high
                ));
            }
        }
        CommandName::Fit => {
            let d = phase_from_csv(&read_text(c.text("input").expect("required"))?)?;
            let level = c.real("level").expect("default");
            let fit = fit_threshold(&d, level)?;
            out.file(base, &out_path, fit_to_csv(&fit, d.n)?);
            if let Some(svg) = c.text("svg") {
                out.file(base, svg, threshold_scatter_svg(&fit, d.n));
            }
            out.summary.push(format!(
                "m* = {} s ln({} n / s), residual {} ({} s values)",
                fit.a,
                fit.b,
                fit.residual,
                fit.s_points_used.len()
            ));
            match scaling_exponent_from(&contour_crossings(&d, level)) {
                Ok(e) => out.summary.push(format!("scaling exponent {e}")),
                Err(e) => out.summary.push(format!("scaling exponent not available: {e}")),
            }
        }
    }
    Ok(out)
}

fn a_dist_name(a: &MeasurementMatrix) -> &'static str {
    match &a.provenance {
        sparselab_core::Provenance::Sampled { dist, .. } => dist.name(),
        sparselab_core::Provenance::Explicit => "explicit",
    }
}
