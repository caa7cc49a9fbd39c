//! CSV and SVG emission for experiment outputs.
//!
//! Every CSV starts with a schema line `#sparselab-<kind> v1 key=value ...`
//! followed by a header row. Floats use the shortest decimal that parses back
//! to the same `f64`, so files are bit-stable and load losslessly.
//!
//! | kind            | columns                                                                |
//! |-----------------|------------------------------------------------------------------------|
//! | `concentration` | `m,mean,std,std_error,min,max`, then `outside_band@d,off_mean@d` per delta |
//! | `phase`         | `s,m,successes,trials,success`                                         |
//! | `fit`           | `s,m_star,fitted`                                                      |
//! | `rub`           | `sparsity_level,lower,upper,method,samples_or_supports,lower_is_certified,upper_is_certified,seed` |
//! | `recovery`      | `objective,feasibility_residual,duality_gap,iterations,status,recovered,max_abs_error` |
//! | `nsp`           | `outcome,margin,samples`                                               |

mod svg;

use std::io::Write;

pub use svg::{color_ramp, phase_heatmap_svg, threshold_scatter_svg, COLOR_STOPS};

use crate::bp_solver::RecoveryResult;
use crate::ensembles::io::{meta_get, parse_meta, parse_number};
use crate::ensembles::{DistKind, EntryDistribution, ValueLaw};
use crate::error::{Error, Result};
use crate::experiments::{ConcentrationReport, PhaseDiagram, ThresholdFit};
use crate::rub::{NspOutcome, RubEstimate};

pub const CONCENTRATION_SCHEMA: &str = "#sparselab-concentration v1";
pub const PHASE_SCHEMA: &str = "#sparselab-phase v1";
pub const FIT_SCHEMA: &str = "#sparselab-fit v1";
pub const RUB_SCHEMA: &str = "#sparselab-rub v1";
pub const RECOVERY_SCHEMA: &str = "#sparselab-recovery v1";
pub const NSP_SCHEMA: &str = "#sparselab-nsp v1";

/// Shortest decimal string that parses back to the same `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

fn table(schema_line: String, header: &[String], rows: &[Vec<String>]) -> Result<String> {
    let mut buf = Vec::new();
    writeln!(buf, "{schema_line}")?;
    let mut w = csv::Writer::from_writer(buf);
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    let buf = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(buf).expect("ascii output"))
}

fn strings(items: &[&str]) -> Vec<String> {
    items.iter().map(|s| s.to_string()).collect()
}

pub fn concentration_to_csv(r: &ConcentrationReport) -> Result<String> {
    let probe: Vec<String> = r.x.iter().map(|&v| fmt_f64(v)).collect();
    let schema = format!(
        "{CONCENTRATION_SCHEMA} dist={} param={} trials={} seed={} lower_ref={} x={}",
        r.dist.name(),
        fmt_f64(r.dist.kind.param()),
        r.trials,
        r.seed,
        fmt_f64(r.lower_ref),
        probe.join(";")
    );
    let mut header = strings(&["m", "mean", "std", "std_error", "min", "max"]);
    for d in &r.delta_values {
        header.push(format!("outside_band@{}", fmt_f64(*d)));
        header.push(format!("off_mean@{}", fmt_f64(*d)));
    }
    let rows: Vec<Vec<String>> = r
        .stats
        .iter()
        .map(|st| {
            let mut row = vec![
                st.m.to_string(),
                fmt_f64(st.mean),
                fmt_f64(st.std),
                fmt_f64(st.std_error(r.trials)),
                fmt_f64(st.min),
                fmt_f64(st.max),
            ];
            for (o, f) in st.outside_band.iter().zip(&st.off_mean) {
                row.push(fmt_f64(*o));
                row.push(fmt_f64(*f));
            }
            row
        })
        .collect();
    table(schema, &header, &rows)
}

pub fn phase_to_csv(d: &PhaseDiagram) -> Result<String> {
    let schema = format!(
        "{PHASE_SCHEMA} n={} dist={} param={} value_law={} trials={} seed={}",
        d.n,
        d.dist.name(),
        fmt_f64(d.dist.kind.param()),
        d.value_law.name(),
        d.trials_per_cell,
        d.master_seed
    );
    let mut rows = Vec::new();
    for (i, &s) in d.s_grid.iter().enumerate() {
        for (j, &m) in d.m_grid.iter().enumerate() {
            rows.push(vec![
                s.to_string(),
                m.to_string(),
                d.successes[i][j].to_string(),
                d.trials_per_cell.to_string(),
                fmt_f64(d.success(i, j)),
            ]);
        }
    }
    table(
        schema,
        &strings(&["s", "m", "successes", "trials", "success"]),
        &rows,
    )
}

fn parse_usize(field: &str) -> Result<usize> {
    field
        .trim()
        .parse()
        .map_err(|_| Error::Format(format!("not a count: '{field}'")))
}

pub fn phase_from_csv(text: &str) -> Result<PhaseDiagram> {
    let (first, body) = text.split_once('\n').unwrap_or((text, ""));
    let meta = parse_meta(first.trim_end(), PHASE_SCHEMA)?;
    let n: usize = meta_get(&meta, "n")?;
    let trials: usize = meta_get(&meta, "trials")?;
    let seed: u64 = meta_get(&meta, "seed")?;
    let param: f64 = meta_get(&meta, "param")?;
    let dist_name: String = meta_get(&meta, "dist")?;
    let law_name: String = meta_get(&meta, "value_law")?;
    let tag = EntryDistribution::from_name(&dist_name)?.kind.tag();
    let dist = EntryDistribution::new(DistKind::from_tag(tag, param)?)?;
    let value_law = ValueLaw::from_name(&law_name)?;
    if trials == 0 {
        return Err(Error::Format("trials must be positive".into()));
    }

    let mut cells = Vec::new();
    let mut reader = csv::Reader::from_reader(body.as_bytes());
    for record in reader.records() {
        let record = record?;
        if record.len() != 5 {
            return Err(Error::Format(
                "phase rows need s,m,successes,trials,success".into(),
            ));
        }
        let (s, m, k, t) = (
            parse_usize(&record[0])?,
            parse_usize(&record[1])?,
            parse_usize(&record[2])?,
            parse_usize(&record[3])?,
        );
        if t != trials || k > t {
            return Err(Error::Format(format!("cell ({s}, {m}) has inconsistent counts")));
        }
        cells.push((s, m, k));
    }
    let mut s_grid: Vec<usize> = cells.iter().map(|c| c.0).collect();
    let mut m_grid: Vec<usize> = cells.iter().map(|c| c.1).collect();
    s_grid.dedup();
    m_grid.sort_unstable();
    m_grid.dedup();
    if cells.len() != s_grid.len() * m_grid.len() {
        return Err(Error::Format("phase rows do not form a full s x m grid".into()));
    }
    let mut successes = vec![vec![0; m_grid.len()]; s_grid.len()];
    for (idx, &(s, m, k)) in cells.iter().enumerate() {
        let (i, j) = (idx / m_grid.len(), idx % m_grid.len());
        if s_grid[i] != s || m_grid[j] != m {
            return Err(Error::Format("phase rows must be ordered by s then m".into()));
        }
        successes[i][j] = k;
    }
    Ok(PhaseDiagram {
        n,
        s_grid,
        m_grid,
        successes,
        trials_per_cell: trials,
        dist,
        value_law,
        master_seed: seed,
    })
}

pub fn fit_to_csv(fit: &ThresholdFit, n: usize) -> Result<String> {
    let schema = format!(
        "{FIT_SCHEMA} n={n} a={} b={} contour_level={} residual={}",
        fmt_f64(fit.a),
        fmt_f64(fit.b),
        fmt_f64(fit.contour_level),
        fmt_f64(fit.residual)
    );
    let rows: Vec<Vec<String>> = fit
        .s_points_used
        .iter()
        .zip(&fit.m_star)
        .map(|(&s, &m)| vec![s.to_string(), fmt_f64(m), fmt_f64(fit.predict(n, s))])
        .collect();
    table(schema, &strings(&["s", "m_star", "fitted"]), &rows)
}

pub fn rub_to_csv(r: &RubEstimate) -> Result<String> {
    let row = vec![
        r.sparsity_level.to_string(),
        fmt_f64(r.lower),
        fmt_f64(r.upper),
        r.method.name().to_string(),
        r.samples_or_supports.to_string(),
        r.lower_is_certified.to_string(),
        r.upper_is_certified.to_string(),
        r.seed.to_string(),
    ];
    let header = strings(&[
        "sparsity_level",
        "lower",
        "upper",
        "method",
        "samples_or_supports",
        "lower_is_certified",
        "upper_is_certified",
        "seed",
    ]);
    table(RUB_SCHEMA.to_string(), &header, &[row])
}

/// `truth` is the reference signal as a dense vector, when known.
pub fn recovery_to_csv(r: &RecoveryResult, truth: Option<(&[f64], bool)>) -> Result<String> {
    let (recovered, err) = match truth {
        Some((x, ok)) => {
            let err = r
                .solution
                .iter()
                .zip(x)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            (ok.to_string(), fmt_f64(err))
        }
        None => (String::new(), String::new()),
    };
    let row = vec![
        fmt_f64(r.objective),
        fmt_f64(r.feasibility_residual),
        fmt_f64(r.duality_gap),
        r.iterations.to_string(),
        r.status.name().to_string(),
        recovered,
        err,
    ];
    let header = strings(&[
        "objective",
        "feasibility_residual",
        "duality_gap",
        "iterations",
        "status",
        "recovered",
        "max_abs_error",
    ]);
    table(
        format!("{RECOVERY_SCHEMA} n={}", r.solution.len()),
        &header,
        &[row],
    )
}

pub fn nsp_to_csv(outcome: &NspOutcome, s: usize) -> Result<String> {
    let (margin, samples) = match outcome {
        NspOutcome::HoldsCertified { margin } => (fmt_f64(*margin), String::new()),
        NspOutcome::HoldsSampled { margin, samples } => (fmt_f64(*margin), samples.to_string()),
        NspOutcome::Fails { .. } => (String::new(), String::new()),
    };
    table(
        format!("{NSP_SCHEMA} s={s}"),
        &strings(&["outcome", "margin", "samples"]),
        &[vec![outcome.name().to_string(), margin, samples]],
    )
}

/// Value of a `key=value` field on a schema line; used to read fit files.
pub fn schema_field(text: &str, schema: &str, key: &str) -> Result<f64> {
    let first = text.lines().next().unwrap_or("");
    let meta = parse_meta(first, schema)?;
    meta.get(key)
        .ok_or_else(|| Error::Format(format!("missing metadata field '{key}'")))
        .and_then(|v| parse_number(v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::{concentration_experiment, fit_contour, phase_diagram};

    #[test]
    fn fmt_round_trips() {
        for v in [0.1, 1.0 / 3.0, 1e-300, -2.5e17, 0.0] {
            assert_eq!(fmt_f64(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn phase_round_trip() {
        let d = phase_diagram(
            8,
            &[1, 2],
            &[3, 5, 8],
            &EntryDistribution::gaussian(),
            ValueLaw::Rademacher,
            4,
            3,
        )
        .unwrap();
        let csv = phase_to_csv(&d).unwrap();
        assert!(csv.starts_with("#sparselab-phase v1 n=8 dist=gaussian"));
        assert_eq!(csv.lines().nth(1), Some("s,m,successes,trials,success"));
        assert_eq!(phase_from_csv(&csv).unwrap(), d);
    }

    #[test]
    fn phase_reader_rejects_holes() {
        let d = phase_diagram(
            6,
            &[1, 2],
            &[3, 6],
            &EntryDistribution::gaussian(),
            ValueLaw::Unit,
            2,
            0,
        )
        .unwrap();
        let csv = phase_to_csv(&d).unwrap();
        let truncated: String = csv.lines().take(5).map(|l| format!("{l}\n")).collect();
        assert!(matches!(phase_from_csv(&truncated), Err(Error::Format(_))));
    }

    #[test]
    fn concentration_headers() {
        let r = concentration_experiment(&[1.0], &EntryDistribution::laplace(), &[4], &[0.1, 0.2], 100, 0)
            .unwrap();
        let csv = concentration_to_csv(&r).unwrap();
        assert_eq!(
            csv.lines().nth(1),
            Some("m,mean,std,std_error,min,max,outside_band@0.1,off_mean@0.1,outside_band@0.2,off_mean@0.2")
        );
        assert_eq!(csv.lines().count(), 3);
    }

    #[test]
    fn fit_fields() {
        let fit = fit_contour(100, &[(2, 10.0), (4, 17.0), (8, 30.0)], 0.5).unwrap();
        let csv = fit_to_csv(&fit, 100).unwrap();
        assert_eq!(schema_field(&csv, FIT_SCHEMA, "a").unwrap(), fit.a);
        assert_eq!(schema_field(&csv, FIT_SCHEMA, "residual").unwrap(), fit.residual);
    }
}
