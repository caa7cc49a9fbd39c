//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Runs without the libtest harness so the lines always print.

use std::f64::consts::{E, PI};
use std::time::Instant;

use itertools::Itertools;
use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use sparselab_core::bp_solver::{l1_minimize_default, DEFAULT_REC_TOL};
use sparselab_core::experiments::DEFAULT_CONTOUR_LEVEL;
use sparselab_core::net::densify;
use sparselab_core::report::{concentration_to_csv, phase_to_csv};
use sparselab_core::rng;
use sparselab_core::rub::{certificate_level, EXACT_SUPPORT_BUDGET};
use sparselab_core::{
    build_sparse_net, check_exact_recovery, concentration_experiment, fit_threshold, l1_oracle, measure,
    nsp_oracle, phase_diagram, rub_constants, sample_matrix, sample_sparse_signal, scaling_exponent,
    std_scaling_check, theorem1_certificate, verify_covering, EntryDistribution, MeasurementMatrix,
    NspOutcome, PhaseDiagram, RubMethod, SolveStatus, SparseSignal, ValueLaw,
};

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn sign_patterns(n: usize) -> Vec<SparseSignal> {
    (0..n)
        .flat_map(|j| [1.0, -1.0].map(|v| SparseSignal::new(n, vec![j], vec![v]).unwrap()))
        .collect()
}

fn recovers(a: &MeasurementMatrix, x: &SparseSignal) -> bool {
    let y = measure(a, x).unwrap();
    l1_minimize_default(a, &y)
        .and_then(|z| check_exact_recovery(&z, x, DEFAULT_REC_TOL))
        .unwrap_or(false)
}

fn criterion_1() -> Outcome {
    let builtins = EntryDistribution::builtins();
    let (mut worst_obj, mut worst_sol, mut unique, mut infeasible) = (0.0f64, 0.0f64, 0, 0);
    for t in 0..200u64 {
        let mut r = rng::stream(1, &[t]);
        let m = r.random_range(1..=6);
        let n = r.random_range(m.max(2)..=8);
        let a = sample_matrix(m, n, &builtins[t as usize % 5], r.random()).unwrap();
        let y: Vec<f64> = if t % 2 == 0 {
            let s = r.random_range(1..=m.min(3));
            measure(
                &a,
                &sample_sparse_signal(n, s, ValueLaw::Gaussian, r.random()).unwrap(),
            )
            .unwrap()
        } else {
            (0..m).map(|_| r.sample(StandardNormal)).collect()
        };
        let lp = l1_minimize_default(&a, &y).map_err(|e| format!("instance {t}: {e}"))?;
        let or = l1_oracle(&a, &y).map_err(|e| format!("instance {t}: {e}"))?;
        if lp.status != or.result.status {
            return Err(format!(
                "instance {t}: solver status {} but oracle status {}",
                lp.status.name(),
                or.result.status.name()
            ));
        }
        if or.result.status == SolveStatus::Infeasible {
            infeasible += 1;
            continue;
        }
        worst_obj = worst_obj.max((lp.objective - or.result.objective).abs());
        if or.is_unique() {
            unique += 1;
            for (u, v) in lp.solution.iter().zip(&or.result.solution) {
                worst_sol = worst_sol.max((u - v).abs());
            }
        }
    }
    check(
        worst_obj <= 1e-8 && worst_sol <= 1e-6,
        format!(
            "200 instances ({infeasible} infeasible, statuses agree), max |obj diff| {worst_obj:.2e}, \
             max solution diff {worst_sol:.2e} over {unique} unique optima"
        ),
    )
}

fn random_rotation(k: usize, seed: u64) -> DMatrix<f64> {
    let mut r = rng::root(seed);
    let g = DMatrix::from_fn(k, k, |_, _| r.sample::<f64, _>(StandardNormal));
    let qr = g.qr();
    let (mut q, rr) = (qr.q(), qr.r());
    for c in 0..k {
        if rr[(c, c)] < 0.0 {
            q.column_mut(c).neg_mut();
        }
    }
    q
}

/// Axes of the icosahedron (6 in R^3) or the 24-cell (12 in R^4): spherical
/// designs on which `||Ax||_1` is nearly constant.
fn design_rows(k: usize) -> DMatrix<f64> {
    let rows: Vec<Vec<f64>> = if k == 3 {
        let g = (1.0 + 5f64.sqrt()) / 2.0;
        vec![
            vec![0.0, 1.0, g],
            vec![0.0, 1.0, -g],
            vec![1.0, g, 0.0],
            vec![1.0, -g, 0.0],
            vec![g, 0.0, 1.0],
            vec![-g, 0.0, 1.0],
        ]
    } else {
        (0..4)
            .tuple_combinations()
            .flat_map(|(i, j)| {
                [1.0, -1.0].map(|sj| {
                    let mut v = vec![0.0; 4];
                    v[i] = 1.0;
                    v[j] = sj;
                    v
                })
            })
            .collect()
    };
    let m = rows.len();
    DMatrix::from_fn(m, k, |i, c| {
        rows[i][c] / rows[i].iter().map(|v| v * v).sum::<f64>().sqrt()
    })
}

fn criterion_2() -> Outcome {
    let (s, lambda) = (1usize, 2.0);
    let level = certificate_level(s, lambda);
    let mut instances: Vec<(String, MeasurementMatrix)> = Vec::new();
    let sizes = [(12, 3), (12, 4), (10, 5), (8, 6), (12, 8), (6, 10), (12, 14)];
    for t in 0..21u64 {
        let (m, n) = sizes[t as usize % sizes.len()];
        let dist = if t % 2 == 0 {
            EntryDistribution::gaussian()
        } else {
            EntryDistribution::laplace()
        };
        instances.push((
            format!("{} {m}x{n}", dist.name()),
            sample_matrix(m, n, &dist, 100 + t).unwrap(),
        ));
    }
    for t in 0..30u64 {
        let k = if t % 2 == 0 { 3 } else { 4 };
        let mut r = rng::stream(2, &[t]);
        let design = design_rows(k) * random_rotation(k, 200 + t);
        let noisy = design.map(|v| v + 0.01 * r.sample::<f64, _>(StandardNormal));
        instances.push((
            format!("design {}x{k}", noisy.nrows()),
            MeasurementMatrix::from_dmatrix(&noisy).unwrap(),
        ));
    }

    let (mut certified, mut checked, mut counterexamples) = (0, 0, Vec::new());
    for (label, a) in &instances {
        let est = rub_constants(a, level.min(a.n), RubMethod::ExactTiny, EXACT_SUPPORT_BUDGET, 0)
            .map_err(|e| format!("{label}: {e}"))?;
        let holds = match theorem1_certificate(est.lower, est.upper, lambda) {
            Ok(v) => v,
            Err(_) => continue,
        };
        if !holds {
            continue;
        }
        certified += 1;
        for x in sign_patterns(a.n) {
            checked += 1;
            if !recovers(a, &x) {
                counterexamples.push(format!("{label} at {:?}", x.to_dense()));
            }
        }
    }
    check(
        counterexamples.is_empty() && certified > 0,
        format!(
            "{} matrices at level {level}, {certified} certified, {checked} signals checked, {} counterexamples{}",
            instances.len(),
            counterexamples.len(),
            counterexamples.first().map(|c| format!(" (first: {c})")).unwrap_or_default()
        ),
    )
}

fn criterion_3() -> Outcome {
    let pair = MeasurementMatrix::from_rows(&[vec![1.0, -1.0]]).unwrap();
    let fails = matches!(
        nsp_oracle(&pair, 1, 100, 0).map_err(|e| e.to_string())?,
        NspOutcome::Fails { .. }
    );
    let x = SparseSignal::new(2, vec![0], vec![1.0]).unwrap();
    let tie = l1_oracle(&pair, &measure(&pair, &x).unwrap()).map_err(|e| e.to_string())?;
    let tie_shown =
        !tie.is_unique() && tie.optima.contains(&vec![1.0, 0.0]) && tie.optima.contains(&vec![0.0, -1.0]);

    let chain = MeasurementMatrix::from_rows(&[
        vec![1.0, -1.0, 0.0, 0.0],
        vec![0.0, 1.0, -1.0, 0.0],
        vec![0.0, 0.0, 1.0, -1.0],
    ])
    .unwrap();
    let holds = nsp_oracle(&chain, 1, 100, 0).map_err(|e| e.to_string())?.holds();
    let mut all = sign_patterns(4);
    all.extend((0..4).map(|j| SparseSignal::new(4, vec![j], vec![0.37 + j as f64]).unwrap()));
    let recovered = all.iter().filter(|x| recovers(&chain, x)).count();
    check(
        fails && tie_shown && holds && recovered == all.len(),
        format!(
            "[1,-1]: NSP fails={fails}, tie {:?}; difference 3x4: NSP holds={holds}, {recovered}/{} 1-sparse recovered",
            tie.optima,
            all.len()
        ),
    )
}

fn concentration_csvs(seed: u64) -> Result<Vec<(EntryDistribution, String, f64, f64)>, String> {
    EntryDistribution::builtins()
        .into_iter()
        .map(|d| {
            let r = concentration_experiment(&[1.0, 0.0, 0.0, 0.0], &d, &[100], &[0.05, 0.1], 100_000, seed)
                .map_err(|e| e.to_string())?;
            let csv = concentration_to_csv(&r).map_err(|e| e.to_string())?;
            Ok((d, csv, r.stats[0].mean, r.stats[0].std_error(r.trials)))
        })
        .collect()
}

fn criterion_4(runs: &[(EntryDistribution, String, f64, f64)]) -> Outcome {
    let mut ok = true;
    let mut jensen_all = true;
    let mut parts = Vec::new();
    for (d, _, mean, se) in runs {
        let jensen = *mean <= 1.0 + 4.0 * se;
        jensen_all &= jensen;
        let target = match d.name() {
            "gaussian" => Some((2.0 / PI).sqrt()),
            "laplace" => Some(0.5f64.sqrt()),
            _ => None,
        };
        if let Some(t) = target {
            let rel = (mean - t).abs() / t;
            ok &= rel <= 0.01;
            parts.push(format!(
                "{} mean {mean:.5} vs {t:.5} ({:.3}%)",
                d.name(),
                100.0 * rel
            ));
        }
        if !jensen {
            parts.push(format!("{} violates Jensen: {mean}", d.name()));
        }
    }
    if jensen_all {
        parts.push("Jensen bound holds for all five laws".into());
    }
    check(ok && jensen_all, parts.join("; "))
}

fn criterion_5() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for d in [EntryDistribution::gaussian(), EntryDistribution::laplace()] {
        let r = concentration_experiment(&[1.0], &d, &[50, 200, 800], &[0.1], 10_000, 5)
            .map_err(|e| e.to_string())?;
        let pass = std_scaling_check(&r).map_err(|e| e.to_string())?;
        ok &= pass;
        let ratios: Vec<String> = r
            .stats
            .windows(2)
            .map(|w| format!("{:.3}", w[1].std / w[0].std))
            .collect();
        parts.push(format!("{} ratios [{}]", d.name(), ratios.join(", ")));
    }
    check(ok, parts.join("; "))
}

fn criterion_6() -> Outcome {
    let mut net = build_sparse_net(10, 2, 0.5, 6).map_err(|e| e.to_string())?;
    let bound = (10.0 * E).powi(2);
    let per_support = net.per_support_sizes.values().copied().max().unwrap_or(0);
    let mut dist = verify_covering(&net, 10_000, 61).map_err(|e| e.to_string())?;
    let mut note = String::new();
    if dist > 0.5 {
        let added = densify(&mut net, 10_000, 62).map_err(|e| e.to_string())?;
        dist = verify_covering(&net, 10_000, 63).map_err(|e| e.to_string())?;
        note = format!(" after densifying with {added} points");
    }
    let per_support = per_support.max(net.per_support_sizes.values().copied().max().unwrap_or(0));
    check(
        net.len() as f64 <= bound && per_support <= 25 && dist <= 0.5,
        format!(
            "|N| = {} <= {bound:.1}, max per support {per_support} <= 25, covering distance {dist:.4}{note}",
            net.len()
        ),
    )
}

fn diagrams() -> Result<Vec<PhaseDiagram>, String> {
    let m_grid: Vec<usize> = (1..=24).map(|k| 4 * k).collect();
    [EntryDistribution::laplace(), EntryDistribution::gaussian()]
        .iter()
        .map(|d| {
            phase_diagram(256, &[2, 4, 8, 16], &m_grid, d, ValueLaw::Gaussian, 100, 7)
                .map_err(|e| e.to_string())
        })
        .collect()
}

fn criterion_7(ds: &[PhaseDiagram]) -> Outcome {
    let mut parts = Vec::new();
    let mut a_values = Vec::new();
    let mut ok = true;
    for d in ds {
        let fit = fit_threshold(d, DEFAULT_CONTOUR_LEVEL).map_err(|e| e.to_string())?;
        let exponent = scaling_exponent(d).map_err(|e| e.to_string())?;
        let rel = fit.residual / fit.mean_m_star();
        let flagged = d.monotonicity_violations().len();
        if d.dist.name() == "laplace" {
            ok &= exponent <= 1.5;
        }
        ok &= rel <= 0.1;
        a_values.push(fit.a);
        parts.push(format!(
            "{}: exponent {exponent:.3}, a {:.3}, b {:.3}, residual {:.1}% of mean m*, {flagged} monotonicity flags",
            d.dist.name(),
            fit.a,
            fit.b,
            100.0 * rel
        ));
    }
    let ratio = a_values[0] / a_values[1];
    ok &= (1.0 / 3.0..=3.0).contains(&ratio);
    parts.push(format!("a ratio laplace/gaussian {ratio:.3}"));
    check(ok, parts.join("; "))
}

fn criterion_8(
    first_conc: &[(EntryDistribution, String, f64, f64)],
    first_diagrams: &[PhaseDiagram],
) -> Outcome {
    let again = concentration_csvs(4)?;
    let conc_same = first_conc
        .iter()
        .zip(&again)
        .all(|(a, b)| a.1.as_bytes() == b.1.as_bytes());
    let second = diagrams()?;
    let mut diag_same = true;
    for (a, b) in first_diagrams.iter().zip(&second) {
        diag_same &= phase_to_csv(a).map_err(|e| e.to_string())?.as_bytes()
            == phase_to_csv(b).map_err(|e| e.to_string())?.as_bytes();
    }
    check(
        conc_same && diag_same,
        format!("concentration CSVs identical: {conc_same}; phase diagram CSVs identical: {diag_same}"),
    )
}

fn criterion_9() -> Outcome {
    let n = 256;
    let s_grid = [2usize, 4, 8, 16];
    let m_grid: Vec<usize> = (1..=64).map(|k| 4 * k).collect();
    let m_star: Vec<f64> = s_grid
        .iter()
        .map(|&s| 2.0 * s as f64 * (n as f64 / s as f64).ln())
        .collect();
    let trials = 1_000_000;
    // Linear ramps of width 40 are reproduced exactly by interpolation.
    let successes = m_star
        .iter()
        .map(|&ms| {
            m_grid
                .iter()
                .map(|&m| ((0.5 + (m as f64 - ms) / 40.0).clamp(0.0, 1.0) * trials as f64).round() as usize)
                .collect()
        })
        .collect();
    let d = PhaseDiagram {
        n,
        s_grid: s_grid.to_vec(),
        m_grid,
        successes,
        trials_per_cell: trials,
        dist: EntryDistribution::gaussian(),
        value_law: ValueLaw::Gaussian,
        master_seed: 0,
    };
    let fit = fit_threshold(&d, 0.5).map_err(|e| e.to_string())?;
    check(
        (fit.a - 2.0).abs() <= 0.1 && (fit.b - 1.0).abs() <= 0.2,
        format!(
            "a = {:.5}, b = {:.5}, residual {:.2e}",
            fit.a, fit.b, fit.residual
        ),
    )
}

fn main() {
    let mut failed = 0;
    let mut report = |id: usize, name: &str, started: Instant, outcome: Outcome| {
        let secs = started.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {id} PASS [{name}] ({secs:.1}s): {detail}"),
            Err(detail) => {
                failed += 1;
                println!("criterion {id} FAIL [{name}] ({secs:.1}s): {detail}");
            }
        }
    };

    let t = Instant::now();
    report(1, "solver oracle equivalence", t, criterion_1());
    let t = Instant::now();
    report(2, "RUB certificate implies recovery", t, criterion_2());
    let t = Instant::now();
    report(3, "NSP and solver consistency", t, criterion_3());
    let t = Instant::now();
    let conc = concentration_csvs(4);
    let c4 = conc.as_ref().map_err(Clone::clone).and_then(|c| criterion_4(c));
    report(4, "concentration means", t, c4);
    let t = Instant::now();
    report(5, "std scaling", t, criterion_5());
    let t = Instant::now();
    report(6, "epsilon-net", t, criterion_6());
    let t = Instant::now();
    let ds = diagrams();
    let c7 = ds.as_ref().map_err(Clone::clone).and_then(|d| criterion_7(d));
    report(7, "phase-transition scaling", t, c7);
    let t = Instant::now();
    let c8 = match (&conc, &ds) {
        (Ok(c), Ok(d)) => criterion_8(c, d),
        _ => Err("first runs failed".into()),
    };
    report(8, "reproducibility", t, c8);
    let t = Instant::now();
    report(9, "synthetic fit", t, criterion_9());

    println!("acceptance: {} of 9 criteria passed", 9 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
