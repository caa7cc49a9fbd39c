//! Epsilon-nets of the sparse unit sphere `T = {x : ||x||_2 = 1, ||x||_0 <= s}`.
//!
//! Each support gets a greedy maximal `epsilon`-separated set on its unit
//! sphere. Separation makes the packing bound `(1 + 2/epsilon)^s` hold on
//! every build; covering holds with high probability and is checked by
//! sampling, with [`densify`] admitting any uncovered probe (which keeps the
//! separation invariant).
//!
//! ## Net CSV
//!
//! ```text
//! #sparselab-net v1 n=<n> s=<s> epsilon=<f64>
//! point,index,value
//! 0,0,1.0
//! ```

use std::collections::BTreeMap;
use std::io::Write;

use itertools::Itertools;
use rand::seq::index;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::ensembles::io::{meta_get, parse_meta, parse_number};
use crate::ensembles::SparseSignal;
use crate::error::{Error, Result};
use crate::report::fmt_f64;
use crate::rng;

pub const NET_CSV_SCHEMA: &str = "#sparselab-net v1";
/// Cap on `C(n, s) * (3/epsilon)^s`, the worst-case net size.
pub const NET_POINT_BUDGET: f64 = 1e6;
/// Consecutive rejections per `(3/epsilon)^k` before a support net is final.
pub const REJECTION_STREAK_FACTOR: f64 = 200.0;

#[derive(Debug, Clone, PartialEq)]
pub struct EpsilonNet {
    pub n: usize,
    pub s: usize,
    pub epsilon: f64,
    /// Grouped by support, supports in lexicographic order.
    pub points: Vec<SparseSignal>,
    pub per_support_sizes: BTreeMap<Vec<usize>, usize>,
}

impl EpsilonNet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `(e n / (epsilon s))^s`.
    pub fn cardinality_bound(&self) -> f64 {
        sparse_net_bound(self.n, self.s, self.epsilon)
    }

    /// `(1 + 2/epsilon)^s`.
    pub fn packing_bound(&self) -> f64 {
        packing_bound(self.s, self.epsilon)
    }

    fn by_support(&self) -> BTreeMap<&[usize], Vec<&[f64]>> {
        let mut map: BTreeMap<&[usize], Vec<&[f64]>> = BTreeMap::new();
        for p in &self.points {
            map.entry(p.support.as_slice()).or_default().push(&p.values);
        }
        map
    }
}

pub fn sparse_net_bound(n: usize, s: usize, epsilon: f64) -> f64 {
    (std::f64::consts::E * n as f64 / (epsilon * s as f64)).powi(s as i32)
}

pub fn packing_bound(k: usize, epsilon: f64) -> f64 {
    (1.0 + 2.0 / epsilon).powi(k as i32)
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon <= 1.0 {
        Ok(())
    } else {
        Err(Error::Parameter(format!("epsilon {epsilon} outside (0, 1]")))
    }
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn unit_gaussian<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..k).map(|_| rng.sample(StandardNormal)).collect();
        let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        // Exact zeros would leave the point off the sparse sphere's support.
        if norm > 0.0 && v.iter().all(|c| *c != 0.0) {
            return v.into_iter().map(|c| c / norm).collect();
        }
    }
}

fn support_net_with<R: Rng + ?Sized>(k: usize, epsilon: f64, rng: &mut R) -> Result<Vec<Vec<f64>>> {
    let streak_limit = (REJECTION_STREAK_FACTOR * (3.0 / epsilon).powi(k as i32)).ceil() as usize;
    let eps2 = epsilon * epsilon;
    let mut net: Vec<Vec<f64>> = Vec::new();
    let mut streak = 0;
    while streak < streak_limit {
        let cand = unit_gaussian(k, rng);
        if net.iter().all(|p| dist2(p, &cand) > eps2) {
            net.push(cand);
            streak = 0;
        } else {
            streak += 1;
        }
    }
    if net.len() as f64 > packing_bound(k, epsilon) {
        return Err(Error::Assertion(format!(
            "support net of {} points exceeds packing bound {}",
            net.len(),
            packing_bound(k, epsilon)
        )));
    }
    Ok(net)
}

/// Greedy maximal `epsilon`-separated subset of the unit sphere in `R^k`.
///
/// Uniform candidates are admitted when farther than `epsilon` from every
/// admitted point; the build stops after `200 (3/epsilon)^k` consecutive
/// rejections.
pub fn build_support_net(k: usize, epsilon: f64, seed: u64) -> Result<Vec<Vec<f64>>> {
    if k == 0 {
        return Err(Error::Parameter("dimension must be at least 1".into()));
    }
    check_epsilon(epsilon)?;
    if (3.0 / epsilon).powi(k as i32) > NET_POINT_BUDGET {
        return Err(Error::Size(format!("(3/{epsilon})^{k} exceeds the net budget")));
    }
    support_net_with(k, epsilon, &mut rng::root(seed))
}

fn binomial_f64(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Union over all size-`s` supports of embedded support nets. Support `S`
/// draws from the stream `(seed, S)`, so the result does not depend on
/// scheduling.
pub fn build_sparse_net(n: usize, s: usize, epsilon: f64, seed: u64) -> Result<EpsilonNet> {
    if s == 0 || s > n {
        return Err(Error::Parameter(format!("sparsity {s} outside 1..={n}")));
    }
    check_epsilon(epsilon)?;
    let worst = binomial_f64(n, s) * (3.0 / epsilon).powi(s as i32);
    if worst > NET_POINT_BUDGET {
        return Err(Error::Size(format!(
            "C({n}, {s}) (3/{epsilon})^{s} = {worst:.3e} exceeds the budget of {NET_POINT_BUDGET:e}"
        )));
    }
    let supports: Vec<Vec<usize>> = (0..n).combinations(s).collect();
    let nets: Vec<Vec<Vec<f64>>> = supports
        .par_iter()
        .map(|sup| {
            let path: Vec<u64> = sup.iter().map(|&j| j as u64).collect();
            support_net_with(s, epsilon, &mut rng::stream(seed, &path))
        })
        .collect::<Result<_>>()?;

    let mut points = Vec::new();
    let mut per_support_sizes = BTreeMap::new();
    for (sup, net) in supports.into_iter().zip(nets) {
        per_support_sizes.insert(sup.clone(), net.len());
        for values in net {
            points.push(SparseSignal::new(n, sup.clone(), values)?);
        }
    }
    let net = EpsilonNet {
        n,
        s,
        epsilon,
        points,
        per_support_sizes,
    };
    check_cardinality(&net)?;
    Ok(net)
}

fn check_cardinality(net: &EpsilonNet) -> Result<()> {
    if net.len() as f64 > net.cardinality_bound() {
        return Err(Error::Assertion(format!(
            "net of {} points exceeds (e n/(eps s))^s = {}",
            net.len(),
            net.cardinality_bound()
        )));
    }
    Ok(())
}

fn sample_probe<R: Rng + ?Sized>(n: usize, s: usize, rng: &mut R) -> (Vec<usize>, Vec<f64>) {
    let mut support = index::sample(rng, n, s).into_vec();
    support.sort_unstable();
    (support, unit_gaussian(s, rng))
}

fn nearest(candidates: Option<&Vec<&[f64]>>, probe: &[f64]) -> f64 {
    candidates
        .map(|c| c.iter().map(|p| dist2(p, probe)).fold(f64::INFINITY, f64::min))
        .unwrap_or(f64::INFINITY)
        .sqrt()
}

/// Largest distance from `probes` uniform points of `T` (uniform support,
/// uniform direction) to the nearest net point on the same support.
pub fn verify_covering(net: &EpsilonNet, probes: usize, seed: u64) -> Result<f64> {
    if probes == 0 {
        return Err(Error::Parameter("need at least one probe".into()));
    }
    let groups = net.by_support();
    let mut rng = rng::root(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..probes {
        let (support, values) = sample_probe(net.n, net.s, &mut rng);
        worst = worst.max(nearest(groups.get(support.as_slice()), &values));
    }
    Ok(worst)
}

/// Admit every probe farther than `epsilon` from the net. Such a probe is
/// `epsilon`-separated from its support's points, so the packing bound still
/// holds. Returns the number of points added.
pub fn densify(net: &mut EpsilonNet, probes: usize, seed: u64) -> Result<usize> {
    let mut rng = rng::root(seed);
    let mut extra: BTreeMap<Vec<usize>, Vec<Vec<f64>>> = BTreeMap::new();
    {
        let groups = net.by_support();
        for _ in 0..probes {
            let (support, values) = sample_probe(net.n, net.s, &mut rng);
            let mut d = nearest(groups.get(support.as_slice()), &values);
            if let Some(added) = extra.get(&support) {
                d = added.iter().map(|p| dist2(p, &values).sqrt()).fold(d, f64::min);
            }
            if d > net.epsilon {
                extra.entry(support).or_default().push(values);
            }
        }
    }
    let added: usize = extra.values().map(Vec::len).sum();
    if added == 0 {
        return Ok(0);
    }
    for (support, pts) in extra {
        for values in pts {
            net.points
                .push(SparseSignal::new(net.n, support.clone(), values)?);
        }
    }
    net.points.sort_by(|a, b| a.support.cmp(&b.support));
    net.per_support_sizes.clear();
    for p in &net.points {
        *net.per_support_sizes.entry(p.support.clone()).or_insert(0) += 1;
    }
    let bound = net.packing_bound();
    if net.per_support_sizes.values().any(|&c| c as f64 > bound) {
        return Err(Error::Assertion(format!(
            "densified support net exceeds packing bound {bound}"
        )));
    }
    check_cardinality(net)?;
    Ok(added)
}

pub fn net_to_csv(net: &EpsilonNet) -> Result<String> {
    let mut buf = Vec::new();
    writeln!(
        buf,
        "{NET_CSV_SCHEMA} n={} s={} epsilon={}",
        net.n,
        net.s,
        fmt_f64(net.epsilon)
    )?;
    let mut w = csv::Writer::from_writer(buf);
    w.write_record(["point", "index", "value"])?;
    for (i, p) in net.points.iter().enumerate() {
        for (&j, &v) in p.support.iter().zip(&p.values) {
            w.write_record([i.to_string(), j.to_string(), fmt_f64(v)])?;
        }
    }
    let buf = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(buf).expect("ascii output"))
}

pub fn net_from_csv(text: &str) -> Result<EpsilonNet> {
    let (first, body) = text.split_once('\n').unwrap_or((text, ""));
    let meta = parse_meta(first.trim_end(), NET_CSV_SCHEMA)?;
    let n: usize = meta_get(&meta, "n")?;
    let s: usize = meta_get(&meta, "s")?;
    let epsilon: f64 = meta_get(&meta, "epsilon")?;
    check_epsilon(epsilon)?;

    let mut rows: Vec<(usize, Vec<usize>, Vec<f64>)> = Vec::new();
    let mut reader = csv::Reader::from_reader(body.as_bytes());
    for record in reader.records() {
        let record = record?;
        if record.len() != 3 {
            return Err(Error::Format("net rows need point,index,value".into()));
        }
        let point: usize = record[0]
            .trim()
            .parse()
            .map_err(|_| Error::Format(format!("bad point id '{}'", &record[0])))?;
        let j: usize = record[1]
            .trim()
            .parse()
            .map_err(|_| Error::Format(format!("bad index '{}'", &record[1])))?;
        let v = parse_number(&record[2])?;
        match rows.last_mut() {
            Some((id, sup, vals)) if *id == point => {
                sup.push(j);
                vals.push(v);
            }
            Some((id, _, _)) if *id + 1 != point => {
                return Err(Error::Format(format!("point ids jump from {id} to {point}")));
            }
            None if point != 0 => return Err(Error::Format("point ids must start at 0".into())),
            _ => rows.push((point, vec![j], vec![v])),
        }
    }
    let mut points = Vec::with_capacity(rows.len());
    let mut per_support_sizes = BTreeMap::new();
    for (_, support, values) in rows {
        if support.len() > s {
            return Err(Error::Format(format!(
                "point has {} entries, more than s = {s}",
                support.len()
            )));
        }
        *per_support_sizes.entry(support.clone()).or_insert(0) += 1;
        points.push(SparseSignal::new(n, support, values)?);
    }
    Ok(EpsilonNet {
        n,
        s,
        epsilon,
        points,
        per_support_sizes,
    })
}
