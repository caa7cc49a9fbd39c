//! Matrix and signal files.
//!
//! ## Matrix CSV
//!
//! ```text
//! #sparselab-matrix v1 m=<m> n=<n> dist=<name|explicit> param=<f64> seed=<u64>
//! a00,a01,...
//! a10,a11,...
//! ```
//!
//! ## Matrix binary (little-endian)
//!
//! | offset | size  | field                                   |
//! |--------|-------|-----------------------------------------|
//! | 0      | 8     | magic `SPLABMTX`                        |
//! | 8      | 8     | `m` (u64)                               |
//! | 16     | 8     | `n` (u64)                               |
//! | 24     | 1     | distribution tag (0 = explicit)         |
//! | 25     | 7     | zero padding                            |
//! | 32     | 8     | distribution parameter (f64)            |
//! | 40     | 8     | seed (u64)                              |
//! | 48     | 8·m·n | entries (f64), row-major                |
//!
//! ## Signal CSV
//!
//! ```text
//! #sparselab-signal v1 n=<n>
//! index,value
//! 3,0.25
//! ```

use std::collections::HashMap;
use std::io::Write;

use super::{DistKind, EntryDistribution, MeasurementMatrix, Provenance, SparseSignal};
use crate::error::{Error, Result};
use crate::report::fmt_f64;

pub const MATRIX_CSV_SCHEMA: &str = "#sparselab-matrix v1";
pub const SIGNAL_CSV_SCHEMA: &str = "#sparselab-signal v1";
pub const MATRIX_MAGIC: &[u8; 8] = b"SPLABMTX";
const HEADER_LEN: usize = 48;

fn provenance_fields(p: &Provenance) -> (u8, f64, u64, &'static str) {
    match p {
        Provenance::Sampled { dist, seed } => (dist.kind.tag(), dist.kind.param(), *seed, dist.name()),
        Provenance::Explicit => (0, 0.0, 0, "explicit"),
    }
}

fn provenance_from(tag: u8, param: f64, seed: u64) -> Result<Provenance> {
    if tag == 0 {
        return Ok(Provenance::Explicit);
    }
    let dist = EntryDistribution::new(DistKind::from_tag(tag, param)?)?;
    Ok(Provenance::Sampled { dist, seed })
}

pub fn matrix_to_csv(a: &MeasurementMatrix) -> String {
    let (_, param, seed, name) = provenance_fields(&a.provenance);
    let mut out = format!(
        "{MATRIX_CSV_SCHEMA} m={} n={} dist={name} param={} seed={seed}\n",
        a.m,
        a.n,
        fmt_f64(param)
    );
    for i in 0..a.m {
        let line: Vec<String> = a.row(i).iter().map(|&v| fmt_f64(v)).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

pub(crate) fn parse_meta(line: &str, schema: &str) -> Result<HashMap<String, String>> {
    let rest = line
        .strip_prefix(schema)
        .ok_or_else(|| Error::Format(format!("expected schema line '{schema}'")))?;
    rest.split_whitespace()
        .map(|kv| {
            kv.split_once('=')
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .ok_or_else(|| Error::Format(format!("bad metadata field '{kv}'")))
        })
        .collect()
}

pub(crate) fn meta_get<T: std::str::FromStr>(meta: &HashMap<String, String>, key: &str) -> Result<T> {
    meta.get(key)
        .ok_or_else(|| Error::Format(format!("missing metadata field '{key}'")))?
        .parse()
        .map_err(|_| Error::Format(format!("bad value for '{key}'")))
}

pub(crate) fn parse_number(field: &str) -> Result<f64> {
    field
        .trim()
        .parse()
        .map_err(|_| Error::Format(format!("not a number: '{field}'")))
}

pub fn matrix_from_csv(text: &str) -> Result<MeasurementMatrix> {
    let (first, body) = text.split_once('\n').unwrap_or((text, ""));
    let meta = parse_meta(first.trim_end(), MATRIX_CSV_SCHEMA)?;
    let m: usize = meta_get(&meta, "m")?;
    let n: usize = meta_get(&meta, "n")?;
    let seed: u64 = meta_get(&meta, "seed")?;
    let param: f64 = meta_get(&meta, "param")?;
    let dist_name: String = meta_get(&meta, "dist")?;

    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_reader(body.as_bytes());
    let mut entries = Vec::with_capacity(m * n);
    for record in reader.records() {
        let record = record?;
        if record.len() != n {
            return Err(Error::Format(format!(
                "row has {} fields, expected {n}",
                record.len()
            )));
        }
        for field in record.iter() {
            entries.push(parse_number(field)?);
        }
    }
    let mut a = MeasurementMatrix::from_row_major(m, n, entries)?;
    if dist_name != "explicit" {
        let kind = EntryDistribution::from_name(&dist_name)?.kind;
        a.provenance = provenance_from(kind.tag(), param, seed)?;
    }
    Ok(a)
}

pub fn matrix_to_bytes(a: &MeasurementMatrix) -> Vec<u8> {
    let (tag, param, seed, _) = provenance_fields(&a.provenance);
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * a.entries.len());
    out.extend_from_slice(MATRIX_MAGIC);
    out.extend_from_slice(&(a.m as u64).to_le_bytes());
    out.extend_from_slice(&(a.n as u64).to_le_bytes());
    out.push(tag);
    out.extend_from_slice(&[0u8; 7]);
    out.extend_from_slice(&param.to_le_bytes());
    out.extend_from_slice(&seed.to_le_bytes());
    for v in &a.entries {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn matrix_from_bytes(bytes: &[u8]) -> Result<MeasurementMatrix> {
    if bytes.len() < HEADER_LEN || &bytes[..8] != MATRIX_MAGIC {
        return Err(Error::Format("not a sparselab matrix file".into()));
    }
    let word = |at: usize| -> [u8; 8] { bytes[at..at + 8].try_into().expect("8-byte slice") };
    let m = u64::from_le_bytes(word(8)) as usize;
    let n = u64::from_le_bytes(word(16)) as usize;
    let tag = bytes[24];
    let param = f64::from_le_bytes(word(32));
    let seed = u64::from_le_bytes(word(40));
    let count = m
        .checked_mul(n)
        .ok_or_else(|| Error::Format("matrix dimensions overflow".into()))?;
    if bytes.len() != HEADER_LEN + 8 * count {
        return Err(Error::Format(format!(
            "payload is {} bytes, expected {}",
            bytes.len() - HEADER_LEN,
            8 * count
        )));
    }
    let entries = (0..count)
        .map(|k| f64::from_le_bytes(word(HEADER_LEN + 8 * k)))
        .collect();
    let mut a = MeasurementMatrix::from_row_major(m, n, entries)?;
    a.provenance = provenance_from(tag, param, seed)?;
    Ok(a)
}

pub fn signal_to_csv(x: &SparseSignal) -> Result<String> {
    let mut buf = Vec::new();
    writeln!(buf, "{SIGNAL_CSV_SCHEMA} n={}", x.n)?;
    let mut w = csv::Writer::from_writer(buf);
    w.write_record(["index", "value"])?;
    for (&j, &v) in x.support.iter().zip(&x.values) {
        w.write_record([j.to_string(), fmt_f64(v)])?;
    }
    let buf = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(buf).expect("ascii output"))
}

pub fn signal_from_csv(text: &str) -> Result<SparseSignal> {
    let (first, body) = text.split_once('\n').unwrap_or((text, ""));
    let meta = parse_meta(first.trim_end(), SIGNAL_CSV_SCHEMA)?;
    let n: usize = meta_get(&meta, "n")?;
    let mut reader = csv::Reader::from_reader(body.as_bytes());
    let mut support = Vec::new();
    let mut values = Vec::new();
    for record in reader.records() {
        let record = record?;
        if record.len() != 2 {
            return Err(Error::Format("signal rows need index,value".into()));
        }
        support.push(
            record[0]
                .trim()
                .parse()
                .map_err(|_| Error::Format(format!("bad index '{}'", &record[0])))?,
        );
        values.push(parse_number(&record[1])?);
    }
    SparseSignal::new(n, support, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::{sample_matrix, sample_sparse_signal, ValueLaw};
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn matrix_formats_round_trip(m in 1usize..5, n in 1usize..6, seed in any::<u64>(), dist_ix in 0usize..5) {
            let dist = EntryDistribution::builtins()[dist_ix];
            let a = sample_matrix(m, n, &dist, seed).unwrap();
            prop_assert_eq!(&matrix_from_csv(&matrix_to_csv(&a)).unwrap(), &a);
            prop_assert_eq!(&matrix_from_bytes(&matrix_to_bytes(&a)).unwrap(), &a);
        }

        #[test]
        fn signal_csv_round_trip(n in 1usize..30, frac in 0.0f64..1.0, seed in any::<u64>()) {
            let s = ((n as f64) * frac) as usize;
            let x = sample_sparse_signal(n, s, ValueLaw::Gaussian, seed).unwrap();
            prop_assert_eq!(signal_from_csv(&signal_to_csv(&x).unwrap()).unwrap(), x);
        }
    }

    #[test]
    fn binary_header_layout() {
        let a = sample_matrix(2, 3, &EntryDistribution::gaussian(), 99).unwrap();
        let bytes = matrix_to_bytes(&a);
        assert_eq!(&bytes[..8], b"SPLABMTX");
        assert_eq!(u64::from_le_bytes(bytes[8..16].try_into().unwrap()), 2);
        assert_eq!(u64::from_le_bytes(bytes[16..24].try_into().unwrap()), 3);
        assert_eq!(bytes[24], 3);
        assert_eq!(u64::from_le_bytes(bytes[40..48].try_into().unwrap()), 99);
        assert_eq!(bytes.len(), 48 + 6 * 8);
    }

    #[test]
    fn truncated_binary_rejected() {
        let a = MeasurementMatrix::identity(2).unwrap();
        let bytes = matrix_to_bytes(&a);
        assert!(matrix_from_bytes(&bytes[..bytes.len() - 1]).is_err());
        assert!(matrix_from_bytes(b"garbage").is_err());
    }

    #[test]
    fn explicit_matrix_csv() {
        let a = MeasurementMatrix::from_rows(&[vec![1.0, 2.0], vec![0.1, -3e-300]]).unwrap();
        let text = matrix_to_csv(&a);
        assert!(text.starts_with("#sparselab-matrix v1 m=2 n=2 dist=explicit"));
        assert_eq!(matrix_from_csv(&text).unwrap(), a);
    }
}
