//! CSV and JSON files read and written by the commands.
//!
//! Floats are written with Rust's shortest round-trip formatting, so equal
//! values always produce equal bytes.

use std::collections::HashMap;
use std::path::Path;
use std::sync::Arc;

use privf_core::dist::INGESTION_TOL;
use privf_core::quantize::Quantizer;
use privf_core::{Alphabet, ConditionalMapping, JointDistribution};
use serde::Serialize;

use crate::error::{CliError, Result};

/// Mapping entries below this are left out of mapping files.
pub const OMIT_BELOW: f64 = 1e-12;

pub const MAPPING_HEADER: [&str; 3] = ["in_symbol", "out_symbol", "probability"];
pub const PRIOR_HEADER: [&str; 3] = ["private_symbol", "public_symbol", "probability"];
pub const CURVE_HEADER: [&str; 5] = ["delta_target", "achieved_distortion", "leakage_bits", "map_accuracy", "converged"];

fn writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    csv::Writer::from_path(path).map_err(CliError::csv(path))
}

fn finish(mut w: csv::Writer<std::fs::File>, path: &Path) -> Result<()> {
    w.flush().map_err(CliError::io(path))
}

fn reader(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(CliError::csv(path))
}

fn check_header(r: &mut csv::Reader<std::fs::File>, path: &Path, expected: &[&str]) -> Result<()> {
    let found = r.headers().map_err(CliError::csv(path))?;
    if found.iter().ne(expected.iter().copied()) {
        return Err(CliError::data(path, format!("expected columns {expected:?}, found {found:?}")));
    }
    Ok(())
}

fn probability(path: &Path, v: &str) -> Result<f64> {
    v.parse::<f64>()
        .ok()
        .filter(|p| p.is_finite() && *p >= 0.0)
        .ok_or_else(|| CliError::data(path, format!("bad probability {v:?}")))
}

/// Labels in order of first appearance.
fn intern(labels: &mut Vec<String>, index: &mut HashMap<String, usize>, label: &str) -> usize {
    *index.entry(label.to_string()).or_insert_with(|| {
        labels.push(label.to_string());
        labels.len() - 1
    })
}

pub fn write_mapping(path: &Path, map: &ConditionalMapping) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(MAPPING_HEADER).map_err(CliError::csv(path))?;
    for b in 0..map.input().len() {
        for (j, &p) in map.row(b).iter().enumerate() {
            if p >= OMIT_BELOW {
                w.write_record([map.input().label(b), map.output().label(j), &p.to_string()])
                    .map_err(CliError::csv(path))?;
            }
        }
    }
    finish(w, path)
}

/// Reads a mapping over `input`. Outputs take their order of first
/// appearance; rows are renormalized after the omitted entries.
pub fn read_mapping(path: &Path, input: &Arc<Alphabet>) -> Result<ConditionalMapping> {
    let mut r = reader(path)?;
    check_header(&mut r, path, &MAPPING_HEADER)?;
    let mut outputs = Vec::new();
    let mut out_index = HashMap::new();
    let mut entries = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(CliError::csv(path))?;
        let b = input.index_of(&rec[0]).ok_or_else(|| {
            CliError::Core(privf_core::Error::AlphabetMismatch(format!(
                "mapping input {:?} is not a dataset symbol",
                &rec[0]
            )))
        })?;
        let j = intern(&mut outputs, &mut out_index, &rec[1]);
        entries.push((b, j, probability(path, &rec[2])?));
    }
    let n_out = outputs.len();
    let mut probs = vec![0.0; input.len() * n_out];
    for (b, j, p) in entries {
        probs[b * n_out + j] += p;
    }
    for b in 0..input.len() {
        let row = &mut probs[b * n_out..(b + 1) * n_out];
        let s: f64 = row.iter().sum();
        if (s - 1.0).abs() > INGESTION_TOL {
            return Err(CliError::Core(privf_core::Error::AlphabetMismatch(format!(
                "row {:?} sums to {s}",
                input.label(b)
            ))));
        }
        row.iter_mut().for_each(|p| *p /= s);
    }
    Ok(ConditionalMapping::new(input.clone(), Arc::new(Alphabet::new(outputs)?), probs, None)?)
}

pub fn write_prior(path: &Path, prior: &JointDistribution) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(PRIOR_HEADER).map_err(CliError::csv(path))?;
    for a in 0..prior.n_rows() {
        for (b, p) in prior.row(a).iter().enumerate() {
            w.write_record([prior.rows().label(a), prior.cols().label(b), &p.to_string()])
                .map_err(CliError::csv(path))?;
        }
    }
    finish(w, path)
}

/// Reads a prior; missing cells are zero.
pub fn read_prior(path: &Path) -> Result<JointDistribution> {
    let mut r = reader(path)?;
    check_header(&mut r, path, &PRIOR_HEADER)?;
    let (mut rows, mut row_index) = (Vec::new(), HashMap::new());
    let (mut cols, mut col_index) = (Vec::new(), HashMap::new());
    let mut cells = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(CliError::csv(path))?;
        let a = intern(&mut rows, &mut row_index, &rec[0]);
        let b = intern(&mut cols, &mut col_index, &rec[1]);
        cells.push((a, b, probability(path, &rec[2])?));
    }
    let mut mass = vec![0.0; rows.len() * cols.len()];
    for (a, b, p) in cells {
        mass[a * cols.len() + b] += p;
    }
    let (rows, cols) = (Arc::new(Alphabet::new(rows)?), Arc::new(Alphabet::new(cols)?));
    // Exact values load unchanged; anything else within the ingestion
    // tolerance is renormalized.
    JointDistribution::new(rows.clone(), cols.clone(), mass.clone())
        .or_else(|_| JointDistribution::from_external(rows, cols, mass))
        .map_err(|e| CliError::data(path, e.to_string()))
}

/// One row of the curve file; `None` fields are written empty.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveRow {
    pub delta: f64,
    pub outcome: Option<CurveValues>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveValues {
    pub achieved_distortion: f64,
    pub leakage_bits: f64,
    pub map_accuracy: f64,
    pub converged: bool,
}

pub fn write_curve(path: &Path, rows: &[CurveRow]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(CURVE_HEADER).map_err(CliError::csv(path))?;
    for row in rows {
        let fields = match &row.outcome {
            Some(v) => [
                row.delta.to_string(),
                v.achieved_distortion.to_string(),
                v.leakage_bits.to_string(),
                v.map_accuracy.to_string(),
                v.converged.to_string(),
            ],
            None => [row.delta.to_string(), String::new(), String::new(), String::new(), "failed".into()],
        };
        w.write_record(&fields).map_err(CliError::csv(path))?;
    }
    finish(w, path)
}

pub fn read_curve(path: &Path) -> Result<Vec<CurveRow>> {
    let mut r = reader(path)?;
    check_header(&mut r, path, &CURVE_HEADER)?;
    let num = |v: &str| v.parse::<f64>().map_err(|_| CliError::data(path, format!("bad number {v:?}")));
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(CliError::csv(path))?;
        let delta = num(&rec[0])?;
        let outcome = match &rec[4] {
            "failed" => None,
            c => Some(CurveValues {
                achieved_distortion: num(&rec[1])?,
                leakage_bits: num(&rec[2])?,
                map_accuracy: num(&rec[3])?,
                converged: c == "true",
            }),
        };
        rows.push(CurveRow { delta, outcome });
    }
    Ok(rows)
}

/// `quantizer.csv` (symbol, center_index, distance) and `centers.csv`
/// (center_index, center, coordinates...).
pub fn write_quantizer(dir: &Path, quant: &Quantizer) -> Result<()> {
    let path = dir.join("quantizer.csv");
    let mut w = writer(&path)?;
    w.write_record(["symbol", "center_index", "distance"]).map_err(CliError::csv(&path))?;
    for (b, (&c, d)) in quant.assignment().iter().zip(quant.distances()).enumerate() {
        w.write_record([quant.input().label(b), &c.to_string(), &d.to_string()])
            .map_err(CliError::csv(&path))?;
    }
    finish(w, &path)?;

    let path = dir.join("centers.csv");
    let mut w = writer(&path)?;
    let dims = quant.center_points().first().map_or(0, Vec::len);
    let mut header = vec!["center_index".to_string(), "center".to_string()];
    header.extend((0..dims).map(|d| format!("x{d}")));
    w.write_record(&header).map_err(CliError::csv(&path))?;
    for (c, point) in quant.center_points().iter().enumerate() {
        let mut rec = vec![c.to_string(), quant.centers().label(c).to_string()];
        rec.extend(point.iter().map(f64::to_string));
        w.write_record(&rec).map_err(CliError::csv(&path))?;
    }
    finish(w, &path)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Numeric(e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text).map_err(CliError::io(path))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn alpha(labels: &[&str]) -> Arc<Alphabet> {
        Arc::new(Alphabet::new(labels.iter().copied()).unwrap())
    }

    #[test]
    fn mapping_round_trip_omits_tiny_entries() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        let b = alpha(&["x", "y"]);
        let map = ConditionalMapping::new(b.clone(), b.clone(), vec![0.25, 0.75, 1e-13, 1.0 - 1e-13], None).unwrap();
        write_mapping(&path, &map).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 4);
        let back = read_mapping(&path, &b).unwrap();
        assert_eq!(back.output().labels(), ["x", "y"]);
        assert_eq!(back.row(0), &[0.25, 0.75]);
        assert_eq!(back.row(1), &[0.0, 1.0]);
    }

    #[test]
    fn mapping_with_unknown_input_is_a_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        std::fs::write(&path, "in_symbol,out_symbol,probability\nz,x,1\n").unwrap();
        let err = read_mapping(&path, &alpha(&["x"])).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn prior_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.csv");
        let p = JointDistribution::new(alpha(&["0", "1"]), alpha(&["x", "y"]), vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        write_prior(&path, &p).unwrap();
        assert_eq!(read_prior(&path).unwrap(), p);
    }

    #[test]
    fn curve_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.csv");
        let rows = vec![
            CurveRow { delta: 0.0, outcome: None },
            CurveRow {
                delta: 0.5,
                outcome: Some(CurveValues {
                    achieved_distortion: 0.49999,
                    leakage_bits: 1e-7,
                    map_accuracy: 0.5,
                    converged: false,
                }),
            },
        ];
        write_curve(&path, &rows).unwrap();
        assert_eq!(read_curve(&path).unwrap(), rows);
    }
}
