use std::path::Path;

use super::{write_atomic, FormatError};
use crate::error::Result;
use crate::solvers::IterationRecord;

pub const TRACE_HEADER: [&str; 9] = [
    "iter", "time_s", "objective", "data_term", "l1_term", "tv_h_term", "tv_v_term", "psnr", "ssim",
];

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// CSV with [`TRACE_HEADER`]; absent metrics are empty fields. Floats use the
/// shortest representation that parses back to the same value.
pub fn write_trace(records: &[IterationRecord]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(TRACE_HEADER).expect("in-memory write");
    for r in records {
        w.write_record([
            r.iter.to_string(),
            r.time_s.to_string(),
            r.objective.to_string(),
            r.data_term.to_string(),
            r.l1_term.to_string(),
            opt(r.tv_h_term),
            opt(r.tv_v_term),
            opt(r.psnr),
            opt(r.ssim),
        ])
        .expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

/// Parses a trace, enforcing the exact header, iterations strictly
/// increasing from 0 and nondecreasing times.
pub fn read_trace(bytes: &[u8]) -> Result<Vec<IterationRecord>, FormatError> {
    let mut rd = csv::ReaderBuilder::new().has_headers(false).from_reader(bytes);
    let mut rows = rd.records();
    let bad = |line: usize, message: String| FormatError::Trace { line, message };
    let header = rows
        .next()
        .ok_or_else(|| bad(1, "empty trace".into()))?
        .map_err(|e| bad(1, e.to_string()))?;
    if header.iter().ne(TRACE_HEADER) {
        return Err(bad(1, format!("unexpected header {:?}", header.iter().collect::<Vec<_>>())));
    }
    let mut out: Vec<IterationRecord> = Vec::new();
    for (k, row) in rows.enumerate() {
        let line = k + 2;
        let row = row.map_err(|e| bad(line, e.to_string()))?;
        if row.len() != TRACE_HEADER.len() {
            return Err(bad(line, format!("expected {} fields, got {}", TRACE_HEADER.len(), row.len())));
        }
        let num = |i: usize| -> Result<f64, FormatError> {
            row[i].parse::<f64>().map_err(|_| bad(line, format!("{}: not a number: {:?}", TRACE_HEADER[i], &row[i])))
        };
        let maybe = |i: usize| -> Result<Option<f64>, FormatError> {
            if row[i].is_empty() { Ok(None) } else { num(i).map(Some) }
        };
        let iter: usize = row[0].parse().map_err(|_| bad(line, format!("bad iteration {:?}", &row[0])))?;
        let rec = IterationRecord {
            iter,
            time_s: num(1)?,
            objective: num(2)?,
            data_term: num(3)?,
            l1_term: num(4)?,
            tv_h_term: maybe(5)?,
            tv_v_term: maybe(6)?,
            psnr: maybe(7)?,
            ssim: maybe(8)?,
        };
        match out.last() {
            None if rec.iter != 0 => return Err(bad(line, "first iteration must be 0".into())),
            Some(prev) if rec.iter <= prev.iter => return Err(bad(line, "iterations must strictly increase".into())),
            Some(prev) if rec.time_s < prev.time_s => return Err(bad(line, "time_s decreased".into())),
            _ => {}
        }
        out.push(rec);
    }
    Ok(out)
}

pub fn write_trace_file(records: &[IterationRecord], path: impl AsRef<Path>) -> Result<()> {
    Ok(write_atomic(path.as_ref(), &write_trace(records))?)
}

pub fn read_trace_file(path: impl AsRef<Path>) -> Result<Vec<IterationRecord>> {
    Ok(read_trace(&std::fs::read(path)?)?)
}
