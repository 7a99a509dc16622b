//! Trace CSV files.
//!
//! The main file has the header `t,F,g,d,gamma,delta,h`. Floats use the
//! shortest decimal that round-trips to the same `f64`; unknown values (`F`
//! and `h` without an optimal value, `delta` without a minimizer set) are
//! empty fields. Iterates go to a sidecar `<stem>.iterates.csv` with header
//! `t,x0,x1,...`.

use std::fs::File;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::solver::Trace;
use crate::{Error, Result};

pub const HEADER: [&str; 7] = ["t", "F", "g", "d", "gamma", "delta", "h"];

/// One row of the trace CSV.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub t: u64,
    #[serde(rename = "F")]
    pub primal_gap: Option<f64>,
    #[serde(rename = "g")]
    pub fw_gap: f64,
    #[serde(rename = "d")]
    pub dist: f64,
    pub gamma: f64,
    pub delta: Option<f64>,
    pub h: Option<f64>,
}

fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

pub fn rows(trace: &Trace) -> Vec<TraceRow> {
    trace
        .records
        .iter()
        .map(|r| TraceRow {
            t: r.t,
            primal_gap: r.primal_gap,
            fw_gap: r.fw_gap,
            dist: r.dist,
            gamma: r.gamma,
            delta: r.delta,
            h: r.h,
        })
        .collect()
}

pub fn write_rows<W: Write>(out: W, rows: &[TraceRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER)?;
    for r in rows {
        w.write_record([
            r.t.to_string(),
            fmt_opt(r.primal_gap),
            fmt_f64(r.fw_gap),
            fmt_f64(r.dist),
            fmt_f64(r.gamma),
            fmt_opt(r.delta),
            fmt_opt(r.h),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Parses a trace CSV, rejecting any header other than the fixed schema.
pub fn read_rows<R: Read>(input: R) -> Result<Vec<TraceRow>> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers()?.clone();
    if header.iter().ne(HEADER.iter().copied()) {
        return Err(Error::Config(format!(
            "trace header must be '{}', found '{}'",
            HEADER.join(","),
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut out = Vec::new();
    let mut last_t = None;
    for row in r.deserialize() {
        let row: TraceRow = row?;
        if last_t.is_some_and(|t| row.t <= t) {
            return Err(Error::Config(format!(
                "trace iterations must increase strictly (t={})",
                row.t
            )));
        }
        last_t = Some(row.t);
        out.push(row);
    }
    Ok(out)
}

pub fn iterates_path(path: &Path) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("trace");
    path.with_file_name(format!("{stem}.iterates.csv"))
}

/// Writes the trace CSV and its iterate sidecar.
pub fn write_trace(path: &Path, trace: &Trace) -> Result<()> {
    write_rows(File::create(path)?, &rows(trace))?;
    let dim = trace.records.first().map_or(0, |r| r.x.len());
    let mut w = csv::Writer::from_path(iterates_path(path))?;
    let mut header = vec!["t".to_string()];
    header.extend((0..dim).map(|i| format!("x{i}")));
    w.write_record(&header)?;
    for r in &trace.records {
        let mut row = vec![r.t.to_string()];
        row.extend(r.x.iter().map(|&c| fmt_f64(c)));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_trace_file(path: &Path) -> Result<Vec<TraceRow>> {
    read_rows(File::open(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn missing_values_are_empty_fields() {
        let rows = vec![TraceRow {
            t: 0,
            primal_gap: None,
            fw_gap: 0.1,
            dist: 1.0,
            gamma: 1.0,
            delta: None,
            h: None,
        }];
        let mut buf = Vec::new();
        write_rows(&mut buf, &rows).unwrap();
        assert_eq!(
            String::from_utf8(buf.clone()).unwrap(),
            "t,F,g,d,gamma,delta,h\n0,,0.1,1.0,1.0,,\n"
        );
        assert_eq!(read_rows(buf.as_slice()).unwrap(), rows);
    }

    #[test]
    fn floats_round_trip_bitwise() {
        let vals = [
            1.0 / 3.0,
            5e-324,
            1.7976931348623157e308,
            2.0f64.sqrt() * 1e-17,
        ];
        let rows: Vec<_> = vals
            .iter()
            .enumerate()
            .map(|(i, &v)| TraceRow {
                t: i as u64,
                primal_gap: Some(v),
                fw_gap: v,
                dist: v,
                gamma: v,
                delta: Some(v),
                h: Some(v),
            })
            .collect();
        let mut buf = Vec::new();
        write_rows(&mut buf, &rows).unwrap();
        let back = read_rows(buf.as_slice()).unwrap();
        for (a, b) in rows.iter().zip(&back) {
            assert_eq!(
                a.primal_gap.unwrap().to_bits(),
                b.primal_gap.unwrap().to_bits()
            );
        }
    }

    #[test]
    fn wrong_header_rejected() {
        let bad = "t,F,g,d,gamma,h,delta\n";
        assert!(matches!(read_rows(bad.as_bytes()), Err(Error::Config(_))));
    }

    #[test]
    fn non_increasing_t_rejected() {
        let bad = "t,F,g,d,gamma,delta,h\n1,,1.0,1.0,1.0,,\n1,,1.0,1.0,1.0,,\n";
        assert!(read_rows(bad.as_bytes()).is_err());
    }
}
