//! CSV and JSON serialization of sweep reports and auxiliary tables.
//!
//! CSV files use `.` as decimal separator and shortest round-trip float
//! digits. JSON numbers carry 17 significant digits; non-finite values are
//! written as `null`.

use std::io::{Read, Write};

use serde::Serialize;
use serde_json::Value;

use crate::config::format_float;
use crate::discretize::ValidationRow;
use crate::error::{Error, Result};
use crate::recon::ReconResult;
use crate::spectrum::{Count, CountResult};
use crate::tract::GridRecord;

pub const RECORD_COLUMNS: [&str; 6] = ["d", "delta", "k_star", "log_k_star", "Q", "cap_hit"];

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "NA".to_string(), format_float)
}

/// Writes grid records; `k_star` is `NA` for counts known only by their
/// logarithm.
pub fn write_records_csv<W: Write>(records: &[GridRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RECORD_COLUMNS)?;
    for r in records {
        let k = match r.k_star.count {
            Count::Exact(n) => n.to_string(),
            Count::LogScale(_) => "NA".to_string(),
        };
        w.write_record([
            r.d.to_string(),
            format_float(r.delta),
            k,
            format_float(r.log_k_star),
            format_float(r.q),
            r.k_star.cap_hit.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads records written by [`write_records_csv`].
pub fn read_records_csv<R: Read>(input: R) -> Result<Vec<GridRecord>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let headers = reader.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Config(format!("records CSV lacks a {name:?} column")))
    };
    let idx: Vec<usize> = RECORD_COLUMNS.iter().map(|c| col(c)).collect::<Result<_>>()?;
    let mut out = Vec::new();
    for (row, rec) in reader.records().enumerate() {
        let rec = rec?;
        let field = |i: usize| rec.get(idx[i]).unwrap_or("");
        let bad = |what: &str| Error::Config(format!("records CSV row {}: malformed {what}", row + 2));
        let d: u32 = field(0).parse().map_err(|_| bad("d"))?;
        let delta: f64 = field(1).parse().map_err(|_| bad("delta"))?;
        let log_k: f64 = field(3).parse().map_err(|_| bad("log_k_star"))?;
        let cap_hit: bool = field(5).parse().map_err(|_| bad("cap_hit"))?;
        let k_star = match field(2) {
            "NA" => CountResult {
                count: Count::LogScale(log_k),
                cap_hit,
            },
            s => CountResult {
                count: Count::Exact(s.parse().map_err(|_| bad("k_star"))?),
                cap_hit,
            },
        };
        if d == 0 || !(delta > 0.0) {
            return Err(bad("grid point"));
        }
        out.push(GridRecord::new(delta, d, k_star));
    }
    Ok(out)
}

pub fn write_recon_csv<W: Write>(rows: &[(Option<usize>, ReconResult)], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let with_instance = rows.iter().any(|(i, _)| i.is_some());
    let mut header = vec!["n", "error", "bound", "ratio"];
    if with_instance {
        header.insert(0, "instance");
    }
    w.write_record(&header)?;
    for (instance, r) in rows {
        let mut rec = vec![
            r.n.to_string(),
            format_float(r.error),
            format_float(r.bound),
            format_float(r.ratio),
        ];
        if with_instance {
            rec.insert(0, instance.map_or_else(String::new, |i| i.to_string()));
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_validation_csv<W: Write>(rows: &[ValidationRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["j", "numeric", "model", "asymptotic", "ratio_model", "ratio_asymptotic"])?;
    for r in rows {
        w.write_record([
            r.j.to_string(),
            format_float(r.numeric),
            format_float(r.model),
            opt(r.asymptotic),
            format_float(r.ratio_model),
            opt(r.ratio_asymptotic),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_spectrum_csv<W: Write>(values: &[f64], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["j", "s_j"])?;
    for (j, v) in values.iter().enumerate() {
        w.write_record([(j + 1).to_string(), format_float(*v)])?;
    }
    w.flush()?;
    Ok(())
}

/// Pretty JSON with floats at 17 significant digits.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let v = serde_json::to_value(value)?;
    let mut out = String::new();
    write_json(&v, 0, &mut out);
    out.push('\n');
    Ok(out)
}

fn write_json(v: &Value, indent: usize, out: &mut String) {
    let pad = |n: usize| "  ".repeat(n);
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if n.is_u64() || n.is_i64() {
                out.push_str(&n.to_string());
            } else {
                match n.as_f64() {
                    Some(x) if x.is_finite() => out.push_str(&format!("{x:.16e}")),
                    _ => out.push_str("null"),
                }
            }
        }
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            out.push_str("[\n");
            for (i, item) in items.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                write_json(item, indent + 1, out);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            out.push_str("{\n");
            for (i, (k, item)) in map.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                out.push_str(&Value::String(k.clone()).to_string());
                out.push_str(": ");
                write_json(item, indent + 1, out);
                out.push_str(if i + 1 < map.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push('}');
        }
    }
}
