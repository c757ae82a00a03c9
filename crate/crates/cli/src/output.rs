use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use serde_json::{json, Value};

pub const SCHEMA: &str = "torus-spec/1";

/// Rounds to 10 significant digits.
pub fn sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.9e}").parse().unwrap_or(x)
}

/// JSON number with 10 significant digits; non-finite values become `null`.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(sig(x))
    } else {
        Value::Null
    }
}

pub fn opt_num(x: Option<f64>) -> Value {
    x.map_or(Value::Null, num)
}

/// CSV cell with 10 significant digits, `NaN` for missing values.
pub fn cell(x: f64) -> String {
    if !x.is_finite() {
        return "NaN".into();
    }
    let v = sig(x);
    if v == 0.0 || (1e-4..1e15).contains(&v.abs()) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

pub fn opt_cell(x: Option<f64>) -> String {
    x.map_or_else(|| "NaN".into(), cell)
}

fn sink(out: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(File::create(p)?),
        None => Box::new(io::stdout().lock()),
    })
}

pub fn write_json(out: Option<&Path>, doc: &Value) -> io::Result<()> {
    let mut w = sink(out)?;
    serde_json::to_writer_pretty(&mut w, doc)?;
    writeln!(w)?;
    w.flush()
}

pub fn write_csv(out: Option<&Path>, header: &[&str], rows: &[Vec<String>]) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(sink(out)?);
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()
}
