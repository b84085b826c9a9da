//! CSV and JSON tables of evaluated points.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use serde_json::{json, Value};

/// One evaluated point.
#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub x: f64,
    pub value: f64,
    pub error_estimate: f64,
    pub method: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::Json => "json",
        })
    }
}

pub const CSV_HEADER: &str = "x,value,error_estimate,method";

/// Seventeen significant digits, enough to round-trip any double.
pub fn format_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

fn json_number(v: f64) -> Value {
    // non-finite values have no JSON number form
    serde_json::Number::from_f64(v).map_or(Value::Null, Value::Number)
}

/// Writes `rows` to `sink` and returns the number of data rows written.
pub fn emit_table(rows: &[Row], format: Format, sink: &mut dyn Write) -> io::Result<usize> {
    match format {
        Format::Csv => {
            writeln!(sink, "{CSV_HEADER}")?;
            for r in rows {
                writeln!(
                    sink,
                    "{},{},{},{}",
                    format_float(r.x),
                    format_float(r.value),
                    format_float(r.error_estimate),
                    r.method
                )?;
            }
        }
        Format::Json => {
            let items: Vec<Value> = rows
                .iter()
                .map(|r| {
                    json!({
                        "x": json_number(r.x),
                        "value": json_number(r.value),
                        "error_estimate": json_number(r.error_estimate),
                        "method": r.method,
                    })
                })
                .collect();
            serde_json::to_writer_pretty(&mut *sink, &items)?;
            writeln!(sink)?;
        }
    }
    sink.flush()?;
    Ok(rows.len())
}

fn bad(msg: impl Into<String>) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, msg.into())
}

fn parse_float(s: &str) -> io::Result<f64> {
    f64::from_str(s).map_err(|e| bad(format!("bad number `{s}`: {e}")))
}

/// Reads back a table written by [`emit_table`].
pub fn parse_table(text: &str, format: Format) -> io::Result<Vec<Row>> {
    match format {
        Format::Csv => {
            let mut lines = text.lines();
            if lines.next() != Some(CSV_HEADER) {
                return Err(bad("missing CSV header"));
            }
            lines
                .filter(|l| !l.is_empty())
                .map(|line| {
                    let fields: Vec<&str> = line.splitn(4, ',').collect();
                    if fields.len() != 4 {
                        return Err(bad(format!("expected 4 fields in `{line}`")));
                    }
                    Ok(Row {
                        x: parse_float(fields[0])?,
                        value: parse_float(fields[1])?,
                        error_estimate: parse_float(fields[2])?,
                        method: fields[3].to_string(),
                    })
                })
                .collect()
        }
        Format::Json => {
            let v: Value = serde_json::from_str(text).map_err(|e| bad(e.to_string()))?;
            let items = v.as_array().ok_or_else(|| bad("expected a JSON array"))?;
            let num = |o: &Value, key: &str| -> io::Result<f64> {
                match &o[key] {
                    Value::Null => Ok(f64::NAN),
                    n => n.as_f64().ok_or_else(|| bad(format!("`{key}` is not a number"))),
                }
            };
            items
                .iter()
                .map(|o| {
                    Ok(Row {
                        x: num(o, "x")?,
                        value: num(o, "value")?,
                        error_estimate: num(o, "error_estimate")?,
                        method: o["method"]
                            .as_str()
                            .ok_or_else(|| bad("`method` is not a string"))?
                            .to_string(),
                    })
                })
                .collect()
        }
    }
}

/// Evaluation points `start, start + step, ...` up to `stop`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Grid {
    pub fn points(&self) -> Vec<f64> {
        // the tolerance keeps `stop` when it is a rounded multiple of `step`
        let count = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        (0..count).map(|i| self.start + i as f64 * self.step).collect()
    }
}

impl FromStr for Grid {
    type Err = String;

    /// Parses `start:stop:step`.
    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("grid must be start:stop:step, got `{s}`"));
        }
        let num = |p: &str| p.trim().parse::<f64>().map_err(|_| format!("bad grid number `{p}`"));
        let (start, stop, step) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
        if ![start, stop, step].iter().all(|v| v.is_finite()) {
            return Err("grid values must be finite".into());
        }
        if !(step > 0.0) {
            return Err(format!("grid step must be positive, got {step}"));
        }
        if start > stop {
            return Err(format!("grid start {start} exceeds stop {stop}"));
        }
        Ok(Grid { start, stop, step })
    }
}
