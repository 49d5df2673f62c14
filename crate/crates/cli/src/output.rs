//! Run records and their JSON / CSV encodings.

use std::io::Write;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

/// Significant digits kept for every float in the output.
pub const SIGNIFICANT_DIGITS: usize = 12;

/// Rows of the CSV rendering.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub command: String,
    pub version: String,
    pub timestamp: String,
    pub params: Value,
    pub results: Value,
    pub tolerances: Value,
}

pub fn round_significant(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x).parse().unwrap_or(x)
}

/// Rounds every float in `v` to [`SIGNIFICANT_DIGITS`]; integers are untouched.
pub fn round_value(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = round_significant(n.as_f64().unwrap_or(f64::NAN));
            serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
        }
        Value::Array(items) => Value::Array(items.into_iter().map(round_value).collect()),
        Value::Object(map) => Value::Object(map.into_iter().map(|(k, v)| (k, round_value(v))).collect::<Map<_, _>>()),
        other => other,
    }
}

/// Plain decimal for moderate magnitudes, exponent form otherwise.
pub fn format_float(x: f64) -> String {
    let x = round_significant(x);
    let a = x.abs();
    if a == 0.0 || (1e-4..1e15).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        Value::Number(n) if n.is_f64() => format_float(n.as_f64().unwrap_or(f64::NAN)),
        other => other.to_string(),
    }
}

pub fn write_json(record: &RunRecord, out: &mut dyn Write) -> std::io::Result<()> {
    serde_json::to_writer_pretty(&mut *out, record)?;
    writeln!(out)
}

pub fn write_csv(table: &Table, out: &mut dyn Write) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(out);
    w.write_record(&table.header)?;
    for row in &table.rows {
        w.write_record(row.iter().map(cell))?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn rounding_keeps_twelve_digits() {
        assert_eq!(round_significant(2.0 / 3.0), 0.666666666667);
        assert_eq!(round_significant(1.0 / 3.0e-7), 3333333.33333);
        assert_eq!(round_significant(0.0), 0.0);
    }

    #[test]
    fn csv_floats_switch_to_exponent_form() {
        assert_eq!(format_float(0.5), "0.5");
        assert_eq!(format_float(3.749399456654644e-33), "3.74939945665e-33");
        assert_eq!(format_float(-2.5e20), "-2.5e20");
    }

    #[test]
    fn integers_are_not_rounded() {
        let v = round_value(json!({"a": 1234567890123456u64, "b": [0.1, 2]}));
        assert_eq!(v, json!({"a": 1234567890123456u64, "b": [0.1, 2]}));
    }

    #[test]
    fn csv_quotes_per_rfc4180() {
        let mut t = Table::new(&["name", "value"]);
        t.rows.push(vec![json!("a,\"b\""), json!(0.5)]);
        let mut buf = Vec::new();
        write_csv(&t, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "name,value\r\n\"a,\"\"b\"\"\",0.5\r\n");
    }
}
