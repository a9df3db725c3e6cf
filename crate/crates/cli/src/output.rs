//! Rendering of command results as JSON or TSV.

use serde_json::{json, Map, Value};

use crate::args::{Format, RunConfig};

/// A number rounded to 10 significant digits; non-finite values become
/// the strings `inf`, `-inf` and `nan`.
pub fn num(x: f64) -> Value {
    if x.is_nan() {
        return Value::String("nan".into());
    }
    if x.is_infinite() {
        return Value::String(if x > 0.0 { "inf" } else { "-inf" }.into());
    }
    let rounded: f64 = format!("{x:.9e}").parse().expect("formatted float parses");
    // Normalize -0 so equal results print identically.
    json!(if rounded == 0.0 { 0.0 } else { rounded })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

/// The output of one command.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub result: Map<String, Value>,
    pub table: Option<Table>,
    /// Replaces the table body in TSV output (simulated pedigree files).
    pub raw_tsv: Option<String>,
}

impl Report {
    pub fn new() -> Self {
        Report { result: Map::new(), table: None, raw_tsv: None }
    }

    pub fn set(&mut self, key: &str, value: Value) {
        self.result.insert(key.to_string(), value);
    }
}

impl Default for Report {
    fn default() -> Self {
        Report::new()
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => "NA".into(),
        other => other.to_string(),
    }
}

pub fn render(cfg: &RunConfig, report: &Report) -> String {
    let config = serde_json::to_value(cfg).expect("config serializes");
    match cfg.format {
        Format::Json => {
            let mut result = report.result.clone();
            if let Some(t) = &report.table {
                let rows: Vec<Value> = t
                    .rows
                    .iter()
                    .map(|r| Value::Object(t.columns.iter().cloned().zip(r.iter().cloned()).collect()))
                    .collect();
                result.insert("table".into(), Value::Array(rows));
            }
            let doc = json!({ "config": config, "result": result });
            let mut s = serde_json::to_string_pretty(&doc).expect("serializes");
            s.push('\n');
            s
        }
        Format::Tsv => {
            let mut s = format!("# config\t{config}\n");
            let body = report.raw_tsv.is_some() || report.table.is_some();
            if !body {
                s.push_str("key\tvalue\n");
            }
            for (k, v) in &report.result {
                if body {
                    s.push_str("# ");
                }
                s.push_str(&format!("{k}\t{}\n", cell(v)));
            }
            if let Some(raw) = &report.raw_tsv {
                s.push_str(raw);
            } else if let Some(t) = &report.table {
                s.push_str(&t.columns.join("\t"));
                s.push('\n');
                for r in &t.rows {
                    s.push_str(&r.iter().map(cell).collect::<Vec<_>>().join("\t"));
                    s.push('\n');
                }
            }
            s
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ten_significant_digits() {
        assert_eq!(num(3.010299956639812), json!(3.010299957));
        assert_eq!(num(1.0 / 3.0).to_string(), "0.3333333333");
        assert_eq!(num(123456789012.0).to_string(), "123456789000.0");
        assert_eq!(num(-0.0), json!(0.0));
        assert_eq!(num(f64::NEG_INFINITY), json!("-inf"));
        assert_eq!(num(2.5e-17).to_string(), "2.5e-17");
    }
}
