//! Reports written to standard output, as canonical JSON or an aligned text rendering.

use std::collections::BTreeMap;

use beliefscape::Tolerances;
use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use serde_json::{json, Value};

use crate::files::{round12, to_canonical_json};

pub const EXIT_OK: i32 = 0;
pub const EXIT_STRUCTURAL: i32 = 1;
pub const EXIT_VERDICT: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

/// Outcome label plus whether it is a flagged (exit 2) verdict.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub label: &'static str,
    pub flagged: bool,
}

impl Verdict {
    pub const fn ok(label: &'static str) -> Self {
        Self { label, flagged: false }
    }

    pub const fn flagged(label: &'static str) -> Self {
        Self { label, flagged: true }
    }

    pub fn exit_code(&self) -> i32 {
        if self.flagged {
            EXIT_VERDICT
        } else {
            EXIT_OK
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ToleranceSet {
    pub stochastic: f64,
    pub entry: f64,
    pub rank: f64,
    #[serde(rename = "match")]
    pub matching: f64,
}

impl From<&Tolerances> for ToleranceSet {
    fn from(t: &Tolerances) -> Self {
        Self {
            stochastic: t.stochastic,
            entry: t.entry,
            rank: t.rank,
            matching: t.matching,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub command: String,
    pub arguments: Vec<String>,
    /// SHA-256 of each input, keyed by path (`-` for standard input).
    pub inputs: BTreeMap<String, String>,
    pub tolerances: ToleranceSet,
    pub verdict: String,
    pub exit_code: i32,
    pub result: Value,
    pub warnings: Vec<String>,
}

impl Report {
    pub fn to_json(&self) -> String {
        to_canonical_json(self)
    }

    /// Indented text rendering; verdict coloured when `color` is set.
    pub fn to_pretty(&self, color: bool) -> String {
        let mut out = String::new();
        let verdict = if color {
            let code = if self.exit_code == EXIT_OK { "32" } else { "31" };
            format!("\x1b[1;{code}m{}\x1b[0m", self.verdict)
        } else {
            self.verdict.clone()
        };
        out.push_str(&format!("{}: {} (exit {})\n", self.command, verdict, self.exit_code));
        for (path, digest) in &self.inputs {
            out.push_str(&format!("input {path} sha256:{digest}\n"));
        }
        for w in &self.warnings {
            out.push_str(&format!("warning: {w}\n"));
        }
        render(&mut out, &self.result, 0);
        out
    }
}

pub fn matrix(m: &DMatrix<f64>) -> Value {
    Value::Array(m.row_iter().map(|r| json!(r.iter().collect::<Vec<_>>())).collect())
}

pub fn vector(v: &DVector<f64>) -> Value {
    json!(v.iter().collect::<Vec<_>>())
}

/// Matrix with row and column labels.
pub fn labeled(rows: &[String], columns: &[String], m: &DMatrix<f64>) -> Value {
    json!({"rows": rows, "columns": columns, "entries": matrix(m)})
}

/// Vector with labels.
pub fn distribution(labels: &[String], v: &DVector<f64>) -> Value {
    json!({"labels": labels, "values": vector(v)})
}

pub fn pick_labels(labels: &[String], indices: &[usize]) -> Vec<String> {
    indices.iter().map(|&i| labels[i].clone()).collect()
}

fn is_number_row(v: &Value) -> bool {
    v.as_array()
        .is_some_and(|a| a.iter().all(|x| x.is_number() || x.is_null()))
}

fn is_matrix(v: &Value) -> bool {
    v.as_array()
        .is_some_and(|rows| !rows.is_empty() && rows.iter().all(|r| r.is_array() && is_number_row(r)))
}

fn cell(v: &Value) -> String {
    match v.as_f64() {
        Some(x) => format!("{:.6}", round12(x)),
        None if v.is_null() => "-".into(),
        None => v.to_string(),
    }
}

fn strings(v: &Value) -> Option<Vec<String>> {
    v.as_array()?.iter().map(|x| x.as_str().map(str::to_string)).collect()
}

fn table(out: &mut String, indent: usize, rows: &[String], columns: &[String], entries: &[Value]) {
    let pad = " ".repeat(indent);
    let cells: Vec<Vec<String>> = entries
        .iter()
        .map(|r| r.as_array().map_or_else(Vec::new, |a| a.iter().map(cell).collect()))
        .collect();
    let label_width = rows.iter().map(String::len).max().unwrap_or(0);
    let width = cells
        .iter()
        .flatten()
        .map(String::len)
        .chain(columns.iter().map(String::len))
        .max()
        .unwrap_or(0);
    if !columns.is_empty() {
        out.push_str(&format!("{pad}{:label_width$}", ""));
        for c in columns {
            out.push_str(&format!("  {c:>width$}"));
        }
        out.push('\n');
    }
    for (i, row) in cells.iter().enumerate() {
        let label = rows.get(i).map_or("", String::as_str);
        out.push_str(&format!("{pad}{label:label_width$}"));
        for c in row {
            out.push_str(&format!("  {c:>width$}"));
        }
        out.push('\n');
    }
}

fn render(out: &mut String, value: &Value, indent: usize) {
    let pad = " ".repeat(indent);
    match value {
        Value::Object(map) => {
            if let (Some(rows), Some(columns), Some(Value::Array(entries))) = (
                map.get("rows").and_then(strings),
                map.get("columns").and_then(strings),
                map.get("entries"),
            ) {
                table(out, indent, &rows, &columns, entries);
                return;
            }
            if let (Some(labels), Some(Value::Array(values))) = (map.get("labels").and_then(strings), map.get("values"))
            {
                if values.iter().all(|v| v.is_number() || v.is_null()) {
                    let as_rows = [Value::Array(values.clone())];
                    table(out, indent, &[], &labels, &as_rows);
                    return;
                }
            }
            for (k, v) in map {
                match v {
                    Value::Object(_) => {
                        out.push_str(&format!("{pad}{k}:\n"));
                        render(out, v, indent + 2);
                    }
                    Value::Array(items)
                        if !items.is_empty() && items.iter().all(is_number_row) && items[0].is_array() =>
                    {
                        out.push_str(&format!("{pad}{k}:\n"));
                        table(out, indent + 2, &[], &[], items);
                    }
                    Value::Array(items) if !items.is_empty() && items.iter().all(is_matrix) => {
                        out.push_str(&format!("{pad}{k}:\n"));
                        for item in items {
                            out.push_str(&format!("{pad}  -\n"));
                            table(out, indent + 4, &[], &[], item.as_array().expect("matrix"));
                        }
                    }
                    Value::Array(items) if items.iter().any(|x| x.is_object()) => {
                        out.push_str(&format!("{pad}{k}:\n"));
                        for item in items {
                            out.push_str(&format!("{pad}  -\n"));
                            render(out, item, indent + 4);
                        }
                    }
                    _ => out.push_str(&format!("{pad}{k}: {}\n", scalar(v))),
                }
            }
        }
        other => out.push_str(&format!("{pad}{}\n", scalar(other))),
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Array(items) => format!("[{}]", items.iter().map(scalar).collect::<Vec<_>>().join(", ")),
        Value::Number(_) => {
            let x = v.as_f64().unwrap_or(f64::NAN);
            if v.is_i64() || v.is_u64() {
                v.to_string()
            } else if x != 0.0 && !(1e-4..1e6).contains(&x.abs()) {
                format!("{x:.6e}")
            } else {
                format!("{}", round12(x))
            }
        }
        other => other.to_string(),
    }
}
