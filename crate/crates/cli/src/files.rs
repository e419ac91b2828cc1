//! Landscape and environment files (JSON or CSV directories) and canonical number output.

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};

use beliefscape::model::{default_signal_labels, default_state_labels};
use beliefscape::{
    BeliefLandscape, HypotheticalBeliefMatrix, InformationStructure, InformationalEnvironment, Prior, StateBeliefMatrix,
};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FileError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: invalid JSON: {source}")]
    Json {
        path: String,
        #[source]
        source: serde_json::Error,
    },

    #[error("{path}: {location}{message}")]
    Parse {
        path: String,
        location: Location,
        message: String,
    },

    #[error("{path}: {source}")]
    Model {
        path: String,
        #[source]
        source: beliefscape::Error,
    },
}

/// Row and column of a cell, counted from 1 over the numeric block (header row and label column excluded).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Location {
    pub row: Option<usize>,
    pub column: Option<usize>,
}

impl std::fmt::Display for Location {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match (self.row, self.column) {
            (Some(r), Some(c)) => write!(f, "row {r}, column {c}: "),
            (Some(r), None) => write!(f, "row {r}: "),
            (None, Some(c)) => write!(f, "header, column {c}: "),
            (None, None) => Ok(()),
        }
    }
}

fn parse_error(path: &str, row: Option<usize>, column: Option<usize>, message: impl Into<String>) -> FileError {
    FileError::Parse {
        path: path.to_string(),
        location: Location { row, column },
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LandscapeFile {
    #[serde(default)]
    pub states: Vec<String>,
    #[serde(default)]
    pub signals: Vec<String>,
    #[serde(rename = "B")]
    pub b: Vec<Vec<f64>>,
    #[serde(rename = "Q")]
    pub q: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvironmentFile {
    #[serde(default)]
    pub states: Vec<String>,
    #[serde(default)]
    pub signals: Vec<String>,
    pub prior: Vec<f64>,
    #[serde(rename = "I")]
    pub structure: Vec<Vec<f64>>,
}

/// Checks that `rows` is `n_rows × n_cols`, reporting the first offending cell.
fn check_shape(path: &str, name: &str, rows: &[Vec<f64>], n_rows: usize, n_cols: usize) -> Result<(), FileError> {
    if rows.len() != n_rows {
        return Err(parse_error(
            path,
            Some(rows.len().min(n_rows) + 1),
            None,
            format!("{name} has {} rows, expected {n_rows}", rows.len()),
        ));
    }
    for (i, row) in rows.iter().enumerate() {
        if row.len() != n_cols {
            return Err(parse_error(
                path,
                Some(i + 1),
                Some(row.len().min(n_cols) + 1),
                format!("{name} row has {} entries, expected {n_cols}", row.len()),
            ));
        }
    }
    Ok(())
}

fn to_matrix(rows: &[Vec<f64>], n_cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), n_cols, |i, j| rows[i][j])
}

fn rows_of(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn labels_or_default(labels: &[String], n: usize, default: fn(usize) -> Vec<String>) -> Vec<String> {
    if labels.is_empty() {
        default(n)
    } else {
        labels.to_vec()
    }
}

impl LandscapeFile {
    pub fn from_landscape(l: &BeliefLandscape) -> Self {
        Self {
            states: l.beliefs().state_labels().to_vec(),
            signals: l.beliefs().signal_labels().to_vec(),
            b: rows_of(l.b()),
            q: rows_of(l.q()),
        }
    }

    fn state_labels(&self) -> Vec<String> {
        let n = self.b.first().map_or(0, Vec::len);
        labels_or_default(&self.states, n, default_state_labels)
    }

    fn signal_labels(&self) -> Vec<String> {
        labels_or_default(&self.signals, self.b.len(), default_signal_labels)
    }

    pub fn beliefs(&self, path: &str) -> Result<StateBeliefMatrix, FileError> {
        let (states, signals) = (self.state_labels(), self.signal_labels());
        check_shape(path, "B", &self.b, signals.len(), states.len())?;
        StateBeliefMatrix::new(to_matrix(&self.b, states.len()), states, signals).map_err(|source| FileError::Model {
            path: path.to_string(),
            source,
        })
    }

    /// `Q` as stored, which may have a single column.
    pub fn q_matrix(&self, path: &str) -> Result<DMatrix<f64>, FileError> {
        let n_cols = self.q.first().map_or(0, Vec::len);
        check_shape(path, "Q", &self.q, self.b.len(), n_cols)?;
        Ok(to_matrix(&self.q, n_cols))
    }

    pub fn to_landscape(&self, path: &str) -> Result<BeliefLandscape, FileError> {
        let beliefs = self.beliefs(path)?;
        let signals = beliefs.signal_labels().to_vec();
        check_shape(path, "Q", &self.q, signals.len(), signals.len())?;
        let model = |source| FileError::Model {
            path: path.to_string(),
            source,
        };
        let hypothetical = HypotheticalBeliefMatrix::new(to_matrix(&self.q, signals.len()), signals).map_err(model)?;
        BeliefLandscape::new(beliefs, hypothetical).map_err(model)
    }
}

impl EnvironmentFile {
    pub fn from_environment(env: &InformationalEnvironment) -> Self {
        Self {
            states: env.structure().state_labels().to_vec(),
            signals: env.structure().signal_labels().to_vec(),
            prior: env.prior().entries().iter().copied().collect(),
            structure: rows_of(env.structure().entries()),
        }
    }

    pub fn to_environment(&self, path: &str) -> Result<InformationalEnvironment, FileError> {
        let states = labels_or_default(&self.states, self.structure.len(), default_state_labels);
        let n_signals = self.structure.first().map_or(0, Vec::len);
        let signals = labels_or_default(&self.signals, n_signals, default_signal_labels);
        check_shape(path, "I", &self.structure, states.len(), signals.len())?;
        if self.prior.len() != states.len() {
            return Err(parse_error(
                path,
                None,
                None,
                format!("prior has {} entries, expected {}", self.prior.len(), states.len()),
            ));
        }
        let model = |source| FileError::Model {
            path: path.to_string(),
            source,
        };
        let structure = InformationStructure::new(to_matrix(&self.structure, signals.len()), states.clone(), signals)
            .map_err(model)?;
        let prior = Prior::new(DVector::from_vec(self.prior.clone()), states).map_err(model)?;
        InformationalEnvironment::new(structure, prior).map_err(model)
    }
}

/// Raw input bytes keyed by display name, for digests.
#[derive(Debug, Default, Clone)]
pub struct Digests(pub BTreeMap<String, String>);

impl Digests {
    fn record(&mut self, name: &str, bytes: &[u8]) {
        let digest = Sha256::digest(bytes);
        let hex = digest.iter().map(|b| format!("{b:02x}")).collect::<String>();
        self.0.insert(name.to_string(), hex);
    }
}

fn read_source(path: &str, stdin: &mut dyn Read, digests: &mut Digests) -> Result<Vec<u8>, FileError> {
    let mut bytes = Vec::new();
    let io = |source| FileError::Io {
        path: path.to_string(),
        source,
    };
    if path == "-" {
        stdin.read_to_end(&mut bytes).map_err(io)?;
    } else {
        bytes = fs::read(path).map_err(io)?;
    }
    digests.record(path, &bytes);
    Ok(bytes)
}

fn parse_json(path: &str, bytes: &[u8]) -> Result<Value, FileError> {
    serde_json::from_slice(bytes).map_err(|source| FileError::Json {
        path: path.to_string(),
        source,
    })
}

/// Finds an object carrying `key`, either at the top level or under `result.<wrapper>` of a report.
fn unwrap_payload(value: Value, key: &str, wrapper: &str) -> Option<Value> {
    if value.get(key).is_some() {
        return Some(value);
    }
    value
        .get("result")?
        .get(wrapper)
        .filter(|v| v.get(key).is_some())
        .cloned()
}

fn from_value<T: serde::de::DeserializeOwned>(path: &str, value: Value) -> Result<T, FileError> {
    serde_json::from_value(value).map_err(|source| FileError::Json {
        path: path.to_string(),
        source,
    })
}

/// Either kind of input file.
#[derive(Debug, Clone, PartialEq)]
pub enum InputFile {
    Landscape(LandscapeFile),
    Environment(EnvironmentFile),
}

/// Loads a landscape or environment from a JSON file, a report, a CSV directory, or `-` (stdin).
pub fn load(path: &str, stdin: &mut dyn Read, digests: &mut Digests) -> Result<InputFile, FileError> {
    if path != "-" && Path::new(path).is_dir() {
        return load_csv_dir(Path::new(path), digests);
    }
    let value = parse_json(path, &read_source(path, stdin, digests)?)?;
    if let Some(v) = unwrap_payload(value.clone(), "B", "landscape") {
        return Ok(InputFile::Landscape(from_value(path, v)?));
    }
    if let Some(v) = unwrap_payload(value, "I", "environment") {
        return Ok(InputFile::Environment(from_value(path, v)?));
    }
    Err(parse_error(
        path,
        None,
        None,
        "expected a landscape (B, Q) or an environment (I, prior)",
    ))
}

pub fn load_landscape_file(
    path: &str,
    stdin: &mut dyn Read,
    digests: &mut Digests,
) -> Result<LandscapeFile, FileError> {
    match load(path, stdin, digests)? {
        InputFile::Landscape(f) => Ok(f),
        InputFile::Environment(_) => Err(parse_error(
            path,
            None,
            None,
            "expected a landscape, found an environment",
        )),
    }
}

pub fn load_environment_file(
    path: &str,
    stdin: &mut dyn Read,
    digests: &mut Digests,
) -> Result<EnvironmentFile, FileError> {
    match load(path, stdin, digests)? {
        InputFile::Environment(f) => Ok(f),
        InputFile::Landscape(_) => Err(parse_error(
            path,
            None,
            None,
            "expected an environment, found a landscape",
        )),
    }
}

/// A square matrix given as JSON rows, e.g. a regularizer.
pub fn load_matrix(path: &str, stdin: &mut dyn Read, digests: &mut Digests) -> Result<DMatrix<f64>, FileError> {
    let value = parse_json(path, &read_source(path, stdin, digests)?)?;
    let rows: Vec<Vec<f64>> = from_value(path, value)?;
    let n = rows.len();
    check_shape(path, "matrix", &rows, n, n)?;
    Ok(to_matrix(&rows, n))
}

/// A labelled table: header labels (label column excluded), row labels and values.
struct Table {
    columns: Vec<String>,
    rows: Vec<String>,
    values: Vec<Vec<f64>>,
}

fn check_unique(path: &str, labels: &[String], in_header: bool) -> Result<(), FileError> {
    let mut seen = HashSet::new();
    for (i, label) in labels.iter().enumerate() {
        if !seen.insert(label) {
            let (row, column) = if in_header {
                (None, Some(i + 1))
            } else {
                (Some(i + 1), None)
            };
            return Err(parse_error(path, row, column, format!("duplicate label {label:?}")));
        }
    }
    Ok(())
}

fn read_table(path: &Path, digests: &mut Digests) -> Result<Table, FileError> {
    let name = path.display().to_string();
    let bytes = fs::read(path).map_err(|source| FileError::Io {
        path: name.clone(),
        source,
    })?;
    digests.record(&name, &bytes);
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(bytes.as_slice());
    let mut records = reader.records();
    let csv_error = |e: csv::Error| parse_error(&name, None, None, e.to_string());
    let header = match records.next() {
        Some(r) => r.map_err(csv_error)?,
        None => return Err(parse_error(&name, None, None, "empty file")),
    };
    let columns: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    check_unique(&name, &columns, true)?;

    let (mut rows, mut values) = (Vec::new(), Vec::new());
    for (i, record) in records.enumerate() {
        let record = record.map_err(csv_error)?;
        let row = i + 1;
        if record.iter().all(str::is_empty) {
            continue;
        }
        let n_values = record.len().saturating_sub(1);
        if n_values != columns.len() {
            return Err(parse_error(
                &name,
                Some(row),
                Some(n_values.min(columns.len()) + 1),
                format!("{n_values} values but the header has {} labels", columns.len()),
            ));
        }
        let mut parsed = Vec::with_capacity(n_values);
        for (j, cell) in record.iter().skip(1).enumerate() {
            let x: f64 = cell
                .parse()
                .map_err(|_| parse_error(&name, Some(row), Some(j + 1), format!("not a number: {cell:?}")))?;
            parsed.push(x);
        }
        rows.push(record[0].to_string());
        values.push(parsed);
    }
    check_unique(&name, &rows, false)?;
    Ok(Table { columns, rows, values })
}

fn load_csv_dir(dir: &Path, digests: &mut Digests) -> Result<InputFile, FileError> {
    let b_path = dir.join("B.csv");
    if b_path.exists() {
        let b = read_table(&b_path, digests)?;
        let q_path = dir.join("Q.csv");
        let q = read_table(&q_path, digests)?;
        let q_name = q_path.display().to_string();
        if q.rows != b.rows {
            return Err(parse_error(&q_name, None, None, "row labels differ from B.csv"));
        }
        if q.columns != b.rows && !(q.columns.len() == 1 && b.rows.contains(&q.columns[0])) {
            return Err(parse_error(
                &q_name,
                None,
                None,
                "header must list the signals of B.csv",
            ));
        }
        return Ok(InputFile::Landscape(LandscapeFile {
            states: b.columns,
            signals: b.rows,
            b: b.values,
            q: q.values,
        }));
    }
    let i = read_table(&dir.join("I.csv"), digests)?;
    let prior_path = dir.join("prior.csv");
    let prior = read_table(&prior_path, digests)?;
    if prior.rows != i.rows || prior.columns.len() != 1 {
        return Err(parse_error(
            &prior_path.display().to_string(),
            None,
            None,
            "expected one prior column with the states of I.csv as row labels",
        ));
    }
    Ok(InputFile::Environment(EnvironmentFile {
        states: i.rows,
        signals: i.columns,
        prior: prior.values.into_iter().map(|r| r[0]).collect(),
        structure: i.values,
    }))
}

/// Rounds to 12 significant digits; `-0` becomes `0`.
pub fn round12(x: f64) -> f64 {
    let r: f64 = format!("{x:.11e}").parse().unwrap_or(x);
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

/// Replaces every number with its 12-digit rounding; non-finite numbers become `null`.
pub fn canonicalize(value: Value) -> Value {
    match value {
        Value::Number(n) if !(n.is_i64() || n.is_u64()) => n
            .as_f64()
            .and_then(|x| serde_json::Number::from_f64(round12(x)))
            .map_or(Value::Null, Value::Number),
        Value::Array(items) => Value::Array(items.into_iter().map(canonicalize).collect()),
        Value::Object(map) => Value::Object(map.into_iter().map(|(k, v)| (k, canonicalize(v))).collect()),
        other => other,
    }
}

/// Pretty JSON with sorted keys and 12-digit numbers, newline terminated.
pub fn to_canonical_json<T: Serialize>(value: &T) -> String {
    let value = canonicalize(serde_json::to_value(value).expect("serializable"));
    let mut text = serde_json::to_string_pretty(&value).expect("serializable");
    text.push('\n');
    text
}

fn number_text(x: f64) -> String {
    serde_json::Number::from_f64(round12(x)).map_or_else(|| x.to_string(), |n| n.to_string())
}

fn write_table(
    path: &Path,
    corner: &str,
    columns: &[String],
    rows: &[String],
    values: &[Vec<f64>],
) -> Result<(), FileError> {
    let name = path.display().to_string();
    let io = |e: csv::Error| parse_error(&name, None, None, e.to_string());
    let mut writer = csv::Writer::from_path(path).map_err(io)?;
    writer
        .write_record(std::iter::once(corner).chain(columns.iter().map(String::as_str)))
        .map_err(io)?;
    for (label, row) in rows.iter().zip(values) {
        let cells: Vec<String> = std::iter::once(label.clone())
            .chain(row.iter().map(|&x| number_text(x)))
            .collect();
        writer.write_record(&cells).map_err(io)?;
    }
    writer.flush().map_err(|source| FileError::Io { path: name, source })
}

/// Output formats for [`save`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

impl Format {
    /// CSV for directories and extension-less paths, JSON otherwise.
    pub fn for_path(path: &str) -> Self {
        let p = Path::new(path);
        if path != "-" && (p.is_dir() || p.extension().is_none()) {
            Format::Csv
        } else {
            Format::Json
        }
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), FileError> {
    fs::write(path, text).map_err(|source| FileError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn ensure_dir(dir: &Path) -> Result<PathBuf, FileError> {
    fs::create_dir_all(dir).map_err(|source| FileError::Io {
        path: dir.display().to_string(),
        source,
    })?;
    Ok(dir.to_path_buf())
}

pub fn save(path: &str, file: &InputFile, format: Format) -> Result<(), FileError> {
    match (format, file) {
        (Format::Json, InputFile::Landscape(f)) => write_file(Path::new(path), &to_canonical_json(f)),
        (Format::Json, InputFile::Environment(f)) => write_file(Path::new(path), &to_canonical_json(f)),
        (Format::Csv, InputFile::Landscape(f)) => {
            let dir = ensure_dir(Path::new(path))?;
            write_table(&dir.join("B.csv"), "signal", &f.states, &f.signals, &f.b)?;
            write_table(&dir.join("Q.csv"), "signal", &f.signals, &f.signals, &f.q)
        }
        (Format::Csv, InputFile::Environment(f)) => {
            let dir = ensure_dir(Path::new(path))?;
            write_table(&dir.join("I.csv"), "state", &f.signals, &f.states, &f.structure)?;
            let prior: Vec<Vec<f64>> = f.prior.iter().map(|&x| vec![x]).collect();
            write_table(
                &dir.join("prior.csv"),
                "state",
                &["prior".to_string()],
                &f.states,
                &prior,
            )
        }
    }
}
