use std::fmt;

use serde_json::{Map, Number, Value as Json};

use crate::error::{Error, Result};

/// One cell of an experiment record.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Float(f64),
    Int(i64),
    Bool(bool),
    Text(String),
    Empty,
}

impl fmt::Display for Value {
    /// Floats use the shortest representation that parses back to the same
    /// bits, always with a decimal point or exponent.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Float(x) => write!(f, "{x:?}"),
            Value::Int(i) => write!(f, "{i}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Text(s) => f.write_str(s),
            Value::Empty => Ok(()),
        }
    }
}

impl Value {
    /// Inverse of the `Display` form.
    fn parse(cell: &str) -> Value {
        if cell.is_empty() {
            return Value::Empty;
        }
        match cell {
            "true" => return Value::Bool(true),
            "false" => return Value::Bool(false),
            "inf" => return Value::Float(f64::INFINITY),
            "-inf" => return Value::Float(f64::NEG_INFINITY),
            "NaN" => return Value::Float(f64::NAN),
            _ => {}
        }
        if let Ok(i) = cell.parse::<i64>() {
            return Value::Int(i);
        }
        let numeric = cell
            .chars()
            .all(|c| c.is_ascii_digit() || matches!(c, '.' | 'e' | 'E' | '-' | '+'));
        match cell.parse::<f64>() {
            Ok(x) if numeric => Value::Float(x),
            _ => Value::Text(cell.to_string()),
        }
    }

    fn to_json(&self) -> Json {
        match self {
            Value::Float(x) => match Number::from_f64(*x) {
                Some(n) => Json::Number(n),
                None => Json::String(format!("{x:?}")),
            },
            Value::Int(i) => Json::from(*i),
            Value::Bool(b) => Json::Bool(*b),
            Value::Text(s) => Json::String(s.clone()),
            Value::Empty => Json::Null,
        }
    }

    fn from_json(v: &Json) -> Result<Value> {
        Ok(match v {
            Json::Null => Value::Empty,
            Json::Bool(b) => Value::Bool(*b),
            Json::Number(n) => match n.as_i64() {
                Some(i) if !n.is_f64() => Value::Int(i),
                _ => Value::Float(
                    n.as_f64()
                        .ok_or_else(|| Error::Serialization(format!("number {n} out of range")))?,
                ),
            },
            Json::String(s) => match s.as_str() {
                "inf" | "-inf" | "NaN" => Value::parse(s),
                _ => Value::Text(s.clone()),
            },
            other => return Err(Error::Serialization(format!("nested value {other} in record"))),
        })
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Float(x) => Some(*x),
            Value::Int(i) => Some(*i as f64),
            _ => None,
        }
    }
}

impl From<f64> for Value {
    fn from(x: f64) -> Self {
        Value::Float(x)
    }
}

impl From<usize> for Value {
    fn from(i: usize) -> Self {
        Value::Int(i as i64)
    }
}

impl From<bool> for Value {
    fn from(b: bool) -> Self {
        Value::Bool(b)
    }
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::Text(s.to_string())
    }
}

impl From<String> for Value {
    fn from(s: String) -> Self {
        Value::Text(s)
    }
}

impl<T: Into<Value>> From<Option<T>> for Value {
    fn from(v: Option<T>) -> Self {
        v.map_or(Value::Empty, Into::into)
    }
}

/// An ordered list of named cells: sweep coordinates first, then observables.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExperimentRecord {
    fields: Vec<(String, Value)>,
}

impl ExperimentRecord {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends a column, replacing any existing one with the same name.
    pub fn with(mut self, column: &str, value: impl Into<Value>) -> Self {
        self.set(column, value);
        self
    }

    pub fn set(&mut self, column: &str, value: impl Into<Value>) {
        let value = value.into();
        match self.fields.iter_mut().find(|(c, _)| c == column) {
            Some(slot) => slot.1 = value,
            None => self.fields.push((column.to_string(), value)),
        }
    }

    pub fn get(&self, column: &str) -> Option<&Value> {
        self.fields.iter().find(|(c, _)| c == column).map(|(_, v)| v)
    }

    pub fn float(&self, column: &str) -> Option<f64> {
        self.get(column).and_then(Value::as_f64)
    }

    pub fn columns(&self) -> impl Iterator<Item = &str> {
        self.fields.iter().map(|(c, _)| c.as_str())
    }

    pub fn values(&self) -> impl Iterator<Item = &Value> {
        self.fields.iter().map(|(_, v)| v)
    }

    fn same_columns(&self, other: &ExperimentRecord) -> bool {
        self.columns().eq(other.columns())
    }
}

fn csv_error(e: impl fmt::Display) -> Error {
    Error::Serialization(e.to_string())
}

/// Comma-separated table with a header row. All records must share the same
/// columns in the same order.
pub fn to_csv(records: &[ExperimentRecord]) -> Result<String> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    if let Some(first) = records.first() {
        w.write_record(first.columns()).map_err(csv_error)?;
        for (i, rec) in records.iter().enumerate() {
            if !rec.same_columns(first) {
                return Err(Error::Serialization(format!(
                    "record {i} has different columns from the header"
                )));
            }
            w.write_record(rec.values().map(ToString::to_string))
                .map_err(csv_error)?;
        }
    }
    let bytes = w.into_inner().map_err(csv_error)?;
    String::from_utf8(bytes).map_err(csv_error)
}

pub fn from_csv(text: &str) -> Result<Vec<ExperimentRecord>> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let header: Vec<String> = r.headers().map_err(csv_error)?.iter().map(String::from).collect();
    let mut out = Vec::new();
    for row in r.records() {
        let row = row.map_err(csv_error)?;
        let fields = header
            .iter()
            .zip(row.iter())
            .map(|(c, cell)| (c.clone(), Value::parse(cell)))
            .collect();
        out.push(ExperimentRecord { fields });
    }
    Ok(out)
}

/// Array of flat objects, keys in column order.
pub fn to_json(records: &[ExperimentRecord]) -> Result<String> {
    let array: Vec<Json> = records
        .iter()
        .map(|rec| {
            let obj: Map<String, Json> = rec.fields.iter().map(|(c, v)| (c.clone(), v.to_json())).collect();
            Json::Object(obj)
        })
        .collect();
    let mut text = serde_json::to_string_pretty(&array).map_err(csv_error)?;
    text.push('\n');
    Ok(text)
}

pub fn from_json(text: &str) -> Result<Vec<ExperimentRecord>> {
    let array: Vec<Map<String, Json>> = serde_json::from_str(text).map_err(csv_error)?;
    array
        .iter()
        .map(|obj| {
            let fields = obj
                .iter()
                .map(|(c, v)| Ok((c.clone(), Value::from_json(v)?)))
                .collect::<Result<_>>()?;
            Ok(ExperimentRecord { fields })
        })
        .collect()
}
