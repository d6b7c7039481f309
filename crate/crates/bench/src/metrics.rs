//! Result tables written as CSV or JSON.
//!
//! Every command fixes its column list up front, so the header and column
//! order are stable for a given command and flag set. Rows with `rep = -1`
//! hold the mean over the replications of one method.

use std::fmt;

use serde_json::{Map, Number, Value as Json};

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Int(i64),
    UInt(u64),
    Float(f64),
    Text(String),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(v) => write!(f, "{v}"),
            Value::UInt(v) => write!(f, "{v}"),
            Value::Float(v) => write!(f, "{v:?}"),
            Value::Text(s) => f.write_str(s),
        }
    }
}

impl Value {
    fn as_f64(&self) -> Option<f64> {
        match *self {
            Value::Int(v) => Some(v as f64),
            Value::UInt(v) => Some(v as f64),
            Value::Float(v) => Some(v),
            Value::Text(_) => None,
        }
    }

    fn to_json(&self) -> Json {
        match self {
            Value::Int(v) => Json::from(*v),
            Value::UInt(v) => Json::from(*v),
            Value::Float(v) => Number::from_f64(*v).map_or(Json::Null, Json::Number),
            Value::Text(s) => Json::from(s.as_str()),
        }
    }
}

impl From<i64> for Value {
    fn from(v: i64) -> Self {
        Value::Int(v)
    }
}

impl From<usize> for Value {
    fn from(v: usize) -> Self {
        Value::Int(v as i64)
    }
}

impl From<u64> for Value {
    fn from(v: u64) -> Self {
        Value::UInt(v)
    }
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::Float(v)
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::Text(v.to_string())
    }
}

impl From<String> for Value {
    fn from(v: String) -> Self {
        Value::Text(v)
    }
}

/// Renders `key=value` pairs as `k1=v1;k2=v2`.
pub fn params(pairs: &[(&str, String)]) -> String {
    pairs.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(";")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    columns: Vec<String>,
    rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new<S: AsRef<str>>(columns: &[S]) -> Self {
        Self { columns: columns.iter().map(|c| c.as_ref().to_string()).collect(), rows: Vec::new() }
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<Value>] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Appends a row given as `(column, value)` pairs in any order.
    ///
    /// # Panics
    /// If a column is missing or unknown; that is a bug in the caller.
    pub fn push(&mut self, cells: Vec<(&str, Value)>) {
        assert_eq!(cells.len(), self.columns.len(), "row has {} cells, table has {} columns", cells.len(), self.columns.len());
        let mut row = Vec::with_capacity(self.columns.len());
        for col in &self.columns {
            let v = cells
                .iter()
                .find(|(c, _)| c == col)
                .unwrap_or_else(|| panic!("row is missing column {col}"))
                .1
                .clone();
            row.push(v);
        }
        self.rows.push(row);
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn get(&self, row: usize, column: &str) -> Option<&Value> {
        self.column_index(column).map(|c| &self.rows[row][c])
    }

    /// Appends one mean row per distinct `(method, params)` pair, averaging
    /// numeric columns over the rows added since `first_row`. Text columns
    /// are copied from the first matching row; `rep` becomes -1 and `seed`
    /// keeps the base seed.
    pub fn push_means(&mut self, first_row: usize) {
        let method = self.column_index("method").expect("table has a method column");
        let rep = self.column_index("rep").expect("table has a rep column");
        let seed = self.column_index("seed");
        let params = self.column_index("params");
        let key = |r: &Vec<Value>| (r[method].clone(), params.map(|p| r[p].clone()));
        let mut order = Vec::new();
        for r in &self.rows[first_row..] {
            if !order.contains(&key(r)) {
                order.push(key(r));
            }
        }
        let mut means = Vec::new();
        for k in order {
            let group: Vec<&Vec<Value>> = self.rows[first_row..].iter().filter(|r| key(r) == k).collect();
            let n = group.len() as f64;
            let mut row = group[0].clone();
            for (c, cell) in row.iter_mut().enumerate() {
                if c == rep {
                    *cell = Value::Int(-1);
                    continue;
                }
                if Some(c) == seed {
                    continue;
                }
                if let Value::Int(_) | Value::UInt(_) | Value::Float(_) = cell {
                    let vals: Option<Vec<f64>> = group.iter().map(|r| r[c].as_f64()).collect();
                    if let Some(vals) = vals {
                        *cell = Value::Float(vals.iter().sum::<f64>() / n);
                    }
                }
            }
            means.push(row);
        }
        self.rows.extend(means);
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(Vec::new());
        w.write_record(&self.columns).expect("writing to memory");
        for row in &self.rows {
            w.write_record(row.iter().map(|v| v.to_string())).expect("writing to memory");
        }
        String::from_utf8(w.into_inner().expect("flushing memory")).expect("CSV of UTF-8 fields")
    }

    pub fn to_json(&self) -> String {
        let rows: Vec<Json> = self
            .rows
            .iter()
            .map(|row| {
                let obj: Map<String, Json> = self.columns.iter().cloned().zip(row.iter().map(Value::to_json)).collect();
                Json::Object(obj)
            })
            .collect();
        let mut s = serde_json::to_string_pretty(&Json::Array(rows)).expect("serializing JSON");
        s.push('\n');
        s
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_quotes_per_rfc4180() {
        let mut t = Table::new(&["method", "rep", "note"]);
        t.push(vec![("rep", 0usize.into()), ("method", "a".into()), ("note", "x,\"y\"".into())]);
        assert_eq!(t.to_csv(), "method,rep,note\r\na,0,\"x,\"\"y\"\"\"\r\n");
    }

    #[test]
    fn means_per_method() {
        let mut t = Table::new(&["method", "rep", "err"]);
        for (m, r, e) in [("u", 0, 1.0), ("l", 0, 4.0), ("u", 1, 2.0), ("l", 1, 6.0)] {
            t.push(vec![("method", m.into()), ("rep", (r as usize).into()), ("err", e.into())]);
        }
        t.push_means(0);
        assert_eq!(t.len(), 6);
        assert_eq!(t.rows()[4], vec![Value::from("u"), Value::Int(-1), Value::Float(1.5)]);
        assert_eq!(t.rows()[5], vec![Value::from("l"), Value::Int(-1), Value::Float(5.0)]);
    }

    #[test]
    fn json_keys_follow_columns() {
        let mut t = Table::new(&["z", "a"]);
        t.push(vec![("a", f64::NAN.into()), ("z", 1usize.into())]);
        assert_eq!(t.to_json(), "[\n  {\n    \"z\": 1,\n    \"a\": null\n  }\n]\n");
    }

    #[test]
    fn floats_roundtrip() {
        assert_eq!(Value::Float(0.1).to_string(), "0.1");
        assert_eq!(Value::Float(1e-12).to_string(), "1e-12");
        assert_eq!(Value::Float(3.0).to_string(), "3.0");
    }
}
