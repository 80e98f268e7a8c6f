//! Tabular output as CSV or JSON records.

use serde_json::{Map, Value};

use crate::units::{round9, sig9};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Number(f64),
    Integer(i64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Number(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Integer(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl Cell {
    fn text(&self) -> String {
        match self {
            Cell::Number(v) => sig9(*v),
            Cell::Integer(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Number(v) => serde_json::Number::from_f64(round9(*v)).map_or(Value::Null, Value::Number),
            Cell::Integer(v) => Value::from(*v),
            Cell::Text(s) => Value::from(s.as_str()),
        }
    }
}

/// Rows under a fixed header. Numbers are written with nine significant digits.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: AsRef<str>>(headers: &[S]) -> Self {
        Self {
            headers: headers.iter().map(|h| h.as_ref().to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.headers.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.headers).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::text)).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
    }

    /// Array of objects keyed by header, in header order.
    pub fn to_json_value(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|row| {
                    let obj: Map<String, Value> = self.headers.iter().cloned().zip(row.iter().map(Cell::json)).collect();
                    Value::Object(obj)
                })
                .collect(),
        )
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_json_value()).expect("json values serialise");
        s.push('\n');
        s
    }

    /// Numeric column by header name; non-numbers read as NaN.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.headers.iter().position(|h| h == name)?;
        Some(
            self.rows
                .iter()
                .map(|r| match r[k] {
                    Cell::Number(v) => v,
                    Cell::Integer(v) => v as f64,
                    Cell::Text(_) => f64::NAN,
                })
                .collect(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_and_json_agree() {
        let mut t = Table::new(&["a", "b", "name"]);
        t.push(vec![1.0.into(), Cell::Number(1.0 / 3.0), "x".into()]);
        t.push(vec![2usize.into(), Cell::Number(f64::NAN), "y,z".into()]);
        let csv = t.to_csv();
        assert_eq!(csv.lines().next(), Some("a,b,name"));
        assert!(csv.contains("1.00000000e0,3.33333333e-1,x"));
        assert!(csv.contains("\"y,z\""));
        let json = t.to_json_value();
        assert_eq!(json[0]["b"], serde_json::json!(0.333333333));
        assert_eq!(json[1]["b"], Value::Null);
        let keys: Vec<&String> = json[0].as_object().unwrap().keys().collect();
        assert_eq!(keys, ["a", "b", "name"]);
        assert_eq!(t.column("a").unwrap(), vec![1.0, 2.0]);
    }
}
