//! Deterministic CSV and JSON rendering.

use num_complex::Complex64;
use serde::ser::{Serialize, SerializeMap, Serializer};
use serde_json::Value;

/// 17 significant digits, enough to round-trip any `f64`.
pub fn sci(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn complex(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

#[derive(Debug, Clone, Copy)]
pub enum Cell {
    Int(u64),
    Float(f64),
}

impl Cell {
    fn csv(self) -> String {
        match self {
            Cell::Int(n) => n.to_string(),
            Cell::Float(x) => sci(x),
        }
    }

    fn json(self) -> Value {
        match self {
            Cell::Int(n) => Value::from(n),
            Cell::Float(x) => serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number),
        }
    }
}

/// A column-ordered numeric table.
#[derive(Debug, Clone)]
pub struct Table {
    columns: Vec<&'static str>,
    rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Table {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|c| c.csv()).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    /// `{"columns": [...], "rows": [[...], ...]}`, which keeps column order.
    pub fn to_json(&self) -> String {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| Value::Array(r.iter().map(|c| c.json()).collect()))
            .collect();
        let value = serde_json::json!({ "columns": self.columns, "rows": rows });
        to_json_string(&value)
    }
}

/// Pretty JSON with a trailing newline.
pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report values serialize");
    s.push('\n');
    s
}

/// A JSON object written in insertion order.
#[derive(Debug, Clone, Default)]
pub struct OrderedMap<V>(pub Vec<(String, V)>);

impl<V: Serialize> Serialize for OrderedMap<V> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(sci(64.0 / 81.0), "7.9012345679012341e-1");
        assert_eq!(sci(0.0), "0.0000000000000000e0");
        assert_eq!(
            (64.0f64 / 81.0).to_bits(),
            sci(64.0 / 81.0).parse::<f64>().unwrap().to_bits()
        );
    }

    #[test]
    fn csv_and_json_layout() {
        let mut t = Table::new(&["n", "q"]);
        t.push(vec![Cell::Int(3), Cell::Float(0.5)]);
        assert_eq!(t.to_csv(), "n,q\n3,5.0000000000000000e-1\n");
        let v: Value = serde_json::from_str(&t.to_json()).unwrap();
        assert_eq!(v["columns"][1], "q");
        assert_eq!(v["rows"][0][1], 0.5);
    }

    #[test]
    fn ordered_map_keeps_insertion_order() {
        let m = OrderedMap(vec![("b".to_string(), 1), ("a".to_string(), 2)]);
        assert_eq!(serde_json::to_string(&m).unwrap(), r#"{"b":1,"a":2}"#);
    }
}
