//! Graph JSON documents.
//!
//! ```json
//! {"vertices": [0, 1, 2, 3],
//!  "edges": [[0, 1, "e0"], [1, 2, "e1"], [0, 3, "e2"], [3, 2, "e3"]],
//!  "entry": 0, "exit": 2,
//!  "coins": {"0": "grover", "1": "free", "3": {"r": [-0.6, 0], "t": [0.8, 0]},
//!            "2": {"matrix": [[[re, im], ...], ...]}}}
//! ```
//!
//! Coins are `"grover"`, `"free"`, `{"r": c, "t": c}` or `{"matrix": rows}`,
//! where a complex number `c` is `[re, im]` or a bare real. Matrix rows and
//! columns follow the vertex slot order (tail first, then internal edges by
//! `(neighbor id, edge id)`). Vertices without an entry default to Grover.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde_json::{json, Map, Value};

use crate::coin::CoinSpec;
use crate::error::{Error, Result};
use crate::graph::{Edge, Graph, VertexId};

/// Parsed but not yet validated graph description.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphDocument {
    pub vertices: Vec<VertexId>,
    pub edges: Vec<Edge>,
    pub entry: VertexId,
    pub exit: VertexId,
    pub coins: BTreeMap<VertexId, CoinSpec>,
}

fn int_at(v: &Value, ptr: &str) -> Result<VertexId> {
    v.as_i64()
        .ok_or_else(|| Error::schema(ptr, format!("expected an integer vertex id, found {v}")))
}

fn complex_at(v: &Value, ptr: &str) -> Result<Complex64> {
    let finite = |x: f64, p: String| {
        if x.is_finite() {
            Ok(x)
        } else {
            Err(Error::schema(p, "not a finite number"))
        }
    };
    match v {
        Value::Number(n) => Ok(Complex64::new(
            finite(n.as_f64().unwrap_or(f64::NAN), ptr.to_string())?,
            0.0,
        )),
        Value::Array(parts) if parts.len() == 2 => {
            let re = parts[0]
                .as_f64()
                .ok_or_else(|| Error::schema(format!("{ptr}/0"), "expected a number"))?;
            let im = parts[1]
                .as_f64()
                .ok_or_else(|| Error::schema(format!("{ptr}/1"), "expected a number"))?;
            Ok(Complex64::new(
                finite(re, format!("{ptr}/0"))?,
                finite(im, format!("{ptr}/1"))?,
            ))
        }
        _ => Err(Error::schema(
            ptr,
            "expected a complex number [re, im] or a real number",
        )),
    }
}

fn coin_at(v: &Value, ptr: &str) -> Result<CoinSpec> {
    match v {
        Value::String(name) => match name.as_str() {
            "grover" => Ok(CoinSpec::Grover),
            "free" => Ok(CoinSpec::Free),
            other => Err(Error::schema(
                ptr,
                format!("unknown coin {other:?} (expected \"grover\", \"free\", {{\"r\",\"t\"}} or {{\"matrix\"}})"),
            )),
        },
        Value::Object(obj) => {
            if let Some(rows) = obj.get("matrix") {
                reject_extra_keys(obj, &["matrix"], ptr)?;
                let mptr = format!("{ptr}/matrix");
                let rows = rows
                    .as_array()
                    .ok_or_else(|| Error::schema(&mptr, "expected an array of rows"))?;
                let n = rows.len();
                if n == 0 {
                    return Err(Error::schema(&mptr, "matrix is empty"));
                }
                let mut data = Vec::with_capacity(n * n);
                for (i, row) in rows.iter().enumerate() {
                    let rptr = format!("{mptr}/{i}");
                    let row = row
                        .as_array()
                        .ok_or_else(|| Error::schema(&rptr, "expected an array"))?;
                    if row.len() != n {
                        return Err(Error::schema(
                            &rptr,
                            format!("row has {} entries, matrix must be {n}x{n}", row.len()),
                        ));
                    }
                    for (j, x) in row.iter().enumerate() {
                        data.push(complex_at(x, &format!("{rptr}/{j}"))?);
                    }
                }
                Ok(CoinSpec::CustomMatrix(DMatrix::from_row_slice(n, n, &data)))
            } else if obj.contains_key("r") || obj.contains_key("t") {
                reject_extra_keys(obj, &["r", "t"], ptr)?;
                let get = |key: &str| {
                    obj.get(key)
                        .ok_or_else(|| Error::schema(format!("{ptr}/{key}"), "missing"))
                        .and_then(|x| complex_at(x, &format!("{ptr}/{key}")))
                };
                Ok(CoinSpec::EqualTransmission {
                    r: get("r")?,
                    t: get("t")?,
                })
            } else {
                Err(Error::schema(ptr, "coin object needs \"matrix\" or \"r\" and \"t\""))
            }
        }
        _ => Err(Error::schema(ptr, "expected a coin name or object")),
    }
}

fn reject_extra_keys(obj: &Map<String, Value>, allowed: &[&str], ptr: &str) -> Result<()> {
    match obj.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(Error::schema(format!("{ptr}/{k}"), "unknown field")),
        None => Ok(()),
    }
}

impl GraphDocument {
    pub fn from_json(text: &str) -> Result<GraphDocument> {
        let root: Value = serde_json::from_str(text)
            .map_err(|e| Error::schema(format!("line {} column {}", e.line(), e.column()), e.to_string()))?;
        Self::from_value(&root)
    }

    pub fn from_value(root: &Value) -> Result<GraphDocument> {
        let obj = root
            .as_object()
            .ok_or_else(|| Error::schema("", "expected a JSON object"))?;
        reject_extra_keys(obj, &["vertices", "edges", "entry", "exit", "coins"], "")?;
        let field = |key: &str| {
            obj.get(key)
                .ok_or_else(|| Error::schema(format!("/{key}"), "missing required field"))
        };

        let vertices = field("vertices")?
            .as_array()
            .ok_or_else(|| Error::schema("/vertices", "expected an array"))?
            .iter()
            .enumerate()
            .map(|(i, v)| int_at(v, &format!("/vertices/{i}")))
            .collect::<Result<Vec<_>>>()?;

        let edges = field("edges")?
            .as_array()
            .ok_or_else(|| Error::schema("/edges", "expected an array"))?
            .iter()
            .enumerate()
            .map(|(i, e)| {
                let ptr = format!("/edges/{i}");
                let parts = e
                    .as_array()
                    .filter(|p| p.len() == 3)
                    .ok_or_else(|| Error::schema(&ptr, "expected [vertex, vertex, \"id\"]"))?;
                let id = parts[2]
                    .as_str()
                    .ok_or_else(|| Error::schema(format!("{ptr}/2"), "expected a string edge id"))?;
                Ok(Edge {
                    a: int_at(&parts[0], &format!("{ptr}/0"))?,
                    b: int_at(&parts[1], &format!("{ptr}/1"))?,
                    id: id.to_string(),
                })
            })
            .collect::<Result<Vec<_>>>()?;

        let entry = int_at(field("entry")?, "/entry")?;
        let exit = int_at(field("exit")?, "/exit")?;

        let mut coins = BTreeMap::new();
        if let Some(c) = obj.get("coins") {
            let c = c
                .as_object()
                .ok_or_else(|| Error::schema("/coins", "expected an object keyed by vertex id"))?;
            for (key, spec) in c {
                let ptr = format!("/coins/{key}");
                let v: VertexId = key
                    .parse()
                    .map_err(|_| Error::schema(&ptr, "key is not an integer vertex id"))?;
                if coins.insert(v, coin_at(spec, &ptr)?).is_some() {
                    return Err(Error::schema(&ptr, "duplicate coin for this vertex"));
                }
            }
        }

        Ok(GraphDocument {
            vertices,
            edges,
            entry,
            exit,
            coins,
        })
    }

    /// Validates the document into a [`Graph`].
    pub fn build(self) -> Result<Graph> {
        Graph::new(self.vertices, self.edges, self.entry, self.exit, self.coins)
    }

    pub fn to_value(&self) -> Value {
        let cplx = |z: &Complex64| json!([z.re, z.im]);
        let coins: Map<String, Value> = self
            .coins
            .iter()
            .map(|(v, spec)| {
                let value = match spec {
                    CoinSpec::Grover => json!("grover"),
                    CoinSpec::Free => json!("free"),
                    CoinSpec::EqualTransmission { r, t } => json!({"r": cplx(r), "t": cplx(t)}),
                    CoinSpec::CustomMatrix(m) => {
                        let rows: Vec<Value> = m
                            .row_iter()
                            .map(|row| Value::Array(row.iter().map(cplx).collect()))
                            .collect();
                        json!({ "matrix": rows })
                    }
                };
                (v.to_string(), value)
            })
            .collect();
        json!({
            "vertices": self.vertices,
            "edges": self.edges.iter().map(|e| json!([e.a, e.b, e.id])).collect::<Vec<_>>(),
            "entry": self.entry,
            "exit": self.exit,
            "coins": coins,
        })
    }
}

impl Graph {
    /// Parses and validates a graph document.
    pub fn from_json(text: &str) -> Result<Graph> {
        GraphDocument::from_json(text)?.build()
    }
}
