//! JSON bundle holding all three coefficients:
//! `{"n": 2, "M": [[[re, im], ...], ...], "C": ..., "K": ...}`.
//!
//! Each matrix is row-major, either nested by rows or as a flat list of
//! `n²` entries. An entry is `[re, im]` or a bare real number.

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::linearization::QuadPencil;
use crate::matrix::{ComplexMatrix, C64};

/// Shape errors have no useful source position and report line 0.
fn shape(msg: String) -> Error {
    Error::Parse {
        line: 0,
        col: 0,
        msg,
    }
}

fn entry(v: &Value) -> Option<C64> {
    match v {
        Value::Number(x) => Some(C64::new(x.as_f64()?, 0.0)),
        Value::Array(a) if a.len() == 2 => Some(C64::new(a[0].as_f64()?, a[1].as_f64()?)),
        _ => None,
    }
}

fn matrix(name: &str, v: &Value, n: usize) -> Result<ComplexMatrix> {
    let items = v
        .as_array()
        .ok_or_else(|| shape(format!("{name} must be an array")))?;
    if items.len() == n * n {
        if let Some(flat) = items.iter().map(entry).collect::<Option<Vec<_>>>() {
            return ComplexMatrix::from_row_major(n, n, &flat);
        }
    }
    if items.len() != n {
        return Err(shape(format!(
            "{name} has {} rows, expected {n} (or {} flat entries)",
            items.len(),
            n * n
        )));
    }
    let mut data = Vec::with_capacity(n * n);
    for (i, row) in items.iter().enumerate() {
        let row = row
            .as_array()
            .ok_or_else(|| shape(format!("{name} row {i} is not an array")))?;
        if row.len() != n {
            return Err(shape(format!(
                "{name} row {i} has {} entries, expected {n}",
                row.len()
            )));
        }
        for (j, z) in row.iter().enumerate() {
            data.push(entry(z).ok_or_else(|| {
                shape(format!("{name}[{i}][{j}] is not a number or [re, im] pair"))
            })?);
        }
    }
    ComplexMatrix::from_row_major(n, n, &data)
}

pub fn parse_bundle(text: &str) -> Result<QuadPencil> {
    let v: Value = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        col: e.column(),
        msg: e.to_string(),
    })?;
    let n = v
        .get("n")
        .and_then(Value::as_u64)
        .ok_or_else(|| shape("missing or invalid \"n\"".into()))? as usize;
    let get = |name: &str| {
        v.get(name)
            .ok_or_else(|| shape(format!("missing \"{name}\"")))
    };
    let m = matrix("M", get("M")?, n)?;
    let c = matrix("C", get("C")?, n)?;
    let k = matrix("K", get("K")?, n)?;
    QuadPencil::new(m, c, k)
}

fn rows(a: &ComplexMatrix) -> Value {
    let r: Vec<Value> = (0..a.rows())
        .map(|i| Value::Array(a.row(i).iter().map(|z| json!([z.re, z.im])).collect()))
        .collect();
    Value::Array(r)
}

/// Nested form; serde_json prints doubles so that they parse back exactly.
pub fn bundle_string(p: &QuadPencil) -> String {
    let v = json!({ "n": p.n(), "M": rows(p.m()), "C": rows(p.c()), "K": rows(p.k()) });
    serde_json::to_string_pretty(&v).expect("json values serialize")
}
