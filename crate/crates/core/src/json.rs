//! JSON helpers for complex scalars, vectors and matrices.
//!
//! Complex numbers are written as two-element arrays `[re, im]`. Decoders take
//! the dotted path of the value being read so that errors name the offending
//! field.

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64};

pub fn scalar_to_json(z: C64) -> Value {
    json!([z.re, z.im])
}

pub fn vector_to_json(v: &[C64]) -> Value {
    Value::Array(v.iter().map(|&z| scalar_to_json(z)).collect())
}

pub fn matrix_to_json(m: &ComplexMatrix) -> Value {
    Value::Array(
        (0..m.rows())
            .map(|i| vector_to_json(m.row(i)))
            .collect(),
    )
}

pub fn field<'a>(obj: &'a Value, name: &str, path: &str) -> Result<&'a Value> {
    let full = join(path, name);
    obj.as_object()
        .ok_or_else(|| Error::parse(path_or_root(path), "expected a JSON object"))?
        .get(name)
        .ok_or_else(|| Error::parse(full, "missing field"))
}

pub fn usize_field(obj: &Value, name: &str, path: &str) -> Result<usize> {
    let v = field(obj, name, path)?;
    v.as_u64()
        .map(|x| x as usize)
        .ok_or_else(|| Error::parse(join(path, name), "expected a non-negative integer"))
}

pub fn f64_field(obj: &Value, name: &str, path: &str) -> Result<f64> {
    let v = field(obj, name, path)?;
    number(v, &join(path, name))
}

pub fn number(v: &Value, path: &str) -> Result<f64> {
    let x = v
        .as_f64()
        .ok_or_else(|| Error::parse(path, "expected a number"))?;
    if !x.is_finite() {
        return Err(Error::parse(path, "number is not finite"));
    }
    Ok(x)
}

pub fn array<'a>(v: &'a Value, path: &str) -> Result<&'a Vec<Value>> {
    v.as_array()
        .ok_or_else(|| Error::parse(path, "expected an array"))
}

/// Accepts `[re, im]` or a bare real number.
pub fn scalar_from_json(v: &Value, path: &str) -> Result<C64> {
    if v.is_number() {
        return Ok(C64::new(number(v, path)?, 0.0));
    }
    let pair = array(v, path)?;
    if pair.len() != 2 {
        return Err(Error::parse(
            path,
            format!("expected [re, im], got {} elements", pair.len()),
        ));
    }
    Ok(C64::new(
        number(&pair[0], &format!("{path}[0]"))?,
        number(&pair[1], &format!("{path}[1]"))?,
    ))
}

pub fn vector_from_json(v: &Value, path: &str) -> Result<Vec<C64>> {
    array(v, path)?
        .iter()
        .enumerate()
        .map(|(i, z)| scalar_from_json(z, &format!("{path}[{i}]")))
        .collect()
}

/// Decodes a matrix given as an array of rows. When `shape` is given the
/// result must match it.
pub fn matrix_from_json(v: &Value, path: &str, shape: Option<(usize, usize)>) -> Result<ComplexMatrix> {
    let rows = array(v, path)?;
    if rows.is_empty() {
        return Err(Error::parse(path, "matrix has no rows"));
    }
    let mut data = Vec::new();
    let mut width = None;
    for (i, row) in rows.iter().enumerate() {
        let rp = format!("{path}[{i}]");
        let r = vector_from_json(row, &rp)?;
        match width {
            None => width = Some(r.len()),
            Some(w) if w != r.len() => {
                return Err(Error::parse(rp, format!("row has {} entries, expected {w}", r.len())))
            }
            _ => {}
        }
        data.extend(r);
    }
    let cols = width.unwrap_or(0);
    if cols == 0 {
        return Err(Error::parse(path, "matrix has no columns"));
    }
    if let Some((r, c)) = shape {
        if (rows.len(), cols) != (r, c) {
            return Err(Error::parse(
                path,
                format!("expected a {r}x{c} matrix, got {}x{cols}", rows.len()),
            ));
        }
    }
    ComplexMatrix::new(rows.len(), cols, data).map_err(|e| Error::parse(path, e))
}

fn join(path: &str, name: &str) -> String {
    if path.is_empty() {
        name.to_string()
    } else {
        format!("{path}.{name}")
    }
}

fn path_or_root(path: &str) -> &str {
    if path.is_empty() {
        "<root>"
    } else {
        path
    }
}
