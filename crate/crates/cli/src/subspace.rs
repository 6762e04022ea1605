//! Subspace files: a JSON array of basis vectors, or `{"basis": [...]}`.

use std::path::Path;

use conedual::{EuclideanSpace, Subspace};
use nalgebra::{DMatrix, DVector};
use serde_json::Value;

/// Gram-Schmidt in the given order; returns the basis and the largest
/// change to any input vector.
fn orthonormalize(vectors: &[DVector<f64>]) -> Result<(DMatrix<f64>, f64), String> {
    let n = vectors.first().map_or(0, |v| v.len());
    let mut cols: Vec<DVector<f64>> = Vec::new();
    let mut adjusted: f64 = 0.0;
    for (i, v) in vectors.iter().enumerate() {
        let mut u = v.clone();
        for q in &cols {
            u -= q * q.dot(&u);
        }
        let norm = u.norm();
        if norm <= 1e-9 * (1.0 + v.norm()) {
            return Err(format!("basis vector {i} is linearly dependent on the previous ones"));
        }
        u /= norm;
        adjusted = adjusted.max((&u - v).amax());
        cols.push(u);
    }
    let mut m = DMatrix::zeros(n, cols.len());
    for (j, c) in cols.iter().enumerate() {
        m.set_column(j, c);
    }
    Ok((m, adjusted))
}

pub fn parse(v: &Value, ambient: &EuclideanSpace) -> Result<Subspace, String> {
    let items = match v {
        Value::Array(a) => a,
        Value::Object(o) => o
            .get("basis")
            .and_then(Value::as_array)
            .ok_or("subspace: expected an array of vectors or {\"basis\": [...]}")?,
        _ => return Err("subspace: expected an array of vectors or {\"basis\": [...]}".into()),
    };
    let n = ambient.dim();
    let mut vectors = Vec::with_capacity(items.len());
    for (i, item) in items.iter().enumerate() {
        let arr = item.as_array().ok_or(format!("basis[{i}]: expected an array"))?;
        if arr.len() != n {
            return Err(format!("basis[{i}]: expected {n} entries (dim space_x), found {}", arr.len()));
        }
        let vals: Option<Vec<f64>> = arr.iter().map(Value::as_f64).collect();
        let vals = vals.ok_or(format!("basis[{i}]: expected numbers"))?;
        vectors.push(DVector::from_vec(vals));
    }
    if vectors.is_empty() {
        return Ok(Subspace::zero(ambient));
    }
    let (basis, adjusted) = orthonormalize(&vectors)?;
    if adjusted > 1e-9 {
        eprintln!("warning: subspace basis orthonormalized (largest change {adjusted:.3e})");
    }
    Subspace::from_orthonormal(ambient, basis, 1e-9).map_err(|e| e.to_string())
}

pub fn load(path: &Path, ambient: &EuclideanSpace) -> Result<Subspace, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let v: Value = serde_json::from_str(&text).map_err(|e| format!("{}: invalid JSON: {e}", path.display()))?;
    parse(&v, ambient)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn coordinate_axes_are_kept() {
        let s = parse(&json!([[1, 0, 0], [0, 1, 0]]), &EuclideanSpace::real(3)).unwrap();
        assert_eq!(s.basis().column(0).as_slice(), &[1.0, 0.0, 0.0]);
        assert_eq!(s.basis().column(1).as_slice(), &[0.0, 1.0, 0.0]);
    }

    #[test]
    fn dependent_vectors_are_rejected() {
        let e = parse(&json!({"basis": [[1, 1], [2, 2]]}), &EuclideanSpace::real(2)).unwrap_err();
        assert!(e.contains("dependent"));
    }
}
