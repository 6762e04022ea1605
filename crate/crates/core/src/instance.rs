//! JSON file format for programs.
//!
//! ```json
//! {"version": "instance/v1", "sense": "sup",
//!  "space_x": [{"real": 3}], "space_y": [{"real": 2}],
//!  "cone_C": ["soc"], "cone_K": ["zero"],
//!  "A": [[1, 0, 0], [0, 1, 1]], "b": [0, 1], "c": [0, 0, 0]}
//! ```
//!
//! Non-finite numbers are written as the strings `"inf"`, `"-inf"` and
//! `"nan"`. Keys are written in sorted order so serialization is
//! deterministic.

use nalgebra::{DMatrix, DVector};
use serde_json::{json, Map, Value};

use crate::cones::{Cone, FactorCone};
use crate::diagnostics::num;
use crate::gallery::{Annotations, Instance, InstanceSpec};
use crate::linalg::{EuclideanSpace, Factor, LinearMap};
use crate::program::{ConicProgram, Sense};

pub const INSTANCE_VERSION: &str = "instance/v1";

/// Validation failure with the JSON path of the offending field.
#[derive(Clone, Debug, PartialEq, thiserror::Error)]
#[error("{path}: {reason}")]
pub struct ParseError {
    pub path: String,
    pub reason: String,
}

fn err<T>(path: impl Into<String>, reason: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError {
        path: path.into(),
        reason: reason.into(),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct InstanceFile {
    pub program: ConicProgram,
    /// Free-form metadata, kept verbatim.
    pub annotations: Option<Value>,
}

fn space_json(s: &EuclideanSpace) -> Value {
    Value::Array(
        s.factors()
            .iter()
            .map(|f| match f {
                Factor::Real(n) => json!({ "real": n }),
                Factor::Sym(m) => json!({ "sym": m }),
            })
            .collect(),
    )
}

fn cone_json(c: &Cone) -> Value {
    Value::Array(
        c.factors()
            .iter()
            .map(|f| serde_json::to_value(f).expect("unit enum"))
            .collect(),
    )
}

pub fn program_json(p: &ConicProgram, annotations: Option<&Value>) -> Value {
    let a = p.a();
    let mut m = Map::new();
    m.insert("version".into(), json!(INSTANCE_VERSION));
    m.insert(
        "sense".into(),
        json!(match p.sense() {
            Sense::Sup => "sup",
            Sense::Inf => "inf",
        }),
    );
    m.insert("space_x".into(), space_json(p.x_space()));
    m.insert("space_y".into(), space_json(p.y_space()));
    m.insert("cone_C".into(), cone_json(p.c_cone()));
    m.insert("cone_K".into(), cone_json(p.k_cone()));
    m.insert(
        "A".into(),
        Value::Array(
            a.row_iter()
                .map(|r| Value::Array(r.iter().map(|&v| num(v)).collect()))
                .collect(),
        ),
    );
    m.insert("b".into(), Value::Array(p.b().iter().map(|&v| num(v)).collect()));
    m.insert("c".into(), Value::Array(p.c().iter().map(|&v| num(v)).collect()));
    if let Some(ann) = annotations {
        m.insert("annotations".into(), ann.clone());
    }
    Value::Object(m)
}

/// Annotations block for a generated instance.
pub fn spec_json(spec: &InstanceSpec) -> Value {
    let mut m = Map::new();
    m.insert("family".into(), serde_json::to_value(spec.family).expect("unit enum"));
    m.insert("n".into(), json!(spec.n));
    m.insert("m".into(), json!(spec.m));
    m.insert("seed".into(), json!(spec.seed));
    if let Some(p) = &spec.profile {
        m.insert("profile".into(), json!(p));
    }
    if let Some(e) = &spec.expected {
        m.insert("expected".into(), annotations_json(e));
    }
    Value::Object(m)
}

fn annotations_json(a: &Annotations) -> Value {
    let mut m = Map::new();
    if let Some(v) = a.pobj {
        m.insert("pobj".into(), num(v));
    }
    if let Some(v) = a.dobj {
        m.insert("dobj".into(), num(v));
    }
    m.insert("flags".into(), json!(a.flags));
    m.insert("provenance".into(), json!(a.provenance));
    Value::Object(m)
}

pub fn instance_json(inst: &Instance) -> Value {
    program_json(&inst.program, Some(&spec_json(&inst.spec)))
}

/// Pretty-printed document with a trailing newline.
pub fn to_string(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values serialize");
    s.push('\n');
    s
}

fn number(v: &Value, path: &str) -> Result<f64, ParseError> {
    match v {
        Value::Number(n) => n.as_f64().map_or_else(|| err(path, "not representable as f64"), Ok),
        Value::String(s) => match s.as_str() {
            "inf" => Ok(f64::INFINITY),
            "-inf" => Ok(f64::NEG_INFINITY),
            "nan" => Ok(f64::NAN),
            _ => err(path, format!("expected a number, found string {s:?}")),
        },
        _ => err(path, "expected a number"),
    }
}

fn array<'a>(v: &'a Value, path: &str) -> Result<&'a Vec<Value>, ParseError> {
    v.as_array().map_or_else(|| err(path, "expected an array"), Ok)
}

fn field<'a>(obj: &'a Map<String, Value>, key: &str) -> Result<&'a Value, ParseError> {
    obj.get(key).map_or_else(|| err(key, "missing field"), Ok)
}

fn finite_vector(v: &Value, path: &str) -> Result<DVector<f64>, ParseError> {
    let items = array(v, path)?;
    let mut out = DVector::zeros(items.len());
    for (i, x) in items.iter().enumerate() {
        let p = format!("{path}[{i}]");
        let f = number(x, &p)?;
        if !f.is_finite() {
            return err(p, "program data must be finite");
        }
        out[i] = f;
    }
    Ok(out)
}

fn parse_space(v: &Value, path: &str) -> Result<EuclideanSpace, ParseError> {
    let items = array(v, path)?;
    if items.is_empty() {
        return err(path, "space needs at least one factor");
    }
    let mut factors = Vec::with_capacity(items.len());
    for (i, f) in items.iter().enumerate() {
        let p = format!("{path}[{i}]");
        let obj = f.as_object().map_or_else(|| err(&p, "expected {\"real\": n} or {\"sym\": m}"), Ok)?;
        if obj.len() != 1 {
            return err(&p, "expected exactly one of \"real\", \"sym\"");
        }
        let (tag, size) = obj.iter().next().expect("one entry");
        let size = size
            .as_u64()
            .filter(|&s| s >= 1)
            .map_or_else(|| err(format!("{p}.{tag}"), "expected a positive integer"), Ok)? as usize;
        factors.push(match tag.as_str() {
            "real" => Factor::Real(size),
            "sym" => Factor::Sym(size),
            other => return err(&p, format!("unknown factor tag {other:?}")),
        });
    }
    EuclideanSpace::new(factors).map_err(|e| ParseError {
        path: path.into(),
        reason: e.to_string(),
    })
}

fn parse_cone(v: &Value, path: &str, space: &EuclideanSpace, space_key: &str) -> Result<Cone, ParseError> {
    let items = array(v, path)?;
    if items.len() != space.factors().len() {
        return err(
            path,
            format!("{} factor cones for {} factors of {space_key}", items.len(), space.factors().len()),
        );
    }
    let mut factors = Vec::with_capacity(items.len());
    for (i, (c, f)) in items.iter().zip(space.factors()).enumerate() {
        let p = format!("{path}[{i}]");
        let fc: FactorCone = serde_json::from_value(c.clone())
            .map_err(|_| ParseError {
                path: p.clone(),
                reason: format!("unknown cone tag {c}"),
            })?;
        let single = EuclideanSpace::new(vec![*f]).expect("validated factor");
        Cone::new(single, vec![fc]).map_err(|_| ParseError {
            path: p.clone(),
            reason: format!("cone {c} cannot sit on factor {f:?}"),
        })?;
        factors.push(fc);
    }
    Cone::new(space.clone(), factors).map_err(|e| ParseError {
        path: path.into(),
        reason: e.to_string(),
    })
}

pub fn parse_value(v: &Value) -> Result<InstanceFile, ParseError> {
    let obj = v.as_object().map_or_else(|| err("$", "expected an object"), Ok)?;
    for key in obj.keys() {
        if !matches!(
            key.as_str(),
            "version" | "sense" | "space_x" | "space_y" | "cone_C" | "cone_K" | "A" | "b" | "c" | "annotations"
        ) {
            return err(key.as_str(), "unknown field");
        }
    }
    match field(obj, "version")?.as_str() {
        Some(INSTANCE_VERSION) => {}
        Some(other) => return err("version", format!("unsupported version {other:?}, expected {INSTANCE_VERSION:?}")),
        None => return err("version", "expected a string"),
    }
    let sense = match obj.get("sense") {
        None => Sense::Sup,
        Some(s) => match s.as_str() {
            Some("sup") => Sense::Sup,
            Some("inf") => Sense::Inf,
            _ => return err("sense", "expected \"sup\" or \"inf\""),
        },
    };
    let sx = parse_space(field(obj, "space_x")?, "space_x")?;
    let sy = parse_space(field(obj, "space_y")?, "space_y")?;
    let cc = parse_cone(field(obj, "cone_C")?, "cone_C", &sx, "space_x")?;
    let ck = parse_cone(field(obj, "cone_K")?, "cone_K", &sy, "space_y")?;
    let (m, n) = (sy.dim(), sx.dim());
    let rows = array(field(obj, "A")?, "A")?;
    if rows.len() != m {
        return err("A", format!("expected {m} x {n} (dim space_y x dim space_x), found {} rows", rows.len()));
    }
    let mut a = DMatrix::zeros(m, n);
    for (i, r) in rows.iter().enumerate() {
        let p = format!("A[{i}]");
        let r = finite_vector(r, &p)?;
        if r.len() != n {
            return err(p, format!("expected {m} x {n} (dim space_y x dim space_x), row has {} entries", r.len()));
        }
        a.row_mut(i).copy_from(&r.transpose());
    }
    let b = finite_vector(field(obj, "b")?, "b")?;
    if b.len() != m {
        return err("b", format!("expected length {m} (dim space_y), found {}", b.len()));
    }
    let c = finite_vector(field(obj, "c")?, "c")?;
    if c.len() != n {
        return err("c", format!("expected length {n} (dim space_x), found {}", c.len()));
    }
    let map = LinearMap::new(sx, sy, a).map_err(|e| ParseError {
        path: "A".into(),
        reason: e.to_string(),
    })?;
    let program = ConicProgram::new(map, b, c, ck, cc, sense).map_err(|e| ParseError {
        path: "$".into(),
        reason: e.to_string(),
    })?;
    let annotations = match obj.get("annotations") {
        None => None,
        Some(a @ Value::Object(_)) => Some(a.clone()),
        Some(_) => return err("annotations", "expected an object"),
    };
    Ok(InstanceFile { program, annotations })
}

pub fn parse_str(s: &str) -> Result<InstanceFile, ParseError> {
    let v: Value = serde_json::from_str(s).map_err(|e| ParseError {
        path: "$".into(),
        reason: format!("invalid JSON: {e}"),
    })?;
    parse_value(&v)
}

impl InstanceFile {
    pub fn to_json(&self) -> Value {
        program_json(&self.program, self.annotations.as_ref())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery::example_adapted;

    #[test]
    fn example_round_trips_byte_for_byte() {
        let inst = example_adapted(3).unwrap();
        let text = to_string(&instance_json(&inst));
        let back = parse_str(&text).unwrap();
        assert_eq!(back.program, inst.program);
        assert_eq!(to_string(&back.to_json()), text);
        assert!(text.contains("\"-inf\""));
    }

    #[test]
    fn wrong_shape_names_the_matrix() {
        let inst = example_adapted(3).unwrap();
        let mut v = program_json(&inst.program, None);
        v["A"] = json!([[1.0, 0.0], [0.0, 1.0]]);
        let e = parse_value(&v).unwrap_err();
        assert_eq!(e.path, "A[0]");
        assert!(e.reason.contains("2 x 3"), "{e}");
    }

    #[test]
    fn soc_on_a_sym_factor_is_rejected() {
        let v = json!({
            "version": INSTANCE_VERSION,
            "space_x": [{"sym": 2}], "space_y": [{"real": 1}],
            "cone_C": ["soc"], "cone_K": ["nonneg"],
            "A": [[0.0, 0.0, 0.0]], "b": [1.0], "c": [0.0, 0.0, 0.0]
        });
        let e = parse_value(&v).unwrap_err();
        assert_eq!(e.path, "cone_C[0]");
    }

    #[test]
    fn unknown_tag_and_missing_field() {
        let v = json!({
            "version": INSTANCE_VERSION,
            "space_x": [{"real": 1}], "space_y": [{"real": 1}],
            "cone_C": ["cube"], "cone_K": ["nonneg"],
            "A": [[1.0]], "b": [1.0], "c": [0.0]
        });
        assert_eq!(parse_value(&v).unwrap_err().path, "cone_C[0]");
        let mut v2 = v.clone();
        v2.as_object_mut().unwrap().remove("b");
        v2["cone_C"] = json!(["free"]);
        assert_eq!(parse_value(&v2).unwrap_err().path, "b");
    }
}
