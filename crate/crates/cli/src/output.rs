//! JSON views of the command results and the text rendering shared by
//! every subcommand. Text is produced from the same JSON value, so both
//! modes carry identical verdicts.

use conedual::diagnostics::{num, vec_json, AlmostReport, BoundednessReport, GordanReport};
use conedual::solver::Certificate;
use conedual::{ConicProgram, SolveResult, Verdict};
use serde_json::{json, Map, Value};

fn verdict(v: Verdict) -> Value {
    serde_json::to_value(v).expect("unit enum")
}

fn opt_vec(v: &Option<nalgebra::DVector<f64>>) -> Value {
    v.as_ref().map(vec_json).unwrap_or(Value::Null)
}

fn pair(p: (f64, f64)) -> Value {
    json!([num(p.0), num(p.1)])
}

fn floats(v: &[f64]) -> Value {
    Value::Array(v.iter().map(|&x| num(x)).collect())
}

pub fn solve_json(p: &ConicProgram, r: &SolveResult) -> Value {
    let cert = match &r.certificate {
        None => Value::Null,
        Some(Certificate::Farkas { y, w }) => json!({ "kind": "farkas", "y": floats(y), "w": floats(w) }),
        Some(Certificate::Ray { r }) => json!({ "kind": "ray", "r": floats(r) }),
    };
    json!({
        "status": serde_json::to_value(r.status).expect("unit enum"),
        "sense": format!("{:?}", p.sense()).to_lowercase(),
        "pobj": num(r.pobj),
        "dobj": num(r.dobj),
        "gap": num(r.gap),
        "iterations": r.iterations,
        "residuals": {
            "primal": num(r.residuals.primal),
            "dual": num(r.residuals.dual),
            "gap": num(r.residuals.gap),
        },
        "x": vec_json(&r.x),
        "y": vec_json(&r.y),
        "certificate": cert,
    })
}

pub fn bounded_json(r: &BoundednessReport) -> Value {
    json!({
        "verdict": serde_json::to_value(r.verdict).expect("unit enum"),
        "feasible": verdict(r.feasible),
        "farkas": opt_vec(&r.farkas),
        "lineality_dim": r.lineality_dim,
        "ray": opt_vec(&r.ray),
        "dual_witness": opt_vec(&r.dual_witness),
        "injective_screen": r.injective_screen.map(verdict).unwrap_or(Value::Null),
        "basis_screen": r.basis_screen,
        "other_side_unbounded": r.other_side_unbounded.map(verdict).unwrap_or(Value::Null),
    })
}

pub fn gordan_json(r: &GordanReport) -> Value {
    json!({
        "branch": r.branch,
        "witness": opt_vec(&r.witness),
        "double_hit": r.double_hit,
        "not_pointed": r.not_pointed,
    })
}

pub fn almost_json(r: &AlmostReport) -> Value {
    json!({
        "side": format!("{:?}", r.side).to_lowercase(),
        "min_norm": num(r.min_norm),
        "bounds": pair(r.bounds),
        "perturbation": opt_vec(&r.perturbation),
        "per_epsilon": r.per_epsilon.iter().map(|(e, v)| json!({ "eps": num(*e), "verdict": verdict(*v) })).collect::<Vec<_>>(),
        "polar": {
            "verdict": verdict(r.polar.verdict),
            "value_bounds": pair(r.polar.value_bounds),
            "witness_ray": opt_vec(&r.polar.witness_ray),
            "lineality_dim": r.polar.lineality_dim,
            "exact_member": r.polar.exact_member.map(verdict).unwrap_or(Value::Null),
        },
        "side_condition": verdict(r.side_condition),
        "regime": r.regime,
        "lower_bound": r.lower_bound.map(|(lb, ok)| json!({ "value": num(lb), "respected": ok })).unwrap_or(Value::Null),
        "three_way": r.three_way.map(|t| serde_json::to_value(t).expect("plain struct")).unwrap_or(Value::Null),
        "inconsistent": r.inconsistent,
    })
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::Null => Some("-".into()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.clone()),
        Value::Array(items) if items.iter().all(|i| !i.is_object() && !i.is_array()) => {
            let parts: Vec<String> = items.iter().map(|i| scalar(i).expect("scalar")).collect();
            Some(format!("[{}]", parts.join(", ")))
        }
        _ => None,
    }
}

fn text_lines(prefix: &str, v: &Value, out: &mut Vec<String>) {
    if let Some(s) = scalar(v) {
        out.push(format!("{prefix}: {s}"));
        return;
    }
    match v {
        Value::Object(m) => object_lines(prefix, m, out),
        Value::Array(items) => {
            for (i, item) in items.iter().enumerate() {
                text_lines(&format!("{prefix}[{i}]"), item, out);
            }
        }
        _ => unreachable!("scalars handled above"),
    }
}

fn object_lines(prefix: &str, m: &Map<String, Value>, out: &mut Vec<String>) {
    for (k, v) in m {
        let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
        text_lines(&key, v, out);
    }
}

pub fn render(v: &Value, json: bool) -> String {
    if json {
        let mut s = serde_json::to_string_pretty(v).expect("values serialize");
        s.push('\n');
        return s;
    }
    let mut lines = Vec::new();
    text_lines("", v, &mut lines);
    let mut s = lines.join("\n");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_flattens_nested_values() {
        let v = json!({ "a": { "b": [1, 2] }, "c": [{ "d": "yes" }], "e": null });
        assert_eq!(render(&v, false), "a.b: [1, 2]\nc[0].d: yes\ne: -\n");
    }
}
