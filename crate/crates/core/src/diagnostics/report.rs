//! Aggregated strong duality report.

use nalgebra::DVector;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use super::bounded::{boundedness, Boundedness};
use super::closedness::{closedness_conditions, kernel_condition};
use super::strict::slater;
use super::{num, opt_vec_json};
use crate::linalg::Subspace;
use crate::program::{ConicProgram, Sense, Side};
use crate::solver::{conic_lp_value, feasibility, solve, strict_feasibility, LpValue, SolverSettings, Status, Verdict};

pub const REPORT_VERSION: &str = "report/v1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Solvable {
    Primal,
    Dual,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReportEntry {
    pub condition: &'static str,
    pub verdict: Verdict,
    pub witness: Value,
    pub citation: &'static str,
    pub margins: Value,
    /// Side guaranteed to attain its optimum when the condition holds.
    pub solvable: Solvable,
    pub note: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct DualityReport {
    pub version: &'static str,
    pub entries: Vec<ReportEntry>,
    pub primal_feasible: Verdict,
    pub dual_feasible: Verdict,
    pub status: Status,
    #[serde(serialize_with = "ser_num")]
    pub pobj: f64,
    #[serde(serialize_with = "ser_num")]
    pub dobj: f64,
    /// Dual value minus primal value in the program's orientation (`+inf`
    /// when the primal is infeasible and the dual finite).
    #[serde(serialize_with = "ser_num")]
    pub gap: f64,
    #[serde(serialize_with = "ser_pair")]
    pub pobj_bounds: (f64, f64),
    #[serde(serialize_with = "ser_pair")]
    pub dobj_bounds: (f64, f64),
    /// Every `Yes` entry agrees with the numeric gap.
    pub consistent: bool,
}

fn ser_num<S: serde::Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    num(*v).serialize(s)
}

fn ser_pair<S: serde::Serializer>(v: &(f64, f64), s: S) -> std::result::Result<S::Ok, S::Error> {
    json!([num(v.0), num(v.1)]).serialize(s)
}

impl DualityReport {
    pub fn fired(&self) -> impl Iterator<Item = &ReportEntry> {
        self.entries.iter().filter(|e| e.verdict.is_yes())
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("report serializes")
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ReportOptions {
    /// Worker threads for the independent conditions; 1 runs inline.
    pub jobs: usize,
}

impl Default for ReportOptions {
    fn default() -> Self {
        ReportOptions { jobs: 1 }
    }
}

/// Optimal value of one side in the program's own orientation, with
/// certified bounds.
pub fn side_value(p: &ConicProgram, side: Side, settings: &SolverSettings) -> LpValue {
    let q = p.side_program(side);
    let sign = match (side, p.sense()) {
        (Side::Primal, Sense::Sup) | (Side::Dual, Sense::Inf) => 1.0,
        _ => -1.0,
    };
    let mut v = conic_lp_value(q.c(), &q.primal_system(), settings);
    if sign < 0.0 {
        v.value = -v.value + 0.0;
        v.bounds = (-v.bounds.1 + 0.0, -v.bounds.0 + 0.0);
    }
    v
}

/// `target in M(L)` by least squares; returns the preimage on success.
fn in_image(m: &nalgebra::DMatrix<f64>, l: &Subspace, target: &DVector<f64>) -> Option<DVector<f64>> {
    let b = l.basis();
    if b.ncols() == 0 {
        return (target.norm() <= 1e-9).then(|| DVector::zeros(m.ncols()));
    }
    let mb = m * b;
    let t = mb.clone().svd(true, true).solve(target, 1e-12).ok()?;
    let pre = b * t;
    ((m * &pre - target).norm() <= 1e-9 * (1.0 + target.norm())).then_some(pre)
}

type Check<'a> = Box<dyn Fn() -> ReportEntry + Send + Sync + 'a>;

fn entry(
    condition: &'static str,
    citation: &'static str,
    solvable: Solvable,
    verdict: Verdict,
    witness: Value,
    margins: Value,
) -> ReportEntry {
    ReportEntry {
        condition,
        verdict,
        witness,
        citation,
        margins,
        solvable,
        note: None,
    }
}

const CONDITIONS: [(&str, &str, Solvable); 12] = [
    (
        "objective-in-adjoint-image-of-k-perp",
        "primal feasible and c = A*y with y orthogonal to K: objective is constant on the feasible set",
        Solvable::Dual,
    ),
    (
        "rhs-in-image-of-lin-c",
        "dual feasible and b = A x with x in the lineality space of C",
        Solvable::Primal,
    ),
    (
        "primal-strictly-feasible",
        "generalized Slater condition for the primal",
        Solvable::Dual,
    ),
    (
        "dual-strictly-feasible",
        "generalized Slater condition for the dual",
        Solvable::Primal,
    ),
    (
        "primal-recession-strict-rhs-in-span-k",
        "strictly feasible primal recession cone and b in span K",
        Solvable::Dual,
    ),
    (
        "dual-recession-strict-objective-in-lin-c-perp",
        "strictly feasible dual recession cone and c orthogonal to lin C",
        Solvable::Primal,
    ),
    (
        "rhs-perp-meets-strict-dual-recession",
        "some strict point of the dual recession cone is orthogonal to b",
        Solvable::Dual,
    ),
    (
        "objective-perp-meets-strict-primal-recession",
        "some strict point of the primal recession cone is orthogonal to c",
        Solvable::Primal,
    ),
    (
        "primal-bounded-objective-in-lin-c-perp",
        "nonempty bounded primal set and c orthogonal to lin C (universal when C is pointed)",
        Solvable::Primal,
    ),
    (
        "dual-bounded-rhs-in-span-k",
        "nonempty bounded dual set and b in span K (universal when K is full-dimensional)",
        Solvable::Dual,
    ),
    (
        "primal-adjoint-image-closed",
        "closed image of K* x C* under (y, w) -> (A*y - w, <b,y>)",
        Solvable::Dual,
    ),
    (
        "dual-adjoint-image-closed",
        "closed image of C x K under (x, s) -> (A x + s, <c,x>)",
        Solvable::Primal,
    ),
];

fn condition_check<'a>(p: &'a ConicProgram, idx: usize, settings: &'a SolverSettings) -> Check<'a> {
    let (id, cite, solv) = CONDITIONS[idx];
    let mk = move |v: Verdict, w: Value, m: Value| entry(id, cite, solv, v, w, m);
    match idx {
        0 | 1 => Box::new(move || {
            // b_Q in A_Q(lin C_Q) on the sup form of the dual reads
            // c in A*(K^⊥), since lin K* = K^⊥.
            let q = p.side_program(if idx == 0 { Side::Dual } else { Side::Primal });
            let found = in_image(q.a(), &q.c_cone().lineality(), q.b());
            let verdict = Verdict::from_bool(found.is_some());
            mk(verdict, opt_vec_json(&found), Value::Null)
        }),
        2 | 3 => Box::new(move || {
            let side = if idx == 2 { Side::Primal } else { Side::Dual };
            let r = slater(p, side, settings);
            let w = if r.verdict.is_yes() { opt_vec_json(&r.witness) } else { opt_vec_json(&r.certificate) };
            mk(r.verdict, w, json!({ "t_star": num(r.t_star) }))
        }),
        4 | 5 => Box::new(move || {
            let side = if idx == 4 { Side::Primal } else { Side::Dual };
            let q = p.side_program(side);
            let in_span = q.k_cone().span().contains(q.b(), 1e-9);
            if !in_span {
                return mk(Verdict::No, Value::Null, json!({ "rhs_in_span": false }));
            }
            let r = strict_feasibility(&q.primal_system().homogeneous(), settings);
            let w = if r.verdict.is_yes() { opt_vec_json(&r.witness) } else { opt_vec_json(&r.certificate) };
            mk(r.verdict, w, json!({ "t_star": num(r.t_star), "rhs_in_span": true }))
        }),
        6 | 7 => Box::new(move || {
            // Kernel condition for a closed image, on the side's sup form.
            let side = if idx == 6 { Side::Primal } else { Side::Dual };
            let cv = kernel_condition(&p.side_program(side), settings);
            let w = cv.witness.map(|v| json!(v)).unwrap_or(Value::Null);
            mk(cv.verdict, w, json!({ "t_star": num(cv.value) }))
        }),
        8 | 9 => Box::new(move || {
            let side = if idx == 8 { Side::Primal } else { Side::Dual };
            let q = p.side_program(side);
            if !q.c_cone().lineality().complement().contains(q.c(), 1e-9) {
                return mk(Verdict::No, Value::Null, json!({ "objective_in_lin_perp": false }));
            }
            let b = boundedness(p, side, None, settings);
            let (v, w) = match b.verdict {
                Boundedness::Bounded => (Verdict::Yes, opt_vec_json(&b.dual_witness)),
                Boundedness::Unbounded => (Verdict::No, opt_vec_json(&b.ray)),
                Boundedness::Empty => (Verdict::No, opt_vec_json(&b.farkas)),
                Boundedness::Unknown => (Verdict::Unknown, Value::Null),
            };
            mk(v, w, json!({ "lineality_dim": b.lineality_dim }))
        }),
        _ => Box::new(move || {
            let side = if idx == 10 { Side::Primal } else { Side::Dual };
            let c = closedness_conditions(p, side, settings);
            let margins = json!({
                "range_meets_relint": c.range_meets_relint.verdict,
                "kernel_meets_relint": c.kernel_meets_relint.verdict,
                "range_trivial": c.range_trivial.verdict,
                "kernel_trivial": c.kernel_trivial.verdict,
                "polyhedral": c.polyhedral,
            });
            let mut e = mk(c.closed, Value::Null, margins);
            if !c.routes_consistent {
                e.note = Some("homogeneous and perspective routes disagree".to_string());
            }
            e
        }),
    }
}

/// Evaluates every sufficient condition for strong duality together with
/// the numeric optimal values. A condition entry is `Yes` only when the
/// condition holds and both sides are feasible; when a side is certified
/// infeasible every entry is `No` and carries that certificate.
pub fn strong_duality_report(p: &ConicProgram, settings: &SolverSettings, opts: &ReportOptions) -> DualityReport {
    let fp = feasibility(&p.side_program(Side::Primal).primal_system(), settings);
    let fd = feasibility(&p.side_program(Side::Dual).primal_system(), settings);
    let both = fp.verdict.and(fd.verdict);
    let entries: Vec<ReportEntry> = if both.is_no() {
        let (which, cert) = if fp.verdict.is_no() {
            ("primal", &fp.certificate)
        } else {
            ("dual", &fd.certificate)
        };
        CONDITIONS
            .iter()
            .map(|&(id, cite, solv)| {
                let mut e = entry(id, cite, solv, Verdict::No, opt_vec_json(cert), Value::Null);
                e.note = Some(format!("{which} infeasible; every condition requires both sides feasible"));
                e
            })
            .collect()
    } else {
        let checks: Vec<Check> = (0..CONDITIONS.len()).map(|i| condition_check(p, i, settings)).collect();
        let mut out: Vec<ReportEntry> = if opts.jobs > 1 {
            match rayon::ThreadPoolBuilder::new().num_threads(opts.jobs).build() {
                Ok(pool) => pool.install(|| checks.par_iter().map(|c| c()).collect()),
                Err(_) => checks.iter().map(|c| c()).collect(),
            }
        } else {
            checks.iter().map(|c| c()).collect()
        };
        for e in &mut out {
            if e.verdict.is_yes() && !both.is_yes() {
                e.verdict = Verdict::Unknown;
                e.note = Some("condition holds but feasibility of both sides is not established".to_string());
            }
        }
        out
    };

    let status = solve(p, settings).status;
    let pv = if fp.verdict.is_no() {
        let v = match p.sense() {
            Sense::Sup => f64::NEG_INFINITY,
            Sense::Inf => f64::INFINITY,
        };
        (v, (v, v))
    } else {
        let v = side_value(p, Side::Primal, settings);
        (v.value, v.bounds)
    };
    let dv = if fd.verdict.is_no() {
        let v = match p.sense() {
            Sense::Sup => f64::INFINITY,
            Sense::Inf => f64::NEG_INFINITY,
        };
        (v, (v, v))
    } else {
        let v = side_value(p, Side::Dual, settings);
        (v.value, v.bounds)
    };
    let (pobj, dobj) = (pv.0, dv.0);
    let gap = match p.sense() {
        Sense::Sup => dobj - pobj,
        Sense::Inf => pobj - dobj,
    };
    let any_yes = entries.iter().any(|e| e.verdict.is_yes());
    let consistent = !(any_yes && gap.is_finite() && gap.abs() > 1e-5 * (1.0 + pobj.abs()))
        && !(any_yes && gap.is_infinite());
    DualityReport {
        version: REPORT_VERSION,
        entries,
        primal_feasible: fp.verdict,
        dual_feasible: fd.verdict,
        status,
        pobj,
        dobj,
        gap,
        pobj_bounds: pv.1,
        dobj_bounds: dv.1,
        consistent,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cones::Cone;
    use nalgebra::DMatrix;

    #[test]
    fn zero_objective_fires_trivial_condition() {
        let p = ConicProgram::from_dense(
            DMatrix::from_row_slice(1, 2, &[1.0, 1.0]),
            DVector::from_element(1, 1.0),
            DVector::zeros(2),
            Cone::nonneg(1),
            Cone::nonneg(2),
            Sense::Sup,
        )
        .unwrap();
        let r = strong_duality_report(&p, &SolverSettings::default(), &ReportOptions::default());
        assert_eq!(r.entries[0].verdict, Verdict::Yes);
        assert!(r.gap.abs() <= 1e-6);
        assert!(r.consistent);
    }
}
