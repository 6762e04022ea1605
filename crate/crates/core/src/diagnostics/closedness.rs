//! Closedness of the adjoint image `Lp*(K* x C*)` and the separation
//! argument that bounds the duality gap.
//!
//! For the sup form `(A, b, c, K, C)` of a side,
//! `Lp(a, a0) = (A a + a0 b, -a)` and `Lp*(y, w) = (A*y - w, <b,y>)`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::cones::Cone;
use crate::linalg::EuclideanSpace;
use crate::program::{AffineSystem, ConicProgram, Side};
use crate::solver::{conic_lp_value, feasibility, solve, strict_feasibility, SolverSettings, Status, Verdict};

#[derive(Clone, Debug, Serialize)]
pub struct ConditionVerdict {
    pub verdict: Verdict,
    /// Margin or optimal value of the program behind the verdict.
    pub value: f64,
    pub witness: Option<Vec<f64>>,
    pub note: Option<String>,
}

impl ConditionVerdict {
    fn unknown(note: &str) -> Self {
        ConditionVerdict {
            verdict: Verdict::Unknown,
            value: f64::NAN,
            witness: None,
            note: Some(note.to_string()),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ClosednessReport {
    pub side: Side,
    /// `range Lp` meets `relint(K x C)`.
    pub range_meets_relint: ConditionVerdict,
    /// The same restricted to `a0 > 0`, which is strict feasibility of the
    /// side; run as a cross-check.
    pub perspective_route: Verdict,
    pub side_slater: Verdict,
    /// Both routes agree (`a0 > 0` success implies the homogeneous one, and
    /// it coincides with strict feasibility).
    pub routes_consistent: bool,
    /// `ker Lp*` meets `relint(K* x C*)`: `b^⊥` meets the strict dual
    /// recession cone.
    pub kernel_meets_relint: ConditionVerdict,
    /// `(K x C) ∩ range Lp = {0}` (pointed lift only).
    pub range_trivial: ConditionVerdict,
    /// `(K* x C*) ∩ ker Lp* = {0}` (full-dimensional lift only).
    pub kernel_trivial: ConditionVerdict,
    pub polyhedral: bool,
    /// Any condition or polyhedrality establishes a closed image.
    pub closed: Verdict,
}

fn lp_matrix(q: &ConicProgram) -> DMatrix<f64> {
    let (m, n) = q.a().shape();
    let mut g = DMatrix::zeros(m + n, n + 1);
    g.view_mut((0, 0), (m, n)).copy_from(q.a());
    g.view_mut((0, n), (m, 1)).copy_from(q.b());
    g.view_mut((m, 0), (n, n)).copy_from(&-DMatrix::<f64>::identity(n, n));
    g
}

fn lift_cone(q: &ConicProgram) -> Cone {
    Cone::product(&[q.k_cone().clone(), q.c_cone().clone()]).expect("unsigned cones")
}

/// `(y, w)` in `K* x C*` with `A*y = w`, `<b,y> = 0`.
fn kernel_system(q: &ConicProgram) -> AffineSystem {
    let (m, n) = q.a().shape();
    let mut g = DMatrix::zeros(m + n + n + 1, m + n);
    g.view_mut((0, 0), (m + n, m + n)).copy_from(&DMatrix::identity(m + n, m + n));
    g.view_mut((m + n, 0), (n, m)).copy_from(&q.a().transpose());
    g.view_mut((m + n, m), (n, n)).copy_from(&-DMatrix::<f64>::identity(n, n));
    for i in 0..m {
        g[(m + n + n, i)] = q.b()[i];
    }
    let cone = Cone::product(&[q.k_cone().dual(), q.c_cone().dual(), Cone::zero(n + 1)]).expect("unsigned cones");
    AffineSystem::new(
        q.y_space().product(q.x_space()),
        g,
        DVector::zeros(m + n + n + 1),
        cone,
    )
    .expect("consistent rows")
}

/// `sup{<e, u> : u = G v in cone, <e, u> <= 1}` decides whether the cone
/// meets the image of `G` only at zero; `e` must lie in the interior of
/// the dual of a pointed cone.
fn trivial_intersection(
    g: &DMatrix<f64>,
    space: EuclideanSpace,
    cone: &Cone,
    e: &DVector<f64>,
    settings: &SolverSettings,
) -> ConditionVerdict {
    let rows = g.nrows();
    let w = g.tr_mul(e);
    let sys = AffineSystem::new(space, g.clone(), DVector::zeros(rows), cone.clone())
        .and_then(|s| {
            let row = DMatrix::from_row_slice(1, w.len(), (-&w).as_slice());
            s.with_rows(row, DVector::from_element(1, 1.0), Cone::nonneg(1))
        })
        .expect("consistent rows");
    let val = conic_lp_value(&w, &sys, settings);
    let tol = settings.tol_cert;
    if val.bounds.1 <= tol {
        return ConditionVerdict {
            verdict: Verdict::Yes,
            value: val.bounds.1,
            witness: val.certificate.map(|z| z.as_slice().to_vec()),
            note: None,
        };
    }
    if let Some(v) = &val.witness {
        let u = g * v;
        if w.dot(v) >= 0.5 && cone.member(&u, tol) {
            return ConditionVerdict {
                verdict: Verdict::No,
                value: w.dot(v),
                witness: Some(v.as_slice().to_vec()),
                note: Some("nonzero point in the intersection".to_string()),
            };
        }
    }
    ConditionVerdict::unknown("trivial-intersection program inconclusive")
}

/// `ker Lp*` meets `relint(K* x C*)` for a sup-form program.
pub(crate) fn kernel_condition(q: &ConicProgram, settings: &SolverSettings) -> ConditionVerdict {
    let c2 = strict_feasibility(&kernel_system(q), settings);
    ConditionVerdict {
        verdict: c2.verdict,
        value: c2.t_star,
        witness: c2.witness.map(|v| v.as_slice().to_vec()),
        note: None,
    }
}

/// The four sufficient conditions for `Lp*(K* x C*)` to be closed, for the
/// sup form of one side. A closed image on the primal side makes the dual
/// solvable under strong duality.
pub fn closedness_conditions(p: &ConicProgram, side: Side, settings: &SolverSettings) -> ClosednessReport {
    let q = p.side_program(side);
    let (m, n) = q.a().shape();
    let lift = lift_cone(&q);
    let g = lp_matrix(&q);
    let alpha_space = q.x_space().product(&EuclideanSpace::real(1));

    let hom = AffineSystem::new(alpha_space.clone(), g.clone(), DVector::zeros(m + n), lift.clone())
        .expect("consistent rows");
    let c1 = strict_feasibility(&hom, settings);
    let range_meets_relint = ConditionVerdict {
        verdict: c1.verdict,
        value: c1.t_star,
        witness: c1.witness.map(|v| v.as_slice().to_vec()),
        note: None,
    };
    let mut a0_row = DMatrix::zeros(1, n + 1);
    a0_row[(0, n)] = 1.0;
    let persp = hom
        .with_rows(a0_row, DVector::zeros(1), Cone::nonneg(1))
        .expect("one extra row");
    let perspective_route = strict_feasibility(&persp, settings).verdict;
    let side_slater = strict_feasibility(&q.primal_system(), settings).verdict;
    let routes_consistent = !(perspective_route.is_yes() && range_meets_relint.verdict.is_no())
        && !(perspective_route.is_yes() && side_slater.is_no())
        && !(perspective_route.is_no() && side_slater.is_yes());

    let ks = kernel_system(&q);
    let kernel_meets_relint = kernel_condition(&q, settings);

    let range_trivial = if lift.is_pointed() {
        let e = lift.dual().canonical_relint_point();
        trivial_intersection(&g, alpha_space, &lift, &e, settings)
    } else {
        ConditionVerdict::unknown("lifted cone is not pointed")
    };

    let dual_lift = lift.dual();
    let kernel_trivial = if dual_lift.is_pointed() {
        let e = lift.canonical_relint_point();
        // Variables (y, w); rows (y, w) in K* x C*, then A*y - w = 0, <b,y> = 0.
        let kg = ks.g().clone();
        let kcone = ks.cone().clone();
        let mut ee = DVector::zeros(kg.nrows());
        ee.rows_mut(0, m + n).copy_from(&e);
        trivial_intersection(&kg, ks.var_space().clone(), &kcone, &ee, settings)
    } else {
        ConditionVerdict::unknown("dual lifted cone is not pointed")
    };

    let polyhedral = q.is_polyhedral();
    let closed = if polyhedral
        || [&range_meets_relint, &kernel_meets_relint, &range_trivial, &kernel_trivial]
            .iter()
            .any(|c| c.verdict.is_yes())
    {
        Verdict::Yes
    } else {
        Verdict::Unknown
    };
    ClosednessReport {
        side,
        range_meets_relint,
        perspective_route,
        side_slater,
        routes_consistent,
        kernel_meets_relint,
        range_trivial,
        kernel_trivial,
        polyhedral,
        closed,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GapSeparation {
    pub separated: Verdict,
    /// Feasible `x` with `<c,x> > dobj - epsilon`, in the program's own
    /// objective orientation.
    pub recovered_x: Option<Vec<f64>>,
    pub t_star: f64,
    pub note: Option<String>,
}

/// Separates `(c, dobj - epsilon)` from `Lp*(K* x C*)` by some
/// `(a, a0) in Lp^{-1}(-K x -C)` with `<c,a> + a0 (dobj - epsilon) > 0`.
/// The normalization `-1 <= a0 <= 0` keeps the search bounded; success
/// recovers `x = -a / a0`, which shows the gap is at most `epsilon`.
pub fn gap_bound_separation(p: &ConicProgram, epsilon: f64, dobj: f64, settings: &SolverSettings) -> GapSeparation {
    let (q, sign) = p.sup_form();
    let d = sign * dobj;
    let (m, n) = q.a().shape();
    let tol = settings.tol_cert;
    let mut out = GapSeparation {
        separated: Verdict::Unknown,
        recovered_x: None,
        t_star: f64::NAN,
        note: None,
    };
    if !dobj.is_finite() {
        out.note = Some("dual value is not finite".to_string());
        return out;
    }
    // Any separator with a0 < 0 is a feasible point; without one there is
    // nothing to separate.
    let f = feasibility(&q.primal_system(), settings);
    if f.verdict.is_no() {
        out.separated = Verdict::No;
        out.note = Some("primal infeasible: no separator with a0 < 0 exists".to_string());
        return out;
    }
    // Variables (a, a0, t).
    let nv = n + 2;
    let rows = m + n + 4;
    let mut g = DMatrix::zeros(rows, nv);
    g.view_mut((0, 0), (m, n)).copy_from(&-q.a());
    g.view_mut((0, n), (m, 1)).copy_from(&-q.b());
    g.view_mut((m, 0), (n, n)).copy_from(&DMatrix::identity(n, n));
    let r = m + n;
    for j in 0..n {
        g[(r, j)] = q.c()[j];
    }
    g[(r, n)] = d - epsilon;
    g[(r, n + 1)] = -1.0;
    g[(r + 1, n)] = 1.0;
    g[(r + 2, n)] = -1.0;
    g[(r + 3, n + 1)] = -1.0;
    let mut off = DVector::zeros(rows);
    off[r + 1] = 1.0;
    off[r + 3] = 1.0;
    let cone = Cone::product(&[q.k_cone().clone(), q.c_cone().clone(), Cone::nonneg(4)]).expect("unsigned cones");
    let sys = AffineSystem::new(EuclideanSpace::real(nv), g, off, cone).expect("consistent rows");
    let mut obj = DVector::zeros(nv);
    obj[n + 1] = 1.0;
    let val = conic_lp_value(&obj, &sys, settings);
    out.t_star = val.value;
    if let Some(v) = &val.witness {
        let a0 = v[n];
        if v[n + 1] > settings.margin && a0 < -settings.margin {
            let x = -v.rows(0, n) / a0;
            if q.is_primal_feasible(&x, tol) && q.c().dot(&x) > d - epsilon {
                out.separated = Verdict::Yes;
                out.recovered_x = Some(x.as_slice().to_vec());
                return out;
            }
        }
    }
    if val.bounds.1 <= settings.margin {
        out.separated = Verdict::No;
        // A primal point beating dobj - epsilon contradicts the bound.
        let s = solve(p, settings);
        if s.status == Status::Optimal && sign * s.pobj > d - epsilon + tol * (1.0 + d.abs()) {
            out.separated = Verdict::Unknown;
            out.note = Some("solver point contradicts the separation bound".to_string());
        }
    }
    out
}
