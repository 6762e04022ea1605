//! Strict feasibility of a side, of its recession cone, and the polar of
//! the recession cone.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::Serialize;

use super::{dual_homogeneous, lineality_of};
use crate::cones::Cone;
use crate::gallery::{draw_relint, stream};
use crate::linalg::Subspace;
use crate::program::{AffineSystem, ConicProgram, Side};
use crate::solver::{conic_lp_value, feasibility, strict_feasibility, MarginResult, SolverSettings, Verdict};

/// Strict feasibility of one side of `p`.
pub fn slater(p: &ConicProgram, side: Side, settings: &SolverSettings) -> MarginResult {
    strict_feasibility(&p.side_program(side).primal_system(), settings)
}

#[derive(Clone, Debug, Serialize)]
pub struct RifeasReport {
    pub interior_trials: usize,
    pub interior_yes: usize,
    /// Indices of interior trials that did not come back `Yes`.
    pub interior_misses: Vec<usize>,
    pub boundary_trials: usize,
    /// Boundary compositions are not guaranteed anything; recorded only.
    pub boundary_yes: usize,
}

/// Right-hand sides `A x0 + s0` with `x0` and `s0` in the relative
/// interiors of `C` and `K` make the side strictly feasible. Also records
/// the verdict for the boundary composition `A x0`.
pub fn slater_rifeascone_check(
    p: &ConicProgram,
    side: Side,
    trials: usize,
    seed: u64,
    settings: &SolverSettings,
) -> RifeasReport {
    let q = p.side_program(side);
    let mut rng = stream(seed, "rifeas");
    let mut out = RifeasReport {
        interior_trials: trials,
        interior_yes: 0,
        interior_misses: Vec::new(),
        boundary_trials: trials,
        boundary_yes: 0,
    };
    for i in 0..trials {
        let margin = rng.random_range(0.1..1.0);
        let x0 = draw_relint(q.c_cone(), margin, &mut rng);
        let s0 = draw_relint(q.k_cone(), margin, &mut rng);
        let ax = q.a() * &x0;
        let interior = q.with_b(&ax + &s0).expect("same shape");
        if strict_feasibility(&interior.primal_system(), settings).verdict.is_yes() {
            out.interior_yes += 1;
        } else {
            out.interior_misses.push(i);
        }
        let boundary = q.with_b(ax).expect("same shape");
        if strict_feasibility(&boundary.primal_system(), settings).verdict.is_yes() {
            out.boundary_yes += 1;
        }
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct SlackScreen {
    pub feasible: Verdict,
    pub samples: usize,
    /// Affine dimension of the sampled slacks `b - A x_i`.
    pub slack_dim: usize,
    pub span_k_dim: usize,
    /// Affine dimension of the sampled points.
    pub set_dim: usize,
    pub span_c_dim: usize,
    /// Slack dimensions match and the sample mean is a strict point.
    pub sufficient: bool,
    /// `A(span C) ⊆ span K` holds and the set is lower dimensional than
    /// `C`, so no strict point exists.
    pub necessary_violated: bool,
}

fn affine_rank(points: &[DVector<f64>]) -> usize {
    if points.len() < 2 {
        return 0;
    }
    let d = points[0].len();
    let scale = points.iter().map(|p| p.norm()).fold(1.0, f64::max);
    let diffs = DMatrix::from_fn(d, points.len() - 1, |i, j| points[j + 1][i] - points[0][i]);
    let svd = diffs.svd(false, false);
    svd.singular_values.iter().filter(|s| **s > 1e-6 * scale).count()
}

/// Compares the affine hull of sampled slacks with the span of `K`.
/// Samples are optima of random objectives over the set cut by a box.
pub fn slack_dimension_screen(
    p: &ConicProgram,
    side: Side,
    samples: usize,
    seed: u64,
    settings: &SolverSettings,
) -> SlackScreen {
    let q = p.side_program(side);
    let sys = q.primal_system();
    let n = q.x_space().dim();
    let span_k = q.k_cone().span();
    let span_c = q.c_cone().span();
    let mut out = SlackScreen {
        feasible: Verdict::Unknown,
        samples: 0,
        slack_dim: 0,
        span_k_dim: span_k.dim(),
        set_dim: 0,
        span_c_dim: span_c.dim(),
        sufficient: false,
        necessary_violated: false,
    };
    let f = feasibility(&sys, settings);
    out.feasible = f.verdict;
    let Some(x0) = f.point else { return out };
    let radius = 10.0 * (1.0 + x0.amax());
    let mut boxg = DMatrix::zeros(2 * n, n);
    boxg.view_mut((0, 0), (n, n)).copy_from(&DMatrix::identity(n, n));
    boxg.view_mut((n, 0), (n, n)).copy_from(&-DMatrix::<f64>::identity(n, n));
    let boxed = sys
        .with_rows(boxg, DVector::from_element(2 * n, radius), Cone::nonneg(2 * n))
        .expect("box rows");
    let mut rng = stream(seed, "slack-screen");
    let mut points = vec![x0];
    for _ in 0..samples {
        let c = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
        if let Some(x) = conic_lp_value(&c, &boxed, settings).witness {
            if sys.contains(&x, settings.tol_cert) {
                points.push(x);
            }
        }
    }
    out.samples = points.len();
    let slacks: Vec<DVector<f64>> = points.iter().map(|x| q.slack(x)).collect();
    out.slack_dim = affine_rank(&slacks);
    out.set_dim = affine_rank(&points);
    let mean = points.iter().fold(DVector::zeros(n), |acc, x| acc + x) / points.len() as f64;
    out.sufficient = out.slack_dim == out.span_k_dim && sys.strictly_contains(&mean, settings.tol_cert);
    let image = q.map().image(&span_c);
    out.necessary_violated = image.is_subset_of(&span_k) && out.set_dim < out.span_c_dim;
    out
}

/// The recession cone of one side and of the other side.
#[derive(Clone, Debug)]
pub struct RecessionSystem {
    pub side: Side,
    /// `{x : x in C, A x in -K}` for the side's sup form.
    pub primal_form: AffineSystem,
    /// `{y : y in K*, A*y in C*}`.
    pub dual_form: AffineSystem,
    /// `{x in lin C : A x in lin K}`.
    pub lineality: Subspace,
}

pub fn recession_cone(p: &ConicProgram, side: Side) -> RecessionSystem {
    let q = p.side_program(side);
    let primal_form = q.primal_system().homogeneous();
    let dual_form = q.dual_system().homogeneous();
    let lineality = lineality_of(&primal_form);
    RecessionSystem {
        side,
        primal_form,
        dual_form,
        lineality,
    }
}

pub fn recession_strict(p: &ConicProgram, side: Side, settings: &SolverSettings) -> MarginResult {
    strict_feasibility(&recession_cone(p, side).primal_form, settings)
}

#[derive(Clone, Debug)]
pub struct RecessionReport {
    pub strict: MarginResult,
    pub lineality_dim: usize,
    pub rhs_in_span_k: bool,
    /// Strict feasibility of the side itself, run when the recession cone
    /// is strictly feasible and the right-hand side lies in `span K`.
    pub implied_slater: Option<Verdict>,
    /// Strict recession point plus `b in span K`: every such set is
    /// unbounded.
    pub unbounded: bool,
    /// False when the implied strict feasibility failed to show up.
    pub consistent: bool,
}

/// Strict recession test together with the consequences it forces when
/// `b` lies in `span K`.
pub fn recession_report(p: &ConicProgram, side: Side, settings: &SolverSettings) -> RecessionReport {
    let q = p.side_program(side);
    let rec = recession_cone(p, side);
    let strict = strict_feasibility(&rec.primal_form, settings);
    let rhs_in_span_k = q.k_cone().span().contains(q.b(), 1e-9);
    let mut out = RecessionReport {
        lineality_dim: rec.lineality.dim(),
        rhs_in_span_k,
        implied_slater: None,
        unbounded: false,
        consistent: true,
        strict,
    };
    if out.strict.verdict.is_yes() && rhs_in_span_k {
        let s = slater(p, side, settings).verdict;
        out.implied_slater = Some(s);
        out.consistent = s != Verdict::No;
        out.unbounded = true;
    }
    out
}

#[derive(Clone, Debug)]
pub struct PolarMembership {
    pub verdict: Verdict,
    /// Bounds on `sup{<v,r> : r in rec, <w0,r> <= 1}`.
    pub value_bounds: (f64, f64),
    /// Recession direction with `<v,r> > 0` when not a member.
    pub witness_ray: Option<DVector<f64>>,
    pub lineality_dim: usize,
    /// Under a strictly feasible recession cone, whether `v` is attained
    /// exactly as `-G'z` with `z` in the dual cone.
    pub exact_member: Option<Verdict>,
}

/// `v in (rec S)°` for the feasible set `S` of one side of `p`.
pub fn polar_recession_membership(
    p: &ConicProgram,
    side: Side,
    v: &DVector<f64>,
    settings: &SolverSettings,
) -> PolarMembership {
    let h = p.system(side).homogeneous();
    let mut out = polar_membership(&h, v, settings);
    if strict_feasibility(&h, settings).verdict.is_yes() {
        // -G'(K*) is the set of v for which the other side is feasible.
        let d = dual_homogeneous(&h);
        let n = h.var_space().dim();
        let mk = h.cone().dim();
        let mut off = DVector::zeros(mk + n);
        off.rows_mut(mk, n).copy_from(v);
        let exact = AffineSystem::new(d.var_space().clone(), d.g().clone(), off, d.cone().clone())
            .expect("same rows as the dual system");
        let f = feasibility(&exact, settings).verdict;
        out.exact_member = Some(f);
        if f == Verdict::Yes && out.verdict == Verdict::No {
            out.verdict = Verdict::Unknown;
        }
    }
    out
}

/// `v in {r : G r in K}°` for a homogeneous system.
pub fn polar_membership(h: &AffineSystem, v: &DVector<f64>, settings: &SolverSettings) -> PolarMembership {
    let tol = settings.tol_cert;
    let lin = lineality_of(h);
    let mut out = PolarMembership {
        verdict: Verdict::Unknown,
        value_bounds: (f64::NEG_INFINITY, f64::INFINITY),
        witness_ray: None,
        lineality_dim: lin.dim(),
        exact_member: None,
    };
    let pv = lin.project(v);
    if pv.norm() > tol * (1.0 + v.norm()) {
        let r = &pv / pv.norm_squared();
        if h.contains(&r, tol) {
            out.verdict = Verdict::No;
            out.value_bounds = (f64::INFINITY, f64::INFINITY);
            out.witness_ray = Some(r);
        }
        return out;
    }
    let e = h.cone().dual().canonical_relint_point();
    let w0 = h.g().tr_mul(&e);
    let sliced = h
        .with_equations(lin.basis().transpose())
        .and_then(|s| {
            let row = DMatrix::from_row_slice(1, w0.len(), (-&w0).as_slice());
            s.with_rows(row, DVector::from_element(1, 1.0), Cone::nonneg(1))
        })
        .expect("consistent rows");
    let val = conic_lp_value(v, &sliced, settings);
    out.value_bounds = val.bounds;
    let scale = 1.0 + v.norm();
    if val.bounds.1 <= tol * scale {
        out.verdict = Verdict::Yes;
    } else if let Some(r) = val.witness.as_ref().or(val.ray.as_ref()) {
        let vr = v.dot(r);
        if vr > tol * scale && h.contains(r, tol) {
            out.verdict = Verdict::No;
            out.witness_ray = Some(r / vr);
        }
    }
    out
}
