//! Almost feasibility (feasibility after arbitrarily small perturbation
//! of the right-hand side) and finiteness of optimal values.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::Serialize;

use super::strict::{polar_membership, PolarMembership};
use super::{homogeneous_alternative, lineality_of, Branch};
use crate::cones::Cone;
use crate::gallery::{draw_relint, stream};
use crate::linalg::EuclideanSpace;
use crate::program::{AffineSystem, ConicProgram, Side};
use crate::solver::{conic_lp_value, feasibility, strict_feasibility, LpValue, SolverSettings, Verdict};

/// Equivalence of `b in (rec Y)*`, feasibility and almost feasibility,
/// expected when the recession cone is trivial.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ThreeWay {
    pub dual_cone_member: Verdict,
    pub feasible: Verdict,
    pub almost_feasible: Verdict,
    pub consistent: bool,
}

#[derive(Clone, Debug)]
pub struct AlmostReport {
    pub side: Side,
    /// `inf{|d| : X(b + d) nonempty}` with certified bounds.
    pub min_norm: f64,
    pub bounds: (f64, f64),
    pub perturbation: Option<DVector<f64>>,
    pub per_epsilon: Vec<(f64, Verdict)>,
    /// `b in (rec Y)*`, tested as `-b in (rec Y)°`.
    pub polar: PolarMembership,
    /// Side condition under which membership and almost feasibility agree:
    /// `C` a subspace or `A(relint C)` meeting `span K`.
    pub side_condition: Verdict,
    /// "equality" when the side condition holds, "one-sided" otherwise.
    pub regime: &'static str,
    /// Non-member case: lower bound `delta / (2 |r|)` from the separating
    /// direction, and whether the computed norm respects it.
    pub lower_bound: Option<(f64, bool)>,
    pub three_way: Option<ThreeWay>,
    /// Membership and computed norm disagree in the equality regime.
    pub inconsistent: bool,
}

fn min_perturbation(q: &ConicProgram, settings: &SolverSettings) -> LpValue {
    let (m, n) = q.a().shape();
    // Variables (x, d, rho): b + d - A x in K, x in C, (d, rho) in SOC.
    let nv = n + m + 1;
    let mut g = DMatrix::zeros(m + n + m + 1, nv);
    g.view_mut((0, 0), (m, n)).copy_from(&-q.a());
    g.view_mut((0, n), (m, m)).copy_from(&DMatrix::identity(m, m));
    g.view_mut((m, 0), (n, n)).copy_from(&DMatrix::identity(n, n));
    g.view_mut((m + n, n), (m + 1, m + 1)).copy_from(&DMatrix::identity(m + 1, m + 1));
    let mut off = DVector::zeros(m + n + m + 1);
    off.rows_mut(0, m).copy_from(q.b());
    let cone = Cone::product(&[q.k_cone().clone(), q.c_cone().clone(), Cone::soc(m + 1)]).expect("unsigned cones");
    let space = q.x_space().product(&EuclideanSpace::real(m + 1));
    let sys = AffineSystem::new(space, g, off, cone).expect("consistent rows");
    let mut obj = DVector::zeros(nv);
    obj[nv - 1] = -1.0;
    conic_lp_value(&obj, &sys, settings)
}

/// `{x in relint C : A x in span K}` is nonempty.
fn image_meets_span(q: &ConicProgram, settings: &SolverSettings) -> Verdict {
    if q.c_cone().is_subspace() {
        return Verdict::Yes;
    }
    let n = q.x_space().dim();
    let perp = q.k_cone().span().complement();
    let rows = perp.basis().tr_mul(q.a());
    let sys = AffineSystem::new(q.x_space().clone(), DMatrix::identity(n, n), DVector::zeros(n), q.c_cone().clone())
        .and_then(|s| s.with_equations(rows))
        .expect("consistent rows");
    strict_feasibility(&sys, settings).verdict
}

/// Smallest right-hand side perturbation making one side feasible, with
/// the recession-cone cross-checks. For `Side::Dual` this perturbs the
/// objective `c`.
pub fn almost_feasibility(
    p: &ConicProgram,
    side: Side,
    epsilons: &[f64],
    settings: &SolverSettings,
) -> AlmostReport {
    let q = p.side_program(side);
    let (m, n) = q.a().shape();
    let tol = settings.tol_cert;
    let val = min_perturbation(&q, settings);
    // value = -rho*, so the bounds flip.
    let bounds = (-val.bounds.1, -val.bounds.0);
    let min_norm = -val.value;
    let perturbation = val.witness.as_ref().map(|v| v.rows(n, m).into_owned());
    let per_epsilon = epsilons
        .iter()
        .map(|&eps| {
            let v = if bounds.1 <= eps {
                Verdict::Yes
            } else if bounds.0 > eps {
                Verdict::No
            } else {
                Verdict::Unknown
            };
            (eps, v)
        })
        .collect();
    let rec_y = q.dual_system().homogeneous();
    let polar = polar_membership(&rec_y, &-q.b(), settings);
    let side_condition = image_meets_span(&q, settings);
    let regime = if side_condition.is_yes() { "equality" } else { "one-sided" };
    let mut out = AlmostReport {
        side,
        min_norm,
        bounds,
        perturbation,
        per_epsilon,
        polar,
        side_condition,
        regime,
        lower_bound: None,
        three_way: None,
        inconsistent: false,
    };
    match out.polar.verdict {
        Verdict::No => {
            // r in rec Y with <b,r> = -delta < 0: any feasible b + d has
            // <b + d, r> >= 0, so |d| >= delta / |r|.
            if let Some(r) = &out.polar.witness_ray {
                let delta = -q.b().dot(r);
                let lb = delta / (2.0 * r.norm());
                out.lower_bound = Some((lb, bounds.0 >= lb - tol || min_norm >= lb - tol));
            }
        }
        Verdict::Yes => {
            if side_condition.is_yes() && bounds.0 > tol.sqrt() {
                out.inconsistent = true;
            }
        }
        Verdict::Unknown => {}
    }
    let h = q.primal_system().homogeneous();
    if side_condition.is_yes() && lineality_of(&h).is_zero() {
        let alt = homogeneous_alternative(&h, settings, false);
        if alt.branch == Some(Branch::Interior) {
            let feasible = feasibility(&q.primal_system(), settings).verdict;
            let almost = if bounds.1 <= tol {
                Verdict::Yes
            } else if bounds.0 > tol {
                Verdict::No
            } else {
                Verdict::Unknown
            };
            let vs = [out.polar.verdict, feasible, almost];
            let consistent = !(vs.contains(&Verdict::Yes) && vs.contains(&Verdict::No));
            out.three_way = Some(ThreeWay {
                dual_cone_member: out.polar.verdict,
                feasible,
                almost_feasible: almost,
                consistent,
            });
        }
    }
    out
}

#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct SampleCounts {
    pub finite_ok: usize,
    pub finite_total: usize,
    pub ray_ok: usize,
    pub ray_total: usize,
}

#[derive(Clone, Debug)]
pub struct FinitenessReport {
    pub applicable: bool,
    pub reason: String,
    pub value: Option<LpValue>,
    pub finite: Verdict,
    pub other_feasible: Verdict,
    pub consistent: Option<bool>,
    pub samples: SampleCounts,
}

/// For a feasible side whose set or recession cone is strictly feasible:
/// a finite optimal value exactly when the other side is feasible. With
/// `samples > 0` and a strictly feasible side, objectives drawn from the
/// dual feasibility cone must give finite values, and objectives with an
/// improving recession direction must make the other side infeasible.
pub fn finiteness_check(
    p: &ConicProgram,
    side: Side,
    samples: usize,
    seed: u64,
    settings: &SolverSettings,
) -> FinitenessReport {
    let q = p.side_program(side);
    let sys = q.primal_system();
    let mut out = FinitenessReport {
        applicable: false,
        reason: String::new(),
        value: None,
        finite: Verdict::Unknown,
        other_feasible: Verdict::Unknown,
        consistent: None,
        samples: SampleCounts::default(),
    };
    let f = feasibility(&sys, settings);
    if !f.verdict.is_yes() {
        out.reason = format!("side feasibility is {}", f.verdict);
        return out;
    }
    let strict_set = strict_feasibility(&sys, settings).verdict.is_yes();
    let strict_rec = !strict_set && strict_feasibility(&sys.homogeneous(), settings).verdict.is_yes();
    if !strict_set && !strict_rec {
        out.reason = "neither the set nor its recession cone is known to be strictly feasible".to_string();
        return out;
    }
    out.applicable = true;
    out.reason = if strict_set { "strictly feasible set" } else { "strictly feasible recession cone" }.to_string();
    let val = conic_lp_value(q.c(), &sys, settings);
    out.finite = val.is_finite();
    out.other_feasible = feasibility(&q.dual_system(), settings).verdict;
    if out.finite != Verdict::Unknown && out.other_feasible != Verdict::Unknown {
        out.consistent = Some(out.finite == out.other_feasible);
    }
    out.value = Some(val);

    if strict_set && samples > 0 {
        let mut rng = stream(seed, "finiteness");
        let h = sys.homogeneous();
        let ray = homogeneous_alternative(&h, settings, false).ray;
        for _ in 0..samples {
            // c = A*y - w with y in K*, w in C*.
            let y = draw_relint(&q.k_cone().dual(), rng.random_range(0.1..1.0), &mut rng);
            let w = draw_relint(&q.c_cone().dual(), rng.random_range(0.1..1.0), &mut rng);
            let c = q.a().tr_mul(&y) - w;
            out.samples.finite_total += 1;
            if conic_lp_value(&c, &sys, settings).is_finite().is_yes() {
                out.samples.finite_ok += 1;
            }
            if let Some(r) = &ray {
                let mut c = DVector::from_fn(r.len(), |_, _| rng.random_range(-0.1..0.1));
                c += r / r.norm_squared();
                if c.dot(r) <= 0.0 {
                    continue;
                }
                out.samples.ray_total += 1;
                let unbounded = conic_lp_value(&c, &sys, settings).value == f64::INFINITY;
                let qc = q.with_c(c).expect("same shape");
                let other = feasibility(&qc.dual_system(), settings).verdict;
                if unbounded && other.is_no() {
                    out.samples.ray_ok += 1;
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::program::Sense;

    fn sector(c: [f64; 2]) -> ConicProgram {
        ConicProgram::from_dense(
            DMatrix::from_row_slice(1, 2, &[1.0, -1.0]),
            DVector::zeros(1),
            DVector::from_vec(c.to_vec()),
            Cone::nonneg(1),
            Cone::nonneg(2),
            Sense::Sup,
        )
        .unwrap()
    }

    #[test]
    fn improving_ray_means_infinite_value() {
        let r = finiteness_check(&sector([1.0, 1.0]), Side::Primal, 0, 0, &SolverSettings::default());
        assert!(r.applicable);
        assert_eq!(r.finite, Verdict::No);
        assert_eq!(r.other_feasible, Verdict::No);
        assert_eq!(r.consistent, Some(true));
    }

    #[test]
    fn zero_objective_is_finite() {
        let r = finiteness_check(&sector([0.0, 0.0]), Side::Primal, 0, 0, &SolverSettings::default());
        assert_eq!(r.finite, Verdict::Yes);
        assert_eq!(r.other_feasible, Verdict::Yes);
    }

    #[test]
    fn feasible_side_needs_no_perturbation() {
        let r = almost_feasibility(&sector([1.0, 1.0]), Side::Primal, &[1e-3], &SolverSettings::default());
        assert!(r.bounds.1 <= 1e-6);
        assert_eq!(r.per_epsilon[0].1, Verdict::Yes);
    }
}
