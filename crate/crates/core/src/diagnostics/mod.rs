//! Duality diagnostics on a program: strict feasibility, recession cones,
//! boundedness, closedness of the adjoint images, almost feasibility,
//! finiteness and the aggregated strong duality report.
//!
//! Side-dependent routines work on `P.side_program(side)`, the sup form
//! whose primal feasible set is the chosen side. Its dual is then the
//! other side, and coordinates of both sets are those of `P`.

mod almost;
mod bounded;
mod closedness;
mod report;
mod strict;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde_json::{json, Value};

use crate::cones::{Cone, FactorCone, MEMBER_TOL};
use crate::linalg::{svec, Factor, LinearMap, Subspace};
use crate::program::AffineSystem;
use crate::solver::{conic_lp_value, strict_feasibility, SolverSettings, Verdict};

pub use almost::{almost_feasibility, finiteness_check, AlmostReport, FinitenessReport, SampleCounts, ThreeWay};
pub use bounded::{
    boundedness, gordan_alternative, packing_suite, Boundedness, BoundednessReport, GordanReport, PackingReport,
};
pub use closedness::{closedness_conditions, gap_bound_separation, ClosednessReport, ConditionVerdict, GapSeparation};
pub use report::{side_value, strong_duality_report, DualityReport, ReportEntry, ReportOptions, REPORT_VERSION};
pub use strict::{
    polar_recession_membership, recession_cone, recession_report, recession_strict, slack_dimension_screen, slater,
    slater_rifeascone_check, PolarMembership, RecessionReport, RecessionSystem, RifeasReport, SlackScreen,
};

/// `{r : G r in lin K}`, the lineality space of the recession cone of a
/// system, computed by subspace algebra.
pub fn lineality_of(sys: &AffineSystem) -> Subspace {
    let map = LinearMap::new(sys.var_space().clone(), sys.cone().space().clone(), sys.g().clone())
        .expect("system shapes agree");
    map.preimage(&sys.cone().lineality())
}

/// `{z : z in K*, G'z = 0}` for a system `{x : G x + g in K}`. Its strict
/// feasibility is the alternative to a nonzero recession direction.
pub fn dual_homogeneous(sys: &AffineSystem) -> AffineSystem {
    let m = sys.cone().dim();
    let n = sys.var_space().dim();
    AffineSystem::stack(
        sys.cone().space().clone(),
        vec![
            (DMatrix::identity(m, m), DVector::zeros(m), sys.cone().dual()),
            (sys.g().transpose(), DVector::zeros(n), Cone::zero(n)),
        ],
    )
    .expect("consistent blocks")
}

/// Which statement of the alternative was witnessed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub enum Branch {
    /// A recession direction `r` with `G r in K \ lin K`.
    Ray,
    /// `z in relint K*` with `G'z = 0`.
    Interior,
}

#[derive(Clone, Debug)]
pub struct Alternative {
    pub branch: Option<Branch>,
    /// Normalized so that `<e*, G r> = 1`.
    pub ray: Option<DVector<f64>>,
    /// Point of the relative interior of `K*` with `G'z = 0`.
    pub interior: Option<DVector<f64>>,
    /// Both statements validated, which the alternative rules out.
    pub double_hit: bool,
    pub iterations: usize,
}

fn validate_ray(h: &AffineSystem, w0: &DVector<f64>, r: &DVector<f64>, tol: f64) -> Option<DVector<f64>> {
    let s = w0.dot(r);
    if s.is_nan() || s <= 0.0 {
        return None;
    }
    let r = r / s;
    h.contains(&r, tol).then_some(r)
}

fn validate_interior(d: &AffineSystem, z: &DVector<f64>, settings: &SolverSettings) -> Option<DVector<f64>> {
    let z = d.polish_equalities(z);
    let ok = d.strictly_contains(&z, MEMBER_TOL) && d.cone().margin(&d.eval(&z)) > settings.margin;
    ok.then_some(z)
}

/// Decides between a nonzero recession direction of `h` outside its
/// lineality space and an interior dual point. Directions are searched in
/// the orthogonal complement of the lineality space. With `cross_check`
/// the margin program on the dual side is run as well, so that both
/// statements are tried independently.
pub fn homogeneous_alternative(h: &AffineSystem, settings: &SolverSettings, cross_check: bool) -> Alternative {
    let h = h.homogeneous();
    let tol = settings.tol_cert;
    let e = h.cone().dual().canonical_relint_point();
    let w0 = h.g().tr_mul(&e);
    let d = dual_homogeneous(&h);
    let mut out = Alternative {
        branch: None,
        ray: None,
        interior: None,
        double_hit: false,
        iterations: 0,
    };
    let lin = lineality_of(&h);
    let restricted = h.with_equations(lin.basis().transpose()).expect("same variables");
    let mk = h.cone().dim();
    let row = DMatrix::from_row_slice(1, w0.len(), (-&w0).as_slice());
    let lp = restricted
        .with_rows(row, DVector::from_element(1, 1.0), Cone::nonneg(1))
        .expect("one extra row");
    let v = conic_lp_value(&w0, &lp, settings);
    out.iterations += v.iterations;
    if let Some(r) = v.witness.as_ref().filter(|r| w0.dot(r) >= 0.5) {
        out.ray = validate_ray(&h, &w0, r, tol);
    } else if v.value.is_finite() && v.value < 0.5 {
        if let Some(z) = &v.certificate {
            let mu = z[mk];
            if mu < 0.5 {
                let zk = z.rows(0, mk) / (1.0 - mu) + &e;
                out.interior = validate_interior(&d, &zk, settings);
            }
        }
    }
    if cross_check || (out.ray.is_none() && out.interior.is_none()) {
        let m = strict_feasibility(&d, settings);
        out.iterations += m.iterations;
        match m.verdict {
            Verdict::Yes => {
                let z = m.witness.expect("Yes carries a witness");
                if out.ray.is_some() {
                    out.double_hit = validate_interior(&d, &z, settings).is_some();
                } else {
                    out.interior = out.interior.or(Some(z));
                }
            }
            Verdict::No => {
                // A separator (l1, l2) of the dual system has l1 = -G l2 in K.
                if let Some(cert) = &m.certificate {
                    let r = -cert.rows(mk, cert.len() - mk);
                    if let Some(r) = validate_ray(&h, &w0, &r, tol) {
                        if out.interior.is_some() {
                            out.double_hit = true;
                        } else {
                            out.ray = out.ray.or(Some(r));
                        }
                    }
                }
            }
            Verdict::Unknown => {}
        }
    }
    out.branch = match (&out.ray, &out.interior) {
        (Some(_), None) => Some(Branch::Ray),
        (None, Some(_)) => Some(Branch::Interior),
        _ => None,
    };
    out
}

/// Outcome of testing an inclusion `A(C) ⊆ T` for cones `C`, `T`.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Detection {
    /// Checked on generators of a polyhedral `C`.
    Certified,
    /// Held on sampled extreme rays of a non-polyhedral factor; not a proof.
    Sampled { samples: usize },
    /// `x in C` with `A x` outside `T`.
    Violated { x: Vec<f64> },
}

impl Detection {
    pub fn verdict(&self) -> Verdict {
        match self {
            Detection::Certified => Verdict::Yes,
            Detection::Sampled { .. } => Verdict::Unknown,
            Detection::Violated { .. } => Verdict::No,
        }
    }
}

/// Tests `A(C) ⊆ target` on generators: `A e_j` for Nonneg coordinates,
/// `±A e_j` for Free ones, and sampled extreme rays of second-order and
/// semidefinite factors.
pub fn image_inclusion(a: &DMatrix<f64>, cone_c: &Cone, target: &Cone, seed: u64) -> Detection {
    let tol = 1e-9;
    let n = cone_c.dim();
    let mut rng = crate::gallery::stream(seed, "inclusion");
    let mut sampled = 0;
    let check = |x: DVector<f64>| -> Option<Detection> {
        let ax = a * &x;
        let scale = 1.0 + ax.norm();
        (!target.member(&ax, tol * scale)).then(|| Detection::Violated {
            x: x.as_slice().to_vec(),
        })
    };
    for (kind, factor, range) in cone_c.unsigned().blocks() {
        let sign = if cone_c.is_negated() { -1.0 } else { 1.0 };
        let mut gens: Vec<DVector<f64>> = Vec::new();
        match kind {
            FactorCone::Zero => {}
            FactorCone::Nonneg | FactorCone::Free => {
                for j in range.clone() {
                    let mut x = DVector::zeros(n);
                    x[j] = sign;
                    if kind == FactorCone::Free {
                        gens.push(-&x);
                    }
                    gens.push(x);
                }
            }
            FactorCone::SecondOrder => {
                let k = range.len();
                for _ in 0..64 {
                    let mut x = DVector::zeros(n);
                    let u: Vec<f64> = (0..k - 1).map(|_| rng.sample(StandardNormal)).collect();
                    let nu = u.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-12);
                    for (i, v) in u.iter().enumerate() {
                        x[range.start + i] = sign * v / nu;
                    }
                    x[range.end - 1] = sign;
                    gens.push(x);
                }
                sampled += 64;
            }
            FactorCone::Psd => {
                let m = match factor {
                    Factor::Sym(m) => m,
                    Factor::Real(_) => unreachable!("Psd lives on Sym factors"),
                };
                for _ in 0..64 {
                    let v = DVector::from_fn(m, |_, _| rng.sample::<f64, _>(StandardNormal));
                    let vv = &v * v.transpose() / v.norm_squared().max(1e-24);
                    let mut x = DVector::zeros(n);
                    x.rows_mut(range.start, range.len()).copy_from(&(svec(&vv) * sign));
                    gens.push(x);
                }
                sampled += 64;
            }
        }
        for x in gens {
            if let Some(v) = check(x) {
                return v;
            }
        }
    }
    if sampled > 0 {
        Detection::Sampled { samples: sampled }
    } else {
        Detection::Certified
    }
}

/// JSON number, with non-finite values written as strings and `-0`
/// written as `0`.
pub fn num(v: f64) -> Value {
    if v.is_finite() {
        json!(v + 0.0)
    } else if v.is_nan() {
        json!("nan")
    } else if v > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

pub fn vec_json(v: &DVector<f64>) -> Value {
    Value::Array(v.iter().map(|x| num(*x)).collect())
}

pub(crate) fn opt_vec_json(v: &Option<DVector<f64>>) -> Value {
    v.as_ref().map(vec_json).unwrap_or(Value::Null)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::EuclideanSpace;

    fn sys(g: DMatrix<f64>, cone: Cone) -> AffineSystem {
        let n = g.ncols();
        let m = g.nrows();
        AffineSystem::new(EuclideanSpace::real(n), g, DVector::zeros(m), cone).unwrap()
    }

    #[test]
    fn alternative_ray_branch() {
        // x in Nonneg(2), -(-x) in Nonneg(2): every x >= 0 recedes.
        let mut g = DMatrix::zeros(4, 2);
        g.view_mut((0, 0), (2, 2)).copy_from(&DMatrix::identity(2, 2));
        g.view_mut((2, 0), (2, 2)).copy_from(&DMatrix::identity(2, 2));
        let alt = homogeneous_alternative(&sys(g, Cone::nonneg(4)), &SolverSettings::default(), true);
        assert_eq!(alt.branch, Some(Branch::Ray));
        assert!(!alt.double_hit);
    }

    #[test]
    fn alternative_interior_branch() {
        // x in Nonneg(2) and -x in Nonneg(2): only x = 0.
        let mut g = DMatrix::zeros(4, 2);
        g.view_mut((0, 0), (2, 2)).copy_from(&-DMatrix::<f64>::identity(2, 2));
        g.view_mut((2, 0), (2, 2)).copy_from(&DMatrix::identity(2, 2));
        let alt = homogeneous_alternative(&sys(g, Cone::nonneg(4)), &SolverSettings::default(), true);
        assert_eq!(alt.branch, Some(Branch::Interior));
        let z = alt.interior.unwrap();
        assert!(z.iter().all(|v| *v > 0.0));
    }

    #[test]
    fn lineality_of_free_rows() {
        let g = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]);
        let cone = Cone::product(&[Cone::free(1), Cone::nonneg(1)]).unwrap();
        let l = lineality_of(&sys(g, cone));
        assert_eq!(l.dim(), 1);
    }

    #[test]
    fn inclusion_on_generators() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.5, 1.0]);
        assert_eq!(image_inclusion(&a, &Cone::nonneg(2), &Cone::nonneg(2), 1), Detection::Certified);
        let a = DMatrix::from_row_slice(2, 2, &[1.0, -2.0, 0.5, 1.0]);
        assert!(matches!(
            image_inclusion(&a, &Cone::nonneg(2), &Cone::nonneg(2), 1),
            Detection::Violated { .. }
        ));
    }

    #[test]
    fn non_finite_numbers_are_strings() {
        assert_eq!(num(f64::INFINITY), json!("inf"));
        assert_eq!(num(f64::NEG_INFINITY), json!("-inf"));
        assert_eq!(num(1.5), json!(1.5));
    }
}
