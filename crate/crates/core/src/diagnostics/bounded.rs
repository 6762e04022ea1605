//! Boundedness of a feasible set and the alternative behind it.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::{homogeneous_alternative, image_inclusion, lineality_of, Branch, Detection};
use crate::cones::{FactorCone, MEMBER_TOL};
use crate::program::{ConicProgram, Side};
use crate::solver::{feasibility, SolverSettings, Verdict};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Boundedness {
    Empty,
    Bounded,
    Unbounded,
    Unknown,
}

#[derive(Clone, Debug)]
pub struct BoundednessReport {
    pub verdict: Boundedness,
    pub feasible: Verdict,
    /// Farkas certificate when the set is empty.
    pub farkas: Option<DVector<f64>>,
    pub lineality_dim: usize,
    /// Lineality vector or recession direction when unbounded.
    pub ray: Option<DVector<f64>>,
    /// `y in relint K*` with `A*y in relint C*` (other side's coordinates)
    /// when bounded.
    pub dual_witness: Option<DVector<f64>>,
    /// `A` injective and `A(C) ⊆ K` with `K` pointed, or `A(C) ⊆ K*`.
    pub injective_screen: Option<Verdict>,
    /// Sufficient condition from a basis of `span C` inside `C*`.
    pub basis_screen: Option<bool>,
    /// When bounded: whether the other side is unbounded for the given
    /// objective, witnessed by the dual recession point.
    pub other_side_unbounded: Option<Verdict>,
}

/// Basis screen: `B ⊆ C*`, `A(B) ⊆ K`, and some `v_j in relint C*` with
/// `A v_j in K \ lin K`. `basis` holds the vectors as columns and must be
/// an orthonormal basis of `span C`.
fn basis_screen(q: &ConicProgram, basis: &DMatrix<f64>) -> bool {
    let tol = 1e-9;
    let cd = q.c_cone().dual();
    let k = q.k_cone();
    let lin_k = k.lineality();
    let span_c = q.c_cone().span();
    if basis.ncols() != span_c.dim() || basis.nrows() != q.x_space().dim() {
        return false;
    }
    let gram = basis.tr_mul(basis);
    if (gram - DMatrix::identity(basis.ncols(), basis.ncols())).amax() > 1e-9 {
        return false;
    }
    let mut strict = false;
    for v in basis.column_iter() {
        let v = v.into_owned();
        if !span_c.contains(&v, tol) || !cd.member(&v, tol) {
            return false;
        }
        let av = q.a() * &v;
        if !k.member(&av, tol) {
            return false;
        }
        if cd.relint_member(&v, tol) && lin_k.residual(&av) > 1e-6 * (1.0 + av.norm()) {
            strict = true;
        }
    }
    strict
}

/// Coordinate vectors of the non-Zero coordinates of `C`.
fn coordinate_basis(q: &ConicProgram) -> DMatrix<f64> {
    q.c_cone().span().basis().clone()
}

/// Decides whether the feasible set of one side is empty, bounded or
/// unbounded. `basis` optionally supplies an orthonormal basis of
/// `span C` for the basis screen; coordinate axes are tried otherwise.
pub fn boundedness(
    p: &ConicProgram,
    side: Side,
    basis: Option<&DMatrix<f64>>,
    settings: &SolverSettings,
) -> BoundednessReport {
    let q = p.side_program(side);
    let sys = q.primal_system();
    let h = sys.homogeneous();
    let lin = lineality_of(&h);
    let mut out = BoundednessReport {
        verdict: Boundedness::Unknown,
        feasible: Verdict::Unknown,
        farkas: None,
        lineality_dim: lin.dim(),
        ray: None,
        dual_witness: None,
        injective_screen: None,
        basis_screen: None,
        other_side_unbounded: None,
    };
    let f = feasibility(&sys, settings);
    out.feasible = f.verdict;
    if f.verdict == Verdict::No {
        out.verdict = Boundedness::Empty;
        out.farkas = f.certificate;
        return out;
    }
    if q.map().kernel().is_zero() {
        let pointed_k = q.k_cone().is_pointed();
        let into_k = image_inclusion(q.a(), q.c_cone(), q.k_cone(), 0);
        let into_kd = image_inclusion(q.a(), q.c_cone(), &q.k_cone().dual(), 0);
        out.injective_screen = Some(if (pointed_k && into_k == Detection::Certified) || into_kd == Detection::Certified {
            Verdict::Yes
        } else {
            Verdict::Unknown
        });
    }
    out.basis_screen = Some(match basis {
        Some(b) => basis_screen(&q, b),
        None => basis_screen(&q, &coordinate_basis(&q)),
    });
    if !lin.is_zero() {
        let r = lin.basis().column(0).into_owned();
        if h.contains(&r, settings.tol_cert) && h.contains(&-&r, settings.tol_cert) {
            out.verdict = Boundedness::Unbounded;
            out.ray = Some(r);
        }
        return out;
    }
    let alt = homogeneous_alternative(&h, settings, false);
    let m = q.y_space().dim();
    match alt.branch {
        Some(Branch::Ray) => {
            out.verdict = Boundedness::Unbounded;
            out.ray = alt.ray;
        }
        Some(Branch::Interior) => {
            let z = alt.interior.expect("interior branch carries a point");
            let y = z.rows(0, m).into_owned();
            if q.dual_system().homogeneous().strictly_contains(&y, MEMBER_TOL) {
                out.verdict = Boundedness::Bounded;
                out.dual_witness = Some(y);
            }
        }
        None => {}
    }
    if out.verdict == Boundedness::Bounded && !(q.c_cone().is_subspace() && q.k_cone().is_subspace()) {
        out.other_side_unbounded = Some(other_side_unbounded(&q, out.dual_witness.as_ref().unwrap(), settings));
    }
    out
}

/// The other side is unbounded when it is feasible: the strict dual
/// recession point is a nonzero direction. Requires `c in (lin C)^⊥`.
fn other_side_unbounded(q: &ConicProgram, y: &DVector<f64>, settings: &SolverSettings) -> Verdict {
    if !q.c_cone().lineality().complement().contains(q.c(), 1e-9) {
        return Verdict::Unknown;
    }
    let dual = q.dual_system();
    match feasibility(&dual, settings).verdict {
        Verdict::Yes if y.norm() > 0.0 && dual.homogeneous().contains(y, settings.tol_cert) => Verdict::Yes,
        Verdict::No => Verdict::No,
        _ => Verdict::Unknown,
    }
}

#[derive(Clone, Debug)]
pub struct GordanReport {
    /// 1: nonzero `x in C` with `A x in -K`; 2: `y in relint K*` with
    /// `A*y in relint C*`.
    pub branch: Option<u8>,
    pub witness: Option<DVector<f64>>,
    pub double_hit: bool,
    /// Pointedness of the recession cone failed.
    pub not_pointed: bool,
}

/// Exactly one of: a nonzero recession direction of the primal set, or a
/// strictly feasible point of the dual recession cone. Both statements
/// are searched for independently.
pub fn gordan_alternative(p: &ConicProgram, settings: &SolverSettings) -> GordanReport {
    let q = p.side_program(Side::Primal);
    let h = q.primal_system().homogeneous();
    if !lineality_of(&h).is_zero() {
        return GordanReport {
            branch: None,
            witness: None,
            double_hit: false,
            not_pointed: true,
        };
    }
    let alt = homogeneous_alternative(&h, settings, true);
    let m = q.y_space().dim();
    let (branch, witness) = match alt.branch {
        Some(Branch::Ray) => (Some(1), alt.ray),
        Some(Branch::Interior) => (Some(2), alt.interior.map(|z| z.rows(0, m).into_owned())),
        None => (None, None),
    };
    GordanReport {
        branch,
        witness,
        double_hit: alt.double_hit,
        not_pointed: false,
    }
}

#[derive(Clone, Debug)]
pub struct PackingReport {
    /// Whether `A(C) ⊆ K`.
    pub detection: Detection,
    /// Nonempty exactly when `b in K`.
    pub nonempty: Verdict,
    pub k_is_subspace: bool,
    /// `K` pointed and `A` injective, with the dual recession witness.
    pub injective_condition: Verdict,
    pub injective_witness: Option<DVector<f64>>,
    /// `C` the nonnegative orthant and every column of `A` in `relint K`,
    /// with witness `y = e_{K*}`.
    pub column_condition: Verdict,
    pub column_witness: Option<DVector<f64>>,
    pub bounded: Verdict,
}

pub fn packing_suite(p: &ConicProgram, settings: &SolverSettings) -> PackingReport {
    let q = p.side_program(Side::Primal);
    let k = q.k_cone();
    let detection = image_inclusion(q.a(), q.c_cone(), k, 0);
    let packing = detection.verdict();
    let nonempty = if packing.is_yes() {
        Verdict::from_bool(k.member(q.b(), MEMBER_TOL * (1.0 + q.b().norm())))
    } else {
        Verdict::Unknown
    };
    let k_is_subspace = k.is_subspace();
    let mut out = PackingReport {
        detection,
        nonempty,
        k_is_subspace,
        injective_condition: Verdict::Unknown,
        injective_witness: None,
        column_condition: Verdict::Unknown,
        column_witness: None,
        bounded: Verdict::Unknown,
    };
    if !packing.is_yes() || k_is_subspace {
        return out;
    }
    let injective = q.map().kernel().is_zero();
    out.injective_condition = Verdict::from_bool(k.is_pointed() && injective);
    if out.injective_condition.is_yes() {
        let g = gordan_alternative(p, settings);
        if g.branch == Some(2) {
            out.injective_witness = g.witness;
        }
    }
    let orthant = q.c_cone().factors().iter().all(|f| *f == FactorCone::Nonneg);
    let columns_inside = orthant && (0..q.x_space().dim()).all(|j| k.relint_member(&q.a().column(j).into_owned(), 0.0));
    out.column_condition = Verdict::from_bool(columns_inside);
    if columns_inside {
        let y = k.dual().canonical_relint_point();
        let aty = q.a().tr_mul(&y);
        if q.dual_system().homogeneous().strictly_contains(&y, MEMBER_TOL) && aty.iter().all(|v| *v > 0.0) {
            out.column_witness = Some(y);
        }
    }
    let bounded = out.injective_witness.is_some() || out.column_witness.is_some();
    out.bounded = if out.nonempty.is_yes() && bounded { Verdict::Yes } else { Verdict::Unknown };
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cones::Cone;
    use crate::program::Sense;

    fn orthant(a: DMatrix<f64>, b: DVector<f64>) -> ConicProgram {
        let (m, n) = a.shape();
        ConicProgram::from_dense(a, b, DVector::from_element(n, 1.0), Cone::nonneg(m), Cone::nonneg(n), Sense::Sup)
            .unwrap()
    }

    #[test]
    fn identity_packing_is_bounded() {
        let p = orthant(DMatrix::identity(3, 3), DVector::from_element(3, 1.0));
        let r = boundedness(&p, Side::Primal, None, &SolverSettings::default());
        assert_eq!(r.verdict, Boundedness::Bounded);
        let y = r.dual_witness.unwrap();
        assert!(y.iter().all(|v| *v > 0.0));
        assert_eq!(r.injective_screen, Some(Verdict::Yes));
        assert_eq!(r.other_side_unbounded, Some(Verdict::Yes));
    }

    #[test]
    fn free_variable_is_unbounded() {
        // 0 x <= 1 over a free variable.
        let p = ConicProgram::from_dense(
            DMatrix::zeros(1, 1),
            DVector::from_element(1, 1.0),
            DVector::zeros(1),
            Cone::nonneg(1),
            Cone::free(1),
            Sense::Sup,
        )
        .unwrap();
        let r = boundedness(&p, Side::Primal, None, &SolverSettings::default());
        assert_eq!(r.verdict, Boundedness::Unbounded);
        assert_eq!(r.lineality_dim, 1);
    }

    #[test]
    fn gordan_branches_on_sign_of_identity() {
        let s = SolverSettings::default();
        let neg = orthant(-DMatrix::<f64>::identity(3, 3), DVector::from_element(3, 1.0));
        let g = gordan_alternative(&neg, &s);
        assert_eq!(g.branch, Some(1));
        assert!(!g.double_hit);
        let pos = orthant(DMatrix::identity(3, 3), DVector::from_element(3, 1.0));
        let g = gordan_alternative(&pos, &s);
        assert_eq!(g.branch, Some(2));
        assert!(!g.double_hit);
    }

    #[test]
    fn packing_conditions() {
        let a = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 0.5, 0.5, 1.0, 3.0]);
        let p = orthant(a.clone(), DVector::from_vec(vec![1.0, 2.0]));
        let r = packing_suite(&p, &SolverSettings::default());
        assert_eq!(r.detection, Detection::Certified);
        assert_eq!(r.nonempty, Verdict::Yes);
        assert_eq!(r.column_condition, Verdict::Yes);
        assert_eq!(r.bounded, Verdict::Yes);
        let p = orthant(a, DVector::from_vec(vec![1.0, -2.0]));
        assert_eq!(packing_suite(&p, &SolverSettings::default()).nonempty, Verdict::No);
    }
}
