//! Conic programs, their duals, feasible-set systems and the paired maps
//! used by the closedness and gap arguments.
//!
//! A program with sense `Sup` reads `sup{<c,x> : b - Ax in K, x in C}`;
//! sense `Inf` reads `inf{<c,x> : Ax - b in K, x in C}`. Dualizing maps
//! `(A, b, c, K, C, Sup)` to `(A*, c, b, C*, K*, Inf)` and back.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::cones::{Cone, FactorCone, MEMBER_TOL};
use crate::error::{Error, Result};
use crate::linalg::{EuclideanSpace, LinearMap, Subspace};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Sup,
    Inf,
}

impl Sense {
    pub fn flip(self) -> Sense {
        match self {
            Sense::Sup => Sense::Inf,
            Sense::Inf => Sense::Sup,
        }
    }
}

/// Which member of a primal-dual pair a diagnostic looks at.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Primal,
    Dual,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::Primal => Side::Dual,
            Side::Dual => Side::Primal,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConicProgram {
    a: LinearMap,
    b: DVector<f64>,
    c: DVector<f64>,
    k: Cone,
    cone_c: Cone,
    sense: Sense,
}

impl ConicProgram {
    pub fn new(a: LinearMap, b: DVector<f64>, c: DVector<f64>, k: Cone, cone_c: Cone, sense: Sense) -> Result<Self> {
        if a.domain() != cone_c.space() {
            return Err(Error::dims("C versus domain of A", a.domain().dim(), cone_c.dim()));
        }
        if a.codomain() != k.space() {
            return Err(Error::dims("K versus codomain of A", a.codomain().dim(), k.dim()));
        }
        a.codomain().check("b", &b)?;
        a.domain().check("c", &c)?;
        if k.is_negated() || cone_c.is_negated() {
            return Err(Error::InvalidCone("program cones must not be polar views".into()));
        }
        let all_free = |cone: &Cone| cone.factors().iter().all(|f| *f == FactorCone::Free);
        if all_free(&k) && all_free(&cone_c) {
            return Err(Error::InvalidCone("at least one of K and C must be non-free".into()));
        }
        Ok(ConicProgram {
            a,
            b,
            c,
            k,
            cone_c,
            sense,
        })
    }

    /// Convenience constructor over plain `R^m`/`R^n` spaces.
    pub fn from_dense(a: DMatrix<f64>, b: DVector<f64>, c: DVector<f64>, k: Cone, cone_c: Cone, sense: Sense) -> Result<Self> {
        let map = LinearMap::new(cone_c.space().clone(), k.space().clone(), a)?;
        ConicProgram::new(map, b, c, k, cone_c, sense)
    }

    pub fn map(&self) -> &LinearMap {
        &self.a
    }

    pub fn a(&self) -> &DMatrix<f64> {
        self.a.matrix()
    }

    pub fn b(&self) -> &DVector<f64> {
        &self.b
    }

    pub fn c(&self) -> &DVector<f64> {
        &self.c
    }

    pub fn k_cone(&self) -> &Cone {
        &self.k
    }

    pub fn c_cone(&self) -> &Cone {
        &self.cone_c
    }

    pub fn sense(&self) -> Sense {
        self.sense
    }

    pub fn x_space(&self) -> &EuclideanSpace {
        self.a.domain()
    }

    pub fn y_space(&self) -> &EuclideanSpace {
        self.a.codomain()
    }

    pub fn is_polyhedral(&self) -> bool {
        self.k.is_polyhedral() && self.cone_c.is_polyhedral()
    }

    pub fn dualize(&self) -> ConicProgram {
        ConicProgram {
            a: self.a.adjoint(),
            b: self.c.clone(),
            c: self.b.clone(),
            k: self.cone_c.dual(),
            cone_c: self.k.dual(),
            sense: self.sense.flip(),
        }
    }

    /// The program rewritten with sense `Sup`, and the factor (+1 or -1)
    /// relating its objective to the original one.
    pub fn sup_form(&self) -> (ConicProgram, f64) {
        match self.sense {
            Sense::Sup => (self.clone(), 1.0),
            Sense::Inf => {
                let a = LinearMap::new(self.a.domain().clone(), self.a.codomain().clone(), -self.a.matrix())
                    .expect("same shape");
                (
                    ConicProgram {
                        a,
                        b: -&self.b,
                        c: -&self.c,
                        k: self.k.clone(),
                        cone_c: self.cone_c.clone(),
                        sense: Sense::Sup,
                    },
                    -1.0,
                )
            }
        }
    }

    /// The program whose feasible set is the chosen side, in sup form.
    /// `Side::Primal` returns `sup_form()`; `Side::Dual` the sup form of the dual.
    pub fn side_program(&self, side: Side) -> ConicProgram {
        match side {
            Side::Primal => self.sup_form().0,
            Side::Dual => self.dualize().sup_form().0,
        }
    }

    /// Copy with a different right-hand side.
    pub fn with_b(&self, b: DVector<f64>) -> Result<ConicProgram> {
        ConicProgram::new(self.a.clone(), b, self.c.clone(), self.k.clone(), self.cone_c.clone(), self.sense)
    }

    /// Copy with a different objective.
    pub fn with_c(&self, c: DVector<f64>) -> Result<ConicProgram> {
        ConicProgram::new(self.a.clone(), self.b.clone(), c, self.k.clone(), self.cone_c.clone(), self.sense)
    }

    /// Primal slack, required to lie in `K`.
    pub fn slack(&self, x: &DVector<f64>) -> DVector<f64> {
        let ax = self.a.apply(x);
        match self.sense {
            Sense::Sup => &self.b - ax,
            Sense::Inf => ax - &self.b,
        }
    }

    /// Dual slack, required to lie in `C*`.
    pub fn dual_slack(&self, y: &DVector<f64>) -> DVector<f64> {
        let aty = self.a.matrix().tr_mul(y);
        match self.sense {
            Sense::Sup => aty - &self.c,
            Sense::Inf => &self.c - aty,
        }
    }

    pub fn objective(&self, x: &DVector<f64>) -> f64 {
        self.c.dot(x)
    }

    pub fn dual_objective(&self, y: &DVector<f64>) -> f64 {
        self.b.dot(y)
    }

    pub fn is_primal_feasible(&self, x: &DVector<f64>, tol: f64) -> bool {
        x.len() == self.x_space().dim() && self.cone_c.member(x, tol) && self.k.member(&self.slack(x), tol)
    }

    pub fn is_dual_feasible(&self, y: &DVector<f64>, tol: f64) -> bool {
        y.len() == self.y_space().dim()
            && self.k.dual().member(y, tol)
            && self.cone_c.dual().member(&self.dual_slack(y), tol)
    }

    /// `X` as `{x : G x + g in K x C}`.
    pub fn primal_system(&self) -> AffineSystem {
        let n = self.x_space().dim();
        let (g_k, off_k) = match self.sense {
            Sense::Sup => (-self.a.matrix(), self.b.clone()),
            Sense::Inf => (self.a.matrix().clone(), -&self.b),
        };
        AffineSystem::stack(
            self.x_space().clone(),
            vec![
                (g_k, off_k, self.k.clone()),
                (DMatrix::identity(n, n), DVector::zeros(n), self.cone_c.clone()),
            ],
        )
        .expect("consistent program blocks")
    }

    /// `Y` as `{y : G y + g in K* x C*}`.
    pub fn dual_system(&self) -> AffineSystem {
        let m = self.y_space().dim();
        let (g_c, off_c) = match self.sense {
            Sense::Sup => (self.a.matrix().transpose(), -&self.c),
            Sense::Inf => (-self.a.matrix().transpose(), self.c.clone()),
        };
        AffineSystem::stack(
            self.y_space().clone(),
            vec![
                (DMatrix::identity(m, m), DVector::zeros(m), self.k.dual()),
                (g_c, off_c, self.cone_c.dual()),
            ],
        )
        .expect("consistent program blocks")
    }

    pub fn system(&self, side: Side) -> AffineSystem {
        match side {
            Side::Primal => self.primal_system(),
            Side::Dual => self.dual_system(),
        }
    }
}

/// A conic system `{x : G x + g in K}` over a variable space.
///
/// Polar views are folded into the rows so the stored cone is never negated.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineSystem {
    var_space: EuclideanSpace,
    g: DMatrix<f64>,
    offset: DVector<f64>,
    cone: Cone,
}

impl AffineSystem {
    pub fn new(var_space: EuclideanSpace, g: DMatrix<f64>, offset: DVector<f64>, cone: Cone) -> Result<Self> {
        if g.ncols() != var_space.dim() {
            return Err(Error::dims("system columns", var_space.dim(), g.ncols()));
        }
        if g.nrows() != cone.dim() {
            return Err(Error::dims("system rows", cone.dim(), g.nrows()));
        }
        cone.space().check("system offset", &offset)?;
        if cone.is_negated() {
            return Ok(AffineSystem {
                var_space,
                g: -g,
                offset: -offset,
                cone: cone.unsigned(),
            });
        }
        Ok(AffineSystem {
            var_space,
            g,
            offset,
            cone,
        })
    }

    /// Stacks row blocks `(G_i, g_i, K_i)`.
    pub fn stack(var_space: EuclideanSpace, blocks: Vec<(DMatrix<f64>, DVector<f64>, Cone)>) -> Result<Self> {
        let n = var_space.dim();
        let rows: usize = blocks.iter().map(|b| b.0.nrows()).sum();
        let mut g = DMatrix::zeros(rows, n);
        let mut off = DVector::zeros(rows);
        let mut cones = Vec::new();
        let mut r = 0;
        for (gi, oi, ki) in blocks {
            if gi.ncols() != n {
                return Err(Error::dims("block columns", n, gi.ncols()));
            }
            if gi.nrows() != ki.dim() || oi.len() != ki.dim() {
                return Err(Error::dims("block rows", ki.dim(), gi.nrows()));
            }
            let sign = if ki.is_negated() { -1.0 } else { 1.0 };
            g.rows_mut(r, gi.nrows()).copy_from(&(gi * sign));
            off.rows_mut(r, oi.len()).copy_from(&(oi * sign));
            r += ki.dim();
            cones.push(ki.unsigned());
        }
        AffineSystem::new(var_space, g, off, Cone::product(&cones)?)
    }

    pub fn var_space(&self) -> &EuclideanSpace {
        &self.var_space
    }

    pub fn g(&self) -> &DMatrix<f64> {
        &self.g
    }

    pub fn offset(&self) -> &DVector<f64> {
        &self.offset
    }

    pub fn cone(&self) -> &Cone {
        &self.cone
    }

    pub fn eval(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.g * x + &self.offset
    }

    /// The same rows with the offset dropped (the recession system).
    pub fn homogeneous(&self) -> AffineSystem {
        AffineSystem {
            offset: DVector::zeros(self.offset.len()),
            ..self.clone()
        }
    }

    /// Appends rows `G2 x + g2 in K2`.
    pub fn with_rows(&self, g2: DMatrix<f64>, off2: DVector<f64>, k2: Cone) -> Result<AffineSystem> {
        AffineSystem::stack(
            self.var_space.clone(),
            vec![(self.g.clone(), self.offset.clone(), self.cone.clone()), (g2, off2, k2)],
        )
    }

    /// Appends the linear equations `E x = 0`.
    pub fn with_equations(&self, e: DMatrix<f64>) -> Result<AffineSystem> {
        if e.nrows() == 0 {
            return Ok(self.clone());
        }
        let k = e.nrows();
        self.with_rows(e, DVector::zeros(k), Cone::zero(k))
    }

    pub fn contains(&self, x: &DVector<f64>, tol: f64) -> bool {
        x.len() == self.var_space.dim() && self.cone.member(&self.eval(x), tol)
    }

    pub fn strictly_contains(&self, x: &DVector<f64>, tol: f64) -> bool {
        x.len() == self.var_space.dim() && self.cone.relint_member(&self.eval(x), tol)
    }

    /// Projects `x` onto the affine set cut out by the Zero-cone rows.
    pub fn polish_equalities(&self, x: &DVector<f64>) -> DVector<f64> {
        let rows: Vec<usize> = self
            .cone
            .blocks()
            .filter(|(c, _, _)| *c == FactorCone::Zero)
            .flat_map(|(_, _, r)| r)
            .collect();
        if rows.is_empty() {
            return x.clone();
        }
        let ge = self.g.select_rows(rows.iter());
        let resid = &ge * x + self.offset.select_rows(rows.iter());
        let svd = ge.svd(true, true);
        match svd.solve(&resid, 1e-12) {
            Ok(dx) => x - dx,
            Err(_) => x.clone(),
        }
    }
}

/// The feasibility cones `C_p = A(C) + K` and `C_d = A*(K*) - C*` of a
/// sup-form program; membership is decided through the feasibility oracle.
#[derive(Clone, Debug)]
pub struct FeasibilityCones {
    program: ConicProgram,
}

impl FeasibilityCones {
    pub fn new(p: &ConicProgram) -> Self {
        FeasibilityCones { program: p.sup_form().0 }
    }

    /// System whose solvability decides `b' in C_p`.
    pub fn primal_system(&self, b: &DVector<f64>) -> Result<AffineSystem> {
        Ok(self.program.with_b(b.clone())?.primal_system())
    }

    /// System whose solvability decides `c' in C_d`.
    pub fn dual_system(&self, c: &DVector<f64>) -> Result<AffineSystem> {
        Ok(self.program.with_c(c.clone())?.dual_system())
    }

    /// `A x + s` for `x in C`, `s in K`: a point of `C_p` by construction.
    pub fn primal_point(&self, x: &DVector<f64>, s: &DVector<f64>) -> DVector<f64> {
        self.program.a.apply(x) + s
    }

    /// `A* y - w` for `y in K*`, `w in C*`: a point of `C_d` by construction.
    pub fn dual_point(&self, y: &DVector<f64>, w: &DVector<f64>) -> DVector<f64> {
        self.program.a.matrix().tr_mul(y) - w
    }
}

/// `Lp(a, a0) = (A a + a0 b, -a)` and `Ld(b, b0) = (A* b + b0 c, b)` of a
/// sup-form program, with their adjoints.
#[derive(Clone, Debug)]
pub struct PairedMaps {
    pub lp: LinearMap,
    pub ld: LinearMap,
    a: DMatrix<f64>,
    b: DVector<f64>,
    c: DVector<f64>,
}

impl PairedMaps {
    pub fn new(p: &ConicProgram) -> Self {
        let (q, _) = p.sup_form();
        let a = q.a().clone();
        let (m, n) = a.shape();
        let one = EuclideanSpace::real(1);
        let x1 = q.x_space().product(&one);
        let y1 = q.y_space().product(&one);
        let yx = q.y_space().product(q.x_space());
        let xy = q.x_space().product(q.y_space());

        let mut lp = DMatrix::zeros(m + n, n + 1);
        lp.view_mut((0, 0), (m, n)).copy_from(&a);
        lp.view_mut((0, n), (m, 1)).copy_from(q.b());
        lp.view_mut((m, 0), (n, n)).copy_from(&(-DMatrix::<f64>::identity(n, n)));

        let mut ld = DMatrix::zeros(n + m, m + 1);
        ld.view_mut((0, 0), (n, m)).copy_from(&a.transpose());
        ld.view_mut((0, m), (n, 1)).copy_from(q.c());
        ld.view_mut((n, 0), (m, m)).copy_from(&DMatrix::<f64>::identity(m, m));

        PairedMaps {
            lp: LinearMap::new(x1, yx, lp).expect("shapes match"),
            ld: LinearMap::new(y1, xy, ld).expect("shapes match"),
            a,
            b: q.b().clone(),
            c: q.c().clone(),
        }
    }

    /// `Lp*(y, w) = (A* y - w, <b, y>)`.
    pub fn lp_adjoint(&self, y: &DVector<f64>, w: &DVector<f64>) -> (DVector<f64>, f64) {
        (self.a.tr_mul(y) - w, self.b.dot(y))
    }

    /// `Ld*(x, s) = (A x + s, <c, x>)`.
    pub fn ld_adjoint(&self, x: &DVector<f64>, s: &DVector<f64>) -> (DVector<f64>, f64) {
        (&self.a * x + s, self.c.dot(x))
    }
}

/// Dual program built from an orthonormal basis `B = {v_j}` of span(C):
/// the adjoint is replaced by `A_B y = sum_j <A v_j, y> v_j`.
pub fn dual_via_basis(p: &ConicProgram, basis: &Subspace) -> Result<ConicProgram> {
    if basis.ambient() != p.x_space() {
        return Err(Error::dims("basis ambient", p.x_space().dim(), basis.ambient().dim()));
    }
    if !basis.equals(&p.c_cone().span()) {
        return Err(Error::Precondition("basis does not span span(C)".into()));
    }
    let v = basis.basis();
    let gram = v.transpose() * v;
    let k = v.ncols();
    if k > 0 && (gram - DMatrix::<f64>::identity(k, k)).abs().max() > 1e-9 {
        return Err(Error::Precondition("basis is not orthonormal".into()));
    }
    let ab = v * (v.transpose() * p.a().transpose());
    let map = LinearMap::new(p.y_space().clone(), p.x_space().clone(), ab)?;
    ConicProgram::new(map, p.c().clone(), p.b().clone(), p.c_cone().dual(), p.k_cone().dual(), p.sense().flip())
}

/// Checks feasibility of both points and returns the duality gap, oriented
/// so that weak duality says it is nonnegative.
pub fn weak_duality_check(p: &ConicProgram, x: &DVector<f64>, y: &DVector<f64>, tol: f64) -> Result<f64> {
    if !p.is_primal_feasible(x, tol) {
        return Err(Error::Infeasible("x is not primal feasible".into()));
    }
    if !p.is_dual_feasible(y, tol) {
        return Err(Error::Infeasible("y is not dual feasible".into()));
    }
    Ok(duality_gap(p, x, y))
}

pub(crate) fn duality_gap(p: &ConicProgram, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
    let (px, dy) = (p.objective(x), p.dual_objective(y));
    match p.sense() {
        Sense::Sup => dy - px,
        Sense::Inf => px - dy,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SlacknessResiduals {
    /// `<y, slack(x)>`.
    pub r1: f64,
    /// `<x, dual_slack(y)>`.
    pub r2: f64,
    /// The duality gap; equals `r1 + r2` up to round-off.
    pub gap: f64,
}

impl SlacknessResiduals {
    pub fn both_zero(&self, tol: f64) -> bool {
        self.r1.abs() <= tol && self.r2.abs() <= tol
    }
}

pub fn complementary_slackness(p: &ConicProgram, x: &DVector<f64>, y: &DVector<f64>) -> SlacknessResiduals {
    SlacknessResiduals {
        r1: y.dot(&p.slack(x)),
        r2: x.dot(&p.dual_slack(y)),
        gap: duality_gap(p, x, y),
    }
}

/// The four subspace screens that certify infeasibility of one side.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Screen {
    /// `A(span C) ⊆ span K` but `b ∉ span K`.
    RhsOutsideSpanK,
    /// `span K ⊆ A(span C)` but `b ∉ A(span C)`.
    RhsOutsideImage,
    /// `A*((lin K)^⊥) ⊆ (lin C)^⊥` but `c ∉ (lin C)^⊥`.
    ObjectiveOffLinC,
    /// `(lin C)^⊥ ⊆ A*((lin K)^⊥)` but `c ∉ A*((lin K)^⊥)`.
    ObjectiveOutsideImage,
}

impl Screen {
    /// The side proven infeasible when the screen fires.
    pub fn side(self) -> Side {
        match self {
            Screen::RhsOutsideSpanK | Screen::RhsOutsideImage => Side::Primal,
            _ => Side::Dual,
        }
    }
}

pub fn necessary_feasibility_screens(p: &ConicProgram) -> Vec<Screen> {
    let (q, _) = p.sup_form();
    let tol = 1e-9;
    let span_k = q.k_cone().span();
    let image_c = q.map().image(&q.c_cone().span());
    let lin_c_perp = q.c_cone().lineality().complement();
    let adj_lin_k = q.map().adjoint().image(&q.k_cone().lineality().complement());
    let mut out = Vec::new();
    if image_c.is_subset_of(&span_k) && !span_k.contains(q.b(), tol) {
        out.push(Screen::RhsOutsideSpanK);
    }
    if span_k.is_subset_of(&image_c) && !image_c.contains(q.b(), tol) {
        out.push(Screen::RhsOutsideImage);
    }
    if adj_lin_k.is_subset_of(&lin_c_perp) && !lin_c_perp.contains(q.c(), tol) {
        out.push(Screen::ObjectiveOffLinC);
    }
    if lin_c_perp.is_subset_of(&adj_lin_k) && !adj_lin_k.contains(q.c(), tol) {
        out.push(Screen::ObjectiveOutsideImage);
    }
    out
}

/// Default tolerance for feasibility checks on user-supplied points.
pub const POINT_TOL: f64 = MEMBER_TOL;

#[cfg(test)]
mod tests {
    use super::*;

    fn lp() -> ConicProgram {
        ConicProgram::from_dense(
            DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, -1.0]),
            DVector::from_vec(vec![2.0, 1.0]),
            DVector::from_vec(vec![1.0, 0.5]),
            Cone::nonneg(2),
            Cone::nonneg(2),
            Sense::Sup,
        )
        .unwrap()
    }

    #[test]
    fn dualize_is_involution() {
        let p = lp();
        let d = p.dualize();
        assert_eq!(d.sense(), Sense::Inf);
        assert_eq!(d.a(), &p.a().transpose());
        assert_eq!(d.dualize(), p);
    }

    #[test]
    fn sup_form_preserves_feasible_set() {
        let d = lp().dualize();
        let (q, s) = d.sup_form();
        assert_eq!(s, -1.0);
        let y = DVector::from_vec(vec![1.0, 0.5]);
        assert_eq!(d.is_primal_feasible(&y, 1e-9), q.is_primal_feasible(&y, 1e-9));
        assert!(d.is_primal_feasible(&y, 1e-9));
    }

    #[test]
    fn paired_map_adjoints_match_formulas() {
        let p = lp();
        let pm = PairedMaps::new(&p);
        let y = DVector::from_vec(vec![0.3, -1.2]);
        let w = DVector::from_vec(vec![2.0, 0.7]);
        let (v, t) = pm.lp_adjoint(&y, &w);
        let mut yw = DVector::zeros(4);
        yw.rows_mut(0, 2).copy_from(&y);
        yw.rows_mut(2, 2).copy_from(&w);
        let adj = pm.lp.adjoint().apply(&yw);
        assert!((adj.rows(0, 2) - v).norm() < 1e-14);
        assert!((adj[2] - t).abs() < 1e-14);
    }

    #[test]
    fn screen_fires_for_zero_cone_rhs() {
        let p = ConicProgram::from_dense(
            DMatrix::zeros(2, 2),
            DVector::from_vec(vec![1.0, 0.0]),
            DVector::zeros(2),
            Cone::zero(2),
            Cone::nonneg(2),
            Sense::Sup,
        )
        .unwrap();
        let s = necessary_feasibility_screens(&p);
        assert!(s.contains(&Screen::RhsOutsideSpanK));
    }

    #[test]
    fn slackness_identity() {
        let p = lp();
        let x = DVector::from_vec(vec![1.0, 0.5]);
        let y = DVector::from_vec(vec![1.0, 0.5]);
        let r = complementary_slackness(&p, &x, &y);
        assert!((r.r1 + r.r2 - r.gap).abs() < 1e-12);
    }

    #[test]
    fn both_free_is_rejected() {
        let r = ConicProgram::from_dense(
            DMatrix::zeros(1, 1),
            DVector::zeros(1),
            DVector::zeros(1),
            Cone::free(1),
            Cone::free(1),
            Sense::Sup,
        );
        assert!(r.is_err());
    }
}
