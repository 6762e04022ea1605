//! Projection of a primal feasible set onto a subspace `L` through the
//! projection cone `{(y,w) in K* x C* : A*y - w in L}`: every element
//! gives a valid inequality `<A*y - w, x> <= <b,y>` on the projection,
//! and for polyhedral data the extreme rays give all of them.

pub mod dd;
pub mod exact;
pub mod fm;

use nalgebra::{DMatrix, DVector};
use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use rand_distr::{Distribution, StandardNormal};
use serde_json::{json, Value};

use self::dd::{double_description, is_extreme, Generators};
use self::exact::{dot, nullspace, primitive, rat, to_f64, to_rat, Rat};
pub use self::fm::{fourier_motzkin, Canonical, ExactHRep, Inequality};
use crate::cones::{Cone, FactorCone};
use crate::diagnostics::{num, vec_json};
use crate::error::{Error, Result};
use crate::gallery::stream;
use crate::linalg::{EuclideanSpace, Subspace};
use crate::program::{AffineSystem, ConicProgram, Side};
use crate::solver::{conic_lp_value, strict_feasibility, MarginResult, SolverSettings};

/// Sign pattern of one coordinate of a polyhedral cone.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Coord {
    Zero,
    Free,
    Nonneg,
    Nonpos,
}

fn coords(cone: &Cone) -> Result<Vec<Coord>> {
    let mut out = Vec::with_capacity(cone.dim());
    for (f, _, range) in cone.blocks() {
        let c = match (f, cone.is_negated()) {
            (FactorCone::Zero, _) => Coord::Zero,
            (FactorCone::Free, _) => Coord::Free,
            (FactorCone::Nonneg, false) => Coord::Nonneg,
            (FactorCone::Nonneg, true) => Coord::Nonpos,
            (other, _) => return Err(Error::NotPolyhedral(format!("{other:?} factor"))),
        };
        out.extend(std::iter::repeat_n(c, range.len()));
    }
    Ok(out)
}

fn unit(dim: usize, i: usize, sign: i64) -> Vec<BigInt> {
    let mut e = vec![BigInt::zero(); dim];
    e[i] = sign.into();
    e
}

/// Membership constraints for coordinates `offset..offset + pattern.len()`
/// of a vector of length `dim`.
fn push_sign_rows(pattern: &[Coord], offset: usize, dim: usize, eq: &mut Vec<Vec<BigInt>>, ineq: &mut Vec<Vec<BigInt>>) {
    for (i, c) in pattern.iter().enumerate() {
        match c {
            Coord::Zero => eq.push(unit(dim, offset + i, 1)),
            Coord::Free => {}
            Coord::Nonneg => ineq.push(unit(dim, offset + i, 1)),
            Coord::Nonpos => ineq.push(unit(dim, offset + i, -1)),
        }
    }
}

/// Generators of a polyhedral cone given by its coordinate pattern.
fn push_sign_generators(pattern: &[Coord], dim: usize, out: &mut Vec<Vec<BigInt>>) {
    for (i, c) in pattern.iter().enumerate() {
        match c {
            Coord::Zero => {}
            Coord::Free => {
                out.push(unit(dim, i, 1));
                out.push(unit(dim, i, -1));
            }
            Coord::Nonneg => out.push(unit(dim, i, 1)),
            Coord::Nonpos => out.push(unit(dim, i, -1)),
        }
    }
}

fn dual_pattern(p: &[Coord]) -> Vec<Coord> {
    p.iter()
        .map(|c| match c {
            Coord::Zero => Coord::Free,
            Coord::Free => Coord::Zero,
            other => *other,
        })
        .collect()
}

/// Exact copy of a polyhedral program in sup form.
struct ExactProgram {
    a: Vec<Vec<Rat>>,
    b: Vec<Rat>,
    k: Vec<Coord>,
    c: Vec<Coord>,
}

impl ExactProgram {
    fn new(q: &ConicProgram) -> Result<Self> {
        let a = q
            .a()
            .row_iter()
            .map(|r| r.iter().map(|&v| rat(v)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        let b = q.b().iter().map(|&v| rat(v)).collect::<Result<Vec<_>>>()?;
        Ok(ExactProgram {
            a,
            b,
            k: coords(q.k_cone())?,
            c: coords(q.c_cone())?,
        })
    }

    fn m(&self) -> usize {
        self.b.len()
    }

    fn n(&self) -> usize {
        self.c.len()
    }

    fn adjoint(&self, y: &[Rat]) -> Vec<Rat> {
        (0..self.n())
            .map(|j| (0..self.m()).fold(Rat::zero(), |acc, i| acc + &self.a[i][j] * &y[i]))
            .collect()
    }

    fn apply(&self, x: &[Rat]) -> Vec<Rat> {
        self.a.iter().map(|row| dot(row, x)).collect()
    }
}

fn rational_basis(l: &Subspace) -> Result<Vec<Vec<Rat>>> {
    l.basis()
        .column_iter()
        .map(|c| c.iter().map(|&v| rat(v)).collect())
        .collect()
}

/// The projection cone over `(y, w)`, with its exact description when the
/// data is polyhedral.
#[derive(Clone, Debug)]
pub struct ProjectionCone {
    /// `y in K*`, `w in C*` and the `L` condition as an affine system.
    pub system: AffineSystem,
    pub m: usize,
    pub n: usize,
    exact: Option<ExactCone>,
}

#[derive(Clone, Debug)]
struct ExactCone {
    equalities: Vec<Vec<BigInt>>,
    inequalities: Vec<Vec<BigInt>>,
}

impl ProjectionCone {
    pub fn is_polyhedral(&self) -> bool {
        self.exact.is_some()
    }

    /// `y in K*`, `w in C*` and `A*y - w in L` up to `tol`.
    pub fn contains(&self, z: &DVector<f64>, tol: f64) -> bool {
        self.system.contains(z, tol)
    }
}

pub fn projection_cone(p: &ConicProgram, l: &Subspace) -> Result<ProjectionCone> {
    let q = p.side_program(Side::Primal);
    let (m, n) = q.a().shape();
    if l.ambient().dim() != n {
        return Err(Error::dims("subspace ambient", n, l.ambient().dim()));
    }
    let perp = l.complement();
    // N'(A'y - w) = 0.
    let nb = perp.basis();
    let mut eqs = DMatrix::zeros(nb.ncols(), m + n);
    eqs.view_mut((0, 0), (nb.ncols(), m)).copy_from(&(nb.transpose() * q.a().transpose()));
    eqs.view_mut((0, m), (nb.ncols(), n)).copy_from(&(-nb.transpose()));
    let cone = Cone::product(&[q.k_cone().dual(), q.c_cone().dual()])?;
    let space = q.y_space().product(q.x_space());
    let system = AffineSystem::new(space, DMatrix::identity(m + n, m + n), DVector::zeros(m + n), cone)?.with_equations(eqs)?;

    let exact = if q.is_polyhedral() {
        let ep = ExactProgram::new(&q)?;
        let mut equalities = Vec::new();
        let mut inequalities = Vec::new();
        push_sign_rows(&dual_pattern(&ep.k), 0, m + n, &mut equalities, &mut inequalities);
        push_sign_rows(&dual_pattern(&ep.c), m, m + n, &mut equalities, &mut inequalities);
        let lb = rational_basis(l)?;
        for nv in nullspace(&lb, n) {
            let mut row = ep.apply(&nv);
            row.extend(nv.iter().map(|v| -v));
            equalities.push(primitive(&row));
        }
        Some(ExactCone {
            equalities,
            inequalities,
        })
    } else {
        None
    };
    Ok(ProjectionCone { system, m, n, exact })
}

/// Generators of the projection cone. Errors for SOC/PSD factors.
pub fn extreme_rays_exact(pc: &ProjectionCone) -> Result<Generators> {
    let ex = pc
        .exact
        .as_ref()
        .ok_or_else(|| Error::NotPolyhedral("projection cone has SOC/PSD factors".into()))?;
    Ok(double_description(pc.m + pc.n, &ex.equalities, &ex.inequalities))
}

/// Generators as floating point `(y, w)` vectors: lineality directions in
/// both signs, then the extreme rays.
pub fn extreme_rays(pc: &ProjectionCone) -> Result<Vec<DVector<f64>>> {
    Ok(extreme_rays_exact(pc)?
        .all()
        .iter()
        .map(|g| DVector::from_iterator(g.len(), g.iter().map(|v| to_f64(&Rat::from_integer(v.clone())))))
        .collect())
}

/// Whether every generator returned for `pc` is extreme.
pub fn rays_are_extreme(pc: &ProjectionCone, g: &Generators) -> bool {
    let Some(ex) = &pc.exact else {
        return false;
    };
    g.rays
        .iter()
        .all(|r| is_extreme(r, pc.m + pc.n, g.lineality.len(), &ex.equalities, &ex.inequalities))
}

/// Strict feasibility of `{(y,w) in relint K* x relint C* : A*y - w in L}`.
pub fn precondition(p: &ConicProgram, l: &Subspace, settings: &SolverSettings) -> Result<MarginResult> {
    let pc = projection_cone(p, l)?;
    Ok(strict_feasibility(&pc.system, settings))
}

/// Exact form of the precondition for polyhedral data: some generator is
/// positive on every sign-constrained coordinate.
fn exact_precondition(pc: &ProjectionCone, g: &Generators) -> bool {
    let Some(ex) = &pc.exact else {
        return false;
    };
    let all = g.all();
    ex.inequalities.iter().all(|row| all.iter().any(|v| exact::int_dot(row, v).is_positive()))
}

#[derive(Clone, Debug)]
pub struct HRepresentation {
    /// Unit normals in the coordinates of `basis`.
    pub normals: Vec<DVector<f64>>,
    pub offsets: Vec<f64>,
    /// Orthonormal basis of `L`, one column per coordinate.
    pub basis: DMatrix<f64>,
    pub exact: bool,
    /// The generating `(y, w)` of each inequality.
    pub multipliers: Vec<DVector<f64>>,
    /// Exact inequalities (polyhedral mode).
    pub rational: Option<ExactHRep>,
}

impl HRepresentation {
    /// Largest violation `<normal, u> - offset` at `u` in `L`-coordinates.
    pub fn max_violation(&self, u: &DVector<f64>) -> f64 {
        self.normals
            .iter()
            .zip(&self.offsets)
            .map(|(a, b)| a.dot(u) - b)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn coordinates(&self, x: &DVector<f64>) -> DVector<f64> {
        self.basis.tr_mul(x)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "normals": self.normals.iter().map(vec_json).collect::<Vec<_>>(),
            "offsets": self.offsets.iter().map(|&v| num(v)).collect::<Vec<_>>(),
            "basis_of_L": self.basis.column_iter().map(|c| vec_json(&c.into_owned())).collect::<Vec<_>>(),
            "exact": self.exact,
        })
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ProjectOptions {
    /// Number of sampled elements of the projection cone (non-polyhedral).
    pub samples: usize,
    pub seed: u64,
}

impl Default for ProjectOptions {
    fn default() -> Self {
        ProjectOptions { samples: 64, seed: 0 }
    }
}

/// Unit-normal float rows, deduplicated at 1e-9; a constant row survives
/// only when it is infeasible.
fn push_float_row(out: &mut HRepresentation, normal: DVector<f64>, offset: f64, mult: DVector<f64>) {
    let s = normal.norm();
    let (normal, offset) = if s > 0.0 {
        (normal / s, offset / s)
    } else if offset < 0.0 {
        (normal, -1.0)
    } else {
        return;
    };
    let dup = out
        .normals
        .iter()
        .zip(&out.offsets)
        .any(|(a, b)| (a - &normal).amax() <= 1e-9 && (b - offset).abs() <= 1e-9);
    if !dup {
        out.normals.push(normal);
        out.offsets.push(offset);
        out.multipliers.push(mult);
    }
}

/// Inequality description of the projection of the primal feasible set
/// onto `L`, in coordinates of `L`'s orthonormal basis. Exact (rational)
/// for polyhedral data, otherwise a sampled outer approximation.
pub fn project(p: &ConicProgram, l: &Subspace, opts: &ProjectOptions, settings: &SolverSettings) -> Result<HRepresentation> {
    let q = p.side_program(Side::Primal);
    let pc = projection_cone(p, l)?;
    let (m, n) = (pc.m, pc.n);
    let basis = l.basis().clone();
    let mut out = HRepresentation {
        normals: Vec::new(),
        offsets: Vec::new(),
        basis: basis.clone(),
        exact: pc.is_polyhedral(),
        multipliers: Vec::new(),
        rational: None,
    };
    if pc.is_polyhedral() {
        let g = extreme_rays_exact(&pc)?;
        if !exact_precondition(&pc, &g) {
            return Err(Error::Precondition(
                "no (y, w) in relint K* x relint C* with A*y - w in L".into(),
            ));
        }
        let ep = ExactProgram::new(&q)?;
        let lb = rational_basis(l)?;
        let mut rows = Vec::new();
        for v in g.all() {
            let v = to_rat(&v);
            let (y, w) = v.split_at(m);
            let d: Vec<Rat> = ep.adjoint(y).iter().zip(w).map(|(a, b)| a - b).collect();
            let normal: Vec<Rat> = lb.iter().map(|bv| dot(bv, &d)).collect();
            let offset = dot(&ep.b, y);
            let fl = |u: &[Rat]| DVector::from_iterator(u.len(), u.iter().map(to_f64));
            push_float_row(&mut out, fl(&normal), to_f64(&offset), fl(&v));
            rows.push(Inequality::new(normal, offset));
        }
        out.rational = Some(ExactHRep::new(lb.len(), rows));
        return Ok(out);
    }

    let pre = strict_feasibility(&pc.system, settings);
    if pre.verdict.is_no() {
        return Err(Error::Precondition(
            "no (y, w) in relint K* x relint C* with A*y - w in L".into(),
        ));
    }
    // Sample the cone intersected with the unit ball.
    let d = m + n;
    let mut g = DMatrix::zeros(pc.system.cone().dim() + d + 1, d);
    g.view_mut((0, 0), (pc.system.cone().dim(), d)).copy_from(pc.system.g());
    g.view_mut((pc.system.cone().dim(), 0), (d, d)).copy_from(&DMatrix::identity(d, d));
    let mut off = DVector::zeros(pc.system.cone().dim() + d + 1);
    off[pc.system.cone().dim() + d] = 1.0;
    let cone = Cone::product(&[pc.system.cone().clone(), Cone::soc(d + 1)])?;
    let ball = AffineSystem::new(pc.system.var_space().clone(), g, off, cone)?;
    let mut rng = stream(opts.seed, "projection");
    // Samples are rescaled to unit norm before the membership check, and
    // rows whose normal is at noise level are dropped: near the origin the
    // solver's residual dominates the direction.
    let emit = |out: &mut HRepresentation, z: &DVector<f64>| {
        let s = z.norm();
        if s < 1e-6 {
            return;
        }
        let z = z / s;
        if !pc.contains(&z, settings.tol_cert) {
            return;
        }
        let (y, w) = (z.rows(0, m), z.rows(m, n));
        let normal = basis.tr_mul(&(q.a().tr_mul(&y) - w));
        let offset = q.b().dot(&y);
        if normal.norm() < 1e-4 && offset > -1e-4 {
            return;
        }
        push_float_row(out, normal, offset, z.clone());
    };
    if let Some(z) = &pre.witness {
        emit(&mut out, z);
    }
    for _ in 0..opts.samples {
        let obj = DVector::from_fn(d, |_, _| StandardNormal.sample(&mut rng));
        let v = conic_lp_value(&obj, &ball, settings);
        if let Some(z) = v.witness {
            emit(&mut out, &z);
        }
    }
    Ok(out)
}

/// The primal feasible set as exact linear inequalities in `x`.
pub fn polyhedron_of(p: &ConicProgram) -> Result<ExactHRep> {
    let q = p.side_program(Side::Primal);
    let ep = ExactProgram::new(&q)?;
    let n = ep.n();
    let mut rows = Vec::new();
    for (i, c) in ep.k.iter().enumerate() {
        // b_i - a_i x in K_i.
        let a = ep.a[i].clone();
        let neg: Vec<Rat> = a.iter().map(|v| -v).collect();
        let b = ep.b[i].clone();
        match c {
            Coord::Zero => {
                rows.push(Inequality::new(a, b.clone()));
                rows.push(Inequality::new(neg, -b));
            }
            Coord::Free => {}
            Coord::Nonneg => rows.push(Inequality::new(a, b)),
            Coord::Nonpos => rows.push(Inequality::new(neg, -b)),
        }
    }
    for (j, c) in ep.c.iter().enumerate() {
        let mut e = vec![Rat::zero(); n];
        e[j] = Rat::from_integer(1.into());
        let neg: Vec<Rat> = e.iter().map(|v| -v).collect();
        match c {
            Coord::Zero => {
                rows.push(Inequality::new(e, Rat::zero()));
                rows.push(Inequality::new(neg, Rat::zero()));
            }
            Coord::Free => {}
            Coord::Nonneg => rows.push(Inequality::new(neg, Rat::zero())),
            Coord::Nonpos => rows.push(Inequality::new(e, Rat::zero())),
        }
    }
    Ok(ExactHRep::new(n, rows))
}

/// Reference projection by Fourier-Motzkin: writes `x = B u + N v` with
/// `B` the basis of `L` and `N` a basis of its complement, then eliminates
/// `v`. Limited to eight variables.
pub fn project_by_elimination(p: &ConicProgram, l: &Subspace) -> Result<ExactHRep> {
    let h = polyhedron_of(p)?;
    let n = h.dim;
    if l.ambient().dim() != n {
        return Err(Error::dims("subspace ambient", n, l.ambient().dim()));
    }
    let lb = rational_basis(l)?;
    let nb = nullspace(&lb, n);
    let k = lb.len();
    let rows = h
        .rows
        .iter()
        .map(|r| {
            let normal = lb.iter().chain(&nb).map(|v| dot(v, &r.normal)).collect();
            Inequality::new(normal, r.offset.clone())
        })
        .collect();
    let lifted = ExactHRep::new(n, rows);
    let elim: Vec<usize> = (k..n).collect();
    fourier_motzkin(&lifted, &elim)
}

fn polar_of_generators(dim: usize, gens: &[Vec<BigInt>]) -> ExactHRep {
    let rows = gens
        .iter()
        .map(|g| Inequality::new(to_rat(g), Rat::zero()))
        .collect();
    ExactHRep::new(dim, rows)
}

/// `(rec X)°` from the generators of the recession cone
/// `{r : -A r in K, r in C}`.
pub fn recession_polar(p: &ConicProgram) -> Result<ExactHRep> {
    let q = p.side_program(Side::Primal);
    let ep = ExactProgram::new(&q)?;
    let (m, n) = (ep.m(), ep.n());
    let mut eq = Vec::new();
    let mut ineq = Vec::new();
    push_sign_rows(&ep.c, 0, n, &mut eq, &mut ineq);
    // -a_i r in K_i.
    let mut k_eq = Vec::new();
    let mut k_ineq = Vec::new();
    push_sign_rows(&ep.k, 0, m, &mut k_eq, &mut k_ineq);
    let map_row = |sel: &Vec<BigInt>| -> Vec<BigInt> {
        let i = sel.iter().position(|v| !v.is_zero()).expect("unit row");
        let row: Vec<Rat> = ep.a[i].iter().map(|v| -v * Rat::from_integer(sel[i].clone())).collect();
        primitive(&row)
    };
    eq.extend(k_eq.iter().map(map_row));
    ineq.extend(k_ineq.iter().map(map_row));
    let g = double_description(n, &eq, &ineq);
    Ok(polar_of_generators(n, &g.all()))
}

/// Closure of `A*(K*) - C*` as an inequality system, by converting its
/// generators with the double description method.
pub fn feasibility_cone_closure(p: &ConicProgram) -> Result<ExactHRep> {
    let q = p.side_program(Side::Primal);
    let ep = ExactProgram::new(&q)?;
    let (m, n) = (ep.m(), ep.n());
    let mut ky = Vec::new();
    push_sign_generators(&dual_pattern(&ep.k), m, &mut ky);
    let mut gens: Vec<Vec<BigInt>> = ky.iter().map(|y| primitive(&ep.adjoint(&to_rat(y)))).collect();
    let mut cw = Vec::new();
    push_sign_generators(&dual_pattern(&ep.c), n, &mut cw);
    gens.extend(cw.iter().map(|w| w.iter().map(|v| -v).collect::<Vec<BigInt>>()));
    gens.retain(|g| g.iter().any(|v| !v.is_zero()));
    // Facets of cone(G) are the generators of {h : <h, g> <= 0}.
    let neg: Vec<Vec<BigInt>> = gens.iter().map(|g| g.iter().map(|v| -v).collect()).collect();
    let dual = double_description(n, &[], &neg);
    Ok(polar_of_generators(n, &dual.all()))
}

/// Float view of an exact system.
pub fn to_float(h: &ExactHRep) -> (Vec<DVector<f64>>, Vec<f64>) {
    h.rows
        .iter()
        .map(|r| {
            (
                DVector::from_iterator(h.dim, r.normal.iter().map(to_f64)),
                to_f64(&r.offset),
            )
        })
        .unzip()
}

/// Orthonormal basis of the coordinate subspace spanned by `axes` of `n`
/// real coordinates.
pub fn coordinate_subspace(n: usize, axes: &[usize]) -> Subspace {
    Subspace::coordinate(&EuclideanSpace::real(n), axes)
}
