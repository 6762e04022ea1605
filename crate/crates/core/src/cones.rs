//! Products of the standard closed convex cones and their calculus.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{smat, svec, EuclideanSpace, Factor, Subspace};

/// Default membership tolerance; scaled by `1 + |x|` at each test.
pub const MEMBER_TOL: f64 = 1e-8;

/// Cap on the bisection interval of [`Cone::entry_threshold`].
pub const ENTRY_CAP: f64 = 1e8;
const ENTRY_ITERS: usize = 200;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FactorCone {
    /// `{0}`.
    Zero,
    /// The whole factor.
    Free,
    /// Nonnegative orthant.
    Nonneg,
    /// `{x : x_n >= |(x_1, ..., x_{n-1})|}`.
    #[serde(rename = "soc")]
    SecondOrder,
    /// Positive semidefinite matrices.
    Psd,
}

impl FactorCone {
    pub fn dual(self) -> FactorCone {
        match self {
            FactorCone::Zero => FactorCone::Free,
            FactorCone::Free => FactorCone::Zero,
            other => other,
        }
    }

    pub fn is_polyhedral(self) -> bool {
        matches!(self, FactorCone::Zero | FactorCone::Free | FactorCone::Nonneg)
    }

    fn accepts(self, factor: Factor) -> bool {
        match (self, factor) {
            (FactorCone::Zero | FactorCone::Free, _) => true,
            (FactorCone::Nonneg, Factor::Real(_)) => true,
            (FactorCone::SecondOrder, Factor::Real(n)) => n >= 2,
            (FactorCone::Psd, Factor::Sym(_)) => true,
            _ => false,
        }
    }

    /// Interiority of a single factor block; `+inf` for Zero and Free.
    fn margin(self, x: &[f64], factor: Factor) -> f64 {
        match self {
            FactorCone::Zero | FactorCone::Free => f64::INFINITY,
            FactorCone::Nonneg => x.iter().cloned().fold(f64::INFINITY, f64::min),
            FactorCone::SecondOrder => {
                let n = x.len();
                x[n - 1] - norm(&x[..n - 1])
            }
            FactorCone::Psd => {
                let Factor::Sym(m) = factor else { unreachable!() };
                min_eigenvalue(&smat(x, m))
            }
        }
    }

    fn project_into(self, x: &mut [f64], factor: Factor) {
        match self {
            FactorCone::Zero => x.iter_mut().for_each(|v| *v = 0.0),
            FactorCone::Free => {}
            FactorCone::Nonneg => x.iter_mut().for_each(|v| *v = v.max(0.0)),
            FactorCone::SecondOrder => project_soc(x),
            FactorCone::Psd => {
                let Factor::Sym(m) = factor else { unreachable!() };
                let p = project_psd(&smat(x, m));
                x.copy_from_slice(svec(&p).as_slice());
            }
        }
    }
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub(crate) fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    SymmetricEigen::new(m.clone())
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

pub(crate) fn project_soc(x: &mut [f64]) {
    let n = x.len();
    let t = x[n - 1];
    let r = norm(&x[..n - 1]);
    if r <= t {
        return;
    }
    if r <= -t {
        x.iter_mut().for_each(|v| *v = 0.0);
        return;
    }
    let a = 0.5 * (r + t);
    let s = a / r;
    for v in &mut x[..n - 1] {
        *v *= s;
    }
    x[n - 1] = a;
}

pub(crate) fn project_psd(m: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(m.clone());
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| l.max(0.0)));
    &eig.eigenvectors * d * eig.eigenvectors.transpose()
}

/// A point together with its interiority margin.
#[derive(Clone, Debug, PartialEq)]
pub struct ConeVerdictPoint {
    pub point: DVector<f64>,
    /// Smallest factor margin over the non-Zero, non-Free factors.
    pub margin: f64,
}

/// A product cone `s * (K_1 x ... x K_k)` with `s = -1` for polar views.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Cone {
    space: EuclideanSpace,
    factors: Vec<FactorCone>,
    negated: bool,
}

impl Cone {
    pub fn new(space: EuclideanSpace, factors: Vec<FactorCone>) -> Result<Self> {
        if factors.len() != space.factors().len() {
            return Err(Error::dims("cone factors", space.factors().len(), factors.len()));
        }
        for (k, f) in space.factors().iter().zip(&factors) {
            if !f.accepts(*k) {
                return Err(Error::InvalidCone(format!("{k:?} cannot carry factor {f:?}")));
            }
        }
        Ok(Cone {
            space,
            factors,
            negated: false,
        })
    }

    fn single(factor: Factor, cone: FactorCone) -> Self {
        Cone::new(EuclideanSpace::new(vec![factor]).expect("positive size"), vec![cone])
            .expect("factor accepts cone")
    }

    pub fn zero(n: usize) -> Self {
        Cone::single(Factor::Real(n), FactorCone::Zero)
    }

    pub fn free(n: usize) -> Self {
        Cone::single(Factor::Real(n), FactorCone::Free)
    }

    pub fn nonneg(n: usize) -> Self {
        Cone::single(Factor::Real(n), FactorCone::Nonneg)
    }

    pub fn soc(n: usize) -> Self {
        Cone::single(Factor::Real(n), FactorCone::SecondOrder)
    }

    pub fn psd(m: usize) -> Self {
        Cone::single(Factor::Sym(m), FactorCone::Psd)
    }

    /// Cartesian product; all parts must share the polar flag.
    pub fn product(parts: &[Cone]) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::InvalidCone("empty product".into()))?;
        let mut factors = Vec::new();
        let mut space_factors = Vec::new();
        for p in parts {
            if p.negated != first.negated {
                return Err(Error::InvalidCone("mixed polar flags in product".into()));
            }
            factors.extend_from_slice(&p.factors);
            space_factors.extend_from_slice(p.space.factors());
        }
        Ok(Cone {
            space: EuclideanSpace::new(space_factors)?,
            factors,
            negated: first.negated,
        })
    }

    pub fn space(&self) -> &EuclideanSpace {
        &self.space
    }

    pub fn factors(&self) -> &[FactorCone] {
        &self.factors
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    /// True for polar views `-K`.
    pub fn is_negated(&self) -> bool {
        self.negated
    }

    pub fn dual(&self) -> Cone {
        Cone {
            space: self.space.clone(),
            factors: self.factors.iter().map(|f| f.dual()).collect(),
            negated: self.negated,
        }
    }

    pub fn polar(&self) -> Cone {
        let mut d = self.dual();
        d.negated = !d.negated;
        d
    }

    /// The same cone with the polar flag cleared.
    pub fn unsigned(&self) -> Cone {
        Cone {
            negated: false,
            ..self.clone()
        }
    }

    /// Iterates `(factor cone, space factor, coordinate range)`.
    pub fn blocks(&self) -> impl Iterator<Item = (FactorCone, Factor, std::ops::Range<usize>)> + '_ {
        self.factors
            .iter()
            .zip(self.space.factors())
            .zip(self.space.ranges())
            .map(|((c, f), r)| (*c, *f, r))
    }

    fn oriented(&self, x: &DVector<f64>) -> DVector<f64> {
        if self.negated {
            -x
        } else {
            x.clone()
        }
    }

    /// Largest norm over the Zero factors.
    pub fn zero_residual(&self, x: &DVector<f64>) -> f64 {
        self.blocks()
            .filter(|(c, _, _)| *c == FactorCone::Zero)
            .map(|(_, _, r)| norm(&x.as_slice()[r]))
            .fold(0.0, f64::max)
    }

    /// Smallest interiority margin over the non-Zero, non-Free factors
    /// (`+inf` when there are none).
    pub fn margin(&self, x: &DVector<f64>) -> f64 {
        let x = self.oriented(x);
        self.blocks()
            .map(|(c, f, r)| c.margin(&x.as_slice()[r], f))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn verdict_point(&self, x: &DVector<f64>) -> ConeVerdictPoint {
        ConeVerdictPoint {
            point: x.clone(),
            margin: self.margin(x),
        }
    }

    pub fn member(&self, x: &DVector<f64>, tol: f64) -> bool {
        if x.len() != self.dim() {
            return false;
        }
        let t = tol * (1.0 + x.norm());
        self.zero_residual(x) <= t && self.margin(x) >= -t
    }

    pub fn relint_member(&self, x: &DVector<f64>, tol: f64) -> bool {
        if x.len() != self.dim() {
            return false;
        }
        let t = tol * (1.0 + x.norm());
        self.zero_residual(x) <= t && self.margin(x) >= t
    }

    pub fn lineality(&self) -> Subspace {
        self.coordinate_subspace(|c| c == FactorCone::Free)
    }

    pub fn span(&self) -> Subspace {
        self.coordinate_subspace(|c| c != FactorCone::Zero)
    }

    fn coordinate_subspace(&self, pick: impl Fn(FactorCone) -> bool) -> Subspace {
        let axes: Vec<usize> = self
            .blocks()
            .filter(|(c, _, _)| pick(*c))
            .flat_map(|(_, _, r)| r)
            .collect();
        Subspace::coordinate(&self.space, &axes)
    }

    pub fn is_pointed(&self) -> bool {
        !self.factors.contains(&FactorCone::Free)
    }

    pub fn is_subspace(&self) -> bool {
        self.factors
            .iter()
            .all(|c| matches!(c, FactorCone::Zero | FactorCone::Free))
    }

    pub fn is_polyhedral(&self) -> bool {
        self.factors.iter().all(|c| c.is_polyhedral())
    }

    /// Ones on Nonneg, `e_n` on SecondOrder, identity on Psd, zero elsewhere.
    pub fn canonical_relint_point(&self) -> DVector<f64> {
        let mut e = DVector::zeros(self.dim());
        for (c, f, r) in self.blocks() {
            match c {
                FactorCone::Zero | FactorCone::Free => {}
                FactorCone::Nonneg => r.for_each(|i| e[i] = 1.0),
                FactorCone::SecondOrder => e[r.end - 1] = 1.0,
                FactorCone::Psd => {
                    let Factor::Sym(m) = f else { unreachable!() };
                    let s = svec(&DMatrix::identity(m, m));
                    e.rows_mut(r.start, r.len()).copy_from(&s);
                }
            }
        }
        self.oriented(&e)
    }

    /// Euclidean projection onto the cone.
    pub fn project(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut y = self.oriented(x);
        for (c, f, r) in self.blocks() {
            c.project_into(&mut y.as_mut_slice()[r], f);
        }
        self.oriented(&y)
    }

    /// `sup{t >= 0 : x + t y in cone}` for `x` in the cone and `y` in its
    /// span but outside the cone.
    pub fn entry_threshold(&self, x: &DVector<f64>, y: &DVector<f64>) -> Result<f64> {
        self.space.check("x", x)?;
        self.space.check("y", y)?;
        if !self.member(x, MEMBER_TOL) {
            return Err(Error::Precondition("x is not in the cone".into()));
        }
        if !self.span().contains(y, MEMBER_TOL) {
            return Err(Error::Precondition("y is not in the span of the cone".into()));
        }
        let x = self.oriented(x);
        let y = self.oriented(y);
        let mut t = f64::INFINITY;
        for (c, f, r) in self.blocks() {
            let xs = &x.as_slice()[r.clone()];
            let ys = &y.as_slice()[r];
            let tf = match c {
                FactorCone::Zero | FactorCone::Free => f64::INFINITY,
                FactorCone::Nonneg => xs
                    .iter()
                    .zip(ys)
                    .filter(|(_, &yi)| yi < 0.0)
                    .map(|(&xi, &yi)| (-xi / yi).max(0.0))
                    .fold(f64::INFINITY, f64::min),
                FactorCone::SecondOrder => soc_threshold(xs, ys).unwrap_or_else(|| bisect(c, f, xs, ys)),
                FactorCone::Psd => bisect(c, f, xs, ys),
            };
            t = t.min(tf);
        }
        if t.is_infinite() || t >= ENTRY_CAP {
            return Err(Error::Unbounded { cap: ENTRY_CAP });
        }
        Ok(t)
    }

    /// `inf{d : y + d x in cone}` for `x` in the relative interior and `y`
    /// in the span. Zero when `y` already lies in the cone.
    pub fn relint_entry(&self, x: &DVector<f64>, y: &DVector<f64>) -> Result<f64> {
        if !self.relint_member(x, MEMBER_TOL) {
            return Err(Error::Precondition("x is not in the relative interior".into()));
        }
        if self.member(y, 0.0) {
            return Ok(0.0);
        }
        match self.entry_threshold(x, y) {
            Ok(t) if t > 0.0 => Ok(1.0 / t),
            Ok(_) => Err(Error::IdentityCheck("zero entry threshold from a relative interior point".into())),
            Err(Error::Unbounded { .. }) => Ok(0.0),
            Err(e) => Err(e),
        }
    }
}

/// Largest root of `x_n + t y_n - |x' + t y'|` on `t >= 0`, if it can be
/// resolved in closed form.
fn soc_threshold(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len();
    let (xt, yt) = (x[n - 1], y[n - 1]);
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(u, v)| u * v).sum::<f64>();
    let qa = yt * yt - dot(&y[..n - 1], &y[..n - 1]);
    let qb = 2.0 * (xt * yt - dot(&x[..n - 1], &y[..n - 1]));
    let qc = xt * xt - dot(&x[..n - 1], &x[..n - 1]);
    let f = |t: f64| {
        let head: Vec<f64> = x[..n - 1].iter().zip(&y[..n - 1]).map(|(a, b)| a + t * b).collect();
        xt + t * yt - norm(&head)
    };
    let mut roots = Vec::new();
    if qa.abs() > 1e-14 * (1.0 + qb.abs() + qc.abs()) {
        let disc = qb * qb - 4.0 * qa * qc;
        if disc < 0.0 {
            return None;
        }
        let sq = disc.sqrt();
        // Stable pair of roots.
        let q = -0.5 * (qb + qb.signum() * sq);
        if q != 0.0 {
            roots.push(q / qa);
            roots.push(qc / q);
        } else {
            roots.push(0.0);
        }
    } else if qb.abs() > 0.0 {
        roots.push(-qc / qb);
    } else {
        return None;
    }
    let scale = 1.0 + norm(x);
    let t = roots
        .into_iter()
        .filter(|&t| t.is_finite() && t >= -1e-12 && xt + t * yt >= -1e-9 * scale)
        .map(|t| t.max(0.0))
        .fold(None, |acc: Option<f64>, t| Some(acc.map_or(t, |a| a.max(t))))?;
    let tol = 1e-9 * (1.0 + norm(x) + t * norm(y));
    if f(t).abs() <= tol && f(t + 1e-6 * (1.0 + t)) < 0.0 {
        Some(t)
    } else if f(0.0) <= tol && f(1e-9) < 0.0 {
        Some(0.0)
    } else {
        None
    }
}

fn bisect(c: FactorCone, f: Factor, x: &[f64], y: &[f64]) -> f64 {
    let inside = |t: f64| {
        let p: Vec<f64> = x.iter().zip(y).map(|(a, b)| a + t * b).collect();
        c.margin(&p, f) >= 0.0
    };
    if inside(ENTRY_CAP) {
        return f64::INFINITY;
    }
    let (mut lo, mut hi) = (0.0, ENTRY_CAP);
    for _ in 0..ENTRY_ITERS {
        let mid = 0.5 * (lo + hi);
        if inside(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(x)
    }

    #[test]
    fn origin_membership() {
        assert!(Cone::soc(3).member(&v(&[0.0, 0.0, 0.0]), MEMBER_TOL));
        assert!(!Cone::soc(3).relint_member(&v(&[0.0, 0.0, 0.0]), MEMBER_TOL));
        assert!(Cone::zero(2).relint_member(&v(&[0.0, 0.0]), MEMBER_TOL));
    }

    #[test]
    fn dual_and_polar() {
        let c = Cone::product(&[Cone::zero(2), Cone::nonneg(3)]).unwrap();
        let d = c.dual();
        assert_eq!(d.factors(), &[FactorCone::Free, FactorCone::Nonneg]);
        assert_eq!(d.dual(), c);
        assert_eq!(Cone::soc(4).dual(), Cone::soc(4));
        let p = Cone::nonneg(2).polar();
        assert!(p.member(&v(&[-1.0, -2.0]), MEMBER_TOL));
        assert!(!p.member(&v(&[1.0, -2.0]), MEMBER_TOL));
        assert_eq!(p.polar(), Cone::nonneg(2));
    }

    #[test]
    fn lineality_and_span() {
        let f = Cone::free(3);
        assert!(f.lineality().is_full() && f.span().is_full());
        let c = Cone::product(&[Cone::nonneg(2), Cone::free(1)]).unwrap();
        assert_eq!(c.lineality().dim(), 1);
        assert!(!c.is_pointed());
        let z = Cone::product(&[Cone::zero(2), Cone::nonneg(2)]).unwrap();
        assert!(z.dual().span().equals(&z.lineality().complement()));
    }

    #[test]
    fn canonical_points() {
        assert_eq!(Cone::nonneg(3).canonical_relint_point(), v(&[1.0, 1.0, 1.0]));
        let s = Cone::soc(4);
        let e = s.canonical_relint_point();
        assert_eq!(e, v(&[0.0, 0.0, 0.0, 1.0]));
        assert!((s.margin(&e) - 1.0).abs() < 1e-15);
        let p = Cone::psd(2);
        assert!((p.margin(&p.canonical_relint_point()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn projections() {
        assert_eq!(Cone::nonneg(2).project(&v(&[-1.0, 2.0])), v(&[0.0, 2.0]));
        let p = Cone::soc(2).project(&v(&[1.0, 0.0]));
        assert!((p - v(&[0.5, 0.5])).norm() < 1e-15);
        let d = svec(&DMatrix::from_diagonal(&v(&[-1.0, 3.0])));
        let q = Cone::psd(2).project(&d);
        let expect = svec(&DMatrix::from_diagonal(&v(&[0.0, 3.0])));
        assert!((q - expect).norm() < 1e-12);
    }

    #[test]
    fn entry_thresholds() {
        let c = Cone::nonneg(2);
        let y = v(&[-0.5, 1.0]);
        assert!((c.entry_threshold(&v(&[1.0, 0.0]), &y).unwrap() - 2.0).abs() < 1e-15);
        assert_eq!(c.entry_threshold(&v(&[0.0, 1.0]), &y).unwrap(), 0.0);
        let s = Cone::soc(2);
        let t = s.entry_threshold(&v(&[0.0, 1.0]), &v(&[1.0, 0.0])).unwrap();
        assert!((t - 1.0).abs() < 1e-12);
        assert!(matches!(
            c.entry_threshold(&v(&[1.0, 1.0]), &v(&[1.0, 0.0])),
            Err(Error::Unbounded { .. })
        ));
    }

    #[test]
    fn psd_threshold_by_bisection() {
        let c = Cone::psd(2);
        let x = svec(&DMatrix::identity(2, 2));
        let y = svec(&DMatrix::from_diagonal(&v(&[-0.25, 1.0])));
        let t = c.entry_threshold(&x, &y).unwrap();
        assert!((t - 4.0).abs() < 1e-6);
        assert!((c.relint_entry(&x, &y).unwrap() - 0.25).abs() < 1e-6);
    }

    #[test]
    fn rejects_misplaced_factors() {
        let sym = EuclideanSpace::new(vec![Factor::Sym(2)]).unwrap();
        assert!(Cone::new(sym, vec![FactorCone::SecondOrder]).is_err());
        assert!(Cone::new(EuclideanSpace::real(1), vec![FactorCone::SecondOrder]).is_err());
        assert!(Cone::new(EuclideanSpace::real(2), vec![FactorCone::Psd]).is_err());
    }
}
