//! Euclidean spaces as explicit products of real and symmetric-matrix
//! factors, dense linear maps between them, and orthonormal subspace
//! arithmetic.

use std::ops::Range;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Singular values below `RANK_TOL * max(sigma_max, 1)` count as zero.
pub const RANK_TOL: f64 = 1e-9;

/// One factor of a product space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Factor {
    /// `R^n`.
    Real(usize),
    /// Symmetric `m x m` matrices, stored as `m(m+1)/2` coordinates.
    Sym(usize),
}

impl Factor {
    pub fn dim(&self) -> usize {
        match *self {
            Factor::Real(n) => n,
            Factor::Sym(m) => m * (m + 1) / 2,
        }
    }
}

/// A finite-dimensional inner-product space `E = F_1 x ... x F_k`.
///
/// Coordinates are chosen so the embedding is an isometry; the inner product
/// of two points is the plain dot product of their coordinate vectors.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct EuclideanSpace {
    factors: Vec<Factor>,
    dim: usize,
}

impl EuclideanSpace {
    pub fn new(factors: Vec<Factor>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidSpace("a space needs at least one factor".into()));
        }
        for f in &factors {
            let size = match *f {
                Factor::Real(n) => n,
                Factor::Sym(m) => m,
            };
            if size == 0 {
                return Err(Error::InvalidSpace(format!("factor {f:?} has zero size")));
            }
        }
        let dim = factors.iter().map(Factor::dim).sum();
        Ok(EuclideanSpace { factors, dim })
    }

    /// `R^n` as a single factor.
    pub fn real(n: usize) -> Self {
        EuclideanSpace::new(vec![Factor::Real(n)]).expect("R^n with n >= 1")
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Coordinate range occupied by each factor.
    pub fn ranges(&self) -> Vec<Range<usize>> {
        let mut start = 0;
        self.factors
            .iter()
            .map(|f| {
                let r = start..start + f.dim();
                start = r.end;
                r
            })
            .collect()
    }

    /// The product space `self x other`.
    pub fn product(&self, other: &EuclideanSpace) -> EuclideanSpace {
        let mut factors = self.factors.clone();
        factors.extend_from_slice(&other.factors);
        EuclideanSpace::new(factors).expect("product of valid spaces")
    }

    pub fn zeros(&self) -> DVector<f64> {
        DVector::zeros(self.dim)
    }

    pub fn check(&self, what: &str, x: &DVector<f64>) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::dims(what, self.dim, x.len()));
        }
        Ok(())
    }
}

/// Coordinates of a symmetric matrix: lower triangle in column order with
/// off-diagonal entries scaled by `sqrt(2)`.
pub fn svec(m: &DMatrix<f64>) -> DVector<f64> {
    let n = m.nrows();
    let mut out = Vec::with_capacity(n * (n + 1) / 2);
    for j in 0..n {
        for i in j..n {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            out.push(if i == j { v } else { v * std::f64::consts::SQRT_2 });
        }
    }
    DVector::from_vec(out)
}

/// Inverse of [`svec`] for an `m x m` matrix.
pub fn smat(v: &[f64], m: usize) -> DMatrix<f64> {
    debug_assert_eq!(v.len(), m * (m + 1) / 2);
    let mut out = DMatrix::zeros(m, m);
    let mut k = 0;
    for j in 0..m {
        for i in j..m {
            if i == j {
                out[(i, i)] = v[k];
            } else {
                let x = v[k] / std::f64::consts::SQRT_2;
                out[(i, j)] = x;
                out[(j, i)] = x;
            }
            k += 1;
        }
    }
    out
}

/// Orthonormal basis (as columns) of the column span of `m`.
pub fn column_basis(m: &DMatrix<f64>) -> DMatrix<f64> {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return DMatrix::zeros(rows, 0);
    }
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let cut = RANK_TOL * smax.max(1.0);
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] > cut)
        .collect();
    let mut basis = DMatrix::zeros(rows, keep.len());
    for (k, &i) in keep.iter().enumerate() {
        basis.set_column(k, &u.column(i));
    }
    basis
}

/// Orthonormal basis of the orthogonal complement of the span of the
/// orthonormal columns `q` inside `R^n`.
fn complement_basis(q: &DMatrix<f64>, n: usize) -> DMatrix<f64> {
    let k = q.ncols();
    if k == 0 {
        return DMatrix::identity(n, n);
    }
    if k >= n {
        return DMatrix::zeros(n, 0);
    }
    let p = DMatrix::identity(n, n) - q * q.transpose();
    let eig = SymmetricEigen::new(p);
    let mut idx: Vec<usize> = (0..n).filter(|&i| eig.eigenvalues[i] > 0.5).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let mut basis = DMatrix::zeros(n, idx.len());
    for (c, &i) in idx.iter().enumerate() {
        basis.set_column(c, &eig.eigenvectors.column(i));
    }
    basis
}

/// A dense linear map between two Euclidean spaces.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearMap {
    domain: EuclideanSpace,
    codomain: EuclideanSpace,
    matrix: DMatrix<f64>,
}

impl LinearMap {
    pub fn new(domain: EuclideanSpace, codomain: EuclideanSpace, matrix: DMatrix<f64>) -> Result<Self> {
        if matrix.nrows() != codomain.dim() {
            return Err(Error::dims("map rows", codomain.dim(), matrix.nrows()));
        }
        if matrix.ncols() != domain.dim() {
            return Err(Error::dims("map columns", domain.dim(), matrix.ncols()));
        }
        Ok(LinearMap {
            domain,
            codomain,
            matrix,
        })
    }

    pub fn identity(space: &EuclideanSpace) -> Self {
        let n = space.dim();
        LinearMap {
            domain: space.clone(),
            codomain: space.clone(),
            matrix: DMatrix::identity(n, n),
        }
    }

    pub fn zero(domain: &EuclideanSpace, codomain: &EuclideanSpace) -> Self {
        LinearMap {
            domain: domain.clone(),
            codomain: codomain.clone(),
            matrix: DMatrix::zeros(codomain.dim(), domain.dim()),
        }
    }

    pub fn domain(&self) -> &EuclideanSpace {
        &self.domain
    }

    pub fn codomain(&self) -> &EuclideanSpace {
        &self.codomain
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.matrix * x
    }

    pub fn adjoint(&self) -> LinearMap {
        LinearMap {
            domain: self.codomain.clone(),
            codomain: self.domain.clone(),
            matrix: self.matrix.transpose(),
        }
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &LinearMap) -> Result<LinearMap> {
        if inner.codomain != self.domain {
            return Err(Error::dims("composition", self.domain.dim(), inner.codomain.dim()));
        }
        Ok(LinearMap {
            domain: inner.domain.clone(),
            codomain: self.codomain.clone(),
            matrix: &self.matrix * &inner.matrix,
        })
    }

    pub fn kernel(&self) -> Subspace {
        let row_space = column_basis(&self.matrix.transpose());
        Subspace {
            ambient: self.domain.clone(),
            basis: complement_basis(&row_space, self.domain.dim()),
        }
    }

    pub fn range(&self) -> Subspace {
        Subspace {
            ambient: self.codomain.clone(),
            basis: column_basis(&self.matrix),
        }
    }

    pub fn rank(&self) -> usize {
        column_basis(&self.matrix).ncols()
    }

    /// Image `M(L)` of a subspace of the domain.
    pub fn image(&self, l: &Subspace) -> Subspace {
        Subspace {
            ambient: self.codomain.clone(),
            basis: column_basis(&(&self.matrix * &l.basis)),
        }
    }

    /// Preimage `M^{-1}(L)` of a subspace of the codomain.
    pub fn preimage(&self, l: &Subspace) -> Subspace {
        let perp = l.complement();
        let m = perp.basis.transpose() * &self.matrix;
        let row_space = column_basis(&m.transpose());
        Subspace {
            ambient: self.domain.clone(),
            basis: complement_basis(&row_space, self.domain.dim()),
        }
    }
}

/// A linear subspace described by an orthonormal basis (columns).
#[derive(Clone, Debug)]
pub struct Subspace {
    ambient: EuclideanSpace,
    basis: DMatrix<f64>,
}

impl Subspace {
    pub fn zero(ambient: &EuclideanSpace) -> Self {
        Subspace {
            ambient: ambient.clone(),
            basis: DMatrix::zeros(ambient.dim(), 0),
        }
    }

    pub fn full(ambient: &EuclideanSpace) -> Self {
        let n = ambient.dim();
        Subspace {
            ambient: ambient.clone(),
            basis: DMatrix::identity(n, n),
        }
    }

    /// The span of the columns of `vectors` (any spanning set).
    pub fn span(ambient: &EuclideanSpace, vectors: &DMatrix<f64>) -> Result<Self> {
        if vectors.nrows() != ambient.dim() {
            return Err(Error::dims("spanning vectors", ambient.dim(), vectors.nrows()));
        }
        Ok(Subspace {
            ambient: ambient.clone(),
            basis: column_basis(vectors),
        })
    }

    /// Span of a set of coordinate axes.
    pub fn coordinate(ambient: &EuclideanSpace, axes: &[usize]) -> Self {
        let mut basis = DMatrix::zeros(ambient.dim(), axes.len());
        for (k, &i) in axes.iter().enumerate() {
            basis[(i, k)] = 1.0;
        }
        Subspace {
            ambient: ambient.clone(),
            basis,
        }
    }

    /// Accepts `basis` only if its columns are orthonormal to `tol`.
    pub fn from_orthonormal(ambient: &EuclideanSpace, basis: DMatrix<f64>, tol: f64) -> Result<Self> {
        if basis.nrows() != ambient.dim() {
            return Err(Error::dims("basis rows", ambient.dim(), basis.nrows()));
        }
        let k = basis.ncols();
        let gram = basis.transpose() * &basis;
        let err = (gram - DMatrix::<f64>::identity(k, k)).abs().max();
        if k > 0 && err > tol {
            return Err(Error::Precondition(format!(
                "basis is not orthonormal (max Gram deviation {err:.3e})"
            )));
        }
        Ok(Subspace {
            ambient: ambient.clone(),
            basis,
        })
    }

    pub fn ambient(&self) -> &EuclideanSpace {
        &self.ambient
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn is_zero(&self) -> bool {
        self.dim() == 0
    }

    pub fn is_full(&self) -> bool {
        self.dim() == self.ambient.dim()
    }

    pub fn complement(&self) -> Subspace {
        Subspace {
            ambient: self.ambient.clone(),
            basis: complement_basis(&self.basis, self.ambient.dim()),
        }
    }

    /// Orthogonal projection onto the subspace.
    pub fn project(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.basis * (self.basis.transpose() * v)
    }

    /// Distance from `v` to the subspace.
    pub fn residual(&self, v: &DVector<f64>) -> f64 {
        (v - self.project(v)).norm()
    }

    /// `v` lies in the subspace up to `tol * (1 + |v|)`.
    pub fn contains(&self, v: &DVector<f64>, tol: f64) -> bool {
        self.residual(v) <= tol * (1.0 + v.norm())
    }

    /// Projector matrix `Q Q^T`.
    pub fn projector(&self) -> DMatrix<f64> {
        &self.basis * self.basis.transpose()
    }

    /// `self ⊆ other` (within the rank tolerance).
    pub fn is_subset_of(&self, other: &Subspace) -> bool {
        if self.dim() == 0 {
            return true;
        }
        let resid = &self.basis - other.projector() * &self.basis;
        resid.norm() <= 1e-7 * (1.0 + self.dim() as f64).sqrt()
    }

    pub fn equals(&self, other: &Subspace) -> bool {
        self.ambient == other.ambient
            && self.dim() == other.dim()
            && self.is_subset_of(other)
            && other.is_subset_of(self)
    }

    pub fn sum(&self, other: &Subspace) -> Subspace {
        let mut joined = DMatrix::zeros(self.ambient.dim(), self.dim() + other.dim());
        joined.columns_mut(0, self.dim()).copy_from(&self.basis);
        joined.columns_mut(self.dim(), other.dim()).copy_from(&other.basis);
        Subspace {
            ambient: self.ambient.clone(),
            basis: column_basis(&joined),
        }
    }

    pub fn intersection(&self, other: &Subspace) -> Subspace {
        self.complement().sum(&other.complement()).complement()
    }

    /// `self x other` inside the product of the ambient spaces.
    pub fn direct_sum(&self, other: &Subspace) -> Subspace {
        let n1 = self.ambient.dim();
        let n2 = other.ambient.dim();
        let mut basis = DMatrix::zeros(n1 + n2, self.dim() + other.dim());
        basis.view_mut((0, 0), (n1, self.dim())).copy_from(&self.basis);
        basis
            .view_mut((n1, self.dim()), (n2, other.dim()))
            .copy_from(&other.basis);
        Subspace {
            ambient: self.ambient.product(&other.ambient),
            basis,
        }
    }
}

/// `M*(L^⊥)`, checked against `(M^{-1}(L))^⊥` computed independently.
pub fn adjoint_image_of_complement(m: &LinearMap, l: &Subspace) -> Result<Subspace> {
    if l.ambient() != m.codomain() {
        return Err(Error::dims("subspace ambient", m.codomain().dim(), l.ambient().dim()));
    }
    let image = m.adjoint().image(&l.complement());
    let other = m.preimage(l).complement();
    if !image.equals(&other) {
        return Err(Error::IdentityCheck(format!(
            "adjoint image has dim {} but complement of preimage has dim {}",
            image.dim(),
            other.dim()
        )));
    }
    Ok(image)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space(n: usize) -> EuclideanSpace {
        EuclideanSpace::real(n)
    }

    #[test]
    fn svec_is_isometric() {
        let x = DMatrix::from_row_slice(3, 3, &[2.0, -1.0, 0.5, -1.0, 3.0, 4.0, 0.5, 4.0, -2.0]);
        let v = svec(&x);
        assert_eq!(v.len(), 6);
        assert!((v.norm() - x.norm()).abs() < 1e-12);
        assert_eq!(smat(v.as_slice(), 3), x);
    }

    #[test]
    fn svec_column_order() {
        let x = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 5.0]);
        let v = svec(&x);
        assert_eq!(v[0], 1.0);
        assert!((v[1] - 2.0 * std::f64::consts::SQRT_2).abs() < 1e-15);
        assert_eq!(v[2], 5.0);
    }

    #[test]
    fn transpose_adjoint() {
        let m = LinearMap::new(space(2), space(2), DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0])).unwrap();
        assert_eq!(m.adjoint().matrix(), &DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 1.0, 0.0]));
        let id = LinearMap::identity(&space(3));
        assert_eq!(id.adjoint(), id);
    }

    #[test]
    fn kernel_and_range_of_trivial_maps() {
        let z = LinearMap::zero(&space(2), &space(2));
        assert_eq!(z.kernel().dim(), 2);
        assert_eq!(z.range().dim(), 0);
        let id = LinearMap::identity(&space(3));
        assert_eq!(id.kernel().dim(), 0);
        assert_eq!(id.range().dim(), 3);
    }

    #[test]
    fn complement_is_involutive() {
        let l = Subspace::span(&space(4), &DMatrix::from_row_slice(4, 2, &[1.0, 0.0, 1.0, 1.0, 0.0, 2.0, 3.0, 0.0])).unwrap();
        let cc = l.complement().complement();
        assert!(l.equals(&cc));
        assert_eq!(l.complement().dim(), 2);
    }

    #[test]
    fn adjoint_image_extreme_cases() {
        let m = LinearMap::new(space(3), space(2), DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 1.0, 0.0, 1.0, 0.0])).unwrap();
        let full = Subspace::full(&space(2));
        assert!(adjoint_image_of_complement(&m, &full).unwrap().is_zero());
        let id = LinearMap::identity(&space(3));
        let zero = Subspace::zero(&space(3));
        assert!(adjoint_image_of_complement(&id, &zero).unwrap().is_full());
    }

    #[test]
    fn rejects_bad_spaces() {
        assert!(EuclideanSpace::new(vec![]).is_err());
        assert!(EuclideanSpace::new(vec![Factor::Sym(0)]).is_err());
        let s = EuclideanSpace::new(vec![Factor::Real(2), Factor::Sym(3)]).unwrap();
        assert_eq!(s.dim(), 8);
        assert_eq!(s.ranges(), vec![0..2, 2..8]);
    }
}
