//! Exact inequality systems: Fourier-Motzkin elimination, LP-based
//! redundancy removal and a canonical form for comparing polyhedra.

use num_traits::{One, Signed, Zero};

use super::exact::{dot, lp_max, rref, LpOutcome, Rat};
use crate::error::{Error, Result};

pub const FM_MAX_VARS: usize = 8;
const FM_MAX_ROWS: usize = 20_000;

/// `normal . u <= offset`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Inequality {
    pub normal: Vec<Rat>,
    pub offset: Rat,
}

impl Inequality {
    pub fn new(normal: Vec<Rat>, offset: Rat) -> Self {
        Inequality { normal, offset }
    }

    fn as_row(&self) -> (Vec<Rat>, Rat) {
        (self.normal.clone(), self.offset.clone())
    }

    /// Positive rescaling so the first nonzero normal entry (or the
    /// offset, for a constant row) has absolute value one.
    pub fn normalized(&self) -> Inequality {
        let lead = self
            .normal
            .iter()
            .find(|v| !v.is_zero())
            .or(Some(&self.offset).filter(|v| !v.is_zero()));
        match lead {
            Some(l) => {
                let s = l.abs();
                Inequality {
                    normal: self.normal.iter().map(|v| v / &s).collect(),
                    offset: &self.offset / &s,
                }
            }
            None => self.clone(),
        }
    }

    pub fn holds_at(&self, u: &[Rat]) -> bool {
        dot(&self.normal, u) <= self.offset
    }
}

/// A polyhedron `{u in Q^dim : every row holds}`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ExactHRep {
    pub dim: usize,
    pub rows: Vec<Inequality>,
}

impl ExactHRep {
    pub fn new(dim: usize, rows: Vec<Inequality>) -> Self {
        ExactHRep { dim, rows }
    }

    fn lp_rows(&self) -> Vec<(Vec<Rat>, Rat)> {
        self.rows.iter().map(Inequality::as_row).collect()
    }

    pub fn is_empty(&self) -> bool {
        lp_max(&vec![Rat::zero(); self.dim], &self.lp_rows()) == LpOutcome::Infeasible
    }

    pub fn contains(&self, u: &[Rat]) -> bool {
        self.rows.iter().all(|r| r.holds_at(u))
    }

    /// Drops rows implied by the remaining ones, in order.
    pub fn remove_redundant(&self) -> ExactHRep {
        let mut kept: Vec<Inequality> = self.rows.iter().map(Inequality::normalized).collect();
        kept.sort();
        kept.dedup();
        let mut i = 0;
        while i < kept.len() {
            let others: Vec<(Vec<Rat>, Rat)> = kept
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, r)| r.as_row())
                .collect();
            let redundant = match lp_max(&kept[i].normal, &others) {
                LpOutcome::Optimal(v) => v <= kept[i].offset,
                LpOutcome::Infeasible => false,
                LpOutcome::Unbounded => false,
            };
            if redundant {
                kept.remove(i);
            } else {
                i += 1;
            }
        }
        ExactHRep::new(self.dim, kept)
    }

    /// Canonical description; equal polyhedra give equal canonical forms.
    pub fn canonical(&self) -> Canonical {
        let rows = self.lp_rows();
        if lp_max(&vec![Rat::zero(); self.dim], &rows) == LpOutcome::Infeasible {
            return Canonical {
                dim: self.dim,
                empty: true,
                equalities: Vec::new(),
                facets: Vec::new(),
            };
        }
        // Implicit equalities: rows whose minimum over the set is the offset.
        let mut eq_rows: Vec<Vec<Rat>> = Vec::new();
        let mut rest: Vec<Inequality> = Vec::new();
        for r in &self.rows {
            let neg: Vec<Rat> = r.normal.iter().map(|v| -v).collect();
            let tight = matches!(lp_max(&neg, &rows), LpOutcome::Optimal(v) if -&v == r.offset);
            if tight {
                let mut e = r.normal.clone();
                e.push(r.offset.clone());
                eq_rows.push(e);
            } else {
                rest.push(r.clone());
            }
        }
        let pivots = rref(&mut eq_rows);
        let reduce = |r: &Inequality| -> Inequality {
            let mut full = r.normal.clone();
            full.push(r.offset.clone());
            for (e, &p) in eq_rows.iter().zip(&pivots) {
                if !full[p].is_zero() {
                    let f = full[p].clone();
                    for (v, ev) in full.iter_mut().zip(e) {
                        *v -= &f * ev;
                    }
                }
            }
            let offset = full.pop().expect("offset entry");
            Inequality::new(full, offset)
        };
        let mut facets: Vec<Inequality> = rest
            .iter()
            .map(reduce)
            .filter(|r| !r.normal.iter().all(Zero::is_zero))
            .collect();
        let eq_constraints: Vec<Inequality> = eq_rows
            .iter()
            .flat_map(|e| {
                let (n, o) = e.split_at(self.dim);
                let up = Inequality::new(n.to_vec(), o[0].clone());
                let down = Inequality::new(n.iter().map(|v| -v).collect(), -o[0].clone());
                [up, down]
            })
            .collect();
        // Sequential redundancy removal relative to the affine hull.
        facets = facets.iter().map(Inequality::normalized).collect();
        facets.sort();
        facets.dedup();
        let mut i = 0;
        while i < facets.len() {
            let others: Vec<(Vec<Rat>, Rat)> = facets
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, r)| r.as_row())
                .chain(eq_constraints.iter().map(Inequality::as_row))
                .collect();
            let redundant = matches!(lp_max(&facets[i].normal, &others), LpOutcome::Optimal(v) if v <= facets[i].offset);
            if redundant {
                facets.remove(i);
            } else {
                i += 1;
            }
        }
        Canonical {
            dim: self.dim,
            empty: false,
            equalities: eq_rows,
            facets,
        }
    }
}

/// Affine hull in reduced echelon form (rows `[normal | offset]`) plus the
/// facet inequalities reduced modulo the hull and scaled to a leading
/// entry of absolute value one, sorted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Canonical {
    pub dim: usize,
    pub empty: bool,
    pub equalities: Vec<Vec<Rat>>,
    pub facets: Vec<Inequality>,
}

/// Eliminates the listed variables; the result lives on the remaining
/// variables in their original order.
pub fn fourier_motzkin(h: &ExactHRep, eliminate: &[usize]) -> Result<ExactHRep> {
    if h.dim > FM_MAX_VARS {
        return Err(Error::SizeCap(format!("{} variables, at most {FM_MAX_VARS}", h.dim)));
    }
    if let Some(&bad) = eliminate.iter().find(|&&k| k >= h.dim) {
        return Err(Error::dims("eliminated variable", h.dim, bad));
    }
    if h.is_empty() {
        let keep = h.dim - dedup_count(eliminate);
        return Ok(ExactHRep::new(
            keep,
            vec![Inequality::new(vec![Rat::zero(); keep], -Rat::one())],
        ));
    }
    let mut current = h.remove_redundant();
    let mut order: Vec<usize> = eliminate.to_vec();
    order.sort_unstable();
    order.dedup();
    for &k in &order {
        let mut pos = Vec::new();
        let mut neg = Vec::new();
        let mut next = Vec::new();
        for r in &current.rows {
            let a = &r.normal[k];
            if a.is_positive() {
                pos.push(r);
            } else if a.is_negative() {
                neg.push(r);
            } else {
                next.push(r.clone());
            }
        }
        if next.len() + pos.len() * neg.len() > FM_MAX_ROWS {
            return Err(Error::SizeCap(format!(
                "{} rows after eliminating variable {k}",
                next.len() + pos.len() * neg.len()
            )));
        }
        for p in &pos {
            for n in &neg {
                let (ap, an) = (&p.normal[k], -&n.normal[k]);
                let normal: Vec<Rat> = p.normal.iter().zip(&n.normal).map(|(x, y)| x * &an + y * ap).collect();
                let offset = &p.offset * &an + &n.offset * ap;
                next.push(Inequality::new(normal, offset));
            }
        }
        current = ExactHRep::new(current.dim, next).remove_redundant();
    }
    let keep: Vec<usize> = (0..h.dim).filter(|i| !order.contains(i)).collect();
    let rows = current
        .rows
        .into_iter()
        .map(|r| Inequality::new(keep.iter().map(|&i| r.normal[i].clone()).collect(), r.offset))
        .filter(|r| !(r.normal.iter().all(Zero::is_zero) && !r.offset.is_negative()))
        .collect();
    Ok(ExactHRep::new(keep.len(), rows))
}

fn dedup_count(v: &[usize]) -> usize {
    let mut v = v.to_vec();
    v.sort_unstable();
    v.dedup();
    v.len()
}
