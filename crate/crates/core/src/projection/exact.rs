//! Exact rational linear algebra and a small dense simplex.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rat = BigRational;

/// Exact value of a finite double.
pub fn rat(v: f64) -> Result<Rat> {
    BigRational::from_float(v).ok_or_else(|| Error::Precondition(format!("non-finite entry {v}")))
}

pub fn to_f64(q: &Rat) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

pub fn dot(a: &[Rat], b: &[Rat]) -> Rat {
    a.iter().zip(b).fold(Rat::zero(), |acc, (x, y)| acc + x * y)
}

pub fn int_dot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    a.iter().zip(b).fold(BigInt::zero(), |acc, (x, y)| acc + x * y)
}

/// Scales a rational vector to the primitive integer vector on the same
/// ray (positive multiple).
pub fn primitive(v: &[Rat]) -> Vec<BigInt> {
    let lcm = v.iter().fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
    let ints: Vec<BigInt> = v.iter().map(|q| q.numer() * (&lcm / q.denom())).collect();
    reduce(ints)
}

/// Divides out the gcd of the entries.
pub fn reduce(v: Vec<BigInt>) -> Vec<BigInt> {
    let g = v.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() || g.is_one() {
        return v;
    }
    v.into_iter().map(|x| x / &g).collect()
}

pub fn to_rat(v: &[BigInt]) -> Vec<Rat> {
    v.iter().map(|x| Rat::from_integer(x.clone())).collect()
}

/// Row-reduces in place to reduced echelon form, dropping zero rows.
/// Returns the pivot columns.
pub fn rref(rows: &mut Vec<Vec<Rat>>) -> Vec<usize> {
    let ncols = rows.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = rows[r][c].recip();
        for v in rows[r].iter_mut() {
            *v *= &inv;
        }
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != r && !row[c].is_zero() {
                let f = row[c].clone();
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= &f * pv;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    rows.truncate(r);
    pivots
}

pub fn rank(rows: &[Vec<Rat>]) -> usize {
    let mut m = rows.to_vec();
    rref(&mut m).len()
}

pub fn int_rank(rows: &[&Vec<BigInt>]) -> usize {
    let m: Vec<Vec<Rat>> = rows.iter().map(|r| to_rat(r)).collect();
    rank(&m)
}

/// Basis of `{x : rows x = 0}`.
pub fn nullspace(rows: &[Vec<Rat>], ncols: usize) -> Vec<Vec<Rat>> {
    let mut m = rows.to_vec();
    let pivots = rref(&mut m);
    (0..ncols)
        .filter(|c| !pivots.contains(c))
        .map(|free| {
            let mut v = vec![Rat::zero(); ncols];
            v[free] = Rat::one();
            for (row, &p) in m.iter().zip(&pivots) {
                v[p] = -row[free].clone();
            }
            v
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome {
    Infeasible,
    Unbounded,
    Optimal(Rat),
}

struct Tableau {
    /// Rows `[coefficients | rhs]`.
    t: Vec<Vec<Rat>>,
    basis: Vec<usize>,
}

impl Tableau {
    fn ncols(&self) -> usize {
        self.t[0].len() - 1
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let inv = self.t[r][c].recip();
        for v in self.t[r].iter_mut() {
            *v *= &inv;
        }
        let prow = self.t[r].clone();
        for (i, row) in self.t.iter_mut().enumerate() {
            if i != r && !row[c].is_zero() {
                let f = row[c].clone();
                for (v, pv) in row.iter_mut().zip(&prow) {
                    *v -= &f * pv;
                }
            }
        }
        self.basis[r] = c;
    }

    /// Maximizes `cost . z` over columns `< allowed` with Bland's rule.
    /// Returns false when unbounded.
    fn optimize(&mut self, cost: &[Rat], allowed: usize) -> bool {
        loop {
            let entering = (0..allowed).find(|&j| {
                if self.basis.contains(&j) {
                    return false;
                }
                let reduced = self
                    .basis
                    .iter()
                    .zip(&self.t)
                    .fold(cost[j].clone(), |acc, (&b, row)| acc - &cost[b] * &row[j]);
                reduced.is_positive()
            });
            let Some(j) = entering else {
                return true;
            };
            let rhs = self.ncols();
            let mut best: Option<(Rat, usize, usize)> = None;
            for (i, row) in self.t.iter().enumerate() {
                if row[j].is_positive() {
                    let ratio = &row[rhs] / &row[j];
                    let better = match &best {
                        None => true,
                        Some((r, _, b)) => ratio < *r || (ratio == *r && self.basis[i] < *b),
                    };
                    if better {
                        best = Some((ratio, i, self.basis[i]));
                    }
                }
            }
            match best {
                Some((_, i, _)) => self.pivot(i, j),
                None => return false,
            }
        }
    }

    fn value(&self, cost: &[Rat]) -> Rat {
        let rhs = self.ncols();
        self.basis
            .iter()
            .zip(&self.t)
            .fold(Rat::zero(), |acc, (&b, row)| acc + &cost[b] * &row[rhs])
    }
}

/// `max obj . u` subject to `a . u <= beta` for each row, `u` free.
pub fn lp_max(obj: &[Rat], rows: &[(Vec<Rat>, Rat)]) -> LpOutcome {
    let d = obj.len();
    let m = rows.len();
    if m == 0 {
        return if obj.iter().all(Zero::is_zero) {
            LpOutcome::Optimal(Rat::zero())
        } else {
            LpOutcome::Unbounded
        };
    }
    // Columns: u+ (d), u- (d), slacks (m), artificials (one per negative rhs).
    let negative: Vec<usize> = (0..m).filter(|&i| rows[i].1.is_negative()).collect();
    let nart = negative.len();
    let ncols = 2 * d + m + nart;
    let mut t = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    for (i, (a, beta)) in rows.iter().enumerate() {
        let sign = if beta.is_negative() { -Rat::one() } else { Rat::one() };
        let mut row = vec![Rat::zero(); ncols + 1];
        for k in 0..d {
            row[k] = &sign * &a[k];
            row[d + k] = -&sign * &a[k];
        }
        row[2 * d + i] = sign.clone();
        row[ncols] = &sign * beta;
        if let Some(pos) = negative.iter().position(|&r| r == i) {
            row[2 * d + m + pos] = Rat::one();
            basis.push(2 * d + m + pos);
        } else {
            basis.push(2 * d + i);
        }
        t.push(row);
    }
    let mut tab = Tableau { t, basis };
    let real = 2 * d + m;
    if nart > 0 {
        let mut cost = vec![Rat::zero(); ncols];
        for c in cost.iter_mut().skip(real) {
            *c = -Rat::one();
        }
        tab.optimize(&cost, ncols);
        if tab.value(&cost).is_negative() {
            return LpOutcome::Infeasible;
        }
        // Drive zero-level artificials out of the basis.
        let mut i = 0;
        while i < tab.t.len() {
            if tab.basis[i] >= real {
                match (0..real).find(|&j| !tab.t[i][j].is_zero()) {
                    Some(j) => tab.pivot(i, j),
                    None => {
                        tab.t.remove(i);
                        tab.basis.remove(i);
                        continue;
                    }
                }
            }
            i += 1;
        }
        if tab.t.is_empty() {
            return if obj.iter().all(Zero::is_zero) {
                LpOutcome::Optimal(Rat::zero())
            } else {
                LpOutcome::Unbounded
            };
        }
    }
    let mut cost = vec![Rat::zero(); ncols];
    for k in 0..d {
        cost[k] = obj[k].clone();
        cost[d + k] = -obj[k].clone();
    }
    if tab.optimize(&cost, real) {
        LpOutcome::Optimal(tab.value(&cost))
    } else {
        LpOutcome::Unbounded
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> Rat {
        Rat::from_integer(n.into())
    }

    fn row(a: &[i64], b: i64) -> (Vec<Rat>, Rat) {
        (a.iter().map(|&v| q(v)).collect(), q(b))
    }

    #[test]
    fn simplex_on_a_triangle() {
        let rows = [row(&[-1, 0], 0), row(&[0, -1], 0), row(&[1, 1], 1)];
        assert_eq!(lp_max(&[q(1), q(2)], &rows), LpOutcome::Optimal(q(2)));
        assert_eq!(lp_max(&[q(-1), q(-1)], &rows), LpOutcome::Optimal(q(0)));
    }

    #[test]
    fn simplex_detects_infeasible_and_unbounded() {
        let rows = [row(&[1], -1), row(&[-1], -1)];
        assert_eq!(lp_max(&[q(1)], &rows), LpOutcome::Infeasible);
        let rows = [row(&[-1], -2)];
        assert_eq!(lp_max(&[q(1)], &rows), LpOutcome::Unbounded);
        assert_eq!(lp_max(&[q(-1)], &rows), LpOutcome::Optimal(q(-2)));
    }

    #[test]
    fn nullspace_of_a_plane() {
        let ns = nullspace(&[vec![q(1), q(1), q(1)]], 3);
        assert_eq!(ns.len(), 2);
        for v in &ns {
            assert!(dot(v, &[q(1), q(1), q(1)]).is_zero());
        }
        assert_eq!(rank(&ns), 2);
    }

    #[test]
    fn primitive_scaling() {
        let v = [Rat::new(1.into(), 2.into()), Rat::new((-3).into(), 4.into())];
        assert_eq!(primitive(&v), vec![BigInt::from(2), BigInt::from(-3)]);
    }

    #[test]
    fn floats_convert_exactly() {
        assert_eq!(rat(0.5).unwrap(), Rat::new(1.into(), 2.into()));
        assert!(rat(f64::NAN).is_err());
    }
}
