//! Double description: generators of `{z : E z = 0, M z >= 0}` in exact
//! integer arithmetic.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use super::exact::{int_dot, int_rank, reduce};

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Generators {
    /// Basis of the lineality space.
    pub lineality: Vec<Vec<BigInt>>,
    /// Extreme rays of the pointed part, primitive integer vectors.
    pub rays: Vec<Vec<BigInt>>,
}

impl Generators {
    /// Lineality vectors in both signs followed by the rays.
    pub fn all(&self) -> Vec<Vec<BigInt>> {
        let mut out = Vec::with_capacity(2 * self.lineality.len() + self.rays.len());
        for l in &self.lineality {
            out.push(l.clone());
            out.push(l.iter().map(|v| -v).collect());
        }
        out.extend(self.rays.iter().cloned());
        out
    }
}

struct Ray {
    v: Vec<BigInt>,
    /// Indices of the processed inequalities that are tight.
    zeros: Vec<usize>,
}

fn combine(a: &BigInt, x: &[BigInt], b: &BigInt, y: &[BigInt]) -> Vec<BigInt> {
    reduce(x.iter().zip(y).map(|(xi, yi)| a * xi - b * yi).collect())
}

fn intersect(a: &[usize], b: &[usize]) -> Vec<usize> {
    a.iter().filter(|i| b.contains(i)).copied().collect()
}

fn subset(a: &[usize], b: &[usize]) -> bool {
    a.iter().all(|i| b.contains(i))
}

/// Runs the double description method. Equalities are processed first,
/// inequalities in lexicographic order of their rows.
pub fn double_description(dim: usize, equalities: &[Vec<BigInt>], inequalities: &[Vec<BigInt>]) -> Generators {
    let mut lineality: Vec<Vec<BigInt>> = (0..dim)
        .map(|i| {
            let mut e = vec![BigInt::zero(); dim];
            e[i] = 1.into();
            e
        })
        .collect();
    let mut rays: Vec<Ray> = Vec::new();
    // Lineality vectors are tight on everything processed so far.
    let mut processed: Vec<usize> = Vec::new();

    let mut order: Vec<usize> = (0..inequalities.len()).collect();
    order.sort_by(|&i, &j| inequalities[i].cmp(&inequalities[j]));
    let constraints = equalities
        .iter()
        .map(|a| (a, None))
        .chain(order.iter().map(|&i| (&inequalities[i], Some(i))));

    for (a, index) in constraints {
        // Cut the lineality space first when the constraint is not
        // constant on it.
        if let Some(k) = lineality.iter().position(|l| !int_dot(a, l).is_zero()) {
            let mut l0 = lineality.remove(k);
            let mut al0 = int_dot(a, &l0);
            if al0.is_negative() {
                l0.iter_mut().for_each(|v| *v = -&*v);
                al0 = -al0;
            }
            for l in lineality.iter_mut() {
                let al = int_dot(a, l);
                if !al.is_zero() {
                    *l = combine(&al0, l, &al, &l0);
                }
            }
            for r in rays.iter_mut() {
                let ar = int_dot(a, &r.v);
                if !ar.is_zero() {
                    r.v = combine(&al0, &r.v, &ar, &l0);
                }
                if let Some(i) = index {
                    r.zeros.push(i);
                }
            }
            if let Some(i) = index {
                rays.push(Ray {
                    v: l0,
                    zeros: processed.clone(),
                });
                processed.push(i);
            }
            continue;
        }
        let vals: Vec<BigInt> = rays.iter().map(|r| int_dot(a, &r.v)).collect();
        let mut next: Vec<Ray> = Vec::new();
        for (p, vp) in rays.iter().zip(&vals) {
            if !vp.is_positive() {
                continue;
            }
            for (n, vn) in rays.iter().zip(&vals) {
                if !vn.is_negative() {
                    continue;
                }
                let common = intersect(&p.zeros, &n.zeros);
                let adjacent = rays
                    .iter()
                    .all(|r| std::ptr::eq(r, p) || std::ptr::eq(r, n) || !subset(&common, &r.zeros));
                if adjacent {
                    let mut zeros = common;
                    if let Some(i) = index {
                        zeros.push(i);
                    }
                    next.push(Ray {
                        v: combine(vp, &n.v, vn, &p.v),
                        zeros,
                    });
                }
            }
        }
        for (mut r, v) in rays.into_iter().zip(vals) {
            if v.is_zero() {
                if let Some(i) = index {
                    r.zeros.push(i);
                }
                next.push(r);
            } else if v.is_positive() && index.is_some() {
                next.push(r);
            }
        }
        rays = next;
        processed.extend(index);
    }
    Generators {
        lineality,
        rays: rays.into_iter().map(|r| r.v).collect(),
    }
}

/// A ray of the cone is extreme when its tight constraints have rank
/// `dim - lineality - 1`.
pub fn is_extreme(
    ray: &[BigInt],
    dim: usize,
    lineality: usize,
    equalities: &[Vec<BigInt>],
    inequalities: &[Vec<BigInt>],
) -> bool {
    if ray.iter().all(Zero::is_zero) {
        return false;
    }
    let tight: Vec<&Vec<BigInt>> = equalities
        .iter()
        .chain(inequalities.iter().filter(|a| int_dot(a, ray).is_zero()))
        .collect();
    int_rank(&tight) + lineality + 1 == dim
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &[i64]) -> Vec<BigInt> {
        x.iter().map(|&a| BigInt::from(a)).collect()
    }

    fn sorted(mut r: Vec<Vec<BigInt>>) -> Vec<Vec<BigInt>> {
        r.sort();
        r
    }

    #[test]
    fn orthant_rays_are_unit_vectors() {
        let g = double_description(3, &[], &[v(&[1, 0, 0]), v(&[0, 1, 0]), v(&[0, 0, 1])]);
        assert!(g.lineality.is_empty());
        assert_eq!(sorted(g.rays), vec![v(&[0, 0, 1]), v(&[0, 1, 0]), v(&[1, 0, 0])]);
    }

    #[test]
    fn halfspace_keeps_a_line() {
        let g = double_description(2, &[], &[v(&[1, 0])]);
        assert_eq!(g.lineality.len(), 1);
        assert_eq!(g.rays, vec![v(&[1, 0])]);
    }

    #[test]
    fn square_pyramid_has_four_rays() {
        // x3 >= |x1|, x3 >= |x2| (four facets).
        let ineq = [v(&[1, 0, 1]), v(&[-1, 0, 1]), v(&[0, 1, 1]), v(&[0, -1, 1])];
        let g = double_description(3, &[], &ineq);
        assert!(g.lineality.is_empty());
        assert_eq!(
            sorted(g.rays.clone()),
            vec![v(&[-1, -1, 1]), v(&[-1, 1, 1]), v(&[1, -1, 1]), v(&[1, 1, 1])]
        );
        for r in &g.rays {
            assert!(is_extreme(r, 3, 0, &[], &ineq));
        }
    }

    #[test]
    fn equality_slices_the_orthant() {
        let g = double_description(3, &[v(&[1, -1, 0])], &[v(&[1, 0, 0]), v(&[0, 1, 0]), v(&[0, 0, 1])]);
        assert_eq!(sorted(g.rays), vec![v(&[0, 0, 1]), v(&[1, 1, 0])]);
    }

    #[test]
    fn only_origin() {
        let g = double_description(2, &[], &[v(&[1, 0]), v(&[-1, 0]), v(&[0, 1]), v(&[0, -1])]);
        assert!(g.lineality.is_empty() && g.rays.is_empty());
    }
}
