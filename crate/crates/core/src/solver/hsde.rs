//! Operator splitting on the homogeneous self-dual embedding of
//! `min q'z s.t. G z + s = h, s in K`.
//!
//! `K` is a product of Zero, Nonneg, SecondOrder and Psd blocks; its dual
//! swaps Zero for Free. Data are equilibrated before iterating and all
//! reported quantities are in the original scaling.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::cones::{project_psd, project_soc, FactorCone};
use crate::linalg::{smat, svec};

#[derive(Clone, Debug)]
pub(crate) struct Block {
    pub kind: FactorCone,
    pub start: usize,
    pub len: usize,
    /// Matrix order for Psd blocks.
    pub order: usize,
}

#[derive(Clone, Debug)]
pub(crate) struct ScsProblem {
    pub g: DMatrix<f64>,
    pub h: DVector<f64>,
    pub q: DVector<f64>,
    pub blocks: Vec<Block>,
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct HsdeOptions {
    pub max_iter: usize,
    pub alpha: f64,
    pub tol_feas: f64,
    pub tol_gap: f64,
    pub tol_infeas: f64,
    pub check_every: usize,
}

/// Iterate mapped back to the original scaling (not divided by tau).
#[derive(Clone, Debug)]
pub(crate) struct Iterate {
    pub z: DVector<f64>,
    pub y: DVector<f64>,
    pub s: DVector<f64>,
    pub tau: f64,
}

#[derive(Clone, Debug)]
pub(crate) enum Candidate {
    Optimal { x: DVector<f64>, y: DVector<f64> },
    /// `y in K*`, `G'y ~ 0`, `h'y = -1`.
    Infeasible { y: DVector<f64> },
    /// `G z + s ~ 0`, `s in K`, `q'z = -1`.
    Unbounded { z: DVector<f64> },
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub(crate) struct Residuals {
    pub primal: f64,
    pub dual: f64,
    pub gap: f64,
}

#[derive(Clone, Debug)]
pub(crate) struct HsdeRun {
    pub accepted: Option<Candidate>,
    pub iterations: usize,
    pub residuals: Residuals,
    pub last: Iterate,
}

struct Scaled {
    g: DMatrix<f64>,
    h: DVector<f64>,
    q: DVector<f64>,
    d: DVector<f64>,
    e: DVector<f64>,
    sigma: f64,
    rho: f64,
}

fn equilibrate(p: &ScsProblem) -> Scaled {
    let (m, n) = p.g.shape();
    let mut d = DVector::from_element(m, 1.0);
    let mut e = DVector::from_element(n, 1.0);
    let mut g = p.g.clone();
    for _ in 0..25 {
        let mut dr = DVector::from_element(m, 1.0);
        for i in 0..m {
            let r = g.row(i).amax();
            if r > 0.0 {
                dr[i] = 1.0 / r.sqrt();
            }
        }
        for b in &p.blocks {
            if matches!(b.kind, FactorCone::SecondOrder | FactorCone::Psd) {
                let mean = dr.rows(b.start, b.len).iter().map(|v| v.ln()).sum::<f64>() / b.len as f64;
                dr.rows_mut(b.start, b.len).fill(mean.exp());
            }
        }
        let mut ec = DVector::from_element(n, 1.0);
        for j in 0..n {
            let c = g.column(j).amax();
            if c > 0.0 {
                ec[j] = 1.0 / c.sqrt();
            }
        }
        for i in 0..m {
            d[i] = (d[i] * dr[i]).clamp(1e-4, 1e4);
        }
        for j in 0..n {
            e[j] = (e[j] * ec[j]).clamp(1e-4, 1e4);
        }
        g = DMatrix::from_fn(m, n, |i, j| d[i] * p.g[(i, j)] * e[j]);
    }
    let h0 = p.h.component_mul(&d);
    let q0 = p.q.component_mul(&e);
    let scale = |v: f64| if v > 0.0 { 1.0 / v.clamp(1e-4, 1e4) } else { 1.0 };
    let sigma = scale(h0.norm());
    let rho = scale(q0.norm());
    Scaled {
        g,
        h: h0 * sigma,
        q: q0 * rho,
        d,
        e,
        sigma,
        rho,
    }
}

fn project_dual_cone(blocks: &[Block], y: &mut DVector<f64>) {
    for b in blocks {
        let slice = &mut y.as_mut_slice()[b.start..b.start + b.len];
        match b.kind {
            FactorCone::Zero | FactorCone::Free => {}
            FactorCone::Nonneg => slice.iter_mut().for_each(|v| *v = v.max(0.0)),
            FactorCone::SecondOrder => project_soc(slice),
            FactorCone::Psd => {
                let p = project_psd(&smat(slice, b.order));
                slice.copy_from_slice(svec(&p).as_slice());
            }
        }
    }
}

pub(crate) struct Hsde {
    sc: Scaled,
    chol: Cholesky<f64, Dyn>,
    /// `(I + M)^{-1} (q; h)`.
    gvec: DVector<f64>,
    denom: f64,
    blocks: Vec<Block>,
    orig: ScsProblem,
}

impl Hsde {
    pub fn new(p: &ScsProblem) -> Hsde {
        let sc = equilibrate(p);
        let n = sc.g.ncols();
        let mut k = sc.g.tr_mul(&sc.g);
        for i in 0..n {
            k[(i, i)] += 1.0;
        }
        let chol = Cholesky::new(k).expect("I + G'G is positive definite");
        let mut hv = DVector::zeros(n + sc.g.nrows());
        hv.rows_mut(0, n).copy_from(&sc.q);
        hv.rows_mut(n, sc.g.nrows()).copy_from(&sc.h);
        let mut hsde = Hsde {
            sc,
            chol,
            gvec: DVector::zeros(0),
            denom: 1.0,
            blocks: p.blocks.clone(),
            orig: p.clone(),
        };
        hsde.gvec = hsde.solve_reduced(&hv);
        hsde.denom = 1.0 + hv.dot(&hsde.gvec);
        hsde
    }

    /// Solves `(I + M) p = w` with `M = [[0, G'], [-G, 0]]`.
    fn solve_reduced(&self, w: &DVector<f64>) -> DVector<f64> {
        let n = self.sc.g.ncols();
        let m = self.sc.g.nrows();
        let a = w.rows(0, n);
        let b = w.rows(n, m);
        let rhs = a - self.sc.g.tr_mul(&b);
        let z = self.chol.solve(&rhs);
        let y = b + &self.sc.g * &z;
        let mut out = DVector::zeros(n + m);
        out.rows_mut(0, n).copy_from(&z);
        out.rows_mut(n, m).copy_from(&y);
        out
    }

    fn unscale(&self, u: &DVector<f64>, v: &DVector<f64>) -> Iterate {
        let n = self.sc.g.ncols();
        let m = self.sc.g.nrows();
        let z = u.rows(0, n).component_mul(&self.sc.e) / self.sc.sigma;
        let y = u.rows(n, m).component_mul(&self.sc.d) / self.sc.rho;
        let s = v.rows(n, m).component_div(&self.sc.d) / self.sc.sigma;
        Iterate {
            z,
            y,
            s,
            tau: u[n + m],
        }
    }

    pub fn run(&self, opts: &HsdeOptions, mut accept: impl FnMut(&Candidate) -> bool) -> HsdeRun {
        let n = self.sc.g.ncols();
        let m = self.sc.g.nrows();
        let l = n + m + 1;
        let mut u = DVector::zeros(l);
        let mut v = DVector::zeros(l);
        u[l - 1] = 1.0;
        v[l - 1] = 1.0;
        let hv_q = &self.sc.q;
        let hv_h = &self.sc.h;
        let nh = self.orig.h.norm();
        let nq = self.orig.q.norm();
        let mut residuals = Residuals::default();
        let mut iterations = 0;
        let alpha = opts.alpha;
        for k in 1..=opts.max_iter {
            iterations = k;
            let w = &u + &v;
            let r = self.solve_reduced(&w.rows(0, n + m).into_owned());
            let hr = hv_q.dot(&r.rows(0, n)) + hv_h.dot(&r.rows(n, m));
            let tau_t = (w[l - 1] + hr) / self.denom;
            let mut ut = DVector::zeros(l);
            ut.rows_mut(0, n + m).copy_from(&(r - &self.gvec * tau_t));
            ut[l - 1] = tau_t;
            let ubar = &ut * alpha + &u * (1.0 - alpha);
            let mut un = &ubar - &v;
            {
                let mut yb = un.rows(n, m).into_owned();
                project_dual_cone(&self.blocks, &mut yb);
                un.rows_mut(n, m).copy_from(&yb);
            }
            un[l - 1] = un[l - 1].max(0.0);
            v = &v - &ubar + &un;
            u = un;

            if k % opts.check_every != 0 && k != opts.max_iter {
                continue;
            }
            let it = self.unscale(&u, &v);
            let p = &self.orig;
            if it.tau > 0.0 {
                let x = &it.z / it.tau;
                let y = &it.y / it.tau;
                let s = &it.s / it.tau;
                let pr = (&p.g * &x + &s - &p.h).norm();
                let dr = (p.g.tr_mul(&y) + &p.q).norm();
                let qx = p.q.dot(&x);
                let hy = p.h.dot(&y);
                residuals = Residuals {
                    primal: pr / (1.0 + nh),
                    dual: dr / (1.0 + nq),
                    gap: (qx + hy).abs() / (1.0 + qx.abs() + hy.abs()),
                };
                if residuals.primal <= opts.tol_feas && residuals.dual <= opts.tol_feas && residuals.gap <= opts.tol_gap {
                    let cand = Candidate::Optimal { x, y };
                    if accept(&cand) {
                        return HsdeRun {
                            accepted: Some(cand),
                            iterations,
                            residuals,
                            last: it,
                        };
                    }
                }
            }
            let hy = p.h.dot(&it.y);
            if hy < 0.0 {
                let y = &it.y / -hy;
                if p.g.tr_mul(&y).norm() <= opts.tol_infeas * (1.0 + y.norm()) {
                    let cand = Candidate::Infeasible { y };
                    if accept(&cand) {
                        return HsdeRun {
                            accepted: Some(cand),
                            iterations,
                            residuals,
                            last: it,
                        };
                    }
                }
            }
            let qz = p.q.dot(&it.z);
            if qz < 0.0 {
                let z = &it.z / -qz;
                let s = &it.s / -qz;
                if (&p.g * &z + s).norm() <= opts.tol_infeas * (1.0 + z.norm()) {
                    let cand = Candidate::Unbounded { z };
                    if accept(&cand) {
                        return HsdeRun {
                            accepted: Some(cand),
                            iterations,
                            residuals,
                            last: it,
                        };
                    }
                }
            }
        }
        HsdeRun {
            accepted: None,
            iterations,
            residuals,
            last: self.unscale(&u, &v),
        }
    }
}
