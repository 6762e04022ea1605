//! Desk-scale conic solver and the feasibility oracles built on it.
//!
//! Every point or certificate leaving this module has been re-checked by
//! cone membership against the original data.

mod hsde;
mod oracles;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::cones::{Cone, FactorCone};
use crate::linalg::Factor;
use crate::program::{AffineSystem, ConicProgram, Sense};

use hsde::{Block, Candidate, Hsde, HsdeOptions, ScsProblem};

pub use oracles::{
    conic_lp_value, feasibility, strict_feasibility, validate_separator, validate_system_farkas, validate_system_ray,
    value_by_bracketing,
    FeasibilityResult, LpValue, MarginResult,
};

/// Three-valued answer; `No` is only ever produced together with a
/// certificate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Verdict {
    Yes,
    No,
    Unknown,
}

impl Verdict {
    pub fn from_bool(b: bool) -> Verdict {
        if b {
            Verdict::Yes
        } else {
            Verdict::No
        }
    }

    pub fn is_yes(self) -> bool {
        self == Verdict::Yes
    }

    pub fn is_no(self) -> bool {
        self == Verdict::No
    }

    pub fn and(self, other: Verdict) -> Verdict {
        match (self, other) {
            (Verdict::No, _) | (_, Verdict::No) => Verdict::No,
            (Verdict::Yes, Verdict::Yes) => Verdict::Yes,
            _ => Verdict::Unknown,
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Verdict::Yes => "yes",
            Verdict::No => "no",
            Verdict::Unknown => "unknown",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SolverSettings {
    pub max_iter: usize,
    /// Relative primal/dual residual tolerance.
    pub tol_feas: f64,
    /// Relative duality-gap tolerance.
    pub tol_gap: f64,
    /// Residual tolerance for normalized infeasibility/unboundedness rays.
    pub tol_infeas: f64,
    /// Membership tolerance used when re-validating solver output.
    pub tol_cert: f64,
    /// Strict-feasibility margins must exceed this to count as `Yes`.
    pub margin: f64,
    /// Over-relaxation parameter.
    pub alpha: f64,
    pub check_every: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            max_iter: 50_000,
            tol_feas: 1e-8,
            tol_gap: 1e-8,
            tol_infeas: 1e-8,
            tol_cert: 1e-6,
            margin: 1e-6,
            alpha: 1.5,
            check_every: 10,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Status {
    Optimal,
    PrimalInfeasible,
    /// The dual is infeasible; an improving ray of the primal was found.
    DualInfeasible,
    Unknown,
}

/// Certificates are stated for the sup form of the program
/// (`sup{<c,x> : b - Ax in K, x in C}`).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Certificate {
    /// `y in K*`, `w = A*y in C*`, `<b,y> = -1`.
    Farkas { y: Vec<f64>, w: Vec<f64> },
    /// `r in C`, `-Ar in K`, `<c,r> = 1`.
    Ray { r: Vec<f64> },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct Residuals {
    pub primal: f64,
    pub dual: f64,
    pub gap: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveResult {
    pub status: Status,
    pub x: DVector<f64>,
    pub y: DVector<f64>,
    /// Primal slack in `K`.
    pub s: DVector<f64>,
    /// Dual slack in `C*`.
    pub w: DVector<f64>,
    pub pobj: f64,
    pub dobj: f64,
    pub gap: f64,
    pub residuals: Residuals,
    pub iterations: usize,
    pub certificate: Option<Certificate>,
}

/// `min q'z s.t. G z + s = h, s in cone`, with Free rows of the cone
/// dropped. Returns the problem and the kept row indices.
pub(crate) fn build_scs(g: &DMatrix<f64>, h: &DVector<f64>, cone: &Cone, q: &DVector<f64>) -> (ScsProblem, Vec<usize>) {
    debug_assert!(!cone.is_negated());
    let mut kept = Vec::new();
    let mut blocks = Vec::new();
    for (kind, factor, r) in cone.blocks() {
        if kind == FactorCone::Free {
            continue;
        }
        let order = match factor {
            Factor::Sym(m) => m,
            Factor::Real(_) => 0,
        };
        blocks.push(Block {
            kind,
            start: kept.len(),
            len: r.len(),
            order,
        });
        kept.extend(r);
    }
    let gk = g.select_rows(kept.iter());
    let hk = h.select_rows(kept.iter());
    (
        ScsProblem {
            g: gk,
            h: hk,
            q: q.clone(),
            blocks,
        },
        kept,
    )
}

fn scatter(len: usize, kept: &[usize], v: &DVector<f64>) -> DVector<f64> {
    let mut out = DVector::zeros(len);
    for (k, &i) in kept.iter().enumerate() {
        out[i] = v[k];
    }
    out
}

/// `y in K*`, `A*y in C*`, `<b,y> <= -1 + tol` for the sup form of `p`.
pub fn validate_farkas(p: &ConicProgram, y: &DVector<f64>, tol: f64) -> bool {
    let (q, _) = p.sup_form();
    if y.len() != q.y_space().dim() {
        return false;
    }
    let aty = q.a().tr_mul(y);
    q.k_cone().dual().member(y, tol) && q.c_cone().dual().member(&aty, tol) && q.b().dot(y) <= -1.0 + tol
}

/// `r in C`, `-Ar in K`, `<c,r> >= 1 - tol` for the sup form of `p`.
pub fn validate_ray(p: &ConicProgram, r: &DVector<f64>, tol: f64) -> bool {
    let (q, _) = p.sup_form();
    if r.len() != q.x_space().dim() {
        return false;
    }
    let ar = -(q.a() * r);
    q.c_cone().member(r, tol) && q.k_cone().member(&ar, tol) && q.c().dot(r) >= 1.0 - tol
}

fn scs_for_program(q: &ConicProgram) -> (ScsProblem, Vec<usize>) {
    let (m, n) = q.a().shape();
    let mut g = DMatrix::zeros(m + n, n);
    g.rows_mut(0, m).copy_from(q.a());
    g.rows_mut(m, n).copy_from(&(-DMatrix::<f64>::identity(n, n)));
    let mut h = DVector::zeros(m + n);
    h.rows_mut(0, m).copy_from(q.b());
    let cone = Cone::product(&[q.k_cone().clone(), q.c_cone().clone()]).expect("unsigned cones");
    build_scs(&g, &h, &cone, &-q.c())
}

pub(crate) fn hsde_options(settings: &SolverSettings) -> HsdeOptions {
    HsdeOptions {
        max_iter: settings.max_iter,
        alpha: settings.alpha,
        tol_feas: settings.tol_feas,
        tol_gap: settings.tol_gap,
        tol_infeas: settings.tol_infeas,
        check_every: settings.check_every.max(1),
    }
}

/// Solves the primal-dual pair of `p`.
pub fn solve(p: &ConicProgram, settings: &SolverSettings) -> SolveResult {
    let (q, sign) = p.sup_form();
    let (m, n) = q.a().shape();
    let (scs, kept) = scs_for_program(&q);
    let tol = settings.tol_cert;

    let split = |yfull: &DVector<f64>| -> (DVector<f64>, DVector<f64>) {
        let full = scatter(m + n, &kept, yfull);
        (full.rows(0, m).into_owned(), full.rows(m, n).into_owned())
    };

    let hsde = Hsde::new(&scs);
    let run = hsde.run(&hsde_options(settings), |cand| match cand {
        Candidate::Optimal { x, y, .. } => {
            let (y, _) = split(y);
            let gap = (q.b().dot(&y) - q.c().dot(x)).abs();
            q.is_primal_feasible(x, tol)
                && q.is_dual_feasible(&y, tol)
                && gap <= 10.0 * settings.tol_gap.max(tol) * (1.0 + q.c().dot(x).abs() + q.b().dot(&y).abs())
        }
        Candidate::Infeasible { y } => {
            let (y, _) = split(y);
            validate_farkas(&q, &y, tol)
        }
        Candidate::Unbounded { z, .. } => validate_ray(&q, z, tol),
    });

    let residuals = Residuals {
        primal: run.residuals.primal,
        dual: run.residuals.dual,
        gap: run.residuals.gap,
    };
    let nan = f64::NAN;
    let (status, x, y, certificate, pobj, dobj) = match &run.accepted {
        Some(Candidate::Optimal { x, y, .. }) => {
            let (y, _) = split(y);
            let (po, d) = (q.c().dot(x), q.b().dot(&y));
            (Status::Optimal, x.clone(), y, None, po, d)
        }
        Some(Candidate::Infeasible { y }) => {
            let (y, _) = split(y);
            let w = q.a().tr_mul(&y);
            let cert = Certificate::Farkas {
                y: y.as_slice().to_vec(),
                w: w.as_slice().to_vec(),
            };
            (Status::PrimalInfeasible, DVector::zeros(n), y, Some(cert), f64::NEG_INFINITY, nan)
        }
        Some(Candidate::Unbounded { z, .. }) => {
            let cert = Certificate::Ray { r: z.as_slice().to_vec() };
            (Status::DualInfeasible, z.clone(), DVector::zeros(m), Some(cert), nan, f64::INFINITY)
        }
        None => {
            let it = &run.last;
            // Without a usable tau the iterate only carries a direction.
            let t = if it.tau > 1e-9 * (1.0 + it.z.norm() + it.y.norm()) { it.tau } else { f64::INFINITY };
            let x = &it.z / t;
            let (y, _) = split(&(&it.y / t));
            (Status::Unknown, x, y, None, nan, nan)
        }
    };
    let s = q.b() - q.a() * &x;
    let w = q.a().tr_mul(&y) - q.c();
    let (pobj, dobj) = (sign * pobj, sign * dobj);
    let gap = if status == Status::Optimal { sign * (dobj - pobj) } else { nan };
    SolveResult {
        status,
        x,
        y,
        s: if p.sense() == Sense::Sup { s } else { -s },
        w: if p.sense() == Sense::Sup { w } else { -w },
        pobj,
        dobj,
        gap,
        residuals,
        iterations: run.iterations,
        certificate,
    }
}

/// `max <c,x> s.t. G x + g in K`, prepared for repeated runs.
pub(crate) struct SystemLp {
    hsde: Hsde,
    kept: Vec<usize>,
    rows: usize,
}

impl SystemLp {
    pub fn new(sys: &AffineSystem, objective: &DVector<f64>) -> SystemLp {
        // G x + g in K  <=>  (-G) x + s = g, s in K.
        let (scs, kept) = build_scs(&-sys.g(), sys.offset(), sys.cone(), &-objective);
        SystemLp {
            hsde: Hsde::new(&scs),
            kept,
            rows: sys.cone().dim(),
        }
    }

    /// Dual iterate scattered back to all rows of the system.
    pub fn full_rows(&self, y: &DVector<f64>) -> DVector<f64> {
        scatter(self.rows, &self.kept, y)
    }

    pub fn run(&self, settings: &SolverSettings, accept: impl FnMut(&RawCandidate) -> bool) -> HsdeRun {
        self.hsde.run(&hsde_options(settings), accept)
    }
}

pub(crate) use hsde::{Candidate as RawCandidate, HsdeRun};
