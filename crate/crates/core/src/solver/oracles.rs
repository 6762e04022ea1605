//! Feasibility, strict feasibility and linear-objective value oracles for
//! systems `{x : G x + g in K}`.

use nalgebra::{DMatrix, DVector};

use super::{HsdeRun, RawCandidate, SolverSettings, SystemLp, Verdict};
use crate::cones::{Cone, MEMBER_TOL};
use crate::linalg::EuclideanSpace;
use crate::program::AffineSystem;

/// Outcome of a strict-feasibility margin program.
#[derive(Clone, Debug, PartialEq)]
pub struct MarginResult {
    pub verdict: Verdict,
    /// Optimal margin (last iterate when the solver did not converge).
    pub t_star: f64,
    /// Validated relative-interior point when `verdict == Yes`.
    pub witness: Option<DVector<f64>>,
    /// When `No`: either a separator `z in K*` with `G'z = 0`,
    /// `<g,z> <= 0` and `<e,z> = 1`, or a Farkas ray with `<g,z> = -1`.
    pub certificate: Option<DVector<f64>>,
    pub iterations: usize,
}

impl MarginResult {
    /// Interiority margin of the witness (`-inf` without one).
    pub fn witness_margin(&self, sys: &AffineSystem) -> f64 {
        self.witness
            .as_ref()
            .map(|x| sys.cone().margin(&sys.eval(x)))
            .unwrap_or(f64::NEG_INFINITY)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FeasibilityResult {
    pub verdict: Verdict,
    pub point: Option<DVector<f64>>,
    /// Farkas certificate `z in K*`, `G'z = 0`, `<g,z> = -1` when `No`.
    pub certificate: Option<DVector<f64>>,
    pub iterations: usize,
}

/// Value of `sup{<c,x> : x in system}`.
#[derive(Clone, Debug, PartialEq)]
pub struct LpValue {
    /// Finite, `+inf` (improving ray found) or `-inf` (system infeasible);
    /// `NaN` when the budget ran out.
    pub value: f64,
    /// Best effort only: set when the solver returned a feasible point that
    /// achieves the value to tolerance.
    pub attained: bool,
    pub witness: Option<DVector<f64>>,
    pub ray: Option<DVector<f64>>,
    /// Dual multipliers `z in K*` with `G'z = -c` for finite values, or a
    /// Farkas certificate for `-inf`. When the value was found by
    /// bracketing this certifies the upper bound instead: it is a Farkas
    /// certificate of `{x in system : <c,x> >= bounds.1}` (one extra row).
    pub certificate: Option<DVector<f64>>,
    /// Certified lower and upper bounds on the value.
    pub bounds: (f64, f64),
    pub iterations: usize,
}

impl LpValue {
    pub fn is_finite(&self) -> Verdict {
        if self.value.is_finite() {
            Verdict::Yes
        } else if self.value.is_nan() {
            Verdict::Unknown
        } else {
            Verdict::No
        }
    }
}

/// `z in K*`, `|G'z| <= tol (1 + |z|)`, `<g,z> <= -1 + tol`.
pub fn validate_system_farkas(sys: &AffineSystem, z: &DVector<f64>, tol: f64) -> bool {
    z.len() == sys.cone().dim()
        && sys.cone().dual().member(z, tol)
        && sys.g().tr_mul(z).norm() <= tol * (1.0 + z.norm())
        && sys.offset().dot(z) <= -1.0 + tol
}

/// `z in K*`, `G'z ~ 0`, `<e,z> = 1`, `<g,z> <= slack (1 + |z|)`: no
/// point of the system reaches the relative interior of `K`.
pub fn validate_separator(sys: &AffineSystem, z: &DVector<f64>, tol: f64, slack: f64) -> bool {
    let e = sys.cone().canonical_relint_point();
    let ez = e.dot(z);
    if ez.is_nan() || ez <= 0.0 || z.len() != sys.cone().dim() {
        return false;
    }
    let z = z / ez;
    sys.cone().dual().member(&z, tol)
        && sys.g().tr_mul(&z).norm() <= tol * (1.0 + z.norm())
        && sys.offset().dot(&z) <= slack * (1.0 + z.norm())
}

/// `G r in K` (recession direction) with `<c,r> >= 1 - tol`.
pub fn validate_system_ray(sys: &AffineSystem, c: &DVector<f64>, r: &DVector<f64>, tol: f64) -> bool {
    r.len() == sys.var_space().dim() && sys.cone().member(&(sys.g() * r), tol) && c.dot(r) >= 1.0 - tol
}

/// Normalizes a dual iterate to a Farkas certificate if it validates.
fn farkas_from(sys: &AffineSystem, z: &DVector<f64>, tol: f64) -> Option<DVector<f64>> {
    let gz = sys.offset().dot(z);
    if gz < 0.0 {
        let zf = z / -gz;
        if validate_system_farkas(sys, &zf, tol) {
            return Some(zf);
        }
    }
    None
}

fn primal_point(run: &HsdeRun) -> Option<DVector<f64>> {
    (run.last.tau > 0.0).then(|| &run.last.z / run.last.tau)
}

/// `max t s.t. G x + g - t e in K, t <= 1`, where `e` is the canonical
/// relative-interior point of `K`. `Yes` needs `t* > settings.margin` and
/// a witness re-validated by relative-interior membership.
pub fn strict_feasibility(sys: &AffineSystem, settings: &SolverSettings) -> MarginResult {
    let n = sys.var_space().dim();
    let m = sys.cone().dim();
    let e = sys.cone().canonical_relint_point();
    let mut g = DMatrix::zeros(m + 1, n + 1);
    g.view_mut((0, 0), (m, n)).copy_from(sys.g());
    g.view_mut((0, n), (m, 1)).copy_from(&(-&e));
    g[(m, n)] = -1.0;
    let mut off = DVector::zeros(m + 1);
    off.rows_mut(0, m).copy_from(sys.offset());
    off[m] = 1.0;
    let cone = Cone::product(&[sys.cone().clone(), Cone::nonneg(1)]).expect("unsigned cones");
    let aug = AffineSystem::new(sys.var_space().product(&EuclideanSpace::real(1)), g, off, cone)
        .expect("augmented system is consistent");
    let mut obj = DVector::zeros(n + 1);
    obj[n] = 1.0;
    let lp = SystemLp::new(&aug, &obj);

    let tol = settings.tol_cert;
    let margin = settings.margin;
    let check_yes = |xt: &DVector<f64>| -> Option<DVector<f64>> {
        let x = sys.polish_equalities(&xt.rows(0, n).into_owned());
        let t = sys.cone().margin(&sys.eval(&x));
        let t = if t.is_infinite() { xt[n].min(1.0) } else { t };
        (t > margin && sys.strictly_contains(&x, MEMBER_TOL)).then_some(x)
    };
    let check_no = |zfull: &DVector<f64>| -> Option<DVector<f64>> {
        let z = zfull.rows(0, m).into_owned();
        if validate_separator(sys, &z, tol, 0.1 * margin) {
            return Some(&z / e.dot(&z));
        }
        farkas_from(sys, &z, tol)
    };

    let mut outcome: Option<(Verdict, DVector<f64>)> = None;
    let mut t_seen = f64::NAN;
    let run = lp.run(settings, |cand| {
        let got = match cand {
            RawCandidate::Optimal { x, y, .. } => {
                t_seen = x[n];
                if x[n] > margin {
                    check_yes(x).map(|w| (Verdict::Yes, w))
                } else {
                    check_no(&lp.full_rows(y)).map(|z| (Verdict::No, z))
                }
            }
            RawCandidate::Infeasible { y } => {
                let z = lp.full_rows(y).rows(0, m).into_owned();
                farkas_from(sys, &z, tol).map(|z| (Verdict::No, z))
            }
            RawCandidate::Unbounded { .. } => None,
        };
        let hit = got.is_some();
        outcome = got;
        hit
    });
    if outcome.is_none() {
        if let Some(xt) = primal_point(&run) {
            t_seen = xt[n];
            if let Some(w) = check_yes(&xt) {
                outcome = Some((Verdict::Yes, w));
            }
        }
    }
    if outcome.is_none() {
        if let Some(z) = check_no(&lp.full_rows(&run.last.y)) {
            outcome = Some((Verdict::No, z));
        }
    }
    match outcome {
        Some((Verdict::Yes, w)) => MarginResult {
            verdict: Verdict::Yes,
            t_star: t_seen,
            witness: Some(w),
            certificate: None,
            iterations: run.iterations,
        },
        Some((_, z)) => MarginResult {
            verdict: Verdict::No,
            t_star: t_seen,
            witness: None,
            certificate: Some(z),
            iterations: run.iterations,
        },
        None => MarginResult {
            verdict: Verdict::Unknown,
            t_star: t_seen,
            witness: None,
            certificate: None,
            iterations: run.iterations,
        },
    }
}

/// Decides whether the system has a point.
pub fn feasibility(sys: &AffineSystem, settings: &SolverSettings) -> FeasibilityResult {
    let n = sys.var_space().dim();
    let lp = SystemLp::new(sys, &DVector::zeros(n));
    let tol = settings.tol_cert;
    let check_yes = |x: &DVector<f64>| {
        let x = sys.polish_equalities(x);
        sys.contains(&x, tol).then_some(x)
    };
    let mut outcome: Option<(Verdict, DVector<f64>)> = None;
    let run = lp.run(settings, |cand| {
        outcome = match cand {
            RawCandidate::Optimal { x, .. } => check_yes(x).map(|x| (Verdict::Yes, x)),
            RawCandidate::Infeasible { y } => farkas_from(sys, &lp.full_rows(y), tol).map(|z| (Verdict::No, z)),
            RawCandidate::Unbounded { .. } => None,
        };
        outcome.is_some()
    });
    if outcome.is_none() {
        outcome = primal_point(&run)
            .and_then(|x| check_yes(&x))
            .map(|x| (Verdict::Yes, x))
            .or_else(|| farkas_from(sys, &lp.full_rows(&run.last.y), tol).map(|z| (Verdict::No, z)));
    }
    let (verdict, point, certificate) = match outcome {
        Some((Verdict::Yes, x)) => (Verdict::Yes, Some(x), None),
        Some((_, z)) => (Verdict::No, None, Some(z)),
        None => (Verdict::Unknown, None, None),
    };
    FeasibilityResult {
        verdict,
        point,
        certificate,
        iterations: run.iterations,
    }
}

/// `sup{<c,x> : G x + g in K}`.
pub fn conic_lp_value(c: &DVector<f64>, sys: &AffineSystem, settings: &SolverSettings) -> LpValue {
    if sys.offset().iter().all(|&v| v == 0.0) {
        if let Some(v) = cone_value(c, sys, settings) {
            return v;
        }
    }
    let lp = SystemLp::new(sys, c);
    let tol = settings.tol_cert;
    let mut out = LpValue {
        value: f64::NAN,
        attained: false,
        witness: None,
        ray: None,
        certificate: None,
        bounds: (f64::NEG_INFINITY, f64::INFINITY),
        iterations: 0,
    };
    let run = lp.run(settings, |cand| match cand {
        RawCandidate::Optimal { x, y, .. } => {
            let x = sys.polish_equalities(x);
            let z = lp.full_rows(y);
            let dual_ok = sys.cone().dual().member(&z, tol)
                && (sys.g().tr_mul(&z) + c).norm() <= tol * (1.0 + z.norm() + c.norm());
            if sys.contains(&x, tol) && dual_ok {
                out.value = c.dot(&x);
                out.bounds = (out.value, sys.offset().dot(&z));
                out.attained = true;
                out.witness = Some(x);
                out.certificate = Some(z);
                true
            } else {
                false
            }
        }
        RawCandidate::Infeasible { y } => match farkas_from(sys, &lp.full_rows(y), tol) {
            Some(z) => {
                out.value = f64::NEG_INFINITY;
                out.bounds = (f64::NEG_INFINITY, f64::NEG_INFINITY);
                out.certificate = Some(z);
                true
            }
            None => false,
        },
        RawCandidate::Unbounded { z, .. } => {
            if validate_system_ray(sys, c, z, tol) {
                out.value = f64::INFINITY;
                out.bounds = (f64::INFINITY, f64::INFINITY);
                out.ray = Some(z.clone());
                true
            } else {
                false
            }
        }
    });
    out.iterations = run.iterations;
    if out.value.is_nan() {
        let z = &run.last.z;
        let qz = c.dot(z);
        if qz > 0.0 && validate_system_ray(sys, c, &(z / qz), tol) {
            out.value = f64::INFINITY;
            out.bounds = (f64::INFINITY, f64::INFINITY);
            out.ray = Some(z / qz);
        } else if let Some(cert) = farkas_from(sys, &lp.full_rows(&run.last.y), tol) {
            out.value = f64::NEG_INFINITY;
            out.bounds = (f64::NEG_INFINITY, f64::NEG_INFINITY);
            out.certificate = Some(cert);
        } else {
            let iters = out.iterations;
            out = value_by_bracketing(c, sys, settings);
            out.iterations += iters;
        }
    }
    out
}

/// Over a cone the value is 0 (attained at the origin) or `+inf`, decided
/// by feasibility of `{x : G x in K, <c,x> >= 1}`. A Farkas certificate
/// for that set is an exact multiplier `z in K*` with `G'z = -c`.
fn cone_value(c: &DVector<f64>, sys: &AffineSystem, settings: &SolverSettings) -> Option<LpValue> {
    let n = sys.var_space().dim();
    let zero = LpValue {
        value: 0.0,
        attained: true,
        witness: Some(DVector::zeros(n)),
        ray: None,
        certificate: None,
        bounds: (0.0, 0.0),
        iterations: 0,
    };
    if c.iter().all(|&v| v == 0.0) {
        return Some(LpValue {
            certificate: Some(DVector::zeros(sys.cone().dim())),
            ..zero
        });
    }
    let row = DMatrix::from_row_slice(1, n, c.as_slice());
    let level = sys.with_rows(row, DVector::from_element(1, -1.0), Cone::nonneg(1)).ok()?;
    let f = feasibility(&level, settings);
    match f.verdict {
        Verdict::Yes => {
            let r = f.point?;
            validate_system_ray(sys, c, &r, settings.tol_cert).then_some(LpValue {
                value: f64::INFINITY,
                attained: false,
                witness: None,
                ray: Some(r),
                certificate: None,
                bounds: (f64::INFINITY, f64::INFINITY),
                iterations: f.iterations,
            })
        }
        Verdict::No => {
            let z = f.certificate?;
            let m = sys.cone().dim();
            Some(LpValue {
                certificate: Some(z.rows(0, m) / z[m]),
                iterations: f.iterations,
                ..zero
            })
        }
        Verdict::Unknown => None,
    }
}

/// Value of `sup{<c,x> : x in system}` from feasibility queries alone:
/// a point of `{x : <c,x> >= v}` shows the value is at least `v`, a Farkas
/// certificate for the same set shows it is below `v`. Used when the
/// embedding has no complementary solution to converge to (infinite gap
/// pairs). Fails to `NaN` when a query comes back Unknown before the
/// bracket is tight or no upper bound shows up.
pub fn value_by_bracketing(c: &DVector<f64>, sys: &AffineSystem, settings: &SolverSettings) -> LpValue {
    let mut out = LpValue {
        value: f64::NAN,
        attained: false,
        witness: None,
        ray: None,
        certificate: None,
        bounds: (f64::NEG_INFINITY, f64::INFINITY),
        iterations: 0,
    };
    let mut query_settings = *settings;
    query_settings.max_iter = settings.max_iter.min(5_000);
    let first = feasibility(sys, &query_settings);
    out.iterations += first.iterations;
    match first.verdict {
        Verdict::No => {
            out.value = f64::NEG_INFINITY;
            out.bounds = (f64::NEG_INFINITY, f64::NEG_INFINITY);
            out.certificate = first.certificate;
            return out;
        }
        Verdict::Unknown => return out,
        Verdict::Yes => {}
    }
    let mut best = first.point.expect("Yes carries a point");
    let mut lo = c.dot(&best);
    let mut hi = f64::INFINITY;
    let mut upper_cert = None;
    let level_set = |v: f64| {
        let row = DMatrix::from_row_slice(1, c.len(), c.as_slice());
        sys.with_rows(row, DVector::from_element(1, -v), Cone::nonneg(1))
            .expect("one extra row")
    };
    let mut step = 1e-6 * (1.0 + lo.abs());
    for _ in 0..200 {
        let target = if hi.is_finite() { 0.5 * (lo + hi) } else { lo + step };
        if hi - lo <= settings.tol_gap.max(1e-9) * 10.0 * (1.0 + lo.abs()) {
            break;
        }
        let q = feasibility(&level_set(target), &query_settings);
        out.iterations += q.iterations;
        match q.verdict {
            Verdict::Yes => {
                let x = q.point.expect("Yes carries a point");
                if sys.contains(&x, settings.tol_cert) {
                    lo = c.dot(&x).max(target);
                    best = x;
                }
                step *= 16.0;
                if step > 1e12 {
                    return out;
                }
            }
            Verdict::No => {
                hi = target;
                upper_cert = q.certificate;
            }
            Verdict::Unknown => break,
        }
    }
    if hi.is_finite() {
        out.value = lo;
        out.bounds = (lo, hi);
        out.attained = true;
        out.witness = Some(best);
        out.certificate = upper_cert;
    }
    out
}
