//! Acceptance suite. Runs without the libtest harness so every criterion
//! prints one PASS/FAIL line with its timing; the process fails if any
//! criterion does.

use std::time::{Duration, Instant};

use conedual::cones::MEMBER_TOL;
use conedual::diagnostics::{
    boundedness, finiteness_check, gap_bound_separation, gordan_alternative, side_value, strong_duality_report,
    Boundedness, ReportOptions,
};
use conedual::gallery::{self, draw_relint, gaussian_matrix, gaussian_vector, random_cone, stream, ConeMix};
use conedual::linalg::smat;
use conedual::projection::{feasibility_cone_closure, project, project_by_elimination, recession_polar, ProjectOptions};
use conedual::solver::{feasibility, validate_farkas, validate_system_farkas};
use conedual::{
    linalg::adjoint_image_of_complement, Cone, ConicProgram, EuclideanSpace, Factor, FactorCone, LinearMap, Sense,
    Side, SolverSettings, Status, Subspace, Verdict,
};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn settings() -> SolverSettings {
    SolverSettings::default()
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Cone built from one-coordinate factors.
fn sign_cone(kinds: &[FactorCone]) -> Cone {
    let parts: Vec<Cone> = kinds
        .iter()
        .map(|k| match k {
            FactorCone::Zero => Cone::zero(1),
            FactorCone::Free => Cone::free(1),
            _ => Cone::nonneg(1),
        })
        .collect();
    Cone::product(&parts).expect("unsigned parts")
}

fn zero_coords(cone: &Cone, kind: FactorCone) -> Vec<usize> {
    cone.blocks().filter(|(c, _, _)| *c == kind).flat_map(|(_, _, r)| r).collect()
}

/// Orthonormal basis of `{v : rows v = 0}` computed with a full SVD.
fn null_basis(rows: &DMatrix<f64>, n: usize) -> DMatrix<f64> {
    if rows.nrows() == 0 {
        return DMatrix::identity(n, n);
    }
    let mut padded = DMatrix::zeros(rows.nrows().max(n), n);
    padded.view_mut((0, 0), (rows.nrows(), n)).copy_from(rows);
    let svd = padded.svd(false, true);
    let vt = svd.v_t.expect("requested");
    let smax = svd.singular_values.max();
    let cols: Vec<DVector<f64>> = (0..n)
        .filter(|&i| svd.singular_values[i] <= 1e-10 * smax.max(1.0))
        .map(|i| vt.row(i).transpose())
        .collect();
    if cols.is_empty() {
        DMatrix::zeros(n, 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

fn relgap(p: f64, d: f64) -> f64 {
    (p - d).abs() / (1.0 + p.abs())
}

// 1. The worked pathology family.
fn pathology() -> Outcome {
    let st = settings();
    for n in 3..=8 {
        let p = gallery::example_adapted(n).map_err(|e| e.to_string())?.program;
        let r = conedual::solve(&p, &st);
        ensure(r.status == Status::PrimalInfeasible, || format!("n={n}: status {:?}", r.status))?;
        let y = match &r.certificate {
            Some(conedual::solver::Certificate::Farkas { y, .. }) => DVector::from_vec(y.clone()),
            other => return Err(format!("n={n}: certificate {other:?}")),
        };
        ensure(validate_farkas(&p, &y, st.tol_cert), || format!("n={n}: Farkas certificate fails revalidation"))?;
        let d = side_value(&p, Side::Dual, &st);
        ensure(d.value.abs() <= 1e-6, || format!("n={n}: dual value {}", d.value))?;
        ensure(d.attained, || format!("n={n}: dual value not attained"))?;
        let w = d.witness.as_ref().ok_or(format!("n={n}: no dual witness"))?;
        ensure(w.norm() <= 1e-6 && p.is_dual_feasible(w, 1e-9), || format!("n={n}: dual witness {w}"))?;
        let rep = strong_duality_report(&p, &st, &ReportOptions::default());
        let fired: Vec<&str> = rep.fired().map(|e| e.condition).collect();
        ensure(fired.is_empty(), || format!("n={n}: fired {fired:?}"))?;
    }
    Ok("n = 3..8".into())
}

// 2. Strictly feasible pairs solve with zero gap.
fn slater_pairs() -> Outcome {
    let st = settings();
    let (mut optimal, mut worst) = (0, 0.0f64);
    let total = 200;
    for seed in 0..total {
        let mix = ConeMix::ALL[seed as usize % 4];
        let n = 3 + (seed as usize * 7) % 14;
        let m = 2 + (seed as usize * 5) % 13;
        let (inst, _) = gallery::planted_strong_duality(n, m, mix, 1000 + seed).map_err(|e| e.to_string())?;
        let p = &inst.program;
        ensure(p.x_space().dim() + p.y_space().dim() <= 40, || format!("seed {seed}: too large"))?;
        let r = conedual::solve(p, &st);
        ensure(r.iterations <= 50_000, || format!("seed {seed}: {} iterations", r.iterations))?;
        if r.status == Status::Optimal {
            optimal += 1;
            let g = relgap(r.pobj, r.dobj);
            worst = worst.max(g);
            ensure(g <= 1e-5, || format!("seed {seed} ({mix:?}): relative gap {g:.3e}"))?;
        }
    }
    ensure(optimal * 100 >= 95 * total as usize, || format!("{optimal}/{total} optimal"))?;
    Ok(format!("{optimal}/{total} optimal, worst relative gap {worst:.2e}"))
}

/// A feasible point moved along a random direction that keeps the linear
/// equations, shrinking the step until the cone constraints hold.
fn perturb(
    base: &DVector<f64>,
    eq_rows: &DMatrix<f64>,
    feasible: impl Fn(&DVector<f64>) -> bool,
    rng: &mut ChaCha8Rng,
) -> DVector<f64> {
    let nb = null_basis(eq_rows, base.len());
    if nb.ncols() == 0 {
        return base.clone();
    }
    let dir = &nb * gaussian_vector(nb.ncols(), rng);
    let mut t = rng.random_range(0.5..2.0);
    for _ in 0..40 {
        let x = base + &dir * t;
        if feasible(&x) {
            return x;
        }
        t *= 0.5;
    }
    base.clone()
}

// 3. Weak duality on sampled feasible pairs.
fn weak_duality() -> Outcome {
    let tol = 1e-9;
    let (mut pairs, mut moved, mut worst) = (0, 0, f64::NEG_INFINITY);
    let mut seed = 0u64;
    while pairs < 1000 {
        let mix = ConeMix::ALL[seed as usize % 4];
        let n = 2 + (seed as usize * 3) % 10;
        let m = 1 + (seed as usize * 7) % 10;
        let (inst, planted) = gallery::planted_strong_duality(n, m, mix, 5000 + seed).map_err(|e| e.to_string())?;
        let p = &inst.program;
        let a = p.a();
        let mut rng = stream(seed, "weak-duality");
        // Equations of the primal: Zero rows of K and Zero coordinates of C.
        let kz = zero_coords(p.k_cone(), FactorCone::Zero);
        let cz = zero_coords(p.c_cone(), FactorCone::Zero);
        let mut xe = DMatrix::zeros(kz.len() + cz.len(), a.ncols());
        for (r, &i) in kz.iter().enumerate() {
            xe.row_mut(r).copy_from(&a.row(i));
        }
        for (r, &j) in cz.iter().enumerate() {
            xe[(kz.len() + r, j)] = 1.0;
        }
        // Equations of the dual: Free rows of K and Free coordinates of C.
        let kf = zero_coords(p.k_cone(), FactorCone::Free);
        let cf = zero_coords(p.c_cone(), FactorCone::Free);
        let mut ye = DMatrix::zeros(kf.len() + cf.len(), a.nrows());
        for (r, &i) in kf.iter().enumerate() {
            ye[(r, i)] = 1.0;
        }
        for (r, &j) in cf.iter().enumerate() {
            ye.row_mut(kf.len() + r).copy_from(&a.column(j).transpose());
        }
        for k in 0..4 {
            let (x, y) = if k == 0 {
                (planted.x0.clone(), planted.y0.clone())
            } else {
                let x = perturb(&planted.x0, &xe, |x| p.is_primal_feasible(x, tol), &mut rng);
                let y = perturb(&planted.y0, &ye, |y| p.is_dual_feasible(y, tol), &mut rng);
                if x != planted.x0 || y != planted.y0 {
                    moved += 1;
                }
                (x, y)
            };
            ensure(p.is_primal_feasible(&x, tol) && p.is_dual_feasible(&y, tol), || {
                format!("seed {seed}: sampled pair is not feasible")
            })?;
            let excess = p.c().dot(&x) - p.b().dot(&y);
            worst = worst.max(excess);
            ensure(excess <= 1e-6, || format!("seed {seed}: <c,x> - <b,y> = {excess:.3e}"))?;
            pairs += 1;
        }
        seed += 1;
    }
    Ok(format!("{pairs} pairs ({moved} perturbed), max <c,x> - <b,y> = {worst:.3e}"))
}

fn random_program(seed: u64, n_range: std::ops::RangeInclusive<usize>, m_range: std::ops::RangeInclusive<usize>) -> ConicProgram {
    let mut rng = stream(seed, "acceptance-random");
    let mix = ConeMix::ALL[seed as usize % 4];
    let n = rng.random_range(n_range);
    let m = rng.random_range(m_range);
    let cone_c = random_cone(mix, n, &mut rng);
    let k = random_cone(mix, m, &mut rng);
    let a = gaussian_matrix(k.dim(), cone_c.dim(), &mut rng);
    let b = gaussian_vector(k.dim(), &mut rng);
    let c = gaussian_vector(cone_c.dim(), &mut rng);
    ConicProgram::from_dense(a, b, c, k, cone_c, Sense::Sup).expect("consistent shapes")
}

// 4. Exactly one Gordan branch on pointed instances.
fn gordan() -> Outcome {
    let st = settings();
    let (mut done, mut unknown, mut branches, mut seed) = (0, 0, [0usize; 2], 0u64);
    while done < 100 {
        let p = random_program(seed, 2..=7, 1..=9);
        seed += 1;
        let g = gordan_alternative(&p, &st);
        if g.not_pointed {
            continue;
        }
        done += 1;
        ensure(!g.double_hit, || format!("seed {}: both branches witnessed", seed - 1))?;
        match (g.branch, &g.witness) {
            (Some(1), Some(x)) => {
                let ok = x.norm() > 0.0
                    && p.c_cone().member(x, st.tol_cert)
                    && p.k_cone().member(&-(p.a() * x), st.tol_cert);
                ensure(ok, || format!("seed {}: recession direction fails revalidation", seed - 1))?;
                branches[0] += 1;
            }
            (Some(2), Some(y)) => {
                let ok = p.k_cone().dual().relint_member(y, MEMBER_TOL)
                    && p.c_cone().dual().relint_member(&p.a().tr_mul(y), MEMBER_TOL);
                ensure(ok, || format!("seed {}: interior point fails revalidation", seed - 1))?;
                branches[1] += 1;
            }
            (None, _) => unknown += 1,
            other => return Err(format!("seed {}: malformed result {other:?}", seed - 1)),
        }
    }
    ensure(unknown <= 5, || format!("{unknown} unknown"))?;
    Ok(format!(
        "{done} pointed instances: {} direction, {} interior, {unknown} unknown, 0 double hits",
        branches[0], branches[1]
    ))
}

/// Integer polyhedral program with a feasible integer point.
fn integer_program(seed: u64, max_n: usize, positive: bool) -> ConicProgram {
    let mut rng = stream(seed, "acceptance-integer");
    let n = rng.random_range(2..=max_n);
    let m = rng.random_range(1..=6);
    let ck: Vec<FactorCone> = (0..n)
        .map(|_| match rng.random_range(0..6) {
            0 if !positive => FactorCone::Free,
            1 if !positive => FactorCone::Zero,
            _ => FactorCone::Nonneg,
        })
        .collect();
    let kk: Vec<FactorCone> = (0..m)
        .map(|i| match rng.random_range(0..6) {
            0 if !positive => FactorCone::Free,
            1 if !positive || i == 0 => FactorCone::Zero,
            _ => FactorCone::Nonneg,
        })
        .collect();
    let a = DMatrix::from_fn(m, n, |_, _| {
        if positive {
            rng.random_range(1..=3) as f64
        } else {
            rng.random_range(-3..=3) as f64
        }
    });
    let x0 = DVector::from_fn(n, |j, _| if ck[j] == FactorCone::Zero { 0.0 } else { rng.random_range(0..=2) as f64 });
    let s0 = DVector::from_fn(m, |i, _| match kk[i] {
        FactorCone::Zero => 0.0,
        FactorCone::Free => rng.random_range(-2..=2) as f64,
        _ => rng.random_range(0..=3) as f64,
    });
    let b = &a * &x0 + s0;
    let c = DVector::from_fn(n, |_, _| rng.random_range(-2..=2) as f64);
    ConicProgram::from_dense(a, b, c, sign_cone(&kk), sign_cone(&ck), Sense::Sup).expect("consistent shapes")
}

// 5. Polar of the recession cone against the closed feasibility cone.
fn recession_identity() -> Outcome {
    let mut facets = 0;
    for seed in 0..25 {
        let p = integer_program(100 + seed, 6, false);
        let lhs = recession_polar(&p).map_err(|e| e.to_string())?.canonical();
        let rhs = feasibility_cone_closure(&p).map_err(|e| e.to_string())?.canonical();
        ensure(lhs == rhs, || format!("seed {seed}: canonical forms differ"))?;
        facets += lhs.facets.len();
    }
    Ok(format!("25 instances equal in exact arithmetic ({facets} facets total)"))
}

// 6. Boundedness verdicts with revalidated witnesses.
fn boundedness_dichotomy() -> Outcome {
    let st = settings();
    let (mut done, mut unknown, mut counts, mut seed) = (0, 0, [0usize; 2], 0u64);
    while done < 50 {
        let mix = ConeMix::ALL[seed as usize % 4];
        let mut rng = stream(seed, "acceptance-bounded");
        let n = rng.random_range(2..=7);
        let m = rng.random_range(1..=9);
        let (inst, _) = gallery::planted_strong_duality(n, m, mix, 7000 + seed).map_err(|e| e.to_string())?;
        seed += 1;
        let p = inst.program;
        let r = boundedness(&p, Side::Primal, None, &st);
        if r.lineality_dim > 0 {
            continue;
        }
        done += 1;
        match r.verdict {
            Boundedness::Bounded => {
                let y = r.dual_witness.as_ref().ok_or("bounded without witness")?;
                ensure(p.dual_system().homogeneous().strictly_contains(y, MEMBER_TOL), || {
                    format!("seed {}: dual recession witness is not strictly feasible", seed - 1)
                })?;
                counts[0] += 1;
            }
            Boundedness::Unbounded => {
                let d = r.ray.as_ref().ok_or("unbounded without ray")?;
                let h = p.primal_system().homogeneous();
                ensure(d.norm() > 0.0 && h.contains(&(d / d.norm()), st.tol_cert), || {
                    format!("seed {}: recession ray fails revalidation", seed - 1)
                })?;
                counts[1] += 1;
            }
            Boundedness::Unknown => unknown += 1,
            Boundedness::Empty => return Err(format!("seed {}: planted instance reported empty", seed - 1)),
        }
    }
    ensure(unknown <= 3, || format!("{unknown} unknown"))?;
    Ok(format!("{} bounded, {} unbounded, {unknown} unknown", counts[0], counts[1]))
}

/// Strictly feasible primal with a recession direction `r0` that improves
/// the objective, so the value is `+inf` and the dual is infeasible.
fn improving_ray_program(seed: u64) -> ConicProgram {
    let mut rng = stream(seed, "acceptance-ray");
    let mix = ConeMix::ALL[seed as usize % 4];
    let cone_c = random_cone(mix, rng.random_range(2..=7), &mut rng);
    let k = random_cone(mix, rng.random_range(1..=7), &mut rng);
    let (m, n) = (k.dim(), cone_c.dim());
    let r0 = draw_relint(&cone_c, 0.5, &mut rng);
    let k0 = draw_relint(&k, 0.5, &mut rng);
    let mut a = gaussian_matrix(m, n, &mut rng);
    let shift = (&a * &r0 + &k0) * r0.transpose() / r0.norm_squared();
    a -= shift;
    let x0 = draw_relint(&cone_c, 1.0, &mut rng);
    let s0 = draw_relint(&k, 1.0, &mut rng);
    let b = &a * &x0 + s0;
    let mut c = &r0 / r0.norm_squared() + gaussian_vector(n, &mut rng) * 0.1;
    if c.dot(&r0) <= 0.1 {
        c = &r0 / r0.norm_squared();
    }
    ConicProgram::from_dense(a, b, c, k, cone_c, Sense::Sup).expect("consistent shapes")
}

// 7. Finite value exactly when the dual is feasible.
fn finiteness() -> Outcome {
    let st = settings();
    for seed in 0..25u64 {
        let p = improving_ray_program(seed);
        let f = finiteness_check(&p, Side::Primal, 0, seed, &st);
        ensure(f.applicable, || format!("ray seed {seed}: not applicable ({})", f.reason))?;
        ensure(f.finite == Verdict::No && f.other_feasible == Verdict::No, || {
            format!("ray seed {seed}: finite {} / dual feasible {}", f.finite, f.other_feasible)
        })?;
        let dual = p.dual_system();
        let cert = feasibility(&dual, &st).certificate.ok_or(format!("ray seed {seed}: no certificate"))?;
        ensure(validate_system_farkas(&dual, &cert, st.tol_cert), || {
            format!("ray seed {seed}: dual infeasibility certificate fails revalidation")
        })?;
    }
    for seed in 0..25u64 {
        let mix = ConeMix::ALL[seed as usize % 4];
        let (inst, _) = gallery::planted_strong_duality(3 + seed as usize % 6, 2 + seed as usize % 5, mix, 9000 + seed)
            .map_err(|e| e.to_string())?;
        let p = inst.program;
        let f = finiteness_check(&p, Side::Primal, 0, seed, &st);
        ensure(f.applicable, || format!("planted seed {seed}: not applicable ({})", f.reason))?;
        ensure(f.finite == Verdict::Yes && f.other_feasible == Verdict::Yes, || {
            format!("planted seed {seed}: finite {} / dual feasible {}", f.finite, f.other_feasible)
        })?;
        let y = feasibility(&p.dual_system(), &st).point.ok_or(format!("planted seed {seed}: no dual point"))?;
        ensure(p.is_dual_feasible(&y, st.tol_cert), || format!("planted seed {seed}: dual point fails revalidation"))?;
    }
    Ok("25 improving-ray instances with dual certificates, 25 finite with dual points, 0 counterexamples".into())
}

// 8. Gap-bound separation.
fn gap_separation() -> Outcome {
    let st = settings();
    let eps = 1e-3;
    let mut seed = 0u64;
    let mut done = 0;
    while done < 20 {
        let mix = ConeMix::ALL[seed as usize % 4];
        let (inst, _) = gallery::planted_strong_duality(3 + seed as usize % 5, 2 + seed as usize % 4, mix, 11_000 + seed)
            .map_err(|e| e.to_string())?;
        seed += 1;
        let p = inst.program;
        let r = conedual::solve(&p, &st);
        if r.status != Status::Optimal {
            continue;
        }
        done += 1;
        let g = gap_bound_separation(&p, eps, r.dobj, &st);
        ensure(g.separated == Verdict::Yes, || format!("seed {}: separated {} ({:?})", seed - 1, g.separated, g.note))?;
        let x = DVector::from_vec(g.recovered_x.clone().ok_or("no recovered point")?);
        ensure(p.is_primal_feasible(&x, st.tol_cert), || format!("seed {}: recovered x infeasible", seed - 1))?;
        ensure(p.objective(&x) > r.dobj - eps, || {
            format!("seed {}: <c,x> = {} vs dobj - eps = {}", seed - 1, p.objective(&x), r.dobj - eps)
        })?;
    }
    for n in 3..=8 {
        let p = gallery::example_adapted(n).map_err(|e| e.to_string())?.program;
        let d = side_value(&p, Side::Dual, &st).value;
        let g = gap_bound_separation(&p, eps, d, &st);
        ensure(g.separated == Verdict::No, || format!("example n={n}: separated {}", g.separated))?;
        let note = g.note.unwrap_or_default();
        ensure(note.contains("primal infeasible"), || format!("example n={n}: note {note:?}"))?;
    }
    Ok("20 separated with feasible recovered points; pathology family returns no separator".into())
}

// 9. Projection through the projection cone against elimination.
fn projection_exactness() -> Outcome {
    let st = settings();
    let mut facets = 0;
    for seed in 0..15u64 {
        let p = integer_program(300 + seed, 6, true);
        let n = p.x_space().dim();
        let mut rng = stream(seed, "acceptance-subspace");
        let space = EuclideanSpace::real(n);
        let l = if seed % 3 == 2 && n >= 3 {
            // span{e_0 + e_1, e_2}
            let mut v = DMatrix::zeros(n, 2);
            v[(0, 0)] = 1.0;
            v[(1, 0)] = 1.0;
            v[(2, 1)] = 1.0;
            Subspace::span(&space, &v).map_err(|e| e.to_string())?
        } else {
            let k = rng.random_range(1..n);
            let mut axes: Vec<usize> = (0..n).collect();
            while axes.len() > k {
                axes.remove(rng.random_range(0..axes.len()));
            }
            Subspace::coordinate(&space, &axes)
        };
        let h = project(&p, &l, &ProjectOptions::default(), &st).map_err(|e| format!("seed {seed}: {e}"))?;
        let ours = h.rational.ok_or(format!("seed {seed}: not exact"))?.canonical();
        let reference = project_by_elimination(&p, &l).map_err(|e| e.to_string())?.canonical();
        ensure(ours == reference, || format!("seed {seed}: facets differ"))?;
        facets += ours.facets.len();
    }
    Ok(format!("15 instances match in exact arithmetic ({facets} facets total)"))
}

fn random_space_cone(rng: &mut ChaCha8Rng) -> Cone {
    let mix = ConeMix::ALL[rng.random_range(0..4)];
    let k = random_cone(mix, rng.random_range(1..=8), rng);
    if rng.random_bool(0.25) {
        k.polar()
    } else {
        k
    }
}

/// Uniform-ish point of `cone`: projection of a Gaussian.
fn cone_point(cone: &Cone, rng: &mut ChaCha8Rng) -> DVector<f64> {
    cone.project(&gaussian_vector(cone.dim(), rng))
}

fn ambient_of(cone: &Cone) -> EuclideanSpace {
    cone.space().clone()
}

// 10. Cone calculus properties.
fn cone_calculus() -> Outcome {
    let mut rng = stream(0, "acceptance-cones");
    let mut checks = 0usize;
    let tol = 1e-9;
    while checks < 10_000 {
        let k = random_space_cone(&mut rng);
        let kd = k.dual();
        let dim = k.dim();

        // Bipolar: K** = K, and membership agrees.
        ensure(kd.dual() == k, || format!("bipolar fails for {:?}", k.factors()))?;
        let x = gaussian_vector(dim, &mut rng);
        ensure(kd.dual().member(&x, MEMBER_TOL) == k.member(&x, MEMBER_TOL), || "bipolar membership".into())?;
        checks += 1;

        // Dual pairing: <x, y> >= 0 for x in K, y in K*.
        let (xk, yk) = (cone_point(&k, &mut rng), cone_point(&kd, &mut rng));
        let ip = xk.dot(&yk);
        ensure(ip >= -tol * (1.0 + xk.norm() * yk.norm()), || format!("pairing {ip}"))?;
        checks += 1;

        // relint K + K stays in relint K.
        let xi = draw_relint(&k, 0.1, &mut rng);
        ensure(k.relint_member(&xi, MEMBER_TOL) && k.relint_member(&(&xi + &xk), MEMBER_TOL), || {
            format!("absorption fails for {:?}", k.factors())
        })?;
        checks += 1;

        // The origin is in relint K (and relint K*) only for subspaces, and
        // the lineality space lies in the relative boundary otherwise.
        let zero = DVector::zeros(dim);
        ensure(k.relint_member(&zero, MEMBER_TOL) == k.is_subspace(), || "origin in relint K".into())?;
        ensure(kd.relint_member(&zero, MEMBER_TOL) == kd.is_subspace(), || "origin in relint K*".into())?;
        let lin = k.lineality();
        let v = lin.basis() * gaussian_vector(lin.dim(), &mut rng);
        ensure(k.is_subspace() || !k.relint_member(&v, MEMBER_TOL), || "lineality meets relint".into())?;
        checks += 1;

        // span K* = (lin K)^⊥, and K* is orthogonal to lin K.
        ensure(kd.span().equals(&lin.complement()), || format!("span of dual fails for {:?}", k.factors()))?;
        ensure(v.dot(&yk).abs() <= tol * (1.0 + v.norm() * yk.norm()), || "dual not orthogonal to lineality".into())?;
        checks += 1;

        // Adjoint and the adjoint image of a complement.
        let other = random_space_cone(&mut rng);
        let (dom, cod) = (ambient_of(&other), ambient_of(&k));
        let mut mat = gaussian_matrix(cod.dim(), dom.dim(), &mut rng);
        if rng.random_bool(0.3) && dom.dim() > 1 {
            // Rank deficient maps exercise the kernel.
            let c0 = mat.column(0).into_owned();
            mat.set_column(1, &c0);
        }
        let map = LinearMap::new(dom.clone(), cod.clone(), mat.clone()).map_err(|e| e.to_string())?;
        let xs = sym_point(&dom, &mut rng);
        let ys = sym_point(&cod, &mut rng);
        let lhs = map.apply(&xs).dot(&ys);
        let rhs = xs.dot(&map.adjoint().apply(&ys));
        ensure((lhs - rhs).abs() <= tol * (1.0 + lhs.abs()), || format!("adjoint {lhs} vs {rhs}"))?;
        checks += 1;

        let l = kd.span();
        let s = adjoint_image_of_complement(&map, &l).map_err(|e| e.to_string())?;
        // Oracle: preimage of L is the kernel of N'M; its complement has
        // dimension n - dim ker, and every preimage vector is orthogonal
        // to the computed image.
        let nt_m = l.complement().basis().transpose() * &mat;
        let pre = null_basis(&nt_m, dom.dim());
        ensure(s.dim() + pre.ncols() == dom.dim(), || {
            format!("image dim {} + preimage dim {} != {}", s.dim(), pre.ncols(), dom.dim())
        })?;
        let cross = s.basis().transpose() * &pre;
        ensure(cross.iter().all(|v| v.abs() <= 1e-8), || "image not orthogonal to preimage".into())?;
        checks += 1;
    }
    Ok(format!("{checks} checks"))
}

/// Gaussian vector whose Sym blocks come from symmetric matrices.
fn sym_point(space: &EuclideanSpace, rng: &mut ChaCha8Rng) -> DVector<f64> {
    let mut v = gaussian_vector(space.dim(), rng);
    for (f, r) in space.factors().iter().zip(space.ranges()) {
        if let Factor::Sym(m) = f {
            let s = smat(&v.as_slice()[r.clone()], *m);
            assert!((&s - s.transpose()).amax() == 0.0);
            v.rows_mut(r.start, r.len()).copy_from(&conedual::linalg::svec(&s));
        }
    }
    v
}

type Criterion = (&'static str, Option<Duration>, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        ("pathology reproduction", Some(Duration::from_secs(1)), pathology),
        ("slater implies zero gap", Some(Duration::from_secs(120)), slater_pairs),
        ("weak duality", Some(Duration::from_secs(60)), weak_duality),
        ("gordan exclusivity", Some(Duration::from_secs(60)), gordan),
        ("recession polar identity", Some(Duration::from_secs(60)), recession_identity),
        ("boundedness dichotomy", None, boundedness_dichotomy),
        ("finiteness", None, finiteness),
        ("gap-bound separation", None, gap_separation),
        ("projection exactness", Some(Duration::from_secs(30)), projection_exactness),
        ("cone calculus", Some(Duration::from_secs(30)), cone_calculus),
    ];
    let mut failed = Vec::new();
    for (i, (name, budget, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let took = start.elapsed();
        let over = budget.is_some_and(|b| took > b);
        let (tag, detail) = match (&outcome, over) {
            (Ok(d), false) => ("PASS", d.clone()),
            (Ok(d), true) => ("FAIL", format!("{d}; over the {:.0} s budget", budget.unwrap().as_secs_f64())),
            (Err(e), _) => ("FAIL", e.clone()),
        };
        println!("{tag} {:>2} {name} ({:.2} s): {detail}", i + 1, took.as_secs_f64());
        if tag == "FAIL" {
            failed.push(i + 1);
        }
    }
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
