//! Reproducible instance generators.
//!
//! Every random draw comes from a ChaCha8 stream selected by the instance
//! seed and the name of the component being drawn, so adding a component
//! never shifts the draws of another.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::cones::{Cone, FactorCone};
use crate::error::{Error, Result};
use crate::linalg::{svec, Factor};
use crate::program::{ConicProgram, Sense};

/// Bumped whenever the mapping from (family, parameters, seed) to bytes
/// changes.
pub const PRNG_VERSION: &str = "chacha8-streams-v1";

/// Random source for one named component of an instance.
pub fn stream(seed: u64, component: &str) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(fnv1a(component.as_bytes()));
    rng
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    ExampleAdapted,
    Planted,
    Packing,
    Random,
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Family> {
        match s {
            "example-adapted" => Ok(Family::ExampleAdapted),
            "planted" => Ok(Family::Planted),
            "packing" => Ok(Family::Packing),
            "random" => Ok(Family::Random),
            _ => Err(Error::Precondition(format!("unknown gallery family {s:?}"))),
        }
    }
}

/// Ground truth attached to a generated instance.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Annotations {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pobj: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dobj: Option<f64>,
    pub flags: Vec<String>,
    /// `"construction"` when the claim follows from how the data were
    /// built, `"certificate"` when a witness was checked at generation.
    pub provenance: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub family: Family,
    pub n: usize,
    pub m: usize,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub profile: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected: Option<Annotations>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    pub program: ConicProgram,
    pub spec: InstanceSpec,
}

/// Strictly feasible primal-dual points a planted instance was built from.
#[derive(Clone, Debug, PartialEq)]
pub struct Planted {
    pub x0: DVector<f64>,
    pub s0: DVector<f64>,
    pub y0: DVector<f64>,
    pub w0: DVector<f64>,
}

/// `A = [I_{n-1} e_1]`, `b = 1 - e_1`, `c = 0`, `K = {0}`, `C = SOC(n)`:
/// the constraints read `x_1 + x_n = 0`, `x_j = 1` for `1 < j < n`, which
/// no point of the Lorentz cone satisfies, although the residual can be
/// made arbitrarily small. The dual optimum 0 is attained at `y = 0`.
pub fn example_adapted(n: usize) -> Result<Instance> {
    if n < 3 {
        return Err(Error::Precondition(format!("example_adapted needs n >= 3, got {n}")));
    }
    let mut a = DMatrix::zeros(n - 1, n);
    for j in 0..n - 1 {
        a[(j, j)] = 1.0;
    }
    a[(0, n - 1)] = 1.0;
    let mut b = DVector::from_element(n - 1, 1.0);
    b[0] = 0.0;
    let c = DVector::zeros(n);
    let p = ConicProgram::from_dense(a, b, c, Cone::zero(n - 1), Cone::soc(n), Sense::Sup)?;
    // y = 0 is dual feasible with value 0.
    let y0 = DVector::zeros(n - 1);
    let dual_ok = p.is_dual_feasible(&y0, 0.0);
    let mut flags = vec!["primal-infeasible".to_string(), "dual-solvable".to_string()];
    if dual_ok {
        flags.push("dual-point-checked".to_string());
    }
    Ok(Instance {
        program: p,
        spec: InstanceSpec {
            family: Family::ExampleAdapted,
            n,
            m: n - 1,
            seed: 0,
            profile: None,
            expected: Some(Annotations {
                pobj: Some(f64::NEG_INFINITY),
                dobj: Some(0.0),
                flags,
                provenance: "construction".to_string(),
            }),
        },
    })
}

/// Point of `cone` whose interiority margin is at least `margin`.
pub fn draw_relint(cone: &Cone, margin: f64, rng: &mut impl Rng) -> DVector<f64> {
    let mut x = DVector::zeros(cone.dim());
    for (kind, factor, r) in cone.blocks() {
        let block = &mut x.as_mut_slice()[r.clone()];
        match kind {
            FactorCone::Zero => {}
            FactorCone::Free => block.iter_mut().for_each(|v| *v = rng.sample(StandardNormal)),
            FactorCone::Nonneg => block
                .iter_mut()
                .for_each(|v| *v = margin + rng.sample::<f64, _>(StandardNormal).abs()),
            FactorCone::SecondOrder => {
                let k = block.len();
                let mut nrm = 0.0;
                for v in &mut block[..k - 1] {
                    *v = rng.sample(StandardNormal);
                    nrm += *v * *v;
                }
                block[k - 1] = nrm.sqrt() + margin + rng.sample::<f64, _>(StandardNormal).abs();
            }
            FactorCone::Psd => {
                let m = match factor {
                    Factor::Sym(m) => m,
                    Factor::Real(_) => unreachable!("Psd lives on Sym factors"),
                };
                let g = DMatrix::from_fn(m, m, |_, _| rng.sample::<f64, _>(StandardNormal)) / (m as f64).sqrt();
                let s = &g * g.transpose() + DMatrix::identity(m, m) * margin;
                block.copy_from_slice(svec(&s).as_slice());
            }
        }
    }
    if cone.is_negated() {
        -x
    } else {
        x
    }
}

pub fn gaussian_matrix(rows: usize, cols: usize, rng: &mut impl Rng) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

pub fn gaussian_vector(len: usize, rng: &mut impl Rng) -> DVector<f64> {
    DVector::from_fn(len, |_, _| StandardNormal.sample(rng))
}

/// Cone families used by the random generators.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConeMix {
    Lp,
    Soc,
    Psd,
    Mixed,
}

impl ConeMix {
    pub const ALL: [ConeMix; 4] = [ConeMix::Lp, ConeMix::Soc, ConeMix::Psd, ConeMix::Mixed];
}

/// Product cone of roughly `dim` coordinates drawn from `mix`.
pub fn random_cone(mix: ConeMix, dim: usize, rng: &mut impl Rng) -> Cone {
    let dim = dim.max(1);
    let mut parts = Vec::new();
    let mut left = dim;
    while left > 0 {
        let pick = match mix {
            ConeMix::Lp => {
                if left >= 2 && rng.random_bool(0.2) {
                    FactorCone::Zero
                } else {
                    FactorCone::Nonneg
                }
            }
            ConeMix::Soc => FactorCone::SecondOrder,
            ConeMix::Psd => FactorCone::Psd,
            ConeMix::Mixed => match rng.random_range(0..5) {
                0 => FactorCone::Zero,
                1 => FactorCone::Free,
                2 => FactorCone::Nonneg,
                3 => FactorCone::SecondOrder,
                _ => FactorCone::Psd,
            },
        };
        let part = match pick {
            FactorCone::Zero => {
                let k = rng.random_range(1..=left.min(2));
                Cone::zero(k)
            }
            FactorCone::Free => Cone::free(rng.random_range(1..=left.min(2))),
            FactorCone::Nonneg => Cone::nonneg(rng.random_range(1..=left.min(4))),
            FactorCone::SecondOrder => {
                if left < 2 {
                    Cone::nonneg(1)
                } else {
                    Cone::soc(rng.random_range(2..=left.min(5)))
                }
            }
            FactorCone::Psd => {
                let fits: Vec<usize> = (1..=3).filter(|m| m * (m + 1) / 2 <= left).collect();
                let m = fits[rng.random_range(0..fits.len())];
                Cone::psd(m)
            }
        };
        left -= part.dim();
        parts.push(part);
    }
    Cone::product(&parts).expect("unsigned parts")
}

/// Both sides strictly feasible by construction: `b = A x0 + s0`,
/// `c = A* y0 - w0` with `x0, s0, y0, w0` in the relative interiors of
/// `C, K, K*, C*`, each with margin at least `margin`.
pub fn planted_from_cones(k: &Cone, cone_c: &Cone, margin: f64, seed: u64) -> Result<(ConicProgram, Planted)> {
    let (m, n) = (k.dim(), cone_c.dim());
    let a = gaussian_matrix(m, n, &mut stream(seed, "A"));
    let x0 = draw_relint(cone_c, margin, &mut stream(seed, "x0"));
    let s0 = draw_relint(k, margin, &mut stream(seed, "s0"));
    let y0 = draw_relint(&k.dual(), margin, &mut stream(seed, "y0"));
    let w0 = draw_relint(&cone_c.dual(), margin, &mut stream(seed, "w0"));
    let b = &a * &x0 + &s0;
    let c = a.tr_mul(&y0) - &w0;
    let p = ConicProgram::from_dense(a, b, c, k.clone(), cone_c.clone(), Sense::Sup)?;
    Ok((p, Planted { x0, s0, y0, w0 }))
}

/// Planted strong-duality instance with random cones of the given sizes.
pub fn planted_strong_duality(n: usize, m: usize, mix: ConeMix, seed: u64) -> Result<(Instance, Planted)> {
    let mut rng = stream(seed, "cones");
    let cone_c = random_cone(mix, n, &mut rng);
    let mut k = random_cone(mix, m, &mut rng);
    if cone_c.factors().iter().all(|f| *f == FactorCone::Free) && k.factors().iter().all(|f| *f == FactorCone::Free) {
        k = Cone::nonneg(k.dim());
    }
    let (p, planted) = planted_from_cones(&k, &cone_c, 1.0, seed)?;
    let (pobj, dobj) = (p.objective(&planted.x0), p.dual_objective(&planted.y0));
    let ok = p.is_primal_feasible(&planted.x0, 1e-9)
        && p.is_dual_feasible(&planted.y0, 1e-9)
        && p.k_cone().relint_member(&planted.s0, 0.0)
        && p.c_cone().relint_member(&planted.x0, 0.0);
    let mut flags = vec!["zero-gap-expected".to_string()];
    if ok {
        flags.push("primal-strict".to_string());
        flags.push("dual-strict".to_string());
    }
    let spec = InstanceSpec {
        family: Family::Planted,
        n: p.x_space().dim(),
        m: p.y_space().dim(),
        seed,
        profile: Some(mix_name(mix).to_string()),
        expected: Some(Annotations {
            // Bracket of the common optimal value.
            pobj: Some(pobj),
            dobj: Some(dobj),
            flags,
            provenance: "certificate".to_string(),
        }),
    };
    Ok((Instance { program: p, spec }, planted))
}

fn mix_name(mix: ConeMix) -> &'static str {
    match mix {
        ConeMix::Lp => "lp",
        ConeMix::Soc => "soc",
        ConeMix::Psd => "psd",
        ConeMix::Mixed => "mixed",
    }
}

/// Packing LP `sup{<c,x> : A x <= b, x >= 0}` with strictly positive `A`
/// (columns in the interior of `K`). With `feasible_b` false one entry of
/// `b` is made negative.
pub fn packing_instance(m: usize, n: usize, seed: u64, feasible_b: bool) -> Result<Instance> {
    let mut ra = stream(seed, "A");
    let a = DMatrix::from_fn(m, n, |_, _| ra.random_range(0.5..2.0));
    let mut rb = stream(seed, "b");
    let mut b = DVector::from_fn(m, |_, _| rb.random_range(1.0..3.0));
    if !feasible_b {
        let i = rb.random_range(0..m);
        b[i] = -b[i];
    }
    let mut rc = stream(seed, "c");
    let c = DVector::from_fn(n, |_, _| rc.random_range(0.1..1.0));
    let p = ConicProgram::from_dense(a, b.clone(), c, Cone::nonneg(m), Cone::nonneg(n), Sense::Sup)?;
    let x0 = DVector::zeros(n);
    let mut flags = vec!["packing".to_string()];
    let provenance = if feasible_b && p.is_primal_feasible(&x0, 0.0) {
        flags.push("primal-feasible".to_string());
        flags.push("primal-bounded".to_string());
        "certificate"
    } else {
        flags.push("primal-infeasible".to_string());
        "construction"
    };
    Ok(Instance {
        program: p,
        spec: InstanceSpec {
            family: Family::Packing,
            n,
            m,
            seed,
            profile: None,
            expected: Some(Annotations {
                pobj: None,
                dobj: None,
                flags,
                provenance: provenance.to_string(),
            }),
        },
    })
}

/// Named random profiles: `(x dim, y dim, cone mix)`.
pub const PROFILES: [(&str, usize, usize, ConeMix); 6] = [
    ("lp-small", 4, 3, ConeMix::Lp),
    ("lp-medium", 12, 10, ConeMix::Lp),
    ("soc-small", 6, 5, ConeMix::Soc),
    ("psd-small", 6, 6, ConeMix::Psd),
    ("mixed-small", 8, 8, ConeMix::Mixed),
    ("mixed-large", 30, 30, ConeMix::Mixed),
];

/// Unstructured random program: Gaussian data, no feasibility promise.
pub fn random_program(profile: &str, seed: u64) -> Result<Instance> {
    let &(_, n, m, mix) = PROFILES
        .iter()
        .find(|p| p.0 == profile)
        .ok_or_else(|| Error::Precondition(format!("unknown profile {profile:?}")))?;
    let mut rng = stream(seed, "cones");
    let cone_c = random_cone(mix, n, &mut rng);
    let mut k = random_cone(mix, m, &mut rng);
    if cone_c.factors().iter().all(|f| *f == FactorCone::Free) && k.factors().iter().all(|f| *f == FactorCone::Free) {
        k = Cone::nonneg(k.dim());
    }
    let a = gaussian_matrix(k.dim(), cone_c.dim(), &mut stream(seed, "A"));
    let b = gaussian_vector(k.dim(), &mut stream(seed, "b"));
    let c = gaussian_vector(cone_c.dim(), &mut stream(seed, "c"));
    let p = ConicProgram::from_dense(a, b, c, k, cone_c, Sense::Sup)?;
    Ok(Instance {
        spec: InstanceSpec {
            family: Family::Random,
            n: p.x_space().dim(),
            m: p.y_space().dim(),
            seed,
            profile: Some(profile.to_string()),
            expected: None,
        },
        program: p,
    })
}
