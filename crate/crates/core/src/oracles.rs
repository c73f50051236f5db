//! Example families with certified regularity data.
//!
//! * `trunc(a,d)` is `M(a)_{≤d}`, a torsion module: `h⁰ = d` and all higher
//!   local cohomology vanishes, so `reg = d` and `crit = 0`.
//! * `syz(a,d,j)` is the `j`-th syzygy of `trunc(a,d)` along greedy free
//!   covers. Free modules have no local cohomology, so each cover moves the
//!   profile up one step: `h^j = d`, `reg = d + j`, `crit = j`.
//! * `rand(gens;rels;density;seed)` is a seeded random presentation with no
//!   certificate, used for inequality checks.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::comb::{enumerate_injections, Injection};
use crate::error::{Error, Result};
use crate::exactlin::PrimeField;
use crate::free::{coker_of_map, FreeMap, FreeModule, FreeTerm};
use crate::invariants::TBounds;
use crate::module::TruncatedFIModule;
use crate::resolution::{minimal_generators, syzygy_with};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OracleCertificate {
    pub reg: i32,
    pub crit: i32,
    /// `j -> h^j`, `-1` for vanishing local cohomology.
    pub hprofile: BTreeMap<usize, i32>,
    pub provenance: Vec<String>,
}

impl OracleCertificate {
    /// Builds the certificate from a profile, deriving `reg` and `crit`.
    pub fn from_profile(hprofile: BTreeMap<usize, i32>, provenance: Vec<String>) -> Self {
        let (reg, crit) = reg_and_crit(&hprofile);
        Self {
            reg,
            crit,
            hprofile,
            provenance,
        }
    }

    /// `reg` and `crit` agree with the profile.
    pub fn is_consistent(&self) -> bool {
        reg_and_crit(&self.hprofile) == (self.reg, self.crit)
    }

    pub fn h(&self, j: usize) -> i32 {
        self.hprofile.get(&j).copied().unwrap_or(-1)
    }
}

/// `max(h^j + j)` over nonvanishing entries and the least `j` attaining it.
fn reg_and_crit(profile: &BTreeMap<usize, i32>) -> (i32, i32) {
    let mut best: Option<(i32, i32)> = None;
    for (&j, &h) in profile {
        if h < 0 {
            continue;
        }
        let v = h + j as i32;
        if best.is_none_or(|(r, _)| v > r) {
            best = Some((v, j as i32));
        }
    }
    best.unwrap_or((-1, -1))
}

#[derive(Clone, Debug, PartialEq)]
pub enum FamilySpec {
    Trunc { a: usize, d: usize },
    Syz { a: usize, d: usize, j: usize },
    Rand { gens: Vec<usize>, rels: Vec<usize>, density: f64, seed: u64 },
}

fn join(xs: &[usize]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

impl fmt::Display for FamilySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FamilySpec::Trunc { a, d } => write!(f, "trunc({a},{d})"),
            FamilySpec::Syz { a, d, j } => write!(f, "syz({a},{d},{j})"),
            FamilySpec::Rand { gens, rels, density, seed } => {
                write!(f, "rand({};{};{};{})", join(gens), join(rels), density, seed)
            }
        }
    }
}

impl FromStr for FamilySpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |why: &str| Error::InvalidFamily(format!("`{s}`: {why}"));
        let s = s.trim();
        let open = s.find('(').ok_or_else(|| bad("expected name(args)"))?;
        if !s.ends_with(')') {
            return Err(bad("missing closing parenthesis"));
        }
        let name = &s[..open];
        let body = &s[open + 1..s.len() - 1];
        let ints = |text: &str| -> Result<Vec<usize>> {
            if text.trim().is_empty() {
                return Ok(Vec::new());
            }
            text.split(',')
                .map(|t| t.trim().parse::<usize>().map_err(|_| bad(&format!("`{t}` is not a count"))))
                .collect()
        };
        match name {
            "trunc" => match ints(body)?[..] {
                [a, d] => Ok(FamilySpec::Trunc { a, d }),
                _ => Err(bad("trunc takes two arguments")),
            },
            "syz" => match ints(body)?[..] {
                [a, d, j] => Ok(FamilySpec::Syz { a, d, j }),
                _ => Err(bad("syz takes three arguments")),
            },
            "rand" => {
                let parts: Vec<&str> = body.split(';').collect();
                let [g, r, dens, seed] = parts[..] else {
                    return Err(bad("rand takes gens;rels;density;seed"));
                };
                let density: f64 = dens.trim().parse().map_err(|_| bad("density is not a number"))?;
                if !(0.0..=1.0).contains(&density) {
                    return Err(bad("density must lie in [0, 1]"));
                }
                let seed: u64 = seed.trim().parse().map_err(|_| bad("seed is not an integer"))?;
                Ok(FamilySpec::Rand {
                    gens: ints(g)?,
                    rels: ints(r)?,
                    density,
                    seed,
                })
            }
            _ => Err(bad("unknown family")),
        }
    }
}

#[derive(Clone, Debug)]
pub struct OracleInstance {
    pub id: String,
    pub spec: FamilySpec,
    pub module: TruncatedFIModule,
    pub cert: Option<OracleCertificate>,
    pub bounds: TBounds,
    pub presentation: Option<FreeMap>,
}

impl OracleInstance {
    /// Builds the family member through degree `top`.
    pub fn build(field: PrimeField, spec: &FamilySpec, top: usize) -> Result<Self> {
        match spec {
            FamilySpec::Trunc { a, d } => trunc_free(field, *a, *d, top),
            FamilySpec::Syz { a, d, j } => syzygy_torsion(field, *a, *d, *j, top),
            FamilySpec::Rand { gens, rels, density, seed } => random_presentation(field, gens, rels, *density, *seed, top),
        }
    }
}

fn trunc_presentation(field: PrimeField, a: usize, d: usize) -> FreeMap {
    FreeMap::new(
        field,
        FreeModule::new(vec![d + 1]),
        FreeModule::new(vec![a]),
        vec![vec![FreeTerm {
            target: 0,
            coef: 1,
            inj: Injection::standard(a, d + 1),
        }]],
    )
    .expect("well-formed presentation")
}

/// `M(a)_{≤d}`: the quotient of `M(a)` by the submodule generated in degree `d + 1`.
pub fn trunc_free(field: PrimeField, a: usize, d: usize, top: usize) -> Result<OracleInstance> {
    if d < a {
        return Err(Error::InvalidFamily(format!("trunc({a},{d}) needs d >= a")));
    }
    let phi = trunc_presentation(field, a, d);
    let module = coker_of_map(&phi, top)?;
    let cert = OracleCertificate::from_profile(
        BTreeMap::from([(0, d as i32)]),
        vec![format!("M({a}) truncated above degree {d} is torsion of degree {d}; higher local cohomology vanishes")],
    );
    Ok(OracleInstance {
        id: FamilySpec::Trunc { a, d }.to_string(),
        spec: FamilySpec::Trunc { a, d },
        module,
        cert: Some(cert),
        bounds: TBounds {
            gen: a as i32,
            rel: d as i32 + 1,
        },
        presentation: Some(phi),
    })
}

/// `j`-th syzygy of `M(a)_{≤d}`.
///
/// Generator scans are bounded: the `k`-th syzygy is generated in degrees
/// at most `a + d + k`, because `t_k(M(a)_{≤d}) <= a + d + k` and each
/// cover's own generators sit one step lower.
pub fn syzygy_torsion(field: PrimeField, a: usize, d: usize, j: usize, top: usize) -> Result<OracleInstance> {
    if j == 0 {
        return Err(Error::InvalidFamily("syz needs j >= 1".into()));
    }
    let base = trunc_free(field, a, d, top)?;
    let mut provenance = base.cert.as_ref().unwrap().provenance.clone();
    let mut current = base.module;
    for k in 0..j {
        let limit = a + d + k;
        if limit > current.trusted() {
            return Err(Error::OutOfWindow {
                required: limit,
                available: current.trusted(),
            });
        }
        let gens = minimal_generators(&current, limit)?;
        let syz = syzygy_with(&current, &gens)?;
        provenance.push(format!(
            "cover {} by free generators in degrees {:?}; free modules have vanishing local cohomology, so the kernel's profile moves up by one",
            k + 1,
            syz.cover.gens
        ));
        current = syz.module;
    }
    let spec = FamilySpec::Syz { a, d, j };
    Ok(OracleInstance {
        id: spec.to_string(),
        spec,
        module: current,
        cert: Some(OracleCertificate::from_profile(BTreeMap::from([(j, d as i32)]), provenance)),
        bounds: TBounds {
            gen: (a + d + j) as i32,
            rel: (a + d + j + 1) as i32,
        },
        presentation: None,
    })
}

/// Each relation of degree `r` includes each injection `[a_i] -> [r]` into
/// each generator independently with probability `density`, with a
/// coefficient uniform among the nonzero residues. A column that draws
/// nothing gets one uniformly chosen term instead, so relations that can be
/// nonzero are.
pub fn random_free_map(field: PrimeField, gens: &[usize], rels: &[usize], density: f64, seed: u64) -> FreeMap {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let target = FreeModule::new(gens.to_vec());
    let source = FreeModule::new(rels.to_vec());
    let columns = rels
        .iter()
        .map(|&r| {
            let eligible: Vec<(usize, Injection)> = gens
                .iter()
                .enumerate()
                .flat_map(|(i, &a)| enumerate_injections(a, r).into_iter().map(move |inj| (i, inj)))
                .collect();
            let mut col = Vec::new();
            for (i, inj) in &eligible {
                if rng.gen_bool(density) {
                    let coef = rng.gen_range(1..field.p());
                    col.push(FreeTerm { target: *i, coef, inj: inj.clone() });
                }
            }
            // an empty draw would only add a zero relation
            if col.is_empty() && !eligible.is_empty() {
                let (i, inj) = eligible[rng.gen_range(0..eligible.len())].clone();
                col.push(FreeTerm {
                    target: i,
                    coef: rng.gen_range(1..field.p()),
                    inj,
                });
            }
            col
        })
        .collect();
    FreeMap::new(field, source, target, columns).expect("sampled terms are well formed")
}

pub fn random_presentation(field: PrimeField, gens: &[usize], rels: &[usize], density: f64, seed: u64, top: usize) -> Result<OracleInstance> {
    let phi = random_free_map(field, gens, rels, density, seed);
    let module = coker_of_map(&phi, top)?;
    let spec = FamilySpec::Rand {
        gens: gens.to_vec(),
        rels: rels.to_vec(),
        density,
        seed,
    };
    Ok(OracleInstance {
        id: spec.to_string(),
        spec,
        module,
        cert: None,
        bounds: TBounds {
            gen: gens.iter().max().map_or(-1, |&x| x as i32),
            rel: rels.iter().max().map_or(-1, |&x| x as i32),
        },
        presentation: Some(phi),
    })
}

/// Shapes for a seeded sweep: one or two generators of degree at most
/// `max_gen`, one or two relations of degree above the smallest generator
/// degree and at most `max_rel`. Relations in a generator's own degree
/// tend to kill it outright, which makes for dull instances.
pub fn random_sweep(count: usize, max_gen: usize, max_rel: usize, density: f64, seed: u64) -> Vec<FamilySpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let mut gens: Vec<usize> = (0..rng.gen_range(1..=2)).map(|_| rng.gen_range(0..=max_gen)).collect();
            gens.sort_unstable();
            let lo = (gens[0] + 1).min(max_rel);
            let mut rels: Vec<usize> = (0..rng.gen_range(1..=2)).map(|_| rng.gen_range(lo..=max_rel)).collect();
            rels.sort_unstable();
            FamilySpec::Rand {
                gens,
                rels,
                density,
                seed: rng.gen(),
            }
        })
        .collect()
}
