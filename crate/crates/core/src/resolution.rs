//! Generators, free covers, syzygies and free resolutions.
//!
//! This is the textbook route to `H_i^FI` and `L_iΔ^a`. It is expensive
//! (free modules grow factorially) so the invariant engine uses the
//! complexes in [`crate::koszul`]; this module builds the syzygy families
//! and cross-checks the fast route on small inputs.

use crate::comb::enumerate_injections;
use crate::error::{Error, Result};
use crate::exactlin::{cokernel, Matrix, PrimeField, Subquotient, Subspace};
use crate::free::{evaluate_free, evaluate_free_map, h0_free_dim, h0_of_free_map, FreeMap, FreeModule, FreeTerm};
use crate::functors::{derivative_map, derivative_with_parts};
use crate::module::{FiMap, TruncatedFIModule};

/// Smallest `S_n`-stable subspace of `V_n` containing `s`.
fn closure(v: &TruncatedFIModule, n: usize, mut s: Subspace) -> Subspace {
    loop {
        let before = s.dim();
        for k in 0..n.saturating_sub(1) {
            let moved = v.rho(n, k).mul(&s.basis);
            s = s.join(&moved);
        }
        if s.dim() == before {
            return s;
        }
    }
}

/// Generators in degrees `0..=limit`: for each degree, standard basis
/// vectors completing the `S_n`-span of the image from degree `n - 1`,
/// kept greedily only when they enlarge the span.
pub fn minimal_generators(v: &TruncatedFIModule, limit: usize) -> Result<Vec<(usize, Matrix)>> {
    if limit > v.trusted() {
        return Err(Error::OutOfWindow {
            required: limit,
            available: v.trusted(),
        });
    }
    let field = v.field();
    let mut out = Vec::new();
    for n in 0..=limit {
        let lower = if n == 0 {
            Subspace::zero(field, v.dim(0))
        } else {
            Subspace::span(v.incl(n - 1))
        };
        let mut span = closure(v, n, lower);
        if span.dim() == v.dim(n) {
            continue;
        }
        let complement = cokernel(&span.basis).section;
        let mut kept = Vec::new();
        for q in 0..complement.cols() {
            let e = complement.select_columns(&[q]);
            if span.contains(&e) {
                continue;
            }
            span = closure(v, n, span.join(&e));
            kept.push(q);
        }
        out.push((n, complement.select_columns(&kept)));
    }
    Ok(out)
}

/// The free module on the given generators and the cover map into `V`.
pub fn free_cover(v: &TruncatedFIModule, gens: &[(usize, Matrix)]) -> Result<(FreeModule, FiMap)> {
    let degrees: Vec<usize> = gens.iter().flat_map(|(n, m)| std::iter::repeat_n(*n, m.cols())).collect();
    let vectors: Vec<(usize, Matrix)> = gens
        .iter()
        .flat_map(|(n, m)| (0..m.cols()).map(move |c| (*n, m.select_columns(&[c]))))
        .collect();
    let top = v.top();
    let mut mats = Vec::with_capacity(top + 1);
    for m in 0..=top {
        let mut cols: Vec<Matrix> = Vec::new();
        for (n, x) in &vectors {
            if *n > m {
                continue;
            }
            let pushed = v.inclusion_chain(*n, m)?.mul(x);
            for f in enumerate_injections(*n, m) {
                let (sigma, _) = crate::comb::factor_injection(&f);
                cols.push(v.act(m, &sigma, &pushed));
            }
        }
        let refs: Vec<&Matrix> = cols.iter().collect();
        mats.push(Matrix::hstack(v.field(), v.dim(m), &refs));
    }
    Ok((FreeModule::new(degrees), FiMap { mats }))
}

/// Kernel of a cover, as a submodule of the evaluated free module.
pub struct Syzygy {
    pub cover: FreeModule,
    pub evaluated: TruncatedFIModule,
    pub kernel: Vec<Subspace>,
    pub module: TruncatedFIModule,
}

pub fn syzygy(v: &TruncatedFIModule, limit: usize) -> Result<Syzygy> {
    let gens = minimal_generators(v, limit)?;
    syzygy_with(v, &gens)
}

pub fn syzygy_with(v: &TruncatedFIModule, gens: &[(usize, Matrix)]) -> Result<Syzygy> {
    let (cover, pi) = free_cover(v, gens)?;
    let evaluated = evaluate_free(v.field(), &cover, v.top());
    let kernel: Vec<Subspace> = pi.mats.iter().map(crate::exactlin::kernel).collect();
    let module = evaluated.submodule(&kernel, v.trusted())?;
    Ok(Syzygy {
        cover,
        evaluated,
        kernel,
        module,
    })
}

/// Formal map sending generator `j` of `source` to the `j`-th vector of
/// `gens`, read as a combination of basis injections of `target`.
fn formal_map(field: PrimeField, target: &FreeModule, source: FreeModule, vectors: &[(usize, Matrix)]) -> FreeMap {
    let mut columns = Vec::with_capacity(vectors.len());
    for (n, x) in vectors {
        let offsets = target.offsets(*n);
        let mut col = Vec::new();
        for (i, &a) in target.gens.iter().enumerate() {
            for (c, f) in enumerate_injections(a, *n).into_iter().enumerate() {
                let coef = x.get(offsets[i] + c, 0);
                if coef != 0 {
                    col.push(FreeTerm { target: i, coef, inj: f });
                }
            }
        }
        columns.push(col);
    }
    FreeMap {
        field,
        source,
        target: target.clone(),
        columns,
    }
}

/// A free resolution `... -> F_1 -> F_0 -> V`, exact in degrees `<= window`.
#[derive(Clone, Debug)]
pub struct FreeResolution {
    pub modules: Vec<FreeModule>,
    /// `maps[i]: F_{i+1} -> F_i`.
    pub maps: Vec<FreeMap>,
    pub window: usize,
}

/// Resolves through `F_{len}`, scanning generators of each kernel up to the
/// trusted degree of `V`.
pub fn free_resolution(v: &TruncatedFIModule, len: usize) -> Result<FreeResolution> {
    let window = v.trusted();
    let field = v.field();
    let mut syz = syzygy(v, window)?;
    let mut modules = vec![syz.cover.clone()];
    let mut maps = Vec::new();
    for _ in 0..len {
        let gens = minimal_generators(&syz.module, window)?;
        let vectors: Vec<(usize, Matrix)> = gens
            .iter()
            .flat_map(|(n, m)| {
                let basis = &syz.kernel[*n].basis;
                (0..m.cols()).map(move |c| (*n, basis.mul(&m.select_columns(&[c]))))
            })
            .collect();
        let source = FreeModule::new(vectors.iter().map(|(n, _)| *n).collect());
        maps.push(formal_map(field, modules.last().unwrap(), source.clone(), &vectors));
        let next = syzygy_with(&syz.module, &gens)?;
        modules.push(source);
        syz = next;
    }
    Ok(FreeResolution { modules, maps, window })
}

impl FreeResolution {
    /// `dim H_i^FI(V)_a` from the complex `H_0(F_•)` in degree `a`.
    pub fn homology_dim(&self, i: usize, a: usize) -> usize {
        assert!(i < self.maps.len(), "resolution too short");
        let c = h0_free_dim(&self.modules[i], a);
        let out = if i == 0 { 0 } else { h0_of_free_map(&self.maps[i - 1], a).rank() };
        let inc = h0_of_free_map(&self.maps[i], a).rank();
        c - out - inc
    }

    /// `dim co_i^{Δ^a}(V)_n` for `n <= top`, by applying `Δ^a` to the
    /// evaluated resolution.
    pub fn derived_delta_dims(&self, i: usize, a: usize, top: usize) -> Result<Vec<usize>> {
        assert!(i < self.maps.len(), "resolution too short");
        let field = self.maps[0].field;
        let eval_top = top + a;
        let lo = i.saturating_sub(1);
        let mut mods: Vec<TruncatedFIModule> =
            (lo..=i + 1).map(|k| evaluate_free(field, &self.modules[k], eval_top)).collect();
        let mut fmaps: Vec<FiMap> = (lo..=i)
            .map(|k| FiMap {
                mats: (0..=eval_top).map(|n| evaluate_free_map(&self.maps[k], n)).collect(),
            })
            .collect();
        for _ in 0..a {
            let parts: Vec<(TruncatedFIModule, Vec<Subquotient>)> =
                mods.iter().map(derivative_with_parts).collect::<Result<_>>()?;
            fmaps = fmaps
                .iter()
                .enumerate()
                .map(|(k, f)| derivative_map(f, &parts[k + 1].1, &parts[k].1))
                .collect::<Result<_>>()?;
            mods = parts.into_iter().map(|(m, _)| m).collect();
        }
        // fmaps[k] goes from mods[k + 1] to mods[k]; F_i sits at index i - lo
        let at = i - lo;
        Ok((0..=top)
            .map(|n| {
                let c = mods[at].dim(n);
                let out = if at == 0 { 0 } else { fmaps[at - 1].mats[n].rank() };
                c - out - fmaps[at].mats[n].rank()
            })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::comb::Injection;
    use crate::free::coker_of_map;
    use crate::koszul::{derived_delta_dim, fi_homology_dim};

    fn field() -> PrimeField {
        PrimeField::default()
    }

    fn free(gens: Vec<usize>, top: usize) -> TruncatedFIModule {
        evaluate_free(field(), &FreeModule::new(gens), top)
    }

    fn trunc0(d: usize, top: usize) -> TruncatedFIModule {
        let phi = FreeMap::new(
            field(),
            FreeModule::new(vec![d + 1]),
            FreeModule::new(vec![0]),
            vec![vec![FreeTerm { target: 0, coef: 1, inj: Injection::standard(0, d + 1) }]],
        )
        .unwrap();
        coker_of_map(&phi, top).unwrap()
    }

    /// `M(1)_{>1}` as the submodule of `M(1)`.
    fn m1_above1(top: usize) -> TruncatedFIModule {
        let m1 = free(vec![1], top);
        let subs: Vec<Subspace> = (0..=top)
            .map(|n| if n <= 1 { Subspace::zero(field(), n) } else { Subspace::whole(field(), n) })
            .collect();
        m1.submodule(&subs, top).unwrap()
    }

    #[test]
    fn generators_examples() {
        let g = minimal_generators(&free(vec![2], 5), 5).unwrap();
        assert_eq!(g.len(), 1);
        assert_eq!((g[0].0, g[0].1.cols()), (2, 1));
        let g = minimal_generators(&trunc0(2, 5), 5).unwrap();
        assert_eq!(g.iter().map(|(n, m)| (*n, m.cols())).collect::<Vec<_>>(), vec![(0, 1)]);
        let g = minimal_generators(&m1_above1(5), 5).unwrap();
        assert_eq!(g.len(), 1);
        assert_eq!(g[0].0, 2);
        // the S_2-span of one vector of the 2-dim space is everything
        assert!(g[0].1.cols() >= 1);
    }

    #[test]
    fn covers_are_surjective_and_natural() {
        for v in [free(vec![1, 2], 5), trunc0(2, 5), m1_above1(5)] {
            let gens = minimal_generators(&v, 5).unwrap();
            let (f, pi) = free_cover(&v, &gens).unwrap();
            let fv = evaluate_free(field(), &f, 5);
            assert!(pi.is_natural(&fv, &v));
            for n in 0..=5 {
                assert_eq!(pi.mats[n].rank(), v.dim(n));
            }
        }
        let (f, _) = free_cover(&free(vec![2], 4), &minimal_generators(&free(vec![2], 4), 4).unwrap()).unwrap();
        assert_eq!(f.gens, vec![2]);
        let (f, _) = free_cover(&trunc0(2, 4), &minimal_generators(&trunc0(2, 4), 4).unwrap()).unwrap();
        assert_eq!(f.gens, vec![0]);
    }

    #[test]
    fn syzygy_examples() {
        assert!(syzygy(&free(vec![1], 5), 5).unwrap().module.is_zero());
        let s = syzygy(&trunc0(2, 6), 6).unwrap();
        assert_eq!(s.module.dims(), &[0, 0, 0, 1, 1, 1, 1]);
        s.module.validate().unwrap();
    }

    #[test]
    fn resolution_examples() {
        let r = free_resolution(&free(vec![2], 5), 1).unwrap();
        assert!(r.modules[1].gens.is_empty());
        let r = free_resolution(&trunc0(2, 6), 2).unwrap();
        assert_eq!(r.modules[0].gens, vec![0]);
        assert_eq!(r.modules[1].gens, vec![3]);
        for (k, w) in r.maps.windows(2).enumerate() {
            for n in 0..=6 {
                let comp = evaluate_free_map(&w[0], n).mul(&evaluate_free_map(&w[1], n));
                assert!(comp.is_zero(), "maps {k},{} at {n}", k + 1);
            }
        }
    }

    #[test]
    fn resolution_homology_matches_koszul() {
        for v in [trunc0(2, 6), trunc0(1, 6), m1_above1(6)] {
            let r = free_resolution(&v, 3).unwrap();
            for i in 0..=2 {
                for a in 0..=6 {
                    assert_eq!(r.homology_dim(i, a), fi_homology_dim(&v, i, a).unwrap(), "i={i} a={a}");
                }
            }
        }
    }

    #[test]
    fn resolution_derived_delta_matches_cube() {
        let v = trunc0(1, 6);
        let r = free_resolution(&v, 3).unwrap();
        for i in 0..=2 {
            for a in 0..=3 {
                let top = 6 - a;
                let via_res = r.derived_delta_dims(i, a, top).unwrap();
                let via_cube: Vec<usize> = (0..=top).map(|n| derived_delta_dim(&v, i, a, n).unwrap()).collect();
                assert_eq!(via_res, via_cube, "i={i} a={a}");
            }
        }
    }
}
