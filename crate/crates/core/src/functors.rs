//! The shift `Σ`, the map `ι: V -> ΣV`, the derivative `Δ = coker ι`, the
//! kernel `K = ker ι`, and the torsion submodule `Γ`.
//!
//! The point added by the shift is always the last one: `(ΣV)_n = V_{n+1}`
//! with `S_n` acting on the first `n` points.

use crate::error::{Error, Result};
use crate::exactlin::{kernel, Matrix, Subquotient, Subspace};
use crate::module::{ExtendedDegree, FiMap, TruncatedFIModule};

fn need_one(v: &TruncatedFIModule) -> Result<()> {
    if v.trusted() < 1 {
        return Err(Error::OutOfWindow {
            required: 1,
            available: v.trusted(),
        });
    }
    Ok(())
}

pub fn shift(v: &TruncatedFIModule) -> Result<TruncatedFIModule> {
    need_one(v)?;
    let top = v.top() - 1;
    let dims = (0..=top).map(|n| v.dim(n + 1)).collect();
    let coxeter = (0..=top)
        .map(|n| (0..n.saturating_sub(1)).map(|k| v.rho(n + 1, k).clone()).collect())
        .collect();
    let incl = (0..top).map(|n| v.rho(n + 2, n).mul(v.incl(n + 1))).collect();
    TruncatedFIModule::new(v.field(), dims, coxeter, incl, v.trusted() - 1)
}

/// `ι_n = U_n` for `n < top`.
pub fn iota(v: &TruncatedFIModule) -> Result<FiMap> {
    need_one(v)?;
    Ok(FiMap {
        mats: (0..v.top()).map(|n| v.incl(n).clone()).collect(),
    })
}

/// `ΔV` together with the subquotient description of each `(ΔV)_n` inside
/// `V_{n+1}`, which is what maps need to descend.
pub fn derivative_with_parts(v: &TruncatedFIModule) -> Result<(TruncatedFIModule, Vec<Subquotient>)> {
    let sigma = shift(v)?;
    let parts: Vec<Subquotient> = (0..v.top())
        .map(|n| Subquotient::of_quotient(v.field(), v.dim(n + 1), v.incl(n)))
        .collect();
    let delta = sigma.subquotient(&parts, sigma.trusted())?;
    Ok((delta, parts))
}

pub fn derivative(v: &TruncatedFIModule) -> Result<TruncatedFIModule> {
    derivative_with_parts(v).map(|(d, _)| d)
}

pub fn iterated_derivative(v: &TruncatedFIModule, a: usize) -> Result<TruncatedFIModule> {
    let mut out = v.clone();
    for _ in 0..a {
        out = derivative(&out)?;
    }
    Ok(out)
}

/// `Δf` for a natural map `f: V -> W`, given both derivative descriptions.
pub fn derivative_map(f: &FiMap, src_parts: &[Subquotient], dst_parts: &[Subquotient]) -> Result<FiMap> {
    let top = src_parts.len().min(dst_parts.len());
    let mats = (0..top)
        .map(|n| src_parts[n].induced(&f.mats[n + 1], &dst_parts[n]))
        .collect::<Result<Vec<Matrix>>>()?;
    Ok(FiMap { mats })
}

pub fn kernel_k(v: &TruncatedFIModule) -> Result<TruncatedFIModule> {
    need_one(v)?;
    let subs: Vec<Subspace> = (0..v.top()).map(|n| kernel(v.incl(n))).collect();
    v.submodule(&subs, v.trusted() - 1)
}

/// `Γ(V)_n = ker(V_n -> V_{B+1})` for `n <= B`, zero above. `bound` must be
/// a certified upper bound for `deg Γ(V)`.
pub fn torsion_gamma(v: &TruncatedFIModule, bound: Option<i32>) -> Result<TruncatedFIModule> {
    let b = bound.ok_or(Error::UncertifiedBound)?;
    let target = (b + 1).max(0) as usize;
    if v.trusted() < target {
        return Err(Error::OutOfWindow {
            required: target,
            available: v.trusted(),
        });
    }
    let field = v.field();
    let subs = (0..=v.top())
        .map(|n| {
            if (n as i32) <= b {
                Ok(kernel(&v.inclusion_chain(n, target)?))
            } else {
                Ok(Subspace::zero(field, v.dim(n)))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    v.submodule(&subs, v.trusted())
}

/// `h⁰(V) = deg Γ(V)`, certified by the same bound.
pub fn h0(v: &TruncatedFIModule, bound: Option<i32>) -> Result<ExtendedDegree> {
    let gamma = torsion_gamma(v, bound)?;
    Ok(gamma.degree(bound))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactlin::PrimeField;
    use crate::free::{coker_of_map, evaluate_free, free_dim, FreeMap, FreeModule, FreeTerm};
    use crate::comb::Injection;

    fn field() -> PrimeField {
        PrimeField::default()
    }

    fn free(gens: Vec<usize>, top: usize) -> TruncatedFIModule {
        evaluate_free(field(), &FreeModule::new(gens), top)
    }

    /// `M(0)_{≤d}` as the cokernel of `M(d+1) -> M(0)`.
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

    #[test]
    fn shift_examples() {
        let m0 = free(vec![0], 5);
        assert_eq!(shift(&m0).unwrap(), free(vec![0], 4));
        let m1 = shift(&free(vec![1], 5)).unwrap();
        assert_eq!(m1.dims(), &[1, 2, 3, 4, 5]);
        m1.validate().unwrap();
        assert_eq!(shift(&trunc0(2, 6)).unwrap().dims(), &[1, 1, 0, 0, 0, 0]);
        assert_eq!(m1.trusted(), 4);
    }

    #[test]
    fn shifted_free_dims_split() {
        for a in 1..=3 {
            let s = shift(&free(vec![a], 8)).unwrap();
            s.validate().unwrap();
            for n in 0..=7 {
                assert_eq!(s.dim(n), free_dim(a, n) + a * free_dim(a - 1, n));
            }
        }
    }

    #[test]
    fn iota_examples() {
        assert!(iota(&free(vec![0], 4)).unwrap().mats.iter().all(Matrix::is_identity));
        let t = trunc0(2, 5);
        assert!(iota(&t).unwrap().mats[2].is_zero());
        for v in [free(vec![1, 2], 5), trunc0(1, 5)] {
            let s = shift(&v).unwrap();
            assert!(iota(&v).unwrap().is_natural(&v.truncate(4), &s));
        }
    }

    #[test]
    fn derivative_and_kernel_examples() {
        let m0 = free(vec![0], 5);
        assert!(derivative(&m0).unwrap().is_zero());
        assert!(kernel_k(&m0).unwrap().is_zero());
        let t = trunc0(2, 6);
        let k = kernel_k(&t).unwrap();
        assert_eq!(k.dims(), &[0, 0, 1, 0, 0, 0]);
        assert!(derivative(&t).unwrap().is_zero());
        let d = derivative(&free(vec![2], 7)).unwrap();
        d.validate().unwrap();
        for n in 0..=6 {
            assert_eq!(d.dim(n), 2 * free_dim(1, n));
        }
    }

    #[test]
    fn rank_identity_for_iota() {
        for v in [free(vec![1, 2], 6), trunc0(2, 6), free(vec![3], 6)] {
            let d = derivative(&v).unwrap();
            let k = kernel_k(&v).unwrap();
            for n in 0..v.top() {
                assert_eq!(k.dim(n) + v.dim(n + 1), v.dim(n) + d.dim(n));
            }
        }
    }

    #[test]
    fn derivative_dims_of_free() {
        for a in 0..=3 {
            let d = derivative(&free(vec![a], 9)).unwrap();
            for n in 0..=8 {
                let expected = if a == 0 { 0 } else { a * free_dim(a - 1, n) };
                assert_eq!(d.dim(n), expected);
            }
        }
    }

    #[test]
    fn torsion_examples() {
        assert!(torsion_gamma(&free(vec![2], 6), Some(4)).unwrap().is_zero());
        let t = trunc0(2, 6);
        let g = torsion_gamma(&t, Some(2)).unwrap();
        assert_eq!(g.dims(), t.dims());
        assert_eq!(h0(&t, Some(2)).unwrap(), ExtendedDegree::Finite(2));
        assert_eq!(torsion_gamma(&t, None), Err(Error::UncertifiedBound));
        assert!(matches!(torsion_gamma(&t, Some(7)), Err(Error::OutOfWindow { .. })));
        // idempotent
        let gg = torsion_gamma(&g, Some(2)).unwrap();
        assert_eq!(gg.dims(), g.dims());
        g.validate().unwrap();
    }

    #[test]
    fn torsion_of_submodule_of_free() {
        let m1 = free(vec![1], 6);
        let subs: Vec<Subspace> = (0..=6)
            .map(|n| if n <= 1 { Subspace::zero(field(), n) } else { Subspace::whole(field(), n) })
            .collect();
        let v = m1.submodule(&subs, 6).unwrap();
        assert!(torsion_gamma(&v, Some(3)).unwrap().is_zero());
    }
}
