//! Free FI-modules `M(a_1) ⊕ ... ⊕ M(a_k)` and maps between them.
//!
//! `M(a)_n` has the injections `[a] -> [n]` as basis, in lexicographic
//! order; summands are concatenated in generator order. A map out of `M(b)`
//! is determined by the image of the identity of `[b]`, which is a formal
//! combination of injections into the target generators.

use crate::comb::{enumerate_injections, falling_factorial, Injection, Permutation};
use crate::error::{Error, Result};
use crate::exactlin::{Matrix, PrimeField, Subspace};
use crate::module::TruncatedFIModule;

pub fn free_dim(a: usize, n: usize) -> usize {
    falling_factorial(n, a)
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct FreeModule {
    pub gens: Vec<usize>,
}

impl FreeModule {
    pub fn new(gens: Vec<usize>) -> Self {
        Self { gens }
    }

    pub fn rank(&self) -> usize {
        self.gens.len()
    }

    pub fn dim(&self, n: usize) -> usize {
        self.gens.iter().map(|&a| free_dim(a, n)).sum()
    }

    /// Start of each summand's block in degree `n`.
    pub fn offsets(&self, n: usize) -> Vec<usize> {
        let mut acc = 0;
        self.gens
            .iter()
            .map(|&a| {
                let o = acc;
                acc += free_dim(a, n);
                o
            })
            .collect()
    }

    pub fn max_degree(&self) -> Option<usize> {
        self.gens.iter().copied().max()
    }

    /// Generators of degree exactly `a`.
    pub fn gens_of_degree(&self, a: usize) -> Vec<usize> {
        (0..self.gens.len()).filter(|&i| self.gens[i] == a).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FreeTerm {
    pub target: usize,
    pub coef: u32,
    pub inj: Injection,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FreeMap {
    pub field: PrimeField,
    pub source: FreeModule,
    pub target: FreeModule,
    /// Column `j` is the image of the generator of source summand `j`.
    pub columns: Vec<Vec<FreeTerm>>,
}

impl FreeMap {
    pub fn new(field: PrimeField, source: FreeModule, target: FreeModule, columns: Vec<Vec<FreeTerm>>) -> Result<Self> {
        if columns.len() != source.rank() {
            return Err(Error::Shape(format!(
                "{} columns for {} source generators",
                columns.len(),
                source.rank()
            )));
        }
        for (j, col) in columns.iter().enumerate() {
            for t in col {
                let a = *target
                    .gens
                    .get(t.target)
                    .ok_or_else(|| Error::Shape(format!("column {j} names missing generator g{}", t.target)))?;
                if t.inj.src() != a || t.inj.dst() != source.gens[j] {
                    return Err(Error::Shape(format!(
                        "term {} in column {j} should map [{a}] into [{}]",
                        t.inj, source.gens[j]
                    )));
                }
                if t.coef >= field.p() {
                    return Err(Error::Shape(format!("coefficient {} is not reduced", t.coef)));
                }
            }
        }
        Ok(Self {
            field,
            source,
            target,
            columns,
        })
    }

    pub fn identity(field: PrimeField, f: &FreeModule) -> Self {
        let columns = f
            .gens
            .iter()
            .enumerate()
            .map(|(i, &a)| {
                vec![FreeTerm {
                    target: i,
                    coef: 1,
                    inj: Injection::identity(a),
                }]
            })
            .collect();
        Self {
            field,
            source: f.clone(),
            target: f.clone(),
            columns,
        }
    }

    pub fn zero(field: PrimeField, source: FreeModule, target: FreeModule) -> Self {
        let columns = vec![Vec::new(); source.rank()];
        Self {
            field,
            source,
            target,
            columns,
        }
    }
}

/// Evaluation of a free module through degree `top`.
pub fn evaluate_free(field: PrimeField, f: &FreeModule, top: usize) -> TruncatedFIModule {
    let dims: Vec<usize> = (0..=top).map(|n| f.dim(n)).collect();
    let mut coxeter = Vec::with_capacity(top + 1);
    let mut incl = Vec::with_capacity(top);
    for n in 0..=top {
        let offsets = f.offsets(n);
        let bases: Vec<Vec<Injection>> = f.gens.iter().map(|&a| enumerate_injections(a, n)).collect();
        let gens = (0..n.saturating_sub(1))
            .map(|k| {
                let s = Permutation::transposition(n, k).as_injection();
                let mut m = Matrix::zeros(field, dims[n], dims[n]);
                for (i, basis) in bases.iter().enumerate() {
                    for (c, g) in basis.iter().enumerate() {
                        m.set(offsets[i] + s.compose(g).rank(), offsets[i] + c, 1);
                    }
                }
                m
            })
            .collect();
        coxeter.push(gens);
        if n < top {
            let next = f.offsets(n + 1);
            let std = Injection::standard(n, n + 1);
            let mut u = Matrix::zeros(field, dims[n + 1], dims[n]);
            for (i, basis) in bases.iter().enumerate() {
                for (c, g) in basis.iter().enumerate() {
                    u.set(next[i] + std.compose(g).rank(), offsets[i] + c, 1);
                }
            }
            incl.push(u);
        }
    }
    TruncatedFIModule::new(field, dims, coxeter, incl, top).expect("free evaluation has consistent shapes")
}

/// Matrix of `φ` in degree `n` in the canonical bases.
pub fn evaluate_free_map(phi: &FreeMap, n: usize) -> Matrix {
    let field = phi.field;
    let src_off = phi.source.offsets(n);
    let dst_off = phi.target.offsets(n);
    let mut m = Matrix::zeros(field, phi.target.dim(n), phi.source.dim(n));
    for (j, &b) in phi.source.gens.iter().enumerate() {
        if phi.columns[j].is_empty() {
            continue;
        }
        for (c, g) in enumerate_injections(b, n).iter().enumerate() {
            for t in &phi.columns[j] {
                let row = dst_off[t.target] + g.compose(&t.inj).rank();
                m.add_at(row, src_off[j] + c, t.coef);
            }
        }
    }
    m
}

/// `coker φ` through degree `top`, with induced structure maps.
pub fn coker_of_map(phi: &FreeMap, top: usize) -> Result<TruncatedFIModule> {
    let target = evaluate_free(phi.field, &phi.target, top);
    let images: Vec<Subspace> = (0..=top).map(|n| Subspace::span(&evaluate_free_map(phi, n))).collect();
    target.quotient(&images, top)
}

/// Dimension of `H_0(F)` in degree `a`: one copy of the regular
/// representation of `S_a` per generator of degree `a`.
pub fn h0_free_dim(f: &FreeModule, a: usize) -> usize {
    f.gens_of_degree(a).len() * free_dim(a, a)
}

/// The map `H_0(φ)` in degree `a`: only terms between generators of degree
/// `a` (whose injections are bijections) survive.
pub fn h0_of_free_map(phi: &FreeMap, a: usize) -> Matrix {
    let full = evaluate_free_map(phi, a);
    let pick = |f: &FreeModule| -> Vec<usize> {
        let off = f.offsets(a);
        f.gens_of_degree(a)
            .into_iter()
            .flat_map(|i| off[i]..off[i] + free_dim(a, a))
            .collect()
    };
    full.select_rows(&pick(&phi.target)).select_columns(&pick(&phi.source))
}

/// `H_0` of a chain of free maps in degree `a`, one matrix per map.
pub fn h0_of_free_complex(maps: &[FreeMap], a: usize) -> Vec<Matrix> {
    maps.iter().map(|phi| h0_of_free_map(phi, a)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field() -> PrimeField {
        PrimeField::default()
    }

    fn all_ones(field: PrimeField) -> FreeMap {
        FreeMap::new(
            field,
            FreeModule::new(vec![1]),
            FreeModule::new(vec![0]),
            vec![vec![FreeTerm {
                target: 0,
                coef: 1,
                inj: Injection::standard(0, 1),
            }]],
        )
        .unwrap()
    }

    #[test]
    fn free_dims() {
        assert_eq!(free_dim(0, 7), 1);
        assert_eq!(free_dim(2, 4), 12);
        assert_eq!(free_dim(3, 2), 0);
    }

    #[test]
    fn evaluations() {
        let m0 = evaluate_free(field(), &FreeModule::new(vec![0]), 4);
        assert_eq!(m0.dims(), &[1, 1, 1, 1, 1]);
        assert!((0..4).all(|n| m0.incl(n).is_identity()));
        assert!((2..=4).all(|n| (0..n - 1).all(|k| m0.rho(n, k).is_identity())));
        let m1 = evaluate_free(field(), &FreeModule::new(vec![1]), 4);
        assert_eq!(m1.dims(), &[0, 1, 2, 3, 4]);
        // s_1 swaps the first two points
        assert_eq!(m1.rho(3, 0).column(0), vec![0, 1, 0]);
        let m2 = evaluate_free(field(), &FreeModule::new(vec![2]), 4);
        assert_eq!(m2.dims(), &[0, 0, 2, 6, 12]);
        m2.validate().unwrap();
    }

    #[test]
    fn evaluations_validate() {
        for a in 0..=4 {
            evaluate_free(field(), &FreeModule::new(vec![a]), 7).validate().unwrap();
        }
        evaluate_free(field(), &FreeModule::new(vec![0, 2, 1]), 6).validate().unwrap();
    }

    #[test]
    fn map_evaluations() {
        let f = FreeModule::new(vec![1, 2]);
        let id = FreeMap::identity(field(), &f);
        for n in 0..5 {
            assert!(evaluate_free_map(&id, n).is_identity());
            assert!(evaluate_free_map(&FreeMap::zero(field(), f.clone(), f.clone()), n).is_zero());
        }
        let phi = all_ones(field());
        for n in 0..6 {
            let m = evaluate_free_map(&phi, n);
            assert_eq!((m.rows(), m.cols()), (1, n));
            assert!(m.row(0).iter().all(|&x| x == 1));
        }
    }

    #[test]
    fn map_evaluation_is_natural() {
        let field = field();
        let phi = FreeMap::new(
            field,
            FreeModule::new(vec![3, 2]),
            FreeModule::new(vec![1, 2]),
            vec![
                vec![
                    FreeTerm { target: 0, coef: 3, inj: "1->3:2".parse().unwrap() },
                    FreeTerm { target: 1, coef: 5, inj: "2->3:3,1".parse().unwrap() },
                ],
                vec![FreeTerm { target: 1, coef: 7, inj: "2->2:2,1".parse().unwrap() }],
            ],
        )
        .unwrap();
        let src = evaluate_free(field, &phi.source, 6);
        let dst = evaluate_free(field, &phi.target, 6);
        let map = crate::module::FiMap {
            mats: (0..=6).map(|n| evaluate_free_map(&phi, n)).collect(),
        };
        assert!(map.is_natural(&src, &dst));
    }

    #[test]
    fn cokernels() {
        let field = field();
        let nothing = FreeMap::zero(field, FreeModule::default(), FreeModule::new(vec![0]));
        let c = coker_of_map(&nothing, 4).unwrap();
        assert_eq!(c, evaluate_free(field, &FreeModule::new(vec![0]), 4));
        let iso = FreeMap::new(
            field,
            FreeModule::new(vec![0]),
            FreeModule::new(vec![0]),
            vec![vec![FreeTerm { target: 0, coef: 4, inj: Injection::identity(0) }]],
        )
        .unwrap();
        assert!(coker_of_map(&iso, 4).unwrap().is_zero());
        let c = coker_of_map(&all_ones(field), 5).unwrap();
        assert_eq!(c.dims(), &[1, 0, 0, 0, 0, 0]);
        c.validate().unwrap();
    }

    #[test]
    fn h0_maps() {
        let field = field();
        assert_eq!(h0_free_dim(&FreeModule::new(vec![2]), 2), 2);
        assert_eq!(h0_free_dim(&FreeModule::new(vec![2]), 3), 0);
        let ones = h0_of_free_complex(&[all_ones(field)], 1);
        assert_eq!((ones[0].rows(), ones[0].cols()), (0, 1));
        let ones = h0_of_free_map(&all_ones(field), 0);
        assert_eq!((ones.rows(), ones.cols()), (1, 0));
        let scalar = FreeMap::new(
            field,
            FreeModule::new(vec![1]),
            FreeModule::new(vec![1]),
            vec![vec![FreeTerm { target: 0, coef: 6, inj: Injection::identity(1) }]],
        )
        .unwrap();
        let m = h0_of_free_map(&scalar, 1);
        assert_eq!((m.rows(), m.cols(), m.get(0, 0)), (1, 1, 6));
    }
}
