//! Koszul-type complexes computing FI-homology and the left derived functors
//! of iterated derivatives, one degree at a time.
//!
//! Fix `n` and `a` and put `m = n + a`. The complex has, in homological
//! degree `j`, one copy of `V_{m-j}` for every `j`-subset `R` of the last
//! `a` points `{n, ..., m-1}` of `[m]`; the copy is identified with
//! `V_{[m] \ R}` through the order-preserving bijection. For `r ∈ R` with `k`
//! smaller elements in `R`, the face map to `R \ {r}` is `(-1)^k` times `V`
//! of the injection `[m-j] -> [m-j+1]` skipping position `r - k`.
//!
//! * `n = 0` gives the usual Koszul complex, so `H_i` is `H_i^FI(V)_a`.
//! * For general `n` this is the `a`-fold iterated cone of `ι: V -> ΣV`
//!   evaluated at `[n]`. Since `Σ` is exact and `Δ` is `coker ι`, the cone
//!   computes `LΔ`, and `H_i` is `co_i^{Δ^a}(V)_n = (L_iΔ^a V)_n`.
//!
//! `S_n` acts blockwise through `ρ_{m-j}` on the first `n` points, and the
//! structure map to degree `n + 1` sends `R` to `R + 1` and applies `V` of
//! the injection skipping position `n`.

use std::collections::HashMap;

use itertools::Itertools;

use crate::error::{Error, Result};
use crate::exactlin::{non_pivots, rank_profile, Matrix, Subquotient};
use crate::module::TruncatedFIModule;

fn mask(r: &[usize]) -> u64 {
    r.iter().fold(0u64, |m, &x| m | (1 << x))
}

pub struct Cube<'a> {
    v: &'a TruncatedFIModule,
    fixed: usize,
    free: usize,
    subsets: Vec<Vec<Vec<usize>>>,
    index: Vec<HashMap<u64, usize>>,
}

impl<'a> Cube<'a> {
    /// Complex for `L Δ^a` evaluated at `[fixed]` with `a = free`.
    pub fn new(v: &'a TruncatedFIModule, fixed: usize, free: usize) -> Result<Self> {
        let m = fixed + free;
        if m > v.trusted() {
            return Err(Error::OutOfWindow {
                required: m,
                available: v.trusted(),
            });
        }
        let subsets: Vec<Vec<Vec<usize>>> = (0..=free).map(|j| (fixed..m).combinations(j).collect()).collect();
        let index = subsets
            .iter()
            .map(|level| level.iter().enumerate().map(|(i, r)| (mask(r), i)).collect())
            .collect();
        Ok(Self {
            v,
            fixed,
            free,
            subsets,
            index,
        })
    }

    /// Koszul complex of `V` at `[m]`, whose homology is `H_•^FI(V)_m`.
    pub fn fi_homology(v: &'a TruncatedFIModule, m: usize) -> Result<Self> {
        Self::new(v, 0, m)
    }

    pub fn ambient(&self) -> usize {
        self.fixed + self.free
    }

    pub fn term_dim(&self, j: usize) -> usize {
        if j > self.free {
            return 0;
        }
        self.subsets[j].len() * self.v.dim(self.ambient() - j)
    }

    /// `d_j: C_j -> C_{j-1}` for `j >= 1`.
    pub fn differential(&self, j: usize) -> Result<Matrix> {
        assert!(j >= 1);
        let field = self.v.field();
        let (rows, cols) = (self.term_dim(j - 1), self.term_dim(j));
        let mut d = Matrix::zeros(field, rows, cols);
        if rows == 0 || cols == 0 {
            return Ok(d);
        }
        let src = self.ambient() - j;
        let (ds, dt) = (self.v.dim(src), self.v.dim(src + 1));
        let omegas = self.v.omegas(src)?;
        for (c, r) in self.subsets[j].iter().enumerate() {
            let whole = mask(r);
            for (k, &x) in r.iter().enumerate() {
                let row = self.index[j - 1][&(whole & !(1 << x))];
                d.set_block(row * dt, c * ds, &omegas[x - k], k % 2 == 1);
            }
        }
        Ok(d)
    }

    /// `dim H_i` via `dim C_i - rank d_i - rank d_{i+1}`, where `d_{i+1}` is
    /// only eliminated on the coordinates of `ker d_i`.
    pub fn homology_dim(&self, i: usize) -> Result<usize> {
        let ci = self.term_dim(i);
        if ci == 0 {
            return Ok(0);
        }
        let (rank_in, free_cols) = if i >= 1 && self.term_dim(i - 1) > 0 {
            let (r, piv) = rank_profile(&self.differential(i)?);
            (r, non_pivots(ci, &piv))
        } else {
            (0, (0..ci).collect())
        };
        if free_cols.is_empty() {
            return Ok(0);
        }
        let rank_out = if self.term_dim(i + 1) > 0 {
            self.differential(i + 1)?.select_rows(&free_cols).rank()
        } else {
            0
        };
        Ok(ci - rank_in - rank_out)
    }

    /// Homology dimensions for `i = 0..=max_i`, each differential reduced once.
    pub fn homology_dims(&self, max_i: usize) -> Result<Vec<usize>> {
        let mut ranks = vec![0usize; max_i + 2];
        let mut free_top: Option<Vec<usize>> = None;
        for (j, slot) in ranks.iter_mut().enumerate().skip(1) {
            if self.term_dim(j) == 0 || self.term_dim(j - 1) == 0 {
                continue;
            }
            let d = self.differential(j)?;
            if j == max_i + 1 {
                // only its rank matters, and only on the cycles of d_{max_i}
                *slot = match &free_top {
                    Some(rows) => d.select_rows(rows).rank(),
                    None => d.rank(),
                };
            } else {
                let (r, piv) = rank_profile(&d);
                *slot = r;
                if j == max_i {
                    free_top = Some(non_pivots(self.term_dim(j), &piv));
                }
            }
        }
        Ok((0..=max_i).map(|i| self.term_dim(i) - ranks[i] - ranks[i + 1]).collect())
    }

    pub fn homology(&self, i: usize) -> Result<Subquotient> {
        let field = self.v.field();
        let out = if i >= 1 && self.term_dim(i - 1) > 0 {
            Some(self.differential(i)?)
        } else {
            None
        };
        let inc = if self.term_dim(i + 1) > 0 {
            Some(self.differential(i + 1)?)
        } else {
            None
        };
        Ok(Subquotient::homology(self.term_dim(i), out.as_ref(), inc.as_ref(), field))
    }

    /// Action of `s_k` (`k + 1 < fixed`) on `C_i`.
    pub fn action(&self, i: usize, k: usize) -> Matrix {
        assert!(k + 1 < self.fixed);
        let field = self.v.field();
        let dim = self.term_dim(i);
        let mut out = Matrix::zeros(field, dim, dim);
        if dim == 0 {
            return out;
        }
        let s = self.v.rho(self.ambient() - i, k);
        for b in 0..self.subsets[i].len() {
            out.set_block(b * s.rows(), b * s.cols(), s, false);
        }
        out
    }

    /// Chain map `C_i -> next.C_i` for the structure map to `fixed + 1`.
    pub fn inclusion(&self, i: usize, next: &Cube<'_>) -> Result<Matrix> {
        assert_eq!((next.fixed, next.free), (self.fixed + 1, self.free));
        let field = self.v.field();
        let mut out = Matrix::zeros(field, next.term_dim(i), self.term_dim(i));
        if out.rows() == 0 || out.cols() == 0 {
            return Ok(out);
        }
        let src = self.ambient() - i;
        let om = &self.v.omegas(src)?[self.fixed];
        for (c, r) in self.subsets[i].iter().enumerate() {
            let shifted: Vec<usize> = r.iter().map(|x| x + 1).collect();
            let row = next.index[i][&mask(&shifted)];
            out.set_block(row * om.rows(), c * om.cols(), om, false);
        }
        Ok(out)
    }
}

/// `dim H_i^FI(V)_m`.
pub fn fi_homology_dim(v: &TruncatedFIModule, i: usize, m: usize) -> Result<usize> {
    Cube::fi_homology(v, m)?.homology_dim(i)
}

/// `dim co_i^{Δ^a}(V)_n`.
pub fn derived_delta_dim(v: &TruncatedFIModule, i: usize, a: usize, n: usize) -> Result<usize> {
    Cube::new(v, n, a)?.homology_dim(i)
}

/// `co_i^{Δ^a}(V)` as a truncated FI-module through degree `top`
/// (at most `trusted(V) - a`).
pub fn derived_delta_module(v: &TruncatedFIModule, i: usize, a: usize, top: usize) -> Result<TruncatedFIModule> {
    let cubes = (0..=top).map(|n| Cube::new(v, n, a)).collect::<Result<Vec<_>>>()?;
    let parts = cubes.iter().map(|c| c.homology(i)).collect::<Result<Vec<_>>>()?;
    let mut coxeter = Vec::with_capacity(top + 1);
    for (n, (cube, part)) in cubes.iter().zip(&parts).enumerate() {
        let gens = (0..n.saturating_sub(1))
            .map(|k| part.induced(&cube.action(i, k), part))
            .collect::<Result<Vec<_>>>()?;
        coxeter.push(gens);
    }
    let incl = (0..top)
        .map(|n| parts[n].induced(&cubes[n].inclusion(i, &cubes[n + 1])?, &parts[n + 1]))
        .collect::<Result<Vec<_>>>()?;
    let dims = parts.iter().map(Subquotient::dim).collect();
    TruncatedFIModule::new(v.field(), dims, coxeter, incl, top.min(v.trusted() - a))
}

/// `H_i^FI(V)` as graded dimensions for degrees `0..=top`.
pub fn fi_homology_dims(v: &TruncatedFIModule, i: usize, top: usize) -> Result<Vec<usize>> {
    (0..=top).map(|m| fi_homology_dim(v, i, m)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::comb::Injection;
    use crate::exactlin::PrimeField;
    use crate::free::{coker_of_map, evaluate_free, FreeMap, FreeModule, FreeTerm};
    use crate::functors::{derivative, iterated_derivative, kernel_k};

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

    #[test]
    fn differentials_square_to_zero() {
        let v = free(vec![1, 2], 6);
        for (n, a) in [(0, 5), (2, 3), (1, 4)] {
            let c = Cube::new(&v, n, a).unwrap();
            for j in 2..=a {
                let dd = c.differential(j - 1).unwrap().mul(&c.differential(j).unwrap());
                assert!(dd.is_zero(), "n={n} a={a} j={j}");
            }
        }
    }

    #[test]
    fn free_modules_have_homology_only_in_degree_zero() {
        for a in 0..=2 {
            let v = free(vec![a], 6);
            for m in 0..=6 {
                let dims = Cube::fi_homology(&v, m).unwrap().homology_dims(3).unwrap();
                assert_eq!(dims[0], usize::from(m == a) * (1..=a).product::<usize>(), "a={a} m={m}");
                assert!(dims[1..].iter().all(|&x| x == 0), "a={a} m={m} {dims:?}");
            }
        }
    }

    #[test]
    fn truncated_module_homology() {
        // M(0)_{≤2}: H_0 at 0, H_1 at 3, H_2 at 4
        let v = trunc0(2, 8);
        let h: Vec<Vec<usize>> = (0..=3).map(|i| fi_homology_dims(&v, i, 7).unwrap()).collect();
        assert_eq!(h[0], vec![1, 0, 0, 0, 0, 0, 0, 0]);
        assert_eq!(h[1], vec![0, 0, 0, 1, 0, 0, 0, 0]);
        assert_eq!(h[2], vec![0, 0, 0, 0, 3, 0, 0, 0]);
        assert_eq!(h[3], vec![0, 0, 0, 0, 0, 6, 0, 0]);
    }

    #[test]
    fn homology_dims_agree_with_single_calls() {
        let v = trunc0(1, 7);
        for m in 0..=6 {
            let c = Cube::fi_homology(&v, m).unwrap();
            let all = c.homology_dims(3).unwrap();
            for (i, &d) in all.iter().enumerate() {
                assert_eq!(d, c.homology_dim(i).unwrap());
                assert_eq!(d, c.homology(i).unwrap().dim());
            }
        }
    }

    #[test]
    fn cube_degree_zero_recovers_delta_and_k() {
        for v in [trunc0(2, 8), free(vec![2, 1], 7)] {
            let top = v.trusted() - 1;
            let h0 = derived_delta_module(&v, 0, 1, top).unwrap();
            let d = derivative(&v).unwrap();
            assert_eq!(h0.dims(), d.dims());
            let h1 = derived_delta_module(&v, 1, 1, top).unwrap();
            let k = kernel_k(&v).unwrap();
            assert_eq!(h1.dims(), k.dims());
            h1.validate().unwrap();
            h0.validate().unwrap();
        }
    }

    #[test]
    fn cube_zero_recovers_iterated_derivative() {
        let v = free(vec![2, 3], 8);
        let top = 8 - 3;
        let h = derived_delta_module(&v, 0, 3, top).unwrap();
        let d = iterated_derivative(&v, 3).unwrap();
        assert_eq!(h.dims(), d.dims());
        // free modules are Δ-acyclic
        for i in 1..=3 {
            for n in 0..=top {
                assert_eq!(derived_delta_dim(&v, i, 3, n).unwrap(), 0);
            }
        }
    }

    #[test]
    fn second_derived_of_single_derivative_vanishes() {
        let v = trunc0(2, 8);
        for n in 0..=6 {
            assert_eq!(derived_delta_dim(&v, 2, 1, n).unwrap(), 0);
        }
    }

    #[test]
    fn window_is_enforced() {
        let v = trunc0(2, 5);
        assert!(matches!(Cube::new(&v, 3, 3), Err(Error::OutOfWindow { required: 6, available: 5 })));
    }
}
