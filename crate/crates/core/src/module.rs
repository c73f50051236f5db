//! Truncated FI-modules stored by Coxeter generators and standard inclusions.
//!
//! Degree `n` carries `V_n`, the matrices `ρ_n(s_k)` for `k < n - 1` (the
//! generator `s_k` swaps points `k` and `k + 1`), and `U_n: V_n -> V_{n+1}`
//! induced by `[n] ⊂ [n + 1]`. Data above `trusted` may disagree with the
//! untruncated module and is never used to certify anything.

use std::fmt;

use serde::{Serialize, Serializer};

use crate::comb::{factor_injection, CycleType, Injection, Permutation};
use crate::error::{Error, Result};
use crate::exactlin::{Matrix, PrimeField, Scalar, Subquotient, Subspace};

/// A degree in `{-∞} ∪ {-1, 0, 1, ...}`, or a value the window cannot certify.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ExtendedDegree {
    MinusInfinity,
    Finite(i32),
    Uncertified,
}

impl ExtendedDegree {
    pub fn finite(self) -> Option<i32> {
        match self {
            ExtendedDegree::Finite(d) => Some(d),
            _ => None,
        }
    }

    pub fn is_certified(self) -> bool {
        self != ExtendedDegree::Uncertified
    }

    /// Certified values as `Option<i32>` with `None` for `-∞`.
    pub fn as_bound(self) -> Option<Option<i32>> {
        match self {
            ExtendedDegree::MinusInfinity => Some(None),
            ExtendedDegree::Finite(d) => Some(Some(d)),
            ExtendedDegree::Uncertified => None,
        }
    }

    /// Shift a finite value; `-∞` absorbs.
    pub fn offset(self, by: i32) -> ExtendedDegree {
        match self {
            ExtendedDegree::Finite(d) => ExtendedDegree::Finite(d + by),
            other => other,
        }
    }
}

impl fmt::Display for ExtendedDegree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedDegree::MinusInfinity => f.write_str("-inf"),
            ExtendedDegree::Finite(d) => write!(f, "{d}"),
            ExtendedDegree::Uncertified => f.write_str("uncertified"),
        }
    }
}

impl Serialize for ExtendedDegree {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ExtendedDegree::Finite(d) => s.serialize_i32(*d),
            other => s.serialize_str(&other.to_string()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruncatedFIModule {
    field: PrimeField,
    dims: Vec<usize>,
    coxeter: Vec<Vec<Matrix>>,
    incl: Vec<Matrix>,
    trusted: usize,
}

impl TruncatedFIModule {
    /// Assembles a module after checking shapes. Relations are checked by
    /// [`validate`](Self::validate).
    pub fn new(field: PrimeField, dims: Vec<usize>, coxeter: Vec<Vec<Matrix>>, incl: Vec<Matrix>, trusted: usize) -> Result<Self> {
        let top = dims.len().checked_sub(1).ok_or_else(|| Error::Shape("no degrees".into()))?;
        if coxeter.len() != dims.len() || incl.len() != top || trusted > top {
            return Err(Error::Shape(format!(
                "{} degrees, {} action lists, {} inclusions, trusted {}",
                dims.len(),
                coxeter.len(),
                incl.len(),
                trusted
            )));
        }
        for (n, gens) in coxeter.iter().enumerate() {
            if gens.len() != n.saturating_sub(1) {
                return Err(Error::Shape(format!("degree {n} has {} generators", gens.len())));
            }
            if gens.iter().any(|g| g.rows() != dims[n] || g.cols() != dims[n] || g.field() != field) {
                return Err(Error::Shape(format!("action in degree {n} has the wrong size")));
            }
        }
        for (n, u) in incl.iter().enumerate() {
            if u.rows() != dims[n + 1] || u.cols() != dims[n] || u.field() != field {
                return Err(Error::Shape(format!("inclusion out of degree {n} has the wrong size")));
            }
        }
        Ok(Self {
            field,
            dims,
            coxeter,
            incl,
            trusted,
        })
    }

    pub fn zero(field: PrimeField, top: usize) -> Self {
        Self {
            field,
            dims: vec![0; top + 1],
            coxeter: (0..=top).map(|n| vec![Matrix::zeros(field, 0, 0); n.saturating_sub(1)]).collect(),
            incl: (0..top).map(|_| Matrix::zeros(field, 0, 0)).collect(),
            trusted: top,
        }
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    /// Highest stored degree.
    pub fn top(&self) -> usize {
        self.dims.len() - 1
    }

    pub fn trusted(&self) -> usize {
        self.trusted
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self, n: usize) -> usize {
        self.dims[n]
    }

    pub fn rho(&self, n: usize, k: usize) -> &Matrix {
        &self.coxeter[n][k]
    }

    pub fn incl(&self, n: usize) -> &Matrix {
        &self.incl[n]
    }

    pub fn is_zero(&self) -> bool {
        self.dims.iter().all(|&d| d == 0)
    }

    pub fn with_trusted(mut self, trusted: usize) -> Self {
        self.trusted = self.trusted.min(trusted);
        self
    }

    /// Drops stored degrees above `top`.
    pub fn truncate(&self, top: usize) -> Self {
        if top >= self.top() {
            return self.clone();
        }
        Self {
            field: self.field,
            dims: self.dims[..=top].to_vec(),
            coxeter: self.coxeter[..=top].to_vec(),
            incl: self.incl[..top].to_vec(),
            trusted: self.trusted.min(top),
        }
    }

    fn require(&self, n: usize) -> Result<()> {
        if n > self.top() {
            return Err(Error::OutOfWindow {
                required: n,
                available: self.top(),
            });
        }
        Ok(())
    }

    /// Checks involution, braid and commuting relations in every degree,
    /// equivariance of each inclusion and the two-point symmetry.
    pub fn validate(&self) -> Result<()> {
        let fail = |degree: usize, identity: String| Err(Error::RelationViolation { degree, identity });
        for n in 0..=self.top() {
            let gens = &self.coxeter[n];
            let id = Matrix::identity(self.field, self.dims[n]);
            for (i, s) in gens.iter().enumerate() {
                if s.mul(s) != id {
                    return fail(n, format!("s{}^2 = 1", i + 1));
                }
                if let Some(t) = gens.get(i + 1) {
                    if s.mul(t).mul(s) != t.mul(s).mul(t) {
                        return fail(n, format!("s{0} s{1} s{0} = s{1} s{0} s{1}", i + 1, i + 2));
                    }
                }
                for (j, t) in gens.iter().enumerate().skip(i + 2) {
                    if s.mul(t) != t.mul(s) {
                        return fail(n, format!("s{} s{} = s{} s{}", i + 1, j + 1, j + 1, i + 1));
                    }
                }
            }
            if n < self.top() {
                let u = &self.incl[n];
                for (i, s) in gens.iter().enumerate() {
                    if u.mul(s) != self.coxeter[n + 1][i].mul(u) {
                        return fail(n, format!("U s{} = s{} U", i + 1, i + 1));
                    }
                }
            }
            if n + 2 <= self.top() {
                let uu = self.incl[n + 1].mul(&self.incl[n]);
                if self.coxeter[n + 2][n].mul(&uu) != uu {
                    return fail(n, format!("s{} U U = U U", n + 1));
                }
            }
        }
        Ok(())
    }

    /// `ρ(s_{w_0}) ⋯ ρ(s_{w_l}) · x` in degree `n`.
    pub fn act_word(&self, n: usize, word: &[usize], x: &Matrix) -> Matrix {
        let mut out = x.clone();
        for &k in word.iter().rev() {
            out = self.coxeter[n][k].mul(&out);
        }
        out
    }

    pub fn act(&self, n: usize, sigma: &Permutation, x: &Matrix) -> Matrix {
        self.act_word(n, &sigma.coxeter_word(), x)
    }

    pub fn permutation_matrix(&self, n: usize, sigma: &Permutation) -> Result<Matrix> {
        self.require(n)?;
        Ok(self.act(n, sigma, &Matrix::identity(self.field, self.dims[n])))
    }

    /// `U_{n-1} ⋯ U_m`.
    pub fn inclusion_chain(&self, m: usize, n: usize) -> Result<Matrix> {
        self.require(n)?;
        assert!(m <= n);
        let mut out = Matrix::identity(self.field, self.dims[m]);
        for k in m..n {
            out = self.incl[k].mul(&out);
        }
        Ok(out)
    }

    pub fn evaluate_injection_matrix(&self, f: &Injection) -> Result<Matrix> {
        let (sigma, _) = factor_injection(f);
        let chain = self.inclusion_chain(f.src(), f.dst())?;
        Ok(self.act(f.dst(), &sigma, &chain))
    }

    /// Matrices of the maps `V_m -> V_{m+1}` induced by the order-preserving
    /// injections skipping position `q`, for `q = 0..=m`.
    pub fn omegas(&self, m: usize) -> Result<Vec<Matrix>> {
        self.require(m + 1)?;
        // skipping q is s_q s_{q+1} ⋯ s_{m-1} after the standard inclusion
        let mut out = vec![self.incl[m].clone()];
        for q in (0..m).rev() {
            let next = self.coxeter[m + 1][q].mul(out.last().unwrap());
            out.push(next);
        }
        out.reverse();
        Ok(out)
    }

    /// Largest trusted degree with a nonzero space, `-1` if none.
    pub fn top_nonzero(&self) -> i32 {
        (0..=self.trusted).rev().find(|&n| self.dims[n] != 0).map_or(-1, |n| n as i32)
    }

    /// Degree of the module. With a caller-certified vanishing bound `B`
    /// (the true module is zero above `B`) the answer is `Finite` once
    /// `B <= trusted` and the data respects the bound. Without a bound it is
    /// `Finite` only when a vanishing margin is visible inside the window.
    pub fn degree(&self, bound: Option<i32>) -> ExtendedDegree {
        let top = self.top_nonzero();
        let trusted = self.trusted as i32;
        match bound {
            Some(b) if b <= trusted && top <= b => ExtendedDegree::Finite(top),
            Some(_) => ExtendedDegree::Uncertified,
            None if top < trusted => ExtendedDegree::Finite(top),
            None => ExtendedDegree::Uncertified,
        }
    }

    pub fn direct_sum(&self, other: &Self) -> Result<Self> {
        if self.top() != other.top() || self.field != other.field {
            return Err(Error::Shape("direct sum needs a common truncation and field".into()));
        }
        let f = self.field;
        let dims = self.dims.iter().zip(&other.dims).map(|(a, b)| a + b).collect();
        let coxeter = self
            .coxeter
            .iter()
            .zip(&other.coxeter)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| Matrix::block_diagonal(f, &[x, y])).collect())
            .collect();
        let incl = self
            .incl
            .iter()
            .zip(&other.incl)
            .map(|(x, y)| Matrix::block_diagonal(f, &[x, y]))
            .collect();
        Self::new(f, dims, coxeter, incl, self.trusted.min(other.trusted))
    }

    pub fn character(&self, n: usize, class: &CycleType) -> Result<Scalar> {
        if self.field.p() as usize <= n {
            return Err(Error::PrimeTooSmall {
                p: self.field.p(),
                degree: n,
            });
        }
        if class.size() != n {
            return Err(Error::Shape(format!("cycle type {class} is not a partition of {n}")));
        }
        Ok(self.permutation_matrix(n, &class.representative())?.trace())
    }

    /// Characters on all classes of `S_n`, in the order of [`crate::comb::partitions`].
    pub fn character_vector(&self, n: usize) -> Result<Vec<u32>> {
        crate::comb::partitions(n)
            .iter()
            .map(|c| self.character(n, c).map(Scalar::value))
            .collect()
    }

    /// The module with `parts[n]` as its degree-`n` space (a subquotient of
    /// `V_n`), structure maps transported and checked.
    pub fn subquotient(&self, parts: &[Subquotient], trusted: usize) -> Result<Self> {
        assert!(!parts.is_empty() && parts.len() <= self.dims.len());
        let top = parts.len() - 1;
        let mut coxeter = Vec::with_capacity(parts.len());
        for (n, part) in parts.iter().enumerate() {
            let gens = self.coxeter[n]
                .iter()
                .map(|s| part.induced(s, part))
                .collect::<Result<Vec<_>>>()?;
            coxeter.push(gens);
        }
        let incl = (0..top)
            .map(|n| parts[n].induced(&self.incl[n], &parts[n + 1]))
            .collect::<Result<Vec<_>>>()?;
        let dims = parts.iter().map(Subquotient::dim).collect();
        Self::new(self.field, dims, coxeter, incl, trusted.min(top))
    }

    pub fn submodule(&self, subs: &[Subspace], trusted: usize) -> Result<Self> {
        let parts: Vec<Subquotient> = subs.iter().map(|s| Subquotient::of_subspace(s.clone())).collect();
        self.subquotient(&parts, trusted)
    }

    pub fn quotient(&self, subs: &[Subspace], trusted: usize) -> Result<Self> {
        let parts: Vec<Subquotient> = subs
            .iter()
            .enumerate()
            .map(|(n, s)| Subquotient::of_quotient(self.field, self.dims[n], &s.basis))
            .collect();
        self.subquotient(&parts, trusted)
    }
}

/// A natural transformation, one matrix per degree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiMap {
    pub mats: Vec<Matrix>,
}

impl FiMap {
    /// Checks commutation with every generator and inclusion on the
    /// degrees both modules store.
    pub fn is_natural(&self, src: &TruncatedFIModule, dst: &TruncatedFIModule) -> bool {
        let top = (self.mats.len() - 1).min(src.top()).min(dst.top());
        for n in 0..=top {
            let f = &self.mats[n];
            for k in 0..n.saturating_sub(1) {
                if f.mul(src.rho(n, k)) != dst.rho(n, k).mul(f) {
                    return false;
                }
            }
            if n < top && self.mats[n + 1].mul(src.incl(n)) != dst.incl(n).mul(f) {
                return false;
            }
        }
        true
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::comb::{conjugacy_reps, enumerate_injections};
    use crate::free::{evaluate_free, FreeModule};

    pub(crate) fn field() -> PrimeField {
        PrimeField::default()
    }

    #[test]
    fn free_modules_validate() {
        let m1 = evaluate_free(field(), &FreeModule::new(vec![1]), 5);
        m1.validate().unwrap();
        let m2 = evaluate_free(field(), &FreeModule::new(vec![2, 0]), 5);
        m2.validate().unwrap();
    }

    #[test]
    fn perturbed_action_is_rejected() {
        let m1 = evaluate_free(field(), &FreeModule::new(vec![1]), 5);
        let mut coxeter = m1.coxeter.clone();
        coxeter[3][1].set(0, 0, 2);
        let bad = TruncatedFIModule::new(field(), m1.dims.clone(), coxeter, m1.incl.clone(), 5).unwrap();
        assert!(matches!(bad.validate(), Err(Error::RelationViolation { .. })));
    }

    #[test]
    fn injection_evaluation() {
        let v = evaluate_free(field(), &FreeModule::new(vec![1, 2]), 5);
        assert!(v.evaluate_injection_matrix(&Injection::identity(3)).unwrap().is_identity());
        assert_eq!(&v.evaluate_injection_matrix(&Injection::standard(3, 4)).unwrap(), v.incl(3));
        assert!(matches!(
            v.evaluate_injection_matrix(&Injection::standard(3, 6)),
            Err(Error::OutOfWindow { .. })
        ));
    }

    #[test]
    fn injection_evaluation_is_functorial() {
        let v = evaluate_free(field(), &FreeModule::new(vec![1, 2]), 5);
        for a in 0..=5 {
            for b in a..=5 {
                for c in b..=5 {
                    let fs = enumerate_injections(a, b);
                    let gs = enumerate_injections(b, c);
                    // sample to keep this quick while touching every shape
                    for f in fs.iter().step_by(7) {
                        let vf = v.evaluate_injection_matrix(f).unwrap();
                        for g in gs.iter().step_by(11) {
                            let lhs = v.evaluate_injection_matrix(&g.compose(f)).unwrap();
                            let rhs = v.evaluate_injection_matrix(g).unwrap().mul(&vf);
                            assert_eq!(lhs, rhs, "{f} then {g}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn omegas_match_injections() {
        let v = evaluate_free(field(), &FreeModule::new(vec![2]), 5);
        for m in 0..5 {
            let om = v.omegas(m).unwrap();
            for (q, w) in om.iter().enumerate() {
                let images: Vec<usize> = (0..m).map(|x| if x < q { x } else { x + 1 }).collect();
                let f = Injection::new(m + 1, images).unwrap();
                assert_eq!(w, &v.evaluate_injection_matrix(&f).unwrap());
            }
        }
    }

    #[test]
    fn degree_semantics() {
        assert_eq!(TruncatedFIModule::zero(field(), 4).degree(None), ExtendedDegree::Finite(-1));
        let m1 = evaluate_free(field(), &FreeModule::new(vec![1]), 6);
        assert_eq!(m1.degree(None), ExtendedDegree::Uncertified);
        assert_eq!(m1.degree(Some(3)), ExtendedDegree::Uncertified);
        let m0 = evaluate_free(field(), &FreeModule::new(vec![0]), 6);
        let subs: Vec<Subspace> = (0..=6)
            .map(|n| if n <= 2 { Subspace::zero(field(), 1) } else { Subspace::whole(field(), 1) })
            .collect();
        let trunc = m0.quotient(&subs, 6).unwrap();
        assert_eq!(trunc.dims(), &[1, 1, 1, 0, 0, 0, 0]);
        assert_eq!(trunc.degree(Some(2)), ExtendedDegree::Finite(2));
        assert_eq!(trunc.degree(Some(9)), ExtendedDegree::Uncertified);
    }

    #[test]
    fn direct_sums() {
        let a = evaluate_free(field(), &FreeModule::new(vec![1]), 4);
        let b = evaluate_free(field(), &FreeModule::new(vec![2]), 4);
        let s = a.direct_sum(&b).unwrap();
        s.validate().unwrap();
        assert_eq!(s.dims(), &[0, 1, 4, 9, 16]);
        let z = TruncatedFIModule::zero(field(), 4);
        assert_eq!(a.direct_sum(&z).unwrap(), a);
    }

    #[test]
    fn characters() {
        let m1 = evaluate_free(field(), &FreeModule::new(vec![1]), 4);
        assert_eq!(m1.character(3, &CycleType(vec![1, 1, 1])).unwrap().value(), 3);
        assert_eq!(m1.character(3, &CycleType(vec![3])).unwrap().value(), 0);
        assert_eq!(m1.character(3, &CycleType(vec![2, 1])).unwrap().value(), 1);
        let small = PrimeField::new(3).unwrap();
        let m = evaluate_free(small, &FreeModule::new(vec![1]), 4);
        assert!(matches!(m.character(3, &CycleType(vec![3])), Err(Error::PrimeTooSmall { .. })));
    }

    #[test]
    fn characters_are_class_functions() {
        let v = evaluate_free(field(), &FreeModule::new(vec![2, 1]), 4);
        for (c, rep) in conjugacy_reps(4) {
            let expected = v.character(4, &c).unwrap().value();
            for g in enumerate_injections(4, 4).iter().step_by(5) {
                let g = Permutation::new(g.images().to_vec()).unwrap();
                let conj = g.compose(&rep).compose(&g.inverse());
                assert_eq!(v.permutation_matrix(4, &conj).unwrap().trace().value(), expected);
            }
        }
    }
}
