//! Dense linear algebra over a prime field.
//!
//! Matrices act on column vectors: an `m x n` matrix is a map from an
//! `n`-dimensional space to an `m`-dimensional one. Elimination is
//! deterministic: columns are scanned left to right and the pivot of a column
//! is the remaining row with the smallest index holding a nonzero entry.
//!
//! Row operations accumulate unreduced products in `u64` and reduce lazily.
//! The characteristic is kept below `2^16`, so a single product fits in 32
//! bits and an entry can absorb `2^32` updates before it could overflow.

use std::fmt;

use crate::error::{Error, Result};

pub const DEFAULT_PRIME: u32 = 10007;

/// Exclusive upper bound on the characteristic.
pub const PRIME_LIMIT: u32 = 1 << 16;

fn is_prime(p: u32) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u32;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PrimeField {
    p: u32,
}

impl PrimeField {
    pub fn new(p: u32) -> Result<Self> {
        if p >= PRIME_LIMIT || !is_prime(p) {
            return Err(Error::InvalidPrime(p));
        }
        Ok(Self { p })
    }

    pub fn p(self) -> u32 {
        self.p
    }

    pub fn reduce(self, x: i64) -> u32 {
        x.rem_euclid(self.p as i64) as u32
    }

    pub fn add(self, a: u32, b: u32) -> u32 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    pub fn sub(self, a: u32, b: u32) -> u32 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    pub fn neg(self, a: u32) -> u32 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    pub fn mul(self, a: u32, b: u32) -> u32 {
        ((a as u64 * b as u64) % self.p as u64) as u32
    }

    pub fn pow(self, mut base: u32, mut exp: u32) -> u32 {
        let mut acc = 1u32;
        base %= self.p;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    /// Multiplicative inverse. Panics on zero.
    pub fn inv(self, a: u32) -> u32 {
        assert!(!a.is_multiple_of(self.p), "zero has no inverse");
        self.pow(a, self.p - 2)
    }

    pub fn scalar(self, x: i64) -> Scalar {
        Scalar(self.reduce(x))
    }

    /// Representative in `(-p/2, p/2]`, handy for printing.
    pub fn signed(self, a: u32) -> i64 {
        if a > self.p / 2 {
            a as i64 - self.p as i64
        } else {
            a as i64
        }
    }
}

impl Default for PrimeField {
    fn default() -> Self {
        Self { p: DEFAULT_PRIME }
    }
}

/// A residue modulo the ambient prime.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Scalar(u32);

impl Scalar {
    pub fn value(self) -> u32 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct Matrix {
    field: PrimeField,
    rows: usize,
    cols: usize,
    data: Vec<u32>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} over F_{}", self.rows, self.cols, self.field.p)?;
        for r in 0..self.rows.min(16) {
            let row: Vec<i64> = self.row(r).iter().take(16).map(|&x| self.field.signed(x)).collect();
            writeln!(f, "  {:?}", row)?;
        }
        Ok(())
    }
}

impl Matrix {
    pub fn zeros(field: PrimeField, rows: usize, cols: usize) -> Self {
        Self {
            field,
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(field: PrimeField, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        m
    }

    pub fn from_fn(field: PrimeField, rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> i64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(field.reduce(f(r, c)));
            }
        }
        Self { field, rows, cols, data }
    }

    /// Builds a matrix from integer rows; all rows must have equal length.
    pub fn from_rows(field: PrimeField, rows: &[Vec<i64>]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        Self::from_fn(field, rows.len(), cols, |r, c| rows[r][c])
    }

    pub fn from_raw(field: PrimeField, rows: usize, cols: usize, data: Vec<u32>) -> Self {
        assert_eq!(data.len(), rows * cols);
        debug_assert!(data.iter().all(|&x| x < field.p));
        Self { field, rows, cols, data }
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u32 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: u32) {
        debug_assert!(v < self.field.p);
        self.data[r * self.cols + c] = v;
    }

    #[inline]
    pub fn add_at(&mut self, r: usize, c: usize, v: u32) {
        let i = r * self.cols + c;
        self.data[i] = self.field.add(self.data[i], v);
    }

    pub fn entry(&self, r: usize, c: usize) -> Scalar {
        Scalar(self.get(r, c))
    }

    pub fn row(&self, r: usize) -> &[u32] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<u32> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn raw(&self) -> &[u32] {
        &self.data
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }

    pub fn is_identity(&self) -> bool {
        self.is_square() && (0..self.rows).all(|r| (0..self.cols).all(|c| self.get(r, c) == u32::from(r == c)))
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.field, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.data[c * self.rows + r] = self.data[r * self.cols + c];
            }
        }
        t
    }

    /// Matrix product `self * rhs`. Panics on mismatched shapes or fields.
    pub fn mul(&self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.field, rhs.field, "field mismatch");
        assert_eq!(self.cols, rhs.rows, "shape mismatch in product");
        let p = self.field.p as u64;
        let n = rhs.cols;
        let mut out = Matrix::zeros(self.field, self.rows, n);
        if n == 0 || self.cols == 0 {
            return out;
        }
        let mut acc = vec![0u64; n];
        for r in 0..self.rows {
            acc.iter_mut().for_each(|x| *x = 0);
            for (k, &a) in self.row(r).iter().enumerate() {
                if a == 0 {
                    continue;
                }
                let a = a as u64;
                for (x, &b) in acc.iter_mut().zip(rhs.row(k)) {
                    *x = x.wrapping_add(a * b as u64);
                }
            }
            let dst = &mut out.data[r * n..(r + 1) * n];
            for (d, &x) in dst.iter_mut().zip(&acc) {
                *d = (x % p) as u32;
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[u32]) -> Vec<u32> {
        assert_eq!(self.cols, v.len());
        let p = self.field.p as u64;
        (0..self.rows)
            .map(|r| {
                let s = self.row(r).iter().zip(v).fold(0u64, |s, (&a, &b)| s.wrapping_add(a as u64 * b as u64));
                (s % p) as u32
            })
            .collect()
    }

    pub fn add(&self, rhs: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        let f = self.field;
        let data = self.data.iter().zip(&rhs.data).map(|(&a, &b)| f.add(a, b)).collect();
        Matrix { data, ..*self }
    }

    pub fn sub(&self, rhs: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        let f = self.field;
        let data = self.data.iter().zip(&rhs.data).map(|(&a, &b)| f.sub(a, b)).collect();
        Matrix { data, ..*self }
    }

    pub fn scale(&self, c: u32) -> Matrix {
        let f = self.field;
        let data = self.data.iter().map(|&a| f.mul(a, c)).collect();
        Matrix { data, ..*self }
    }

    pub fn select_rows(&self, idx: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(idx.len() * self.cols);
        for &r in idx {
            data.extend_from_slice(self.row(r));
        }
        Matrix {
            data,
            rows: idx.len(),
            ..*self
        }
    }

    pub fn select_columns(&self, idx: &[usize]) -> Matrix {
        let mut out = Matrix::zeros(self.field, self.rows, idx.len());
        for r in 0..self.rows {
            for (j, &c) in idx.iter().enumerate() {
                out.data[r * idx.len() + j] = self.get(r, c);
            }
        }
        out
    }

    /// Writes `sign * block` into the window starting at `(r0, c0)`.
    pub fn set_block(&mut self, r0: usize, c0: usize, block: &Matrix, negate: bool) {
        assert!(r0 + block.rows <= self.rows && c0 + block.cols <= self.cols);
        for r in 0..block.rows {
            for c in 0..block.cols {
                let v = block.get(r, c);
                self.data[(r0 + r) * self.cols + c0 + c] = if negate { self.field.neg(v) } else { v };
            }
        }
    }

    pub fn block_diagonal(field: PrimeField, blocks: &[&Matrix]) -> Matrix {
        let rows = blocks.iter().map(|b| b.rows).sum();
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut out = Matrix::zeros(field, rows, cols);
        let (mut r0, mut c0) = (0, 0);
        for b in blocks {
            out.set_block(r0, c0, b, false);
            r0 += b.rows;
            c0 += b.cols;
        }
        out
    }

    pub fn hstack(field: PrimeField, rows: usize, blocks: &[&Matrix]) -> Matrix {
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut out = Matrix::zeros(field, rows, cols);
        let mut c0 = 0;
        for b in blocks {
            assert_eq!(b.rows, rows);
            out.set_block(0, c0, b, false);
            c0 += b.cols;
        }
        out
    }

    pub fn trace(&self) -> Scalar {
        assert!(self.is_square());
        let f = self.field;
        Scalar((0..self.rows).fold(0, |s, i| f.add(s, self.get(i, i))))
    }

    pub fn rank(&self) -> usize {
        let mut e = Eliminator::new(self);
        e.run(false, self.cols)
    }
}

/// Row-major scratch buffer for lazy-reduction elimination.
struct Eliminator {
    field: PrimeField,
    rows: usize,
    cols: usize,
    data: Vec<u64>,
    pivots: Vec<usize>,
}

impl Eliminator {
    fn new(m: &Matrix) -> Self {
        Self {
            field: m.field,
            rows: m.rows,
            cols: m.cols,
            data: m.data.iter().map(|&x| x as u64).collect(),
            pivots: Vec::new(),
        }
    }

    fn with_identity(m: &Matrix) -> Self {
        let cols = m.cols + m.rows;
        let mut data = vec![0u64; m.rows * cols];
        for r in 0..m.rows {
            for c in 0..m.cols {
                data[r * cols + c] = m.get(r, c) as u64;
            }
            data[r * cols + m.cols + r] = 1;
        }
        Self {
            field: m.field,
            rows: m.rows,
            cols,
            data,
            pivots: Vec::new(),
        }
    }

    /// Eliminates on the first `pivot_cols` columns. With `reduced`, rows
    /// above each pivot are cleared too (Gauss-Jordan) and pivots are
    /// normalized to one. Returns the rank.
    fn run(&mut self, reduced: bool, pivot_cols: usize) -> usize {
        let p = self.field.p as u64;
        let cols = self.cols;
        let mut rank = 0;
        let mut pivot_row: Vec<u32> = vec![0; cols];
        for c in 0..pivot_cols {
            if rank == self.rows {
                break;
            }
            let mut found = None;
            for r in rank..self.rows {
                let x = self.data[r * cols + c] % p;
                self.data[r * cols + c] = x;
                if x != 0 {
                    found = Some(r);
                    break;
                }
            }
            let Some(r) = found else { continue };
            if r != rank {
                let (a, b) = self.data.split_at_mut(r * cols);
                a[rank * cols..(rank + 1) * cols].swap_with_slice(&mut b[..cols]);
            }
            let inv = self.field.inv(self.data[rank * cols + c] as u32) as u64;
            #[allow(clippy::needless_range_loop)]
            for j in c..cols {
                let x = (self.data[rank * cols + j] % p) * inv % p;
                self.data[rank * cols + j] = x;
                pivot_row[j] = x as u32;
            }
            let targets = if reduced { 0..self.rows } else { rank + 1..self.rows };
            for t in targets {
                if t == rank {
                    continue;
                }
                let row = &mut self.data[t * cols..(t + 1) * cols];
                let e = row[c] % p;
                if e == 0 {
                    row[c] = 0;
                    continue;
                }
                let m = (p - e) as u32 as u64;
                for (x, &y) in row[c..].iter_mut().zip(&pivot_row[c..]) {
                    *x = x.wrapping_add(m * y as u64);
                }
                row[c] = 0;
            }
            self.pivots.push(c);
            rank += 1;
        }
        rank
    }

    fn reduced_rows(&self, rows: usize, col_range: std::ops::Range<usize>) -> Matrix {
        let p = self.field.p as u64;
        let width = col_range.len();
        let mut data = Vec::with_capacity(rows * width);
        for r in 0..rows {
            for c in col_range.clone() {
                data.push((self.data[r * self.cols + c] % p) as u32);
            }
        }
        Matrix::from_raw(self.field, rows, width, data)
    }
}

/// Reduced row echelon form with its transform: `reduced = transform * input`.
#[derive(Clone, Debug)]
pub struct Rref {
    pub reduced: Matrix,
    pub pivots: Vec<usize>,
    pub transform: Matrix,
}

impl Rref {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }
}

pub fn rref(m: &Matrix) -> Rref {
    let mut e = Eliminator::with_identity(m);
    e.run(true, m.cols);
    Rref {
        reduced: e.reduced_rows(m.rows, 0..m.cols),
        pivots: e.pivots.clone(),
        transform: e.reduced_rows(m.rows, m.cols..m.cols + m.rows),
    }
}

/// Nonzero rows of the reduced row echelon form together with pivot columns.
pub fn reduced_echelon(m: &Matrix) -> (Matrix, Vec<usize>) {
    let mut e = Eliminator::new(m);
    let rank = e.run(true, m.cols);
    (e.reduced_rows(rank, 0..m.cols), e.pivots)
}

/// A subspace with an adapted basis: restricted to `coordinate_rows` the
/// basis matrix is the identity, so coordinates of any member are read off
/// at those rows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subspace {
    pub basis: Matrix,
    pub coordinate_rows: Vec<usize>,
}

impl Subspace {
    pub fn whole(field: PrimeField, n: usize) -> Self {
        Self {
            basis: Matrix::identity(field, n),
            coordinate_rows: (0..n).collect(),
        }
    }

    pub fn zero(field: PrimeField, n: usize) -> Self {
        Self {
            basis: Matrix::zeros(field, n, 0),
            coordinate_rows: Vec::new(),
        }
    }

    /// Column span of `m`.
    pub fn span(m: &Matrix) -> Self {
        let (r, pivots) = reduced_echelon(&m.transpose());
        Self {
            basis: r.transpose(),
            coordinate_rows: pivots,
        }
    }

    pub fn dim(&self) -> usize {
        self.coordinate_rows.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.rows()
    }

    /// Coordinates of the columns of `x`, which must lie in the subspace.
    pub fn coordinates(&self, x: &Matrix) -> Matrix {
        x.select_rows(&self.coordinate_rows)
    }

    /// Coordinates, verifying membership.
    pub fn checked_coordinates(&self, x: &Matrix) -> Result<Matrix> {
        let coords = self.coordinates(x);
        if self.basis.mul(&coords) != *x {
            return Err(Error::NotASubmodule);
        }
        Ok(coords)
    }

    pub fn contains(&self, x: &Matrix) -> bool {
        self.basis.mul(&self.coordinates(x)) == *x
    }

    /// Sum with the column span of `extra`.
    pub fn join(&self, extra: &Matrix) -> Subspace {
        Subspace::span(&Matrix::hstack(self.basis.field(), self.ambient_dim(), &[&self.basis, extra]))
    }
}

pub fn kernel(m: &Matrix) -> Subspace {
    let (r, pivots) = reduced_echelon(m);
    let field = m.field;
    let cols = m.cols;
    let mut is_pivot = vec![false; cols];
    for &c in &pivots {
        is_pivot[c] = true;
    }
    let free: Vec<usize> = (0..cols).filter(|&c| !is_pivot[c]).collect();
    let mut basis = Matrix::zeros(field, cols, free.len());
    for (k, &f) in free.iter().enumerate() {
        basis.set(f, k, 1);
        for (row, &pc) in pivots.iter().enumerate() {
            basis.set(pc, k, field.neg(r.get(row, f)));
        }
    }
    Subspace {
        basis,
        coordinate_rows: free,
    }
}

/// Rank and pivot columns from forward elimination only. The pivot set
/// agrees with that of the reduced form.
pub fn rank_profile(m: &Matrix) -> (usize, Vec<usize>) {
    let mut e = Eliminator::new(m);
    let rank = e.run(false, m.cols);
    (rank, e.pivots)
}

/// Complement of `pivots` in `0..n`.
pub fn non_pivots(n: usize, pivots: &[usize]) -> Vec<usize> {
    let mut is_pivot = vec![false; n];
    for &c in pivots {
        is_pivot[c] = true;
    }
    (0..n).filter(|&c| !is_pivot[c]).collect()
}

/// Columns form a basis of `ker m`.
pub fn kernel_basis(m: &Matrix) -> Matrix {
    kernel(m).basis
}

/// Quotient of the target of `m` by its image.
///
/// `proj` is `dim x rows(m)` with `proj * m = 0`; `section` picks the
/// standard basis vectors of a complement of `im m`, so `proj * section = 1`.
#[derive(Clone, Debug)]
pub struct Cokernel {
    pub proj: Matrix,
    pub section: Matrix,
    pub dim: usize,
}

pub fn cokernel(m: &Matrix) -> Cokernel {
    let field = m.field;
    let ambient = m.rows;
    let (r, pivots) = reduced_echelon(&m.transpose());
    let mut is_pivot = vec![false; ambient];
    for &c in &pivots {
        is_pivot[c] = true;
    }
    let complement: Vec<usize> = (0..ambient).filter(|&c| !is_pivot[c]).collect();
    let dim = complement.len();
    let mut proj = Matrix::zeros(field, dim, ambient);
    let mut section = Matrix::zeros(field, ambient, dim);
    for (k, &q) in complement.iter().enumerate() {
        proj.set(k, q, 1);
        section.set(q, k, 1);
        for (row, &pc) in pivots.iter().enumerate() {
            proj.set(k, pc, field.neg(r.get(row, q)));
        }
    }
    Cokernel { proj, section, dim }
}

/// Transports `f` to the quotients described by the two projections.
/// Fails with `DoesNotDescend` unless `g * src_proj = dst_proj * f`.
pub fn induced_map(f: &Matrix, src_proj: &Matrix, dst_proj: &Matrix, src_section: &Matrix) -> Result<Matrix> {
    let pf = dst_proj.mul(f);
    let g = pf.mul(src_section);
    if g.mul(src_proj) != pf {
        return Err(Error::DoesNotDescend);
    }
    Ok(g)
}

/// `z / b` for subspaces `b ⊆ z` of a common ambient space: the homology of
/// `c_{i+1} -> c_i -> c_{i-1}` in the typical use.
#[derive(Clone, Debug)]
pub struct Subquotient {
    pub cycles: Subspace,
    pub quotient: Cokernel,
}

impl Subquotient {
    /// `outgoing` kills the cycles, `incoming` lands in them.
    pub fn homology(ambient_dim: usize, outgoing: Option<&Matrix>, incoming: Option<&Matrix>, field: PrimeField) -> Subquotient {
        let cycles = match outgoing {
            Some(d) => kernel(d),
            None => Subspace::whole(field, ambient_dim),
        };
        let boundaries = match incoming {
            Some(d) => cycles.coordinates(d),
            None => Matrix::zeros(field, cycles.dim(), 0),
        };
        let quotient = cokernel(&boundaries);
        Subquotient { cycles, quotient }
    }

    pub fn of_subspace(cycles: Subspace) -> Subquotient {
        let quotient = cokernel(&Matrix::zeros(cycles.basis.field(), cycles.dim(), 0));
        Subquotient { cycles, quotient }
    }

    /// Quotient of the whole ambient space by the span of `relations`.
    pub fn of_quotient(field: PrimeField, ambient_dim: usize, relations: &Matrix) -> Subquotient {
        Subquotient {
            cycles: Subspace::whole(field, ambient_dim),
            quotient: cokernel(relations),
        }
    }

    pub fn dim(&self) -> usize {
        self.quotient.dim
    }

    /// Map on subquotients induced by an ambient map `f` from `self`'s
    /// ambient space to `target`'s. Checked.
    pub fn induced(&self, f: &Matrix, target: &Subquotient) -> Result<Matrix> {
        let image = f.mul(&self.cycles.basis);
        let coords = target.cycles.checked_coordinates(&image)?;
        induced_map(&coords, &self.quotient.proj, &target.quotient.proj, &self.quotient.section)
    }
}
