//! Injections between standard finite sets, permutations and cycle types.
//!
//! Points are 0-based internally; the text form `a->n:i1,...,ia` is 1-based.
//! Injections of `[a]` into `[n]` are ordered lexicographically by their
//! image sequence, and that order fixes basis orders for free modules.

use std::fmt;
use std::str::FromStr;

use crate::error::Error;

/// `n! / (n - a)!`, zero when `a > n`.
pub fn falling_factorial(n: usize, a: usize) -> usize {
    if a > n {
        return 0;
    }
    ((n - a + 1)..=n).product()
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Injection {
    dst: usize,
    images: Vec<usize>,
}

impl Injection {
    pub fn new(dst: usize, images: Vec<usize>) -> Option<Self> {
        let mut seen = vec![false; dst];
        for &x in &images {
            if x >= dst || seen[x] {
                return None;
            }
            seen[x] = true;
        }
        Some(Self { dst, images })
    }

    pub fn identity(n: usize) -> Self {
        Self::standard(n, n)
    }

    /// The inclusion `i -> i` of `[a]` into `[n]`.
    pub fn standard(a: usize, n: usize) -> Self {
        assert!(a <= n);
        Self {
            dst: n,
            images: (0..a).collect(),
        }
    }

    pub fn src(&self) -> usize {
        self.images.len()
    }

    pub fn dst(&self) -> usize {
        self.dst
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn apply(&self, x: usize) -> usize {
        self.images[x]
    }

    pub fn is_bijection(&self) -> bool {
        self.src() == self.dst
    }

    /// `self ∘ first`: apply `first`, then `self`.
    pub fn compose(&self, first: &Injection) -> Injection {
        assert_eq!(first.dst, self.src(), "injections are not composable");
        Injection {
            dst: self.dst,
            images: first.images.iter().map(|&x| self.images[x]).collect(),
        }
    }

    /// Position of `self` in `enumerate_injections(src, dst)`.
    pub fn rank(&self) -> usize {
        let (a, n) = (self.src(), self.dst);
        let mut used = vec![false; n];
        let mut idx = 0;
        for (k, &x) in self.images.iter().enumerate() {
            let smaller_free = (0..x).filter(|&y| !used[y]).count();
            idx += smaller_free * falling_factorial(n - k - 1, a - k - 1);
            used[x] = true;
        }
        idx
    }
}

impl fmt::Display for Injection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}->{}:", self.src(), self.dst)?;
        for (k, x) in self.images.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{}", x + 1)?;
        }
        Ok(())
    }
}

impl FromStr for Injection {
    type Err = Error;

    /// Parses `a->n:i1,...,ia`. The reported column is 1-based within `s`.
    fn from_str(s: &str) -> Result<Self, Error> {
        let err = |column: usize, message: String| Error::Parse { line: 0, column, message };
        let (head, tail) = s
            .split_once(':')
            .ok_or_else(|| err(1, format!("expected `a->n:images` in `{s}`")))?;
        let (a, n) = head
            .split_once("->")
            .ok_or_else(|| err(1, format!("expected `->` in `{head}`")))?;
        let a: usize = a.trim().parse().map_err(|_| err(1, format!("bad source size `{a}`")))?;
        let n: usize = n.trim().parse().map_err(|_| err(1, format!("bad target size `{n}`")))?;
        let mut images = Vec::with_capacity(a);
        let mut col = head.len() + 2;
        if !tail.trim().is_empty() {
            for tok in tail.split(',') {
                let x: usize = tok
                    .trim()
                    .parse()
                    .map_err(|_| err(col, format!("bad image `{tok}`")))?;
                if x == 0 || x > n {
                    return Err(err(col, format!("image {x} outside 1..{n}")));
                }
                images.push(x - 1);
                col += tok.len() + 1;
            }
        }
        if images.len() != a {
            return Err(err(head.len() + 2, format!("expected {a} images, found {}", images.len())));
        }
        Injection::new(n, images).ok_or_else(|| err(head.len() + 2, format!("images of `{s}` are not distinct")))
    }
}

/// All injections `[a] -> [n]` in lexicographic order of images.
pub fn enumerate_injections(a: usize, n: usize) -> Vec<Injection> {
    let mut out = Vec::with_capacity(falling_factorial(n, a));
    if a > n {
        return out;
    }
    let mut cur = Vec::with_capacity(a);
    let mut used = vec![false; n];
    fn rec(a: usize, n: usize, cur: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Injection>) {
        if cur.len() == a {
            out.push(Injection { dst: n, images: cur.clone() });
            return;
        }
        for x in 0..n {
            if !used[x] {
                used[x] = true;
                cur.push(x);
                rec(a, n, cur, used, out);
                cur.pop();
                used[x] = false;
            }
        }
    }
    rec(a, n, &mut cur, &mut used, &mut out);
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn new(images: Vec<usize>) -> Option<Self> {
        let n = images.len();
        Injection::new(n, images).map(|i| Self { images: i.images })
    }

    pub fn identity(n: usize) -> Self {
        Self { images: (0..n).collect() }
    }

    /// The Coxeter generator swapping `k` and `k + 1`.
    pub fn transposition(n: usize, k: usize) -> Self {
        let mut p = Self::identity(n);
        p.images.swap(k, k + 1);
        p
    }

    pub fn n(&self) -> usize {
        self.images.len()
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn apply(&self, x: usize) -> usize {
        self.images[x]
    }

    pub fn compose(&self, first: &Permutation) -> Permutation {
        Permutation {
            images: first.images.iter().map(|&x| self.images[x]).collect(),
        }
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.n()];
        for (i, &x) in self.images.iter().enumerate() {
            inv[x] = i;
        }
        Permutation { images: inv }
    }

    pub fn as_injection(&self) -> Injection {
        Injection {
            dst: self.n(),
            images: self.images.clone(),
        }
    }

    /// A reduced word `[k1, ..., kl]` with `self = s_k1 ∘ ... ∘ s_kl`.
    pub fn coxeter_word(&self) -> Vec<usize> {
        let mut cur = self.images.clone();
        let mut stripped = Vec::new();
        // right-multiplying by s_j at a descent removes one inversion
        while let Some(j) = (0..cur.len().saturating_sub(1)).find(|&j| cur[j] > cur[j + 1]) {
            cur.swap(j, j + 1);
            stripped.push(j);
        }
        stripped.reverse();
        stripped
    }

    pub fn cycle_type(&self) -> CycleType {
        let n = self.n();
        let mut seen = vec![false; n];
        let mut parts = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut len = 0;
            let mut x = start;
            while !seen[x] {
                seen[x] = true;
                x = self.images[x];
                len += 1;
            }
            parts.push(len);
        }
        parts.sort_unstable_by(|a, b| b.cmp(a));
        CycleType(parts)
    }
}

/// `f = σ ∘ standard(a, n)` with `σ` the lexicographically least completion.
pub fn factor_injection(f: &Injection) -> (Permutation, Injection) {
    let n = f.dst();
    let mut used = vec![false; n];
    for &x in f.images() {
        used[x] = true;
    }
    let mut images = f.images().to_vec();
    images.extend((0..n).filter(|&x| !used[x]));
    (Permutation { images }, Injection::standard(f.src(), n))
}

/// A partition, parts weakly decreasing.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CycleType(pub Vec<usize>);

impl CycleType {
    pub fn size(&self) -> usize {
        self.0.iter().sum()
    }

    /// Consecutive blocks, each a cycle `b -> b+1 -> ... -> b+l-1 -> b`.
    pub fn representative(&self) -> Permutation {
        let n = self.size();
        let mut images = vec![0; n];
        let mut base = 0;
        for &l in &self.0 {
            for k in 0..l {
                images[base + k] = base + (k + 1) % l;
            }
            base += l;
        }
        Permutation { images }
    }
}

impl fmt::Display for CycleType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|x| x.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Partitions of `n` in reverse lexicographic order, `[n]` first.
pub fn partitions(n: usize) -> Vec<CycleType> {
    fn rec(rest: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<CycleType>) {
        if rest == 0 {
            out.push(CycleType(cur.clone()));
            return;
        }
        for part in (1..=rest.min(max)).rev() {
            cur.push(part);
            rec(rest - part, part, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, n, &mut Vec::new(), &mut out);
    out
}

pub fn conjugacy_reps(n: usize) -> Vec<(CycleType, Permutation)> {
    partitions(n)
        .into_iter()
        .map(|c| {
            let rep = c.representative();
            (c, rep)
        })
        .collect()
}
