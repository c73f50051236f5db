//! `t_i`, `width_i`, `h⁰` and the regularity lower bound, with windows.
//!
//! Every certified degree rests on a vanishing bound:
//!
//! * `t_0` and `t_1` are bounded by the generator and relation degrees of
//!   a presentation;
//! * the regularity is at most `B = t_0 + t_1 - 1`, so `t_i <= B + i`;
//! * `co_i^{Δ^a}(V)_n = 0` once `n + a > B + i`, which also bounds `h⁰`.
//!
//! All computed values sit inside one table of cube homology dimensions
//! indexed by `(a, n)` with `n + a <= D`. The degrees `B + i < n + a <= D`
//! form the guard band and must vanish. A nonzero value there means the
//! bound was wrong; it is reported as an error, never absorbed.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::functors::torsion_gamma;
use crate::koszul::Cube;
use crate::module::{ExtendedDegree, TruncatedFIModule};

/// Upper bounds on `t_0` and `t_1`, `-1` when there are no generators or
/// relations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct TBounds {
    pub gen: i32,
    pub rel: i32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EngineConfig {
    pub i_max: usize,
    /// Scan `a` at least this far; the guard band always reaches `B + i + 2`.
    pub a_max: Option<usize>,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self { i_max: 3, a_max: None }
    }
}

/// Regularity bound from the generation and relation degrees. Without
/// relations the bound degenerates, and `t_0` is used as a safe value.
pub fn reg_bound(t0: i32, t1: i32) -> i32 {
    if t0 < 0 {
        -1
    } else if t1 < 0 {
        t0
    } else {
        t0 + t1 - 1
    }
}

/// Top of the scan for homological degree `i`.
pub fn scan_top(b: i32, i: usize, a_max: Option<usize>) -> usize {
    ((b + i as i32 + 2).max(0) as usize).max(a_max.unwrap_or(0))
}

/// Smallest trusted degree that certifies everything up to `i_max`.
pub fn required_window(bounds: TBounds, b: i32, cfg: &EngineConfig) -> usize {
    let pre = bounds.gen.max(bounds.rel).max(0) as usize;
    pre.max(scan_top(b, cfg.i_max, cfg.a_max)).max((b + 1).max(0) as usize)
}

fn top_nonzero(values: impl Iterator<Item = (usize, usize)>) -> i32 {
    values.filter(|&(_, d)| d != 0).map(|(n, _)| n as i32).max().unwrap_or(-1)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WidthEntry {
    pub i: usize,
    pub value: ExtendedDegree,
    /// The `a` attaining the maximum, when finite.
    pub attained_at: Option<usize>,
    /// `a` ranges over `1..=scan_top`; degrees with `n + a > reg_bound + i`
    /// were verified to vanish.
    pub scan_top: usize,
    pub guard_band: (i32, usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InvariantReport {
    pub prime: u32,
    pub truncation: usize,
    pub trusted: usize,
    pub i_max: usize,
    pub reg_bound: i32,
    pub t: Vec<ExtendedDegree>,
    pub width: Vec<WidthEntry>,
    pub h0: ExtendedDegree,
    pub reg_from_t: ExtendedDegree,
    pub h0_acyclic: bool,
    /// Largest degree any value depended on.
    pub window: usize,
}

impl InvariantReport {
    pub fn width(&self, i: usize) -> ExtendedDegree {
        self.width.iter().find(|w| w.i == i).map_or(ExtendedDegree::Uncertified, |w| w.value)
    }

    pub fn t(&self, i: usize) -> ExtendedDegree {
        self.t.get(i).copied().unwrap_or(ExtendedDegree::Uncertified)
    }

    /// Exact `t_0` and `t_1` as integers.
    pub fn t01(&self) -> (i32, i32) {
        (self.t[0].finite().unwrap_or(-1), self.t[1].finite().unwrap_or(-1))
    }
}

/// Homology dimensions of the cube complexes: `table[(a, n)][i]` is
/// `dim co_i^{Δ^a}(V)_n`; with `n = 0` this is `dim H_i^FI(V)_a`.
#[derive(Clone, Debug, Default)]
pub struct CubeTable {
    pub top: usize,
    pub i_max: usize,
    pub dims: BTreeMap<(usize, usize), Vec<usize>>,
}

impl CubeTable {
    /// All `(a, n)` with `a + n <= top`. Homology is computed through `i_max`.
    pub fn compute(v: &TruncatedFIModule, top: usize, i_max: usize) -> Result<Self> {
        let pairs: Vec<(usize, usize)> = (0..=top).flat_map(|a| (0..=top - a).map(move |n| (a, n))).collect();
        let values = pairs
            .par_iter()
            .map(|&(a, n)| Cube::new(v, n, a)?.homology_dims(i_max))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            top,
            i_max,
            dims: pairs.into_iter().zip(values).collect(),
        })
    }

    pub fn get(&self, i: usize, a: usize, n: usize) -> Option<usize> {
        self.dims.get(&(a, n)).and_then(|d| d.get(i)).copied()
    }

    pub fn fi_homology(&self, i: usize, m: usize) -> Option<usize> {
        self.get(i, m, 0)
    }
}

#[derive(Clone, Debug)]
pub struct Analysis {
    pub report: InvariantReport,
    pub table: CubeTable,
}

/// Computes the full invariant report. Needs `trusted(V) >= required_window`.
pub fn analyze(v: &TruncatedFIModule, bounds: TBounds, cfg: &EngineConfig) -> Result<Analysis> {
    let i_max = cfg.i_max.max(1);
    let trusted = v.trusted();
    let pre = bounds.gen.max(bounds.rel).max(0) as usize;
    if trusted < pre {
        return Err(Error::OutOfWindow {
            required: pre,
            available: trusted,
        });
    }
    // generation and relation degrees first; they fix B and the window
    let early: Vec<Vec<usize>> = (0..=pre)
        .into_par_iter()
        .map(|m| Cube::fi_homology(v, m)?.homology_dims(1))
        .collect::<Result<_>>()?;
    let t0 = top_nonzero(early.iter().map(|d| d[0]).enumerate());
    let t1 = top_nonzero(early.iter().map(|d| d[1]).enumerate());
    for (i, bound) in [(0usize, bounds.gen), (1, bounds.rel)] {
        let above = top_nonzero(early.iter().map(|d| d[i]).enumerate());
        if above > bound {
            return Err(Error::GuardBandNonzero {
                bound,
                what: format!("H_{i} in degree {above}"),
            });
        }
    }
    let b = reg_bound(t0, t1);
    let effective = EngineConfig { i_max, a_max: cfg.a_max };
    let required = required_window(bounds, b, &effective);
    if trusted < required {
        return Err(Error::OutOfWindow {
            required,
            available: trusted,
        });
    }
    let top = scan_top(b, i_max, cfg.a_max);
    let table = CubeTable::compute(v, top, i_max)?;

    let mut t = vec![ExtendedDegree::Finite(t0), ExtendedDegree::Finite(t1)];
    for i in 0..=i_max {
        let lim = match i {
            0 => bounds.gen,
            1 => bounds.rel,
            _ => b + i as i32,
        };
        let deg = top_nonzero((0..=top).map(|m| (m, table.fi_homology(i, m).unwrap())));
        if deg > lim {
            return Err(Error::GuardBandNonzero {
                bound: lim,
                what: format!("H_{i} in degree {deg}"),
            });
        }
        if i >= 2 {
            t.push(ExtendedDegree::Finite(deg));
        }
    }

    let mut width = Vec::with_capacity(i_max);
    for i in 1..=i_max {
        width.push(width_from_table(&table, i, b, cfg.a_max)?);
    }

    let h0 = torsion_gamma(v, Some(b))?.degree(Some(b));
    let reg_from_t = (1..=i_max)
        .filter_map(|i| t[i].finite().filter(|&d| d >= 0).map(|d| d - i as i32))
        .max()
        .map_or(ExtendedDegree::MinusInfinity, ExtendedDegree::Finite);
    let h0_acyclic = (1..=i_max).all(|i| t[i] == ExtendedDegree::Finite(-1));
    let report = InvariantReport {
        prime: v.field().p(),
        truncation: v.top(),
        trusted,
        i_max,
        reg_bound: b,
        t,
        width,
        h0,
        reg_from_t,
        h0_acyclic,
        window: required,
    };
    Ok(Analysis { report, table })
}

/// `width_i` from a cube table: the largest `deg co_i^{Δ^a} + a` over
/// nonzero values, after checking every entry with `n + a > B + i` is zero.
pub fn width_from_table(table: &CubeTable, i: usize, b: i32, a_max: Option<usize>) -> Result<WidthEntry> {
    let top = scan_top(b, i, a_max);
    if top > table.top || i > table.i_max {
        return Err(Error::OutOfWindow {
            required: top,
            available: table.top,
        });
    }
    let limit = b + i as i32;
    let mut best: Option<(i32, usize)> = None;
    for a in 1..=top {
        for n in 0..=top - a {
            let d = table.get(i, a, n).expect("table covers the scan");
            if d == 0 {
                continue;
            }
            let total = (n + a) as i32;
            if total > limit {
                return Err(Error::GuardBandNonzero {
                    bound: limit,
                    what: format!("co_{i} of Δ^{a} has dimension {d} in degree {n}"),
                });
            }
            if best.is_none_or(|(w, _)| total > w) {
                best = Some((total, a));
            }
        }
    }
    Ok(WidthEntry {
        i,
        value: best.map_or(ExtendedDegree::MinusInfinity, |(w, _)| ExtendedDegree::Finite(w)),
        attained_at: best.map(|(_, a)| a),
        scan_top: top,
        guard_band: (limit + 1, top),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::comb::Injection;
    use crate::exactlin::{PrimeField, Subspace};
    use crate::free::{coker_of_map, evaluate_free, FreeMap, FreeModule, FreeTerm};

    fn field() -> PrimeField {
        PrimeField::default()
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
    fn truncated_free_invariants() {
        let v = trunc0(2, 12);
        let an = analyze(&v, TBounds { gen: 0, rel: 3 }, &EngineConfig::default()).unwrap();
        let r = &an.report;
        assert_eq!(r.t[..4], [0, 3, 4, 5].map(ExtendedDegree::Finite));
        assert_eq!(r.reg_bound, 2);
        assert_eq!(r.width(1), ExtendedDegree::Finite(3));
        assert_eq!(r.width(2), ExtendedDegree::Finite(4));
        assert_eq!(r.width(3), ExtendedDegree::Finite(5));
        assert_eq!(r.h0, ExtendedDegree::Finite(2));
        assert_eq!(r.reg_from_t, ExtendedDegree::Finite(2));
        assert!(!r.h0_acyclic);
    }

    #[test]
    fn free_modules_are_acyclic() {
        let v = evaluate_free(field(), &FreeModule::new(vec![1]), 8);
        let an = analyze(&v, TBounds { gen: 1, rel: -1 }, &EngineConfig::default()).unwrap();
        let r = &an.report;
        assert_eq!(r.t[0], ExtendedDegree::Finite(1));
        assert!(r.t[1..].iter().all(|&t| t == ExtendedDegree::Finite(-1)));
        assert!(r.width.iter().all(|w| w.value == ExtendedDegree::MinusInfinity));
        assert_eq!(r.reg_from_t, ExtendedDegree::MinusInfinity);
        assert_eq!(r.h0, ExtendedDegree::Finite(-1));
        assert!(r.h0_acyclic);
    }

    #[test]
    fn insufficient_window_reports_requirement() {
        let v = trunc0(2, 5);
        let err = analyze(&v, TBounds { gen: 0, rel: 3 }, &EngineConfig::default()).unwrap_err();
        assert_eq!(err, Error::OutOfWindow { required: 7, available: 5 });
    }

    #[test]
    fn wrong_bounds_are_caught() {
        let v = trunc0(2, 12);
        let err = analyze(&v, TBounds { gen: 0, rel: 2 }, &EngineConfig::default()).unwrap_err();
        assert!(matches!(err, Error::GuardBandNonzero { .. }));
    }

    #[test]
    fn submodule_of_free_has_regularity_two() {
        // M(1)_{>1}
        let top = 12;
        let m1 = evaluate_free(field(), &FreeModule::new(vec![1]), top);
        let subs: Vec<Subspace> = (0..=top)
            .map(|n| if n <= 1 { Subspace::zero(field(), n) } else { Subspace::whole(field(), n) })
            .collect();
        let v = m1.submodule(&subs, top).unwrap();
        let cfg = EngineConfig { i_max: 2, a_max: None };
        let an = analyze(&v, TBounds { gen: 2, rel: 3 }, &cfg).unwrap();
        assert_eq!(an.report.width(1), ExtendedDegree::Finite(3));
        assert_eq!(an.report.width(2), ExtendedDegree::Finite(4));
    }
}
