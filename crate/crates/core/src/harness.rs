//! Checks on instances and the suite runner.
//!
//! Every check turns into one [`CheckResult`] record. Failures are data:
//! engine errors become `fail` records with the error as the reason, and
//! window shortfalls become `skipped` records naming the required window.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::exactlin::PrimeField;
use crate::functors::{derivative, iterated_derivative, kernel_k, torsion_gamma};
use crate::invariants::{analyze, reg_bound, Analysis, EngineConfig, TBounds};
use crate::koszul::derived_delta_module;
use crate::module::{ExtendedDegree, TruncatedFIModule};
use crate::oracles::{random_sweep, FamilySpec, OracleCertificate, OracleInstance};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Skipped,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Skipped => "skipped",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckResult {
    pub check: String,
    pub instance: String,
    pub params: Value,
    pub verdict: Verdict,
    pub reason: Option<String>,
    pub witness: Value,
    pub window: Option<usize>,
    /// `None` for records comparing several primes.
    pub prime: Option<u32>,
}

/// Groups of checks selectable from the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CheckGroup {
    WidthReg,
    CriticalIso,
    Inequalities,
    Ses,
    DeltaDrop,
}

impl CheckGroup {
    pub const ALL: [CheckGroup; 5] = [
        CheckGroup::WidthReg,
        CheckGroup::CriticalIso,
        CheckGroup::Inequalities,
        CheckGroup::Ses,
        CheckGroup::DeltaDrop,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CheckGroup::WidthReg => "width_reg",
            CheckGroup::CriticalIso => "critical_iso",
            CheckGroup::Inequalities => "ineq",
            CheckGroup::Ses => "ses",
            CheckGroup::DeltaDrop => "delta_drop",
        }
    }

    /// Parses a comma separated list; `all` selects every group.
    pub fn parse_list(s: &str) -> Result<Vec<CheckGroup>> {
        let mut out = Vec::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            if part == "all" {
                out.extend(Self::ALL);
            } else {
                out.push(part.parse()?);
            }
        }
        out.sort_unstable();
        out.dedup();
        Ok(out)
    }
}

impl FromStr for CheckGroup {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().replace('-', "_");
        Self::ALL
            .into_iter()
            .find(|g| g.name() == norm)
            .ok_or_else(|| Error::InvalidFamily(format!("unknown check group `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteConfig {
    pub primes: Vec<u32>,
    pub truncation: usize,
    /// Instances whose window exceeds `truncation` are rebuilt up to this.
    pub max_truncation: usize,
    pub i_max: usize,
    pub a_max: Option<usize>,
    pub seed: u64,
    pub families: Vec<FamilySpec>,
    /// Size of the seeded random sweep appended to `families`.
    pub random: usize,
    /// The short exact sequence check runs on this many sweep instances.
    pub ses_random: usize,
    pub density: f64,
    pub checks: Vec<CheckGroup>,
}

pub const DEFAULT_FAMILIES: [&str; 7] = [
    "trunc(0,2)",
    "trunc(1,1)",
    "trunc(1,2)",
    "trunc(2,2)",
    "syz(0,2,1)",
    "syz(1,1,1)",
    "syz(0,1,2)",
];

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            primes: vec![101, 10007],
            truncation: 12,
            max_truncation: 16,
            i_max: 3,
            a_max: None,
            seed: 0,
            families: DEFAULT_FAMILIES.iter().map(|s| s.parse().unwrap()).collect(),
            random: 100,
            ses_random: 25,
            density: 0.5,
            checks: CheckGroup::ALL.to_vec(),
        }
    }
}

impl SuiteConfig {
    pub fn engine(&self) -> EngineConfig {
        EngineConfig {
            i_max: self.i_max,
            a_max: self.a_max,
        }
    }

    /// Configured families followed by the sweep: one or two generators of
    /// degree at most 2, relations of degree at most 3.
    pub fn instances(&self) -> Vec<FamilySpec> {
        let mut out = self.families.clone();
        out.extend(random_sweep(self.random, 2, 3, self.density, self.seed));
        out
    }

    fn wants(&self, g: CheckGroup) -> bool {
        self.checks.contains(&g)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub passed: usize,
    pub failed: usize,
    pub skipped: usize,
}

impl fmt::Display for Summary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} passed / {} failed / {} skipped", self.passed, self.failed, self.skipped)
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SuiteReport {
    pub records: Vec<CheckResult>,
}

impl SuiteReport {
    pub fn summary(&self) -> Summary {
        let mut s = Summary::default();
        for r in &self.records {
            match r.verdict {
                Verdict::Pass => s.passed += 1,
                Verdict::Fail => s.failed += 1,
                Verdict::Skipped => s.skipped += 1,
            }
        }
        s
    }

    pub fn to_ndjson(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).expect("records serialize"));
            out.push('\n');
        }
        out
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.records.iter().filter(|r| r.verdict == Verdict::Fail)
    }

    /// Records of one check, in report order.
    pub fn of_check<'a>(&'a self, check: &'a str) -> impl Iterator<Item = &'a CheckResult> {
        self.records.iter().filter(move |r| r.check == check)
    }
}

/// Shared state for the checks on one instance at one prime.
struct Ctx<'a> {
    inst: &'a OracleInstance,
    cfg: EngineConfig,
    prime: u32,
}

impl Ctx<'_> {
    fn params(&self) -> Value {
        json!({
            "N": self.inst.module.top(),
            "i_max": self.cfg.i_max,
            "a_max": self.cfg.a_max,
            "t_bounds": [self.inst.bounds.gen, self.inst.bounds.rel],
        })
    }

    fn record(&self, check: &str, verdict: Verdict, reason: Option<String>, witness: Value, window: Option<usize>) -> CheckResult {
        CheckResult {
            check: check.to_string(),
            instance: self.inst.id.clone(),
            params: self.params(),
            verdict,
            reason,
            witness,
            window,
            prime: Some(self.prime),
        }
    }

    fn pass_if(&self, check: &str, ok: bool, why: &str, witness: Value, window: Option<usize>) -> CheckResult {
        let (verdict, reason) = if ok { (Verdict::Pass, None) } else { (Verdict::Fail, Some(why.to_string())) };
        self.record(check, verdict, reason, witness, window)
    }

    fn skip(&self, check: &str, reason: impl Into<String>) -> CheckResult {
        self.record(check, Verdict::Skipped, Some(reason.into()), Value::Null, None)
    }

    fn error(&self, check: &str, err: &Error) -> CheckResult {
        match err {
            Error::OutOfWindow { required, available } => self.record(
                check,
                Verdict::Skipped,
                Some(format!("out of window: need N >= {required}, have {available}")),
                json!({"required": required, "available": available}),
                Some(*required),
            ),
            Error::GuardBandNonzero { bound, what } => self.record(
                check,
                Verdict::Fail,
                Some(err.to_string()),
                json!({"bound": bound, "nonzero": what}),
                None,
            ),
            _ => self.record(check, Verdict::Fail, Some(err.to_string()), Value::Null, None),
        }
    }
}

fn no_cert(ctx: &Ctx<'_>, check: &str) -> Option<CheckResult> {
    ctx.inst.cert.is_none().then(|| ctx.skip(check, "no certificate"))
}

/// Orders `-∞ < finite`; `None` for uncertified values.
fn rank_of(d: ExtendedDegree) -> Option<i64> {
    match d {
        ExtendedDegree::MinusInfinity => Some(i64::MIN),
        ExtendedDegree::Finite(x) => Some(x as i64),
        ExtendedDegree::Uncertified => None,
    }
}

/// Upper bound on `width_i` over modules with `t_0 <= a`, `t_1 <= b`;
/// `None` means `-∞`.
pub fn width_max_bound(i: usize, a: i32, b: i32) -> Option<i32> {
    let i = i as i32;
    if a == -1 || b <= 0 {
        None
    } else if a < b {
        Some(i + a + b - 1)
    } else {
        Some(i + 2 * b - 2)
    }
}

/// Runs the engine on an instance.
pub fn analyze_instance(inst: &OracleInstance, cfg: &EngineConfig) -> Result<Analysis> {
    analyze(&inst.module, inst.bounds, cfg)
}

fn widths(an: &Analysis) -> Vec<ExtendedDegree> {
    (1..=an.report.i_max).map(|i| an.report.width(i)).collect()
}

fn width_reg_with(ctx: &Ctx<'_>, an: &Analysis) -> CheckResult {
    const CHECK: &str = "width_reg";
    if let Some(r) = no_cert(ctx, CHECK) {
        return r;
    }
    let cert = ctx.inst.cert.as_ref().unwrap();
    let rep = &an.report;
    if rep.h0_acyclic {
        return ctx.skip(CHECK, "NotApplicable: H0-acyclic");
    }
    let w = widths(an);
    if w.iter().any(|d| !d.is_certified()) {
        return ctx.skip(CHECK, "uncertified width");
    }
    let diffs: Vec<ExtendedDegree> = w.iter().enumerate().map(|(k, d)| d.offset(-(k as i32 + 1))).collect();
    let bad: Vec<usize> = diffs
        .iter()
        .enumerate()
        .filter(|(_, d)| **d != ExtendedDegree::Finite(cert.reg))
        .map(|(k, _)| k + 1)
        .collect();
    let witness = json!({
        "reg": cert.reg,
        "crit": cert.crit,
        "width": w,
        "width_minus_i": diffs,
        "offending_i": bad,
        "t": rep.t,
        "reg_bound": rep.reg_bound,
    });
    ctx.pass_if(CHECK, bad.is_empty(), "width_i - i differs from the certified regularity", witness, Some(rep.window))
}

/// `width_i(V) - i = reg(V)` for `1 <= i <= i_max`.
pub fn check_width_reg(inst: &OracleInstance, cfg: &EngineConfig) -> CheckResult {
    let ctx = Ctx {
        inst,
        cfg: *cfg,
        prime: inst.module.field().p(),
    };
    match analyze_instance(inst, cfg) {
        Ok(an) => width_reg_with(&ctx, &an),
        Err(e) => ctx.error("width_reg", &e),
    }
}

/// The evaluations in degree `ρ - γ` that must agree, labelled.
fn critical_modules(v: &TruncatedFIModule, cert: &OracleCertificate, b: i32, i_max: usize) -> Result<Vec<(String, TruncatedFIModule)>> {
    let (rho, gamma) = (cert.reg, cert.crit);
    let g = gamma as usize;
    let d = (rho - gamma) as usize;
    let mut out = Vec::new();
    if gamma == 0 {
        out.push(("gamma".to_string(), torsion_gamma(v, Some(b))?));
    }
    let dg = iterated_derivative(v, g)?;
    if dg.trusted() < d + 1 {
        return Err(Error::OutOfWindow {
            required: d + 1 + g,
            available: v.trusted(),
        });
    }
    out.push((format!("K(Delta^{g} V)"), kernel_k(&dg)?));
    for i in 1..=i_max {
        let a = g + i;
        if v.trusted() < d + a {
            return Err(Error::OutOfWindow {
                required: d + a,
                available: v.trusted(),
            });
        }
        out.push((format!("co_{i}^(Delta^{a})(V)"), derived_delta_module(v, i, a, d)?));
    }
    Ok(out)
}

fn critical_iso_with(ctx: &Ctx<'_>, an: &Analysis) -> CheckResult {
    const CHECK: &str = "critical_iso";
    if let Some(r) = no_cert(ctx, CHECK) {
        return r;
    }
    let cert = ctx.inst.cert.as_ref().unwrap();
    if an.report.h0_acyclic {
        return ctx.skip(CHECK, "NotApplicable: H0-acyclic");
    }
    let d = (cert.reg - cert.crit) as usize;
    let mods = match critical_modules(&ctx.inst.module, cert, an.report.reg_bound, ctx.cfg.i_max) {
        Ok(m) => m,
        Err(e) => return ctx.error(CHECK, &e),
    };
    let mut entries = Vec::new();
    for (label, m) in &mods {
        let chars = match m.character_vector(d) {
            Ok(c) => c,
            Err(e) => return ctx.error(CHECK, &e),
        };
        entries.push((label.clone(), m.dim(d), chars));
    }
    let first = &entries[0];
    let ok = entries.iter().all(|(_, dim, ch)| *dim > 0 && *dim == first.1 && *ch == first.2);
    let witness = json!({
        "degree": d,
        "reg": cert.reg,
        "crit": cert.crit,
        "evaluations": entries
            .iter()
            .map(|(l, dim, ch)| json!({"module": l, "dim": dim, "character": ch}))
            .collect::<Vec<_>>(),
    });
    ctx.pass_if(CHECK, ok, "evaluations differ or vanish", witness, Some(an.report.window))
}

/// Nonvanishing and equal characters of the evaluations in degree `ρ - γ`.
pub fn check_critical_iso(inst: &OracleInstance, cfg: &EngineConfig) -> CheckResult {
    let ctx = Ctx {
        inst,
        cfg: *cfg,
        prime: inst.module.field().p(),
    };
    match analyze_instance(inst, cfg) {
        Ok(an) => critical_iso_with(&ctx, &an),
        Err(e) => ctx.error("critical_iso", &e),
    }
}

fn inequalities_with(ctx: &Ctx<'_>, an: &Analysis) -> Vec<CheckResult> {
    let rep = &an.report;
    let (t0, t1) = rep.t01();
    let window = Some(rep.window);
    let b = rep.reg_bound;
    let w = widths(an);
    let cert = ctx.inst.cert.as_ref();
    let mut out = Vec::new();

    if w.iter().any(|d| !d.is_certified()) {
        for c in ["width_bound", "width_monotone", "width_max"] {
            out.push(ctx.skip(c, "uncertified width"));
        }
    } else {
        let rank: Vec<i64> = w.iter().map(|d| rank_of(*d).unwrap()).collect();
        let shifted: Vec<ExtendedDegree> = w.iter().enumerate().map(|(k, d)| d.offset(-(k as i32 + 1))).collect();

        let bound = t1 + t0.min(t1);
        out.push(ctx.pass_if(
            "width_bound",
            rank[0] <= bound as i64,
            "width_1 exceeds t_1 + min(t_0, t_1)",
            json!({"width_1": w[0], "t0": t0, "t1": t1, "bound": bound}),
            window,
        ));

        let ranks: Vec<i64> = shifted.iter().map(|d| rank_of(*d).unwrap()).collect();
        let rises: Vec<usize> = (1..ranks.len()).filter(|&k| ranks[k] > ranks[k - 1]).map(|k| k + 1).collect();
        out.push(ctx.pass_if(
            "width_monotone",
            rises.is_empty(),
            "width_i - i increases",
            json!({"width_minus_i": shifted, "offending_i": rises}),
            window,
        ));

        let bounds: Vec<Option<i32>> = (1..=w.len()).map(|i| width_max_bound(i, t0, t1)).collect();
        let over: Vec<usize> = (0..w.len())
            .filter(|&k| rank[k] > bounds[k].map_or(i64::MIN, |x| x as i64))
            .map(|k| k + 1)
            .collect();
        out.push(ctx.pass_if(
            "width_max",
            over.is_empty(),
            "width_i exceeds the maximum for these t_0, t_1",
            json!({"width": w, "t0": t0, "t1": t1, "bounds": bounds, "offending_i": over}),
            window,
        ));
    }

    let (cap, source) = match cert {
        Some(c) => (c.reg, "certificate"),
        None => (b, "reg_bound"),
    };
    let lower = rank_of(rep.reg_from_t).unwrap_or(i64::MAX);
    out.push(ctx.pass_if(
        "reg_lower_bound",
        lower <= cap as i64,
        "max(t_i - i) exceeds the regularity",
        json!({"reg_from_t": rep.reg_from_t, "cap": cap, "source": source}),
        window,
    ));

    out.push(guard_band(ctx, an));
    out.push(derived_degree_bound(ctx, an));
    out.push(torsion_degree_bound(ctx, an));
    out
}

/// Every `co_i^{Δ^a}(V)_n` with `B + i < n + a <= B + i + 2` vanishes.
fn guard_band(ctx: &Ctx<'_>, an: &Analysis) -> CheckResult {
    let b = an.report.reg_bound;
    let table = &an.table;
    let mut checked = 0usize;
    let mut nonzero = Vec::new();
    for i in 1..=an.report.i_max {
        let lo = b + i as i32;
        for a in 1..=table.top {
            for n in 0..=table.top - a {
                let total = (n + a) as i32;
                if total <= lo || total > lo + 2 {
                    continue;
                }
                checked += 1;
                let dim = table.get(i, a, n).unwrap_or(0);
                if dim != 0 {
                    nonzero.push(json!({"i": i, "a": a, "n": n, "dim": dim}));
                }
            }
        }
    }
    ctx.pass_if(
        "guard_band",
        nonzero.is_empty() && checked > 0,
        "nonzero value above the regularity bound",
        json!({"reg_bound": b, "entries_checked": checked, "nonzero": nonzero}),
        Some(an.report.window),
    )
}

/// `max{h^j + j + extra : h^j >= 0, j <= upto}`, `None` if empty.
fn profile_max(cert: &OracleCertificate, upto: i64, extra: i32) -> Option<i32> {
    cert.hprofile
        .iter()
        .filter(|(&j, &h)| h >= 0 && (j as i64) <= upto)
        .map(|(&j, &h)| h + j as i32 + extra)
        .max()
}

/// `deg co_i^{Δ^a}(V) + a` bounded by the profile, or by `B + i` without one.
fn derived_degree_bound(ctx: &Ctx<'_>, an: &Analysis) -> CheckResult {
    let table = &an.table;
    let b = an.report.reg_bound;
    let cert = ctx.inst.cert.as_ref();
    let mut bad = Vec::new();
    let mut nonzero = 0usize;
    for i in 1..=an.report.i_max {
        for a in 1..=table.top {
            let deg = (0..=table.top - a).rev().find(|&n| table.get(i, a, n).unwrap_or(0) != 0);
            let Some(deg) = deg else { continue };
            nonzero += 1;
            let lhs = (deg + a) as i32;
            let rhs = match cert {
                Some(c) => profile_max(c, a as i64 - i as i64, i as i32),
                None => Some(b + i as i32),
            };
            if rhs.is_none_or(|r| lhs > r) {
                bad.push(json!({"i": i, "a": a, "deg": deg, "lhs": lhs, "rhs": rhs}));
            }
        }
    }
    let source = if cert.is_some() { "certificate" } else { "reg_bound" };
    ctx.pass_if(
        "derived_degree_bound",
        bad.is_empty(),
        "degree of a nonzero derived value exceeds its bound",
        json!({"source": source, "nonzero_values": nonzero, "violations": bad}),
        Some(an.report.window),
    )
}

/// `h⁰(Δ^a V) + a` bounded by the profile (or by `B`) for `a <= t_0`.
fn torsion_degree_bound(ctx: &Ctx<'_>, an: &Analysis) -> CheckResult {
    const CHECK: &str = "torsion_degree_bound";
    let (t0, t1) = an.report.t01();
    let b = an.report.reg_bound;
    let cert = ctx.inst.cert.as_ref();
    let mut rows = Vec::new();
    let mut bad = Vec::new();
    let mut current = ctx.inst.module.clone();
    for a in 0..=t0.max(0) as usize {
        if a > 0 {
            current = match derivative(&current) {
                Ok(m) => m,
                Err(e) => return ctx.error(CHECK, &e),
            };
        }
        let lower = |t: i32| if t < 0 { -1 } else { (t - a as i32).max(-1) };
        let ba = reg_bound(lower(t0), lower(t1));
        let h = match torsion_gamma(&current, Some(ba)) {
            Ok(g) => g.degree(Some(ba)),
            Err(e) => return ctx.error(CHECK, &e),
        };
        let Some(hv) = h.finite() else {
            return ctx.skip(CHECK, format!("uncertified h0 of Delta^{a} V"));
        };
        rows.push(json!({"a": a, "h0": hv}));
        if hv < 0 {
            continue;
        }
        let rhs = match cert {
            Some(c) => profile_max(c, a as i64, 0),
            None => Some(b),
        };
        if rhs.is_none_or(|r| hv + a as i32 > r) {
            bad.push(json!({"a": a, "h0": hv, "rhs": rhs}));
        }
    }
    ctx.pass_if(
        CHECK,
        bad.is_empty(),
        "h0 of an iterated derivative exceeds its bound",
        json!({"values": rows, "violations": bad}),
        Some(an.report.window),
    )
}

/// Bundle of inequality checks on one instance.
pub fn check_inequalities(inst: &OracleInstance, cfg: &EngineConfig) -> Vec<CheckResult> {
    let ctx = Ctx {
        inst,
        cfg: *cfg,
        prime: inst.module.field().p(),
    };
    match analyze_instance(inst, cfg) {
        Ok(an) => inequalities_with(&ctx, &an),
        Err(e) => vec![ctx.error("ineq", &e)],
    }
}

/// `dim co_i^{Δ^a}(V)_n = dim Δ(co_i^{Δ^{a-1}}V)_n + dim K(co_{i-1}^{Δ^{a-1}}V)_n`
/// for `1 <= i <= i_max`, `1 <= a <= a_max` and every `n` with
/// `n + a <= D`, where `D` caps the window at `B + i_max + 2`.
pub fn ses_violations(v: &TruncatedFIModule, b: i32, i_max: usize, a_max: usize) -> Result<(usize, Vec<Value>)> {
    let cap = (b + i_max as i32 + 2).max(0) as usize;
    let d = v.trusted().min(cap);
    let a_max = a_max.min(d);
    let mut mods: BTreeMap<(usize, usize), TruncatedFIModule> = BTreeMap::new();
    for i in 0..=i_max {
        for a in 0..=a_max {
            mods.insert((i, a), derived_delta_module(v, i, a, d - a)?);
        }
    }
    let mut checked = 0;
    let mut bad = Vec::new();
    for i in 1..=i_max {
        for a in 1..=a_max {
            let mid = &mods[&(i, a)];
            let left = &mods[&(i, a - 1)];
            let right = &mods[&(i - 1, a - 1)];
            for n in 0..=d - a {
                let delta = left.dim(n + 1) - left.incl(n).rank();
                let k = right.dim(n) - right.incl(n).rank();
                checked += 1;
                if mid.dim(n) != delta + k {
                    bad.push(json!({"i": i, "a": a, "n": n, "middle": mid.dim(n), "delta": delta, "kernel": k}));
                }
            }
        }
    }
    Ok((checked, bad))
}

fn ses_with(ctx: &Ctx<'_>, an: &Analysis) -> CheckResult {
    const CHECK: &str = "ses_dimension";
    match ses_violations(&ctx.inst.module, an.report.reg_bound, 3, 5) {
        Ok((checked, bad)) => ctx.pass_if(
            CHECK,
            bad.is_empty() && checked > 0,
            "dimension identity fails",
            json!({"degrees_checked": checked, "violations": bad}),
            Some(an.report.window),
        ),
        Err(e) => ctx.error(CHECK, &e),
    }
}

fn delta_drop_with(ctx: &Ctx<'_>) -> CheckResult {
    const CHECK: &str = "delta_drop";
    if let Some(r) = no_cert(ctx, CHECK) {
        return r;
    }
    let cert = ctx.inst.cert.as_ref().unwrap();
    if cert.crit < 1 {
        return ctx.skip(CHECK, "NotApplicable: critical index 0");
    }
    let dv = match derivative(&ctx.inst.module) {
        Ok(m) => m,
        Err(e) => return ctx.error(CHECK, &e),
    };
    // Δ is right exact and lowers free generators by one degree
    let lower = |t: i32| (t - 1).max(-1);
    let bounds = TBounds {
        gen: lower(ctx.inst.bounds.gen),
        rel: lower(ctx.inst.bounds.rel),
    };
    let an = match analyze(&dv, bounds, &ctx.cfg) {
        Ok(a) => a,
        Err(e) => return ctx.error(CHECK, &e),
    };
    if an.report.h0_acyclic {
        return ctx.skip(CHECK, "NotApplicable: derivative is H0-acyclic");
    }
    let w = widths(&an);
    let diffs: Vec<ExtendedDegree> = w.iter().enumerate().map(|(k, d)| d.offset(-(k as i32 + 1))).collect();
    let target = ExtendedDegree::Finite(cert.reg - 1);
    ctx.pass_if(
        CHECK,
        diffs.iter().all(|d| *d == target),
        "width_i - i of the derivative differs from reg - 1",
        json!({"reg": cert.reg, "width": w, "width_minus_i": diffs, "t": an.report.t}),
        Some(an.report.window + 1),
    )
}

/// `width_i(ΔV) - i = reg(V) - 1` when the critical index is positive.
pub fn check_delta_drop(inst: &OracleInstance, cfg: &EngineConfig) -> CheckResult {
    let ctx = Ctx {
        inst,
        cfg: *cfg,
        prime: inst.module.field().p(),
    };
    delta_drop_with(&ctx)
}

/// Builds an instance and analyzes it, enlarging the truncation once if the
/// window calculator asks for more (up to `max_truncation`).
fn prepare(field: PrimeField, spec: &FamilySpec, cfg: &SuiteConfig) -> Result<(OracleInstance, Result<Analysis>)> {
    let engine = cfg.engine();
    let inst = OracleInstance::build(field, spec, cfg.truncation)?;
    match analyze_instance(&inst, &engine) {
        Err(Error::OutOfWindow { required, .. }) if required > cfg.truncation && required <= cfg.max_truncation => {
            let inst = OracleInstance::build(field, spec, required)?;
            let an = analyze_instance(&inst, &engine);
            Ok((inst, an))
        }
        other => Ok((inst, other)),
    }
}

fn run_instance(field: PrimeField, spec: &FamilySpec, ses: bool, cfg: &SuiteConfig) -> Vec<CheckResult> {
    let (inst, an) = match prepare(field, spec, cfg) {
        Ok(x) => x,
        Err(e) => {
            // the instance itself could not be built
            let placeholder = OracleInstance {
                id: spec.to_string(),
                spec: spec.clone(),
                module: TruncatedFIModule::zero(field, 0),
                cert: None,
                bounds: TBounds { gen: -1, rel: -1 },
                presentation: None,
            };
            let ctx = Ctx {
                inst: &placeholder,
                cfg: cfg.engine(),
                prime: field.p(),
            };
            return vec![ctx.error("build", &e)];
        }
    };
    let ctx = Ctx {
        inst: &inst,
        cfg: cfg.engine(),
        prime: field.p(),
    };
    let mut out = Vec::new();
    let validated = inst.module.validate();
    out.push(match &validated {
        Ok(()) => ctx.pass_if("validate", true, "", json!({"dims": inst.module.dims()}), None),
        Err(e) => ctx.error("validate", e),
    });
    if let Some(cert) = &inst.cert {
        out.push(ctx.pass_if(
            "certificate",
            cert.is_consistent(),
            "reg or crit disagrees with the profile",
            json!(cert),
            None,
        ));
    }
    let an = match an {
        Ok(an) => an,
        Err(e) => {
            out.push(ctx.error("analyze", &e));
            return out;
        }
    };
    let certified = inst.cert.is_some();
    if certified && cfg.wants(CheckGroup::WidthReg) {
        out.push(width_reg_with(&ctx, &an));
    }
    if certified && cfg.wants(CheckGroup::CriticalIso) {
        out.push(critical_iso_with(&ctx, &an));
    }
    if cfg.wants(CheckGroup::Inequalities) {
        out.extend(inequalities_with(&ctx, &an));
    }
    if ses && cfg.wants(CheckGroup::Ses) {
        out.push(ses_with(&ctx, &an));
    }
    if certified && cfg.wants(CheckGroup::DeltaDrop) {
        out.push(delta_drop_with(&ctx));
    }
    out
}

/// Every check on every instance at every prime, then one agreement record
/// per instance comparing verdicts across primes. Record order depends only
/// on the configuration.
pub fn run_suite(cfg: &SuiteConfig) -> Result<SuiteReport> {
    let specs = cfg.instances();
    let mut sweep_seen = 0usize;
    let ses_flags: Vec<bool> = specs
        .iter()
        .enumerate()
        .map(|(k, _)| {
            if k < cfg.families.len() {
                true
            } else {
                sweep_seen += 1;
                sweep_seen <= cfg.ses_random
            }
        })
        .collect();
    let mut records = Vec::new();
    let mut per_prime = Vec::new();
    for &p in &cfg.primes {
        let field = PrimeField::new(p)?;
        let chunks: Vec<Vec<CheckResult>> = specs
            .par_iter()
            .zip(ses_flags.par_iter())
            .map(|(spec, &ses)| run_instance(field, spec, ses, cfg))
            .collect();
        per_prime.push(chunks);
    }
    for chunks in &per_prime {
        for c in chunks {
            records.extend(c.iter().cloned());
        }
    }
    if cfg.primes.len() > 1 {
        for (k, spec) in specs.iter().enumerate() {
            records.push(agreement(spec, cfg, per_prime.iter().map(|chunks| &chunks[k])));
        }
    }
    Ok(SuiteReport { records })
}

fn agreement<'a>(spec: &FamilySpec, cfg: &SuiteConfig, runs: impl Iterator<Item = &'a Vec<CheckResult>>) -> CheckResult {
    let mut table: BTreeMap<String, Vec<Verdict>> = BTreeMap::new();
    for run in runs {
        for r in run {
            table.entry(r.check.clone()).or_default().push(r.verdict);
        }
    }
    let n = cfg.primes.len();
    let differing: Vec<&String> = table
        .iter()
        .filter(|(_, v)| v.len() != n || v.iter().any(|x| *x != v[0]))
        .map(|(k, _)| k)
        .collect();
    let ok = differing.is_empty();
    CheckResult {
        check: "prime_agreement".into(),
        instance: spec.to_string(),
        params: json!({"N": cfg.truncation, "i_max": cfg.i_max, "primes": cfg.primes}),
        verdict: if ok { Verdict::Pass } else { Verdict::Fail },
        reason: (!ok).then(|| "verdicts depend on the prime".to_string()),
        witness: json!({"verdicts": table, "differing": differing}),
        window: None,
        prime: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::free::{evaluate_free, FreeModule};

    fn field() -> PrimeField {
        PrimeField::default()
    }

    fn build(spec: &str, top: usize) -> OracleInstance {
        OracleInstance::build(field(), &spec.parse().unwrap(), top).unwrap()
    }

    #[test]
    fn width_max_cases() {
        assert_eq!(width_max_bound(1, -1, 3), None);
        assert_eq!(width_max_bound(2, 1, 0), None);
        assert_eq!(width_max_bound(1, 0, 3), Some(3));
        assert_eq!(width_max_bound(3, 2, 2), Some(5));
        assert_eq!(width_max_bound(1, 3, 1), Some(1));
    }

    #[test]
    fn check_group_names() {
        assert_eq!(CheckGroup::parse_list("ineq,width-reg").unwrap(), vec![CheckGroup::WidthReg, CheckGroup::Inequalities]);
        assert_eq!(CheckGroup::parse_list("all").unwrap().len(), 5);
        assert!(CheckGroup::parse_list("bogus").is_err());
    }

    #[test]
    fn width_reg_on_torsion() {
        let inst = build("trunc(0,2)", 12);
        let r = check_width_reg(&inst, &EngineConfig::default());
        assert_eq!(r.verdict, Verdict::Pass, "{r:?}");
        assert_eq!(r.witness["width"], json!([3, 4, 5]));
    }

    #[test]
    fn corrupted_certificate_fails_with_witness() {
        let mut inst = build("trunc(0,2)", 12);
        inst.cert.as_mut().unwrap().reg += 1;
        let r = check_width_reg(&inst, &EngineConfig::default());
        assert_eq!(r.verdict, Verdict::Fail);
        assert_eq!(r.witness["offending_i"], json!([1, 2, 3]));
        assert_eq!(r.instance, "trunc(0,2)");
    }

    #[test]
    fn free_module_is_not_applicable() {
        let module = evaluate_free(field(), &FreeModule::new(vec![1]), 8);
        let inst = OracleInstance {
            id: "free(1)".into(),
            spec: "trunc(1,1)".parse().unwrap(),
            module,
            cert: Some(OracleCertificate::from_profile(BTreeMap::new(), vec![])),
            bounds: TBounds { gen: 1, rel: -1 },
            presentation: None,
        };
        let r = check_width_reg(&inst, &EngineConfig::default());
        assert_eq!(r.verdict, Verdict::Skipped);
        assert!(r.reason.unwrap().contains("NotApplicable"));
    }

    #[test]
    fn critical_iso_on_torsion() {
        let inst = build("trunc(0,2)", 12);
        let r = check_critical_iso(&inst, &EngineConfig::default());
        assert_eq!(r.verdict, Verdict::Pass, "{r:?}");
        let evals = r.witness["evaluations"].as_array().unwrap();
        assert_eq!(evals.len(), 5);
        assert!(evals.iter().all(|e| e["dim"] == json!(1)));
    }

    #[test]
    fn inequalities_on_crit_one() {
        let inst = build("syz(1,1,1)", 10);
        let rs = check_inequalities(&inst, &EngineConfig { i_max: 2, a_max: None });
        for r in &rs {
            assert_eq!(r.verdict, Verdict::Pass, "{r:?}");
        }
        assert_eq!(rs.len(), 7);
    }

    #[test]
    fn ses_on_truncation() {
        let inst = build("trunc(1,2)", 12);
        let (checked, bad) = ses_violations(&inst.module, 2, 3, 5).unwrap();
        assert!(checked > 0);
        assert!(bad.is_empty(), "{bad:?}");
    }

    #[test]
    fn delta_drop_cases() {
        let r = check_delta_drop(&build("trunc(0,2)", 10), &EngineConfig::default());
        assert_eq!(r.verdict, Verdict::Skipped);
        let r = check_delta_drop(&build("syz(0,2,1)", 12), &EngineConfig { i_max: 2, a_max: None });
        assert_eq!(r.verdict, Verdict::Pass, "{r:?}");
    }

    #[test]
    fn small_suite_is_deterministic() {
        let cfg = SuiteConfig {
            families: vec!["trunc(0,2)".parse().unwrap(), "syz(1,1,1)".parse().unwrap()],
            random: 3,
            ses_random: 1,
            ..SuiteConfig::default()
        };
        let a = run_suite(&cfg).unwrap();
        let b = run_suite(&cfg).unwrap();
        assert_eq!(a.to_ndjson(), b.to_ndjson());
        assert_eq!(a.summary().failed, 0, "{}", a.to_ndjson());
    }
}
