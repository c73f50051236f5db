//! Text format for presentations.
//!
//! ```text
//! fi-presentation v1
//! prime 10007
//! truncation 12
//! generators 0 2
//! relation 3: 1 g0 0->3: ; 5 g1 2->3:1,3
//! ```
//!
//! Each `relation d:` line is one column of the presenting map: a `;`
//! separated list of terms `<coef> g<index> <injection>` where the
//! injection maps the generator's degree into `[d]`, written with 1-based
//! images. Blank lines and lines starting with `#` are ignored. Coefficients
//! may be any integer and are reduced modulo the prime.

use std::fmt::Write as _;

use crate::comb::Injection;
use crate::error::{Error, Result};
use crate::exactlin::{PrimeField, DEFAULT_PRIME};
use crate::free::{coker_of_map, FreeMap, FreeModule, FreeTerm};
use crate::invariants::TBounds;
use crate::module::TruncatedFIModule;

pub const HEADER: &str = "fi-presentation v1";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PresentationFile {
    pub truncation: usize,
    pub map: FreeMap,
}

impl PresentationFile {
    pub fn prime(&self) -> u32 {
        self.map.field.p()
    }

    /// Generation and relation degrees of the presentation.
    pub fn bounds(&self) -> TBounds {
        let top = |f: &FreeModule| f.gens.iter().max().map_or(-1, |&d| d as i32);
        TBounds {
            gen: top(&self.map.target),
            rel: top(&self.map.source),
        }
    }

    pub fn module(&self) -> Result<TruncatedFIModule> {
        coker_of_map(&self.map, self.truncation)
    }

    pub fn emit(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{HEADER}").unwrap();
        writeln!(out, "prime {}", self.prime()).unwrap();
        writeln!(out, "truncation {}", self.truncation).unwrap();
        out.push_str("generators");
        for d in &self.map.target.gens {
            write!(out, " {d}").unwrap();
        }
        out.push('\n');
        for (d, col) in self.map.source.gens.iter().zip(&self.map.columns) {
            write!(out, "relation {d}:").unwrap();
            for (k, t) in col.iter().enumerate() {
                let sep = if k == 0 { " " } else { " ; " };
                write!(out, "{sep}{} g{} {}", t.coef, t.target, t.inj).unwrap();
            }
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        Parser::default().run(text)
    }
}

fn err(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

/// Splits on whitespace, keeping 1-based columns.
fn words(s: &str, base: usize) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in s.char_indices() {
        match (c.is_whitespace(), start) {
            (true, Some(st)) => {
                out.push((base + st, &s[st..i]));
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    if let Some(st) = start {
        out.push((base + st, &s[st..]));
    }
    out
}

/// A parsed term with its source position: line, column, coefficient,
/// generator index, injection.
type RawTerm = (usize, usize, i64, usize, Injection);

#[derive(Default)]
struct Parser {
    prime: Option<u32>,
    truncation: Option<usize>,
    gens: Option<Vec<usize>>,
    rels: Vec<usize>,
    columns: Vec<Vec<RawTerm>>,
}

impl Parser {
    fn run(mut self, text: &str) -> Result<PresentationFile> {
        let mut seen_header = false;
        let mut last = 0;
        for (k, raw) in text.lines().enumerate() {
            let line = k + 1;
            last = line;
            let body = raw.trim_end();
            let trimmed = body.trim_start();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let indent = body.len() - trimmed.len();
            if !seen_header {
                if trimmed != HEADER {
                    return Err(err(line, indent + 1, format!("expected header `{HEADER}`")));
                }
                seen_header = true;
                continue;
            }
            self.line(line, trimmed, indent + 1)?;
        }
        if !seen_header {
            return Err(err(1, 1, format!("expected header `{HEADER}`")));
        }
        let end = last + 1;
        let prime = self.prime.unwrap_or(DEFAULT_PRIME);
        let field = PrimeField::new(prime).map_err(|e| err(end, 1, e.to_string()))?;
        let truncation = self.truncation.ok_or_else(|| err(end, 1, "missing `truncation` line"))?;
        let gens = self.gens.ok_or_else(|| err(end, 1, "missing `generators` line"))?;
        let mut columns = Vec::with_capacity(self.columns.len());
        for (j, col) in self.columns.into_iter().enumerate() {
            let mut terms = Vec::with_capacity(col.len());
            for (line, column, coef, target, inj) in col {
                let a = *gens
                    .get(target)
                    .ok_or_else(|| err(line, column, format!("no generator g{target}")))?;
                if inj.src() != a || inj.dst() != self.rels[j] {
                    return Err(err(
                        line,
                        column,
                        format!("injection {inj} should map [{a}] into [{}]", self.rels[j]),
                    ));
                }
                terms.push(FreeTerm {
                    target,
                    coef: field.reduce(coef),
                    inj,
                });
            }
            columns.push(terms);
        }
        let map = FreeMap::new(field, FreeModule::new(self.rels), FreeModule::new(gens), columns)
            .map_err(|e| err(end, 1, e.to_string()))?;
        Ok(PresentationFile { truncation, map })
    }

    fn line(&mut self, line: usize, s: &str, base: usize) -> Result<()> {
        let (key, rest) = s.split_once(char::is_whitespace).unwrap_or((s, ""));
        let rest_base = base + key.len() + 1;
        let number = |w: (usize, &str)| -> Result<usize> {
            w.1.parse().map_err(|_| err(line, w.0, format!("`{}` is not a nonnegative integer", w.1)))
        };
        let single = |what: &str| -> Result<usize> {
            match words(rest, rest_base)[..] {
                [w] => number(w),
                _ => Err(err(line, base, format!("`{what}` takes one value"))),
            }
        };
        match key {
            "prime" => {
                let p = single("prime")?;
                self.prime = Some(u32::try_from(p).map_err(|_| err(line, rest_base, "prime out of range"))?);
            }
            "truncation" => self.truncation = Some(single("truncation")?),
            "generators" => {
                if self.gens.is_some() {
                    return Err(err(line, base, "duplicate `generators` line"));
                }
                self.gens = Some(words(rest, rest_base).into_iter().map(number).collect::<Result<_>>()?);
            }
            "relation" => {
                let (deg, terms) = rest
                    .split_once(':')
                    .ok_or_else(|| err(line, rest_base, "expected `relation <degree>: terms`"))?;
                let d = match words(deg, rest_base)[..] {
                    [w] => number(w)?,
                    _ => return Err(err(line, rest_base, "expected one relation degree")),
                };
                let mut col = Vec::new();
                let mut offset = rest_base + deg.len() + 1;
                if !terms.trim().is_empty() {
                    for term in terms.split(';') {
                        col.push(self.term(line, term, offset)?);
                        offset += term.len() + 1;
                    }
                }
                self.rels.push(d);
                self.columns.push(col);
            }
            other => return Err(err(line, base, format!("unknown directive `{other}`"))),
        }
        Ok(())
    }

    fn term(&self, line: usize, s: &str, base: usize) -> Result<RawTerm> {
        let w = words(s, base);
        let [(c0, coef), (c1, g), (c2, inj)] = w[..] else {
            let col = w.first().map_or(base, |x| x.0);
            return Err(err(line, col, "expected `<coef> g<index> <a->n:images>`"));
        };
        let coef: i64 = coef.parse().map_err(|_| err(line, c0, format!("bad coefficient `{coef}`")))?;
        let target: usize = g
            .strip_prefix('g')
            .and_then(|x| x.parse().ok())
            .ok_or_else(|| err(line, c1, format!("bad generator `{g}`")))?;
        let inj: Injection = inj.parse().map_err(|e| match e {
            Error::Parse { column, message, .. } => err(line, c2 + column - 1, message),
            other => other,
        })?;
        Ok((line, c0, coef, target, inj))
    }
}
