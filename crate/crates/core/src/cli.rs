//! Command-line front end.
//!
//! Exit codes: 0 success, 1 a check failed, 2 parse error, 3 window error.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use crate::error::Error;
use crate::exactlin::{PrimeField, DEFAULT_PRIME};
use crate::harness::{run_suite, CheckGroup, SuiteConfig, SuiteReport, Verdict};
use crate::invariants::{analyze, EngineConfig, InvariantReport};
use crate::oracles::{FamilySpec, OracleInstance};
use crate::presentation::PresentationFile;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_WINDOW: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "fi-lab", version, about = "Homological invariants of FI-modules over prime fields")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compute t_i, width_i, h0 and the regularity lower bound of a presentation.
    Invariants(InvariantsArgs),
    /// Run the verification suite and write an NDJSON report.
    Verify(VerifyArgs),
    /// Print the presentation file of a family member.
    Dump(DumpArgs),
}

#[derive(Args, Debug)]
struct InvariantsArgs {
    /// Presentation file.
    file: PathBuf,
    /// Largest homological degree (default 3).
    #[arg(long)]
    imax: Option<usize>,
    /// Scan derivatives at least this far (default: the guard band).
    #[arg(long)]
    amax: Option<usize>,
    /// Override the truncation stated in the file.
    #[arg(long)]
    truncation: Option<usize>,
    /// Print the report as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug, Default)]
struct VerifyArgs {
    /// TOML file with the same keys as the flags; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Primes to run at, repeatable (default 101 and 10007).
    #[arg(long = "prime")]
    primes: Vec<u32>,
    /// Truncation degree N (default 12).
    #[arg(long)]
    truncation: Option<usize>,
    /// Largest truncation the window calculator may request (default 16).
    #[arg(long)]
    max_truncation: Option<usize>,
    /// Largest homological degree (default 3).
    #[arg(long)]
    imax: Option<usize>,
    /// Scan derivatives at least this far (default: the guard band).
    #[arg(long)]
    amax: Option<usize>,
    /// Seed of the random sweep (default 0).
    #[arg(long)]
    seed: Option<u64>,
    /// Family spec, repeatable; replaces the default families.
    #[arg(long = "family")]
    families: Vec<String>,
    /// Size of the random sweep (default 100, or 0 when --family is given).
    #[arg(long)]
    random: Option<usize>,
    /// Check groups: width_reg, critical_iso, ineq, ses, delta_drop or all.
    #[arg(long)]
    checks: Option<String>,
    /// Report path (default: standard output).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct DumpArgs {
    #[arg(long)]
    family: String,
    #[arg(long, default_value_t = DEFAULT_PRIME)]
    prime: u32,
    #[arg(long, default_value_t = 12)]
    truncation: usize,
}

/// Keys of a `verify` config file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub prime: Option<Vec<u32>>,
    pub truncation: Option<usize>,
    pub max_truncation: Option<usize>,
    pub imax: Option<usize>,
    pub amax: Option<usize>,
    pub seed: Option<u64>,
    pub family: Option<Vec<String>>,
    pub random: Option<usize>,
    pub ses_random: Option<usize>,
    pub checks: Option<String>,
    pub out: Option<PathBuf>,
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse { .. } | Error::InvalidFamily(_) => EXIT_PARSE,
        Error::OutOfWindow { .. } => EXIT_WINDOW,
        _ => EXIT_FAIL,
    }
}

fn report_error(e: &Error, err: &mut dyn Write) -> i32 {
    match e {
        Error::OutOfWindow { required, available } => {
            let _ = writeln!(err, "error: window too small: need N >= {required} (have {available})");
        }
        _ => {
            let _ = writeln!(err, "error: {e}");
        }
    }
    exit_code(e)
}

/// Runs the command line and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                return EXIT_PARSE;
            }
            let _ = write!(out, "{}", e.render());
            return EXIT_OK;
        }
    };
    let result = match cli.command {
        Command::Invariants(a) => invariants(a, out),
        Command::Verify(a) => verify(a, out, err),
        Command::Dump(a) => dump(a, out),
    };
    result.unwrap_or_else(|e| report_error(&e, err))
}

fn invariants(a: InvariantsArgs, out: &mut dyn Write) -> Result<i32, Error> {
    let text = std::fs::read_to_string(&a.file).map_err(|e| Error::Parse {
        line: 0,
        column: 0,
        message: format!("cannot read {}: {e}", a.file.display()),
    })?;
    let mut file = PresentationFile::parse(&text)?;
    if let Some(n) = a.truncation {
        file.truncation = n;
    }
    let module = file.module()?;
    let cfg = EngineConfig {
        i_max: a.imax.unwrap_or(3),
        a_max: a.amax,
    };
    let report = analyze(&module, file.bounds(), &cfg)?.report;
    if a.json {
        writeln!(out, "{}", serde_json::to_string_pretty(&report).expect("report serializes")).ok();
    } else {
        write_report(&report, out);
    }
    Ok(EXIT_OK)
}

fn write_report(r: &InvariantReport, out: &mut dyn Write) {
    let _ = writeln!(out, "prime {}  truncation {}  window {}  reg_bound {}", r.prime, r.truncation, r.window, r.reg_bound);
    for (i, t) in r.t.iter().enumerate() {
        let _ = writeln!(out, "t{i} = {t}");
    }
    for w in &r.width {
        let _ = writeln!(
            out,
            "width{} = {}  (scanned n + a <= {}, zero above {})",
            w.i, w.value, w.scan_top, w.guard_band.0
        );
    }
    let _ = writeln!(out, "h0 = {}", r.h0);
    let _ = writeln!(out, "reg_from_t = {}", r.reg_from_t);
    if r.h0_acyclic {
        let _ = writeln!(out, "note: H0-acyclic");
    }
}

fn suite_config(a: &VerifyArgs) -> Result<(SuiteConfig, Option<PathBuf>), Error> {
    let file: ConfigFile = match &a.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::Parse {
                line: 0,
                column: 0,
                message: format!("cannot read {}: {e}", path.display()),
            })?;
            toml::from_str(&text).map_err(|e| {
                let (line, column) = e
                    .span()
                    .map(|s| {
                        let before = &text[..s.start];
                        let line = before.matches('\n').count() + 1;
                        (line, s.start - before.rfind('\n').map_or(0, |i| i + 1) + 1)
                    })
                    .unwrap_or((0, 0));
                Error::Parse {
                    line,
                    column,
                    message: e.message().to_string(),
                }
            })?
        }
        None => ConfigFile::default(),
    };
    let mut cfg = SuiteConfig::default();
    let primes = if a.primes.is_empty() { file.prime.clone() } else { Some(a.primes.clone()) };
    if let Some(p) = primes {
        cfg.primes = p;
    }
    cfg.truncation = a.truncation.or(file.truncation).unwrap_or(cfg.truncation);
    cfg.max_truncation = a.max_truncation.or(file.max_truncation).unwrap_or(cfg.max_truncation).max(cfg.truncation);
    cfg.i_max = a.imax.or(file.imax).unwrap_or(cfg.i_max);
    cfg.a_max = a.amax.or(file.amax);
    cfg.seed = a.seed.or(file.seed).unwrap_or(cfg.seed);
    let families = if a.families.is_empty() { file.family.clone() } else { Some(a.families.clone()) };
    if let Some(fams) = families {
        cfg.families = fams.iter().map(|s| s.parse::<FamilySpec>()).collect::<Result<_, _>>()?;
        cfg.random = 0;
    }
    cfg.random = a.random.or(file.random).unwrap_or(cfg.random);
    cfg.ses_random = file.ses_random.unwrap_or(cfg.ses_random);
    if let Some(c) = a.checks.as_ref().or(file.checks.as_ref()) {
        cfg.checks = CheckGroup::parse_list(c).map_err(|_| Error::Parse {
            line: 0,
            column: 0,
            message: format!("unknown check group in `{c}`"),
        })?;
    }
    for &p in &cfg.primes {
        PrimeField::new(p)?;
    }
    Ok((cfg, a.out.clone().or(file.out)))
}

fn verify(a: VerifyArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Error> {
    let (cfg, path) = suite_config(&a)?;
    let report = run_suite(&cfg)?;
    let ndjson = report.to_ndjson();
    match &path {
        Some(p) => std::fs::write(p, &ndjson).map_err(|e| Error::Shape(format!("cannot write {}: {e}", p.display())))?,
        None => {
            let _ = out.write_all(ndjson.as_bytes());
        }
    }
    // keep standard output pure NDJSON when the report goes there
    let summary_sink: &mut dyn Write = if path.is_some() { out } else { err };
    if cfg.primes.len() > 1 {
        write_prime_table(&report, &cfg, summary_sink);
    }
    for f in report.failures() {
        let _ = writeln!(summary_sink, "FAIL {} {} p={:?}: {}", f.check, f.instance, f.prime, f.reason.as_deref().unwrap_or(""));
    }
    let _ = writeln!(summary_sink, "{}", report.summary());
    let window_skips = report
        .records
        .iter()
        .any(|r| r.verdict == Verdict::Skipped && r.reason.as_deref().is_some_and(|s| s.starts_with("out of window")));
    Ok(if report.summary().failed > 0 {
        EXIT_FAIL
    } else if window_skips {
        EXIT_WINDOW
    } else {
        EXIT_OK
    })
}

/// Per-prime pass/fail/skip counts for each check.
fn write_prime_table(report: &SuiteReport, cfg: &SuiteConfig, out: &mut dyn Write) {
    let mut checks: Vec<&str> = Vec::new();
    for r in &report.records {
        if r.prime.is_some() && !checks.contains(&r.check.as_str()) {
            checks.push(&r.check);
        }
    }
    let _ = write!(out, "{:<20}", "check");
    for p in &cfg.primes {
        let _ = write!(out, " {:>18}", format!("p={p} ok/fail/skip"));
    }
    let _ = writeln!(out);
    for c in checks {
        let _ = write!(out, "{c:<20}");
        for &p in &cfg.primes {
            let mut n = [0usize; 3];
            for r in report.records.iter().filter(|r| r.check == c && r.prime == Some(p)) {
                n[r.verdict as usize] += 1;
            }
            let _ = write!(out, " {:>18}", format!("{}/{}/{}", n[0], n[1], n[2]));
        }
        let _ = writeln!(out);
    }
    let disagree = report.of_check("prime_agreement").filter(|r| r.verdict == Verdict::Fail).count();
    let _ = writeln!(out, "instances with prime-dependent verdicts: {disagree}");
}

fn dump(a: DumpArgs, out: &mut dyn Write) -> Result<i32, Error> {
    let spec: FamilySpec = a.family.parse()?;
    let field = PrimeField::new(a.prime)?;
    let inst = OracleInstance::build(field, &spec, a.truncation)?;
    let map = inst
        .presentation
        .ok_or_else(|| Error::InvalidFamily(format!("{spec} has no stored presentation")))?;
    let file = PresentationFile {
        truncation: a.truncation,
        map,
    };
    let _ = out.write_all(file.emit().as_bytes());
    Ok(EXIT_OK)
}
