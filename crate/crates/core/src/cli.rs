//! The `qsieve` command line.
//!
//! Every subcommand writes one JSON report. The report body is a pure
//! function of the flags; wall-clock data lives under `"metadata"` so two
//! runs can be compared byte for byte once that key is dropped.
//!
//! Exit codes: 0 when the run finished with the expected outcome, 1 when it
//! finished with anomalies (counterexamples, unconverged sieve, failed
//! `--expect`), 2 on usage or configuration errors.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::conjecture::{scan_conjecture31, scan_family, PolySign};
use crate::descent::{probe_certificate, prove_t2, verify_chain_t2, PRIMARY_MODULUS, VERDICT_ONLY_TRIVIAL};
use crate::error::{Error, Result};
use crate::pell::EquationParams;
use crate::poly::IntPoly;
use crate::reduction::{brute_force_index, brute_force_quartic, reduce_equation};
use crate::sieve::{escalate_over, FactorBaseCache, SieveReport, DEFAULT_PRIMARY_MODULUS, DEFAULT_PRIME_BOUND};

pub const SCHEMA_VERSION: u32 = 1;
pub const CACHE_ENV: &str = "QS_CACHE_DIR";

pub const EXIT_OK: i32 = 0;
pub const EXIT_ANOMALY: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "qsieve", version, about = "Sieve and descent tools for (t+1)X^4 - tY^2 = 1")]
pub struct Cli {
    /// Factor-base cache directory (default: $QS_CACHE_DIR, else <tmp>/qsieve-cache).
    #[arg(long, global = true, value_name = "DIR")]
    pub cache_dir: Option<PathBuf>,

    /// Disable the factor-base cache.
    #[arg(long, global = true)]
    pub no_cache: bool,

    /// Worker threads (default: available parallelism).
    #[arg(long, global = true, value_name = "N")]
    pub jobs: Option<usize>,

    /// Write the report here instead of standard output.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,

    /// Require a top-level report field to equal a JSON value, e.g.
    /// `--expect 'survivors_mod_m=[1,3,837,839]'`. Repeatable.
    #[arg(long, global = true, value_name = "KEY=JSON")]
    pub expect: Vec<Expectation>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a factor base and sieve residue classes of odd indices.
    Sieve(SieveArgs),
    /// Certify that P_n is a square only for n in {±1, ±3}, |n| <= n-bound (t = 2).
    ProveT2 {
        #[arg(long)]
        n_bound: u64,
    },
    /// Descent certificate for one index n ≡ ±1 (mod 840).
    Descent {
        #[arg(long)]
        t: u64,
        #[arg(long, allow_hyphen_values = true)]
        n: i64,
        /// Modulus polynomial: `linear:c1,c0` or `quad:c2,c1,c0`.
        #[arg(long, allow_hyphen_values = true)]
        poly: Option<IntPoly>,
    },
    /// Jacobi scan of one family t = d·i² − 1.
    Scan {
        #[arg(long)]
        d: u64,
        #[arg(long, allow_hyphen_values = true)]
        i: IndexRange,
        #[arg(long, allow_hyphen_values = true)]
        w: IndexRange,
        #[arg(long, default_value = "both")]
        sign: SignChoice,
    },
    /// Check instances of the d = 3 conjecture (odd i).
    Conjecture31 {
        #[arg(long, allow_hyphen_values = true)]
        i: IndexRange,
        #[arg(long, allow_hyphen_values = true)]
        w: IndexRange,
    },
    /// Reduce Ax^4 − By^2 = 1 to its canonical parameter t.
    Reduce {
        #[arg(long = "A", id = "A")]
        a: u64,
        #[arg(long = "B", id = "B")]
        b: u64,
    },
    /// Exhaustive search, either over indices or over x.
    Brute(BruteArgs),
}

#[derive(Debug, Args)]
pub struct SieveArgs {
    #[arg(long)]
    pub t: u64,
    #[arg(long, default_value_t = DEFAULT_PRIMARY_MODULUS)]
    pub m: u64,
    /// Fixed power of 2 in M.
    #[arg(long, conflicts_with = "max_r")]
    pub r: Option<u32>,
    /// Escalate the power of 2 from 0 up to this value.
    #[arg(long)]
    pub max_r: Option<u32>,
    /// Fixed power of 3 in M.
    #[arg(long, conflicts_with = "max_s")]
    pub s: Option<u32>,
    /// Escalate the power of 3 from 0 up to this value.
    #[arg(long)]
    pub max_s: Option<u32>,
    #[arg(long, default_value_t = DEFAULT_PRIME_BOUND)]
    pub prime_bound: u64,
}

#[derive(Debug, Args)]
#[command(group = clap::ArgGroup::new("index_mode").args(["t", "n_bound"]).multiple(true))]
#[command(group = clap::ArgGroup::new("quartic_mode").args(["A", "B", "x_bound"]).multiple(true).conflicts_with("index_mode"))]
pub struct BruteArgs {
    #[arg(long, requires = "n_bound")]
    pub t: Option<u64>,
    #[arg(long, requires = "t")]
    pub n_bound: Option<u64>,
    #[arg(long = "A", id = "A", requires_all = ["B", "x_bound"])]
    pub a: Option<u64>,
    #[arg(long = "B", id = "B", requires_all = ["A", "x_bound"])]
    pub b: Option<u64>,
    #[arg(long, requires_all = ["A", "B"])]
    pub x_bound: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignChoice {
    One(PolySign),
    Both,
}

impl SignChoice {
    fn signs(self) -> Vec<PolySign> {
        match self {
            SignChoice::One(s) => vec![s],
            SignChoice::Both => vec![PolySign::Plus, PolySign::Minus],
        }
    }
}

impl FromStr for SignChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "both" {
            Ok(SignChoice::Both)
        } else {
            s.parse().map(SignChoice::One)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Any,
    Odd,
    Even,
}

/// Inclusive integer range `a..b`, optionally restricted with `:odd` or
/// `:even`. A bare integer is the one-element range.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexRange {
    pub lo: i64,
    pub hi: i64,
    pub parity: Parity,
}

impl IndexRange {
    pub fn values(&self) -> Vec<i64> {
        (self.lo..=self.hi)
            .filter(|v| match self.parity {
                Parity::Any => true,
                Parity::Odd => v % 2 != 0,
                Parity::Even => v % 2 == 0,
            })
            .collect()
    }

    fn positive_values(&self, flag: &str) -> Result<Vec<u64>> {
        self.values()
            .into_iter()
            .map(|v| u64::try_from(v).ok().filter(|&v| v > 0))
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| Error::Config(format!("--{flag} needs positive values")))
    }
}

impl FromStr for IndexRange {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("bad range {s:?}; expected a..b[:odd|:even]"));
        let (body, parity) = match s.rsplit_once(':') {
            Some((body, "odd")) => (body, Parity::Odd),
            Some((body, "even")) => (body, Parity::Even),
            Some(_) => return Err(bad()),
            None => (s, Parity::Any),
        };
        let (lo, hi) = match body.split_once("..") {
            Some((lo, hi)) => (lo.trim().parse().map_err(|_| bad())?, hi.trim().parse().map_err(|_| bad())?),
            None => {
                let v = body.trim().parse().map_err(|_| bad())?;
                (v, v)
            }
        };
        if lo > hi {
            return Err(bad());
        }
        Ok(IndexRange { lo, hi, parity })
    }
}

/// `KEY=JSON`; a value that is not valid JSON is compared as a string.
#[derive(Debug, Clone, PartialEq)]
pub struct Expectation {
    pub key: String,
    pub value: Value,
}

impl FromStr for Expectation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (key, raw) = s
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("--expect needs KEY=JSON, got {s:?}")))?;
        let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
        Ok(Expectation { key: key.to_string(), value })
    }
}

impl Expectation {
    fn check(&self, body: &Map<String, Value>) -> Option<String> {
        match body.get(&self.key) {
            Some(v) if *v == self.value => None,
            Some(v) => Some(format!("expected {} = {}, got {}", self.key, self.value, v)),
            None => Some(format!("expected {} = {}, but the report has no such field", self.key, self.value)),
        }
    }
}

/// A finished report body and whether its outcome was the expected one.
struct Outcome {
    kind: &'static str,
    body: Value,
    ok: bool,
}

fn outcome<T: Serialize>(kind: &'static str, body: &T, ok: bool) -> Result<Outcome> {
    let body = serde_json::to_value(body).map_err(|e| Error::Io(e.to_string()))?;
    Ok(Outcome { kind, body, ok })
}

fn cache_from(cli: &Cli) -> Option<FactorBaseCache> {
    if cli.no_cache {
        return None;
    }
    let dir = cli
        .cache_dir
        .clone()
        .or_else(|| std::env::var_os(CACHE_ENV).filter(|v| !v.is_empty()).map(PathBuf::from))
        .unwrap_or_else(|| std::env::temp_dir().join("qsieve-cache"));
    Some(FactorBaseCache::new(dir))
}

fn run_sieve_command(args: &SieveArgs, cache: Option<&FactorBaseCache>) -> Result<Outcome> {
    let r_values = match (args.r, args.max_r) {
        (Some(r), _) => r..=r,
        (None, Some(max)) => 0..=max,
        (None, None) => 0..=4,
    };
    let s_values = match (args.s, args.max_s) {
        (Some(s), _) => s..=s,
        (None, Some(max)) => 0..=max,
        (None, None) => 0..=3,
    };
    let escalation = escalate_over(args.t, args.m, r_values, s_values, args.prime_bound, cache)?;
    let report: SieveReport = escalation.into();
    let ok = report.converged;
    outcome("sieve", &report, ok)
}

fn run_descent_command(t: u64, n: i64, poly: Option<&IntPoly>) -> Result<Outcome> {
    let params = EquationParams::new(t)?;
    let (index, via_symmetry) = match n.rem_euclid(PRIMARY_MODULUS) {
        1 => (n, false),
        r if r == PRIMARY_MODULUS - 1 => (-n, true),
        _ => {
            return Err(Error::InadmissibleIndex { n, reason: "descent needs n ≡ ±1 (mod 840)" });
        }
    };
    let certificate = match (t, poly) {
        (2, None) => verify_chain_t2(index)?,
        (_, Some(p)) => probe_certificate(params, index, p)?,
        (_, None) => probe_certificate(params, index, &IntPoly::linear(2, 1))?,
    };
    let ok = certificate.valid;
    let body = json!({
        "n": n,
        "via_symmetry": via_symmetry,
        "certificate": certificate,
    });
    outcome("descent", &body, ok)
}

fn run_scan_command(d: u64, i: &IndexRange, w: &IndexRange, sign: SignChoice) -> Result<Outcome> {
    let is = i.positive_values("i")?;
    let ws = w.values();
    let reports = sign
        .signs()
        .into_iter()
        .map(|s| scan_family(d, &is, &ws, s))
        .collect::<Result<Vec<_>>>()?;
    let exceptions: usize = reports.iter().map(|r| r.exceptions.len()).sum();
    let skipped: usize = reports.iter().map(|r| r.skipped.len()).sum();
    let tested: usize = reports.iter().map(|r| r.tested.len()).sum();
    let ok = reports.iter().all(|r| r.all_minus_one());
    let body = json!({
        "d": d,
        "tested_total": tested,
        "exceptions_total": exceptions,
        "skipped_total": skipped,
        "reports": reports,
    });
    outcome("scan", &body, ok)
}

fn run_conjecture_command(i: &IndexRange, w: &IndexRange) -> Result<Outcome> {
    let is = i.positive_values("i")?;
    if let Some(even) = is.iter().find(|&&v| v % 2 == 0) {
        return Err(Error::Config(format!("--i must contain only odd values; got {even}")));
    }
    let report = scan_conjecture31(&is, &w.values())?;
    let ok = report.exceptions.is_empty();
    outcome("conjecture31", &report, ok)
}

fn run_brute_command(args: &BruteArgs) -> Result<Outcome> {
    match (args.t, args.n_bound, args.a, args.b, args.x_bound) {
        (Some(t), Some(n_bound), None, None, None) => {
            let params = EquationParams::new(t)?;
            let squares = brute_force_index(params, n_bound);
            let body = json!({ "mode": "index", "t": t, "n_bound": n_bound, "squares": squares });
            outcome("brute", &body, true)
        }
        (None, None, Some(a), Some(b), Some(x_bound)) => {
            let solutions: Vec<Value> = brute_force_quartic(a, b, x_bound)
                .into_iter()
                .map(|(x, y)| json!({ "x": x.to_string(), "y": y.to_string() }))
                .collect();
            let body = json!({ "mode": "quartic", "A": a, "B": b, "x_bound": x_bound, "solutions": solutions });
            outcome("brute", &body, true)
        }
        _ => Err(Error::Config("brute needs either --t and --n-bound, or --A, --B and --x-bound".into())),
    }
}

fn dispatch(cli: &Cli) -> Result<Outcome> {
    let cache = cache_from(cli);
    match &cli.command {
        Command::Sieve(args) => run_sieve_command(args, cache.as_ref()),
        Command::ProveT2 { n_bound } => {
            let report = prove_t2(*n_bound, cache.as_ref())?;
            let ok = report.verdict == VERDICT_ONLY_TRIVIAL;
            outcome("prove-t2", &report, ok)
        }
        Command::Descent { t, n, poly } => run_descent_command(*t, *n, poly.as_ref()),
        Command::Scan { d, i, w, sign } => run_scan_command(*d, i, w, *sign),
        Command::Conjecture31 { i, w } => run_conjecture_command(i, w),
        Command::Reduce { a, b } => {
            let report = reduce_equation(*a, *b);
            let ok = !report.degenerate_flag;
            outcome("reduce", &report, ok)
        }
        Command::Brute(args) => run_brute_command(args),
    }
}

/// Adds `schema` and `kind` to the body; `metadata` is attached separately.
fn envelope(outcome: &Outcome) -> Map<String, Value> {
    let mut map = match &outcome.body {
        Value::Object(m) => m.clone(),
        other => {
            let mut m = Map::new();
            m.insert("result".into(), other.clone());
            m
        }
    };
    map.insert("schema".into(), json!(SCHEMA_VERSION));
    map.insert("kind".into(), json!(outcome.kind));
    map
}

fn write_report(path: Option<&Path>, report: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(report).map_err(|e| Error::Io(e.to_string()))?;
    text.push('\n');
    match path {
        Some(p) => {
            if let Some(parent) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(parent)?;
            }
            fs::write(p, text)?;
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn execute(cli: &Cli) -> Result<i32> {
    let started = Instant::now();
    let outcome = match cli.jobs {
        Some(0) => return Err(Error::Config("--jobs must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(e.to_string()))?
            .install(|| dispatch(cli))?,
        None => dispatch(cli)?,
    };

    let mut body = envelope(&outcome);
    let drift: Vec<String> = cli.expect.iter().filter_map(|e| e.check(&body)).collect();
    let unix_seconds = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    body.insert(
        "metadata".into(),
        json!({
            "tool": "qsieve",
            "version": env!("CARGO_PKG_VERSION"),
            "generated_unix": unix_seconds,
            "elapsed_ms": started.elapsed().as_millis() as u64,
        }),
    );
    write_report(cli.out.as_deref(), &Value::Object(body))?;

    for line in &drift {
        eprintln!("qsieve: {line}");
    }
    if !outcome.ok {
        eprintln!("qsieve: {} finished with anomalies", outcome.kind);
    }
    Ok(if outcome.ok && drift.is_empty() { EXIT_OK } else { EXIT_ANOMALY })
}

/// Parses `args` (including the program name) and runs the subcommand.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("qsieve: {e}");
            EXIT_USAGE
        }
    }
}

/// Removes the `metadata` key, leaving the deterministic part of a report.
pub fn report_body(report: &Value) -> Value {
    let mut v = report.clone();
    if let Value::Object(m) = &mut v {
        m.remove("metadata");
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        let r: IndexRange = "1..6:odd".parse().unwrap();
        assert_eq!(r.values(), vec![1, 3, 5]);
        let r: IndexRange = "-3..3".parse().unwrap();
        assert_eq!(r.values(), vec![-3, -2, -1, 0, 1, 2, 3]);
        let r: IndexRange = "-4..4:even".parse().unwrap();
        assert_eq!(r.values(), vec![-4, -2, 0, 2, 4]);
        let r: IndexRange = "7".parse().unwrap();
        assert_eq!(r.values(), vec![7]);
        assert!("5..1".parse::<IndexRange>().is_err());
        assert!("1..5:prime".parse::<IndexRange>().is_err());
        assert!("a..b".parse::<IndexRange>().is_err());
    }

    #[test]
    fn expectations() {
        let e: Expectation = "survivors_mod_m=[1,839]".parse().unwrap();
        assert_eq!(e.value, json!([1, 839]));
        let e: Expectation = "verdict=only".parse().unwrap();
        assert_eq!(e.value, json!("only"));
        assert!("novalue".parse::<Expectation>().is_err());
        let body: Map<String, Value> = serde_json::from_str(r#"{"verdict":"only","x":1}"#).unwrap();
        assert!(e.check(&body).is_none());
        let e: Expectation = "x=2".parse().unwrap();
        assert!(e.check(&body).is_some());
    }

    #[test]
    fn parses_subcommands() {
        let cli = Cli::try_parse_from(["qsieve", "scan", "--d", "3", "--i", "1..5:odd", "--w", "-25..25"]).unwrap();
        match cli.command {
            Command::Scan { d, i, w, sign } => {
                assert_eq!(d, 3);
                assert_eq!(i.values(), vec![1, 3, 5]);
                assert_eq!(w.lo, -25);
                assert_eq!(sign, SignChoice::Both);
            }
            other => panic!("unexpected {other:?}"),
        }
        let cli = Cli::try_parse_from(["qsieve", "descent", "--t", "2", "--n", "-839", "--poly", "linear:2,1"]).unwrap();
        assert!(matches!(cli.command, Command::Descent { n: -839, poly: Some(_), .. }));
        assert!(Cli::try_parse_from(["qsieve", "sieve", "--t", "2", "--r", "1", "--max-r", "3"]).is_err());
        assert!(Cli::try_parse_from(["qsieve", "brute", "--t", "2", "--n-bound", "9", "--A", "3"]).is_err());
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(run(["qsieve", "frobnicate"]), EXIT_USAGE);
        assert_eq!(run(["qsieve", "scan", "--d", "5", "--i", "1", "--w", "1", "--no-cache"]), EXIT_USAGE);
        assert_eq!(run(["qsieve", "conjecture31", "--i", "1..2", "--w", "1"]), EXIT_USAGE);
        assert_eq!(run(["qsieve", "descent", "--t", "2", "--n", "5"]), EXIT_USAGE);
    }
}
