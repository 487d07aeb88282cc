//! Factor bases and residue-class elimination.
//!
//! A prime p belongs to the factor base for working modulus M when
//! α^M ≡ 1 (mod p). Then P_{j+M} ≡ P_j (mod p) for every j, so a Legendre
//! symbol (P_j / p) = −1 rules out squares in the whole class j + MZ.

use std::collections::BTreeMap;
use std::fs;
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::jacobi_u64;
use crate::error::{Error, Result};
use crate::pell::{EquationParams, WordModulus};

pub const DEFAULT_PRIMARY_MODULUS: u64 = 840;
pub const DEFAULT_PRIME_BOUND: u64 = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SieveConfig {
    pub t: u64,
    pub m: u64,
    pub r: u32,
    pub s: u32,
    pub prime_bound: u64,
}

impl SieveConfig {
    pub fn new(t: u64, m: u64, r: u32, s: u32, prime_bound: u64) -> Self {
        Self { t, m, r, s, prime_bound }
    }

    /// M = 2^r · 3^s · m.
    pub fn working_modulus(&self) -> Result<u64> {
        2u64.checked_pow(self.r)
            .and_then(|x| x.checked_mul(3u64.checked_pow(self.s)?))
            .and_then(|x| x.checked_mul(self.m))
            .ok_or_else(|| Error::Config(format!("working modulus overflows for {self:?}")))
    }

    fn validate(&self) -> Result<EquationParams> {
        if self.m == 0 || self.m % 2 == 1 {
            return Err(Error::Config(format!("primary modulus must be positive and even, got {}", self.m)));
        }
        if self.prime_bound < 3 {
            return Err(Error::Config(format!("prime bound must be at least 3, got {}", self.prime_bound)));
        }
        EquationParams::new(self.t)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactorBase {
    pub t: u64,
    #[serde(rename = "M")]
    pub modulus: u64,
    pub prime_bound: u64,
    pub primes: Vec<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub p: u64,
    pub symbol: i8,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SieveOutcome {
    #[serde(rename = "survivors_mod_M")]
    pub survivors_mod_working: Vec<u64>,
    pub survivors_mod_m: Vec<u64>,
    pub witnesses: BTreeMap<u64, Witness>,
}

impl SieveOutcome {
    /// j survives iff M − j survives.
    pub fn is_symmetric(&self, modulus: u64) -> bool {
        self.survivors_mod_working
            .iter()
            .all(|j| self.survivors_mod_working.binary_search(&(modulus - j)).is_ok())
    }
}

/// Odd primes up to `bound`, by the sieve of Eratosthenes.
pub fn odd_primes_up_to(bound: u64) -> Vec<u64> {
    if bound < 3 {
        return Vec::new();
    }
    let n = bound as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if composite[i] {
            continue;
        }
        if i > 2 {
            out.push(i as u64);
        }
        let mut j = i * i;
        while j <= n {
            composite[j] = true;
            j += i;
        }
    }
    out
}

fn is_degenerate(t: u64, p: u64) -> bool {
    // p | 2t(t+1)
    t % p == 0 || (t + 1) % p == 0
}

/// Smallest L > 0 with α^L ≡ 1 (mod p). L is always even.
pub fn sequence_period(params: EquationParams, p: u64) -> Result<u64> {
    let t = params.t();
    if p < 3 || p % 2 == 0 || is_degenerate(t, p) {
        return Err(Error::DegeneratePrime { t, p });
    }
    let ctx = WordModulus::new(params, p);
    let disc = jacobi_u64(((t % p) * ((t + 1) % p)) % p, p)?;
    // α² has norm 1, so its order divides p − (D/p).
    let mut order = 2 * if disc == 1 { p - 1 } else { p + 1 };
    if ctx.power(order as i64) != ctx.identity() {
        return Err(Error::Config(format!("{p} is not prime")));
    }
    for q in prime_factors(order) {
        while order % q == 0 && ctx.power((order / q) as i64) == ctx.identity() {
            order /= q;
        }
    }
    Ok(order)
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Every odd prime p ≤ prime_bound with p ∤ 2t(t+1)M and α^M ≡ 1 (mod p).
pub fn build_factor_base(config: &SieveConfig) -> Result<FactorBase> {
    let params = config.validate()?;
    let modulus = config.working_modulus()?;
    let primes = odd_primes_up_to(config.prime_bound)
        .into_par_iter()
        .filter(|&p| {
            if is_degenerate(params.t(), p) || modulus % p == 0 {
                return false;
            }
            let ctx = WordModulus::new(params, p);
            ctx.power(modulus as i64) == ctx.identity()
        })
        .collect();
    Ok(FactorBase { t: params.t(), modulus, prime_bound: config.prime_bound, primes })
}

/// Legendre symbols (P_j / p) for odd j in [1, M), stepping j → j + 2.
fn forward_pass(params: EquationParams, p: u64, modulus: u64) -> Vec<bool> {
    let ctx = WordModulus::new(params, p);
    let step = ctx.power(2);
    let mut state = ctx.alpha();
    let mut eliminated = Vec::with_capacity((modulus / 2) as usize);
    for _ in (1..modulus).step_by(2) {
        let symbol = jacobi_u64(state.p, p).expect("factor-base primes are odd");
        eliminated.push(symbol == -1);
        state = ctx.mul(state, step);
    }
    eliminated
}

pub fn run_sieve(fb: &FactorBase, m: u64) -> Result<SieveOutcome> {
    if m == 0 || fb.modulus % m != 0 {
        return Err(Error::Config(format!("primary modulus {m} does not divide {}", fb.modulus)));
    }
    let params = EquationParams::new(fb.t)?;
    let passes: Vec<Vec<bool>> =
        fb.primes.par_iter().map(|&p| forward_pass(params, p, fb.modulus)).collect();

    let mut witnesses = BTreeMap::new();
    let mut survivors = Vec::new();
    for (idx, j) in (1..fb.modulus).step_by(2).enumerate() {
        match fb.primes.iter().zip(&passes).find(|(_, pass)| pass[idx]) {
            Some((&p, _)) => {
                witnesses.insert(j, Witness { p, symbol: -1 });
            }
            None => survivors.push(j),
        }
    }
    let mut reduced: Vec<u64> = survivors.iter().map(|j| j % m).collect();
    reduced.sort_unstable();
    reduced.dedup();
    let outcome =
        SieveOutcome { survivors_mod_working: survivors, survivors_mod_m: reduced, witnesses };
    assert!(outcome.is_symmetric(fb.modulus), "sieve survivors must be symmetric under j -> M - j");
    Ok(outcome)
}

/// On-disk factor-base cache keyed by (t, M, prime_bound).
#[derive(Debug, Clone)]
pub struct FactorBaseCache {
    dir: PathBuf,
}

impl FactorBaseCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path(&self, t: u64, modulus: u64, prime_bound: u64) -> PathBuf {
        self.dir.join(format!("fb-t{t}-M{modulus}-b{prime_bound}.json"))
    }

    pub fn load(&self, t: u64, modulus: u64, prime_bound: u64) -> Option<FactorBase> {
        let text = fs::read_to_string(self.path(t, modulus, prime_bound)).ok()?;
        let fb: FactorBase = serde_json::from_str(&text).ok()?;
        (fb.t == t && fb.modulus == modulus && fb.prime_bound == prime_bound).then_some(fb)
    }

    /// Writes to a temporary file in the cache directory, then renames.
    pub fn store(&self, fb: &FactorBase) -> Result<()> {
        fs::create_dir_all(&self.dir)?;
        let target = self.path(fb.t, fb.modulus, fb.prime_bound);
        let tmp = target.with_extension(format!("json.tmp.{}", std::process::id()));
        let body = serde_json::to_string(fb).map_err(|e| Error::Io(e.to_string()))?;
        fs::write(&tmp, body)?;
        fs::rename(&tmp, &target)?;
        Ok(())
    }
}

pub fn build_factor_base_cached(
    config: &SieveConfig,
    cache: Option<&FactorBaseCache>,
) -> Result<FactorBase> {
    let modulus = config.working_modulus()?;
    if let Some(fb) = cache.and_then(|c| c.load(config.t, modulus, config.prime_bound)) {
        return Ok(fb);
    }
    let fb = build_factor_base(config)?;
    if let Some(cache) = cache {
        // A failed cache write only costs speed.
        let _ = cache.store(&fb);
    }
    Ok(fb)
}

#[derive(Debug, Clone)]
pub struct Escalation {
    pub config: SieveConfig,
    pub factor_base: FactorBase,
    pub outcome: SieveOutcome,
    pub converged: bool,
}

/// Residues {±1, ±3} modulo m.
pub fn target_classes(m: u64) -> [u64; 4] {
    [1, 3, m - 3, m - 1]
}

/// Tries (r, s) in increasing order of M until the survivors modulo m lie in
/// {±1, ±3}. Without success, returns the attempt with the fewest survivors.
pub fn escalate(
    t: u64,
    m: u64,
    max_r: u32,
    max_s: u32,
    prime_bound: u64,
    cache: Option<&FactorBaseCache>,
) -> Result<Escalation> {
    escalate_over(t, m, 0..=max_r, 0..=max_s, prime_bound, cache)
}

/// [`escalate`] over explicit ranges of r and s; a fixed exponent is a
/// one-element range.
pub fn escalate_over(
    t: u64,
    m: u64,
    r_values: RangeInclusive<u32>,
    s_values: RangeInclusive<u32>,
    prime_bound: u64,
    cache: Option<&FactorBaseCache>,
) -> Result<Escalation> {
    let mut attempts: Vec<SieveConfig> = r_values
        .flat_map(|r| s_values.clone().map(move |s| SieveConfig::new(t, m, r, s, prime_bound)))
        .collect();
    for c in &attempts {
        c.working_modulus()?;
    }
    attempts.sort_by_key(|c| c.working_modulus().unwrap_or(u64::MAX));

    let targets = target_classes(m);
    let mut best: Option<Escalation> = None;
    for config in attempts {
        let factor_base = build_factor_base_cached(&config, cache)?;
        let outcome = run_sieve(&factor_base, m)?;
        let converged = outcome.survivors_mod_m.iter().all(|j| targets.contains(j));
        let attempt = Escalation { config, factor_base, outcome, converged };
        if converged {
            return Ok(attempt);
        }
        let better = best.as_ref().is_none_or(|b| {
            attempt.outcome.survivors_mod_m.len() < b.outcome.survivors_mod_m.len()
        });
        if better {
            best = Some(attempt);
        }
    }
    best.ok_or_else(|| Error::Config("no (r, s) attempts".into()))
}

/// Sieve report as written to disk.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SieveReport {
    pub t: u64,
    pub m: u64,
    pub r: u32,
    pub s: u32,
    #[serde(rename = "M")]
    pub modulus: u64,
    pub prime_bound: u64,
    pub factor_base: Vec<u64>,
    #[serde(rename = "survivors_mod_M")]
    pub survivors_mod_working: Vec<u64>,
    pub survivors_mod_m: Vec<u64>,
    pub witnesses: BTreeMap<u64, Witness>,
    pub converged: bool,
}

impl From<Escalation> for SieveReport {
    fn from(e: Escalation) -> Self {
        Self {
            t: e.config.t,
            m: e.config.m,
            r: e.config.r,
            s: e.config.s,
            modulus: e.factor_base.modulus,
            prime_bound: e.config.prime_bound,
            factor_base: e.factor_base.primes,
            survivors_mod_working: e.outcome.survivors_mod_working,
            survivors_mod_m: e.outcome.survivors_mod_m,
            witnesses: e.outcome.witnesses,
            converged: e.converged,
        }
    }
}
