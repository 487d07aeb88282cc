//! Scans of the polynomial families t = d·i² − 1, d ∈ {2, 3, 4, 6}.
//!
//! Each family comes with a sign-variant modulus polynomial p(x); the claim
//! under test is (P_n / p(P_b)) = −1 for every n = 1 + 840w, with b taken
//! from the t = 2 decomposition of n. Results are evidence, not proofs.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::jacobi;
use crate::descent::{decompose, jacobi_of_index, PRIMARY_MODULUS};
use crate::error::{Error, Result};
use crate::pell::{alpha_power_exact, EquationParams};
use crate::poly::IntPoly;

pub const FAMILY_DS: [u64; 4] = [2, 3, 4, 6];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolySign {
    Plus,
    Minus,
}

impl PolySign {
    fn factor(self) -> i64 {
        match self {
            PolySign::Plus => 1,
            PolySign::Minus => -1,
        }
    }
}

impl fmt::Display for PolySign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PolySign::Plus => "plus",
            PolySign::Minus => "minus",
        })
    }
}

impl FromStr for PolySign {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plus" | "+" => Ok(PolySign::Plus),
            "minus" | "-" => Ok(PolySign::Minus),
            _ => Err(Error::Config(format!("unknown sign {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FamilySpec {
    pub d: u64,
    pub i: u64,
    pub t: u64,
    pub sign: PolySign,
    pub poly: IntPoly,
}

impl FamilySpec {
    pub fn new(d: u64, i: u64, sign: PolySign) -> Result<Self> {
        let poly = family_poly(d, i, sign)?;
        let t = d
            .checked_mul(i)
            .and_then(|x| x.checked_mul(i))
            .and_then(|x| x.checked_sub(1))
            .filter(|&t| t >= 1)
            .ok_or_else(|| Error::Config(format!("t = {d}·{i}² − 1 is out of range")))?;
        Ok(Self { d, i, t, sign, poly })
    }
}

/// The modulus polynomial for row d of the family table.
pub fn family_poly(d: u64, i: u64, sign: PolySign) -> Result<IntPoly> {
    if i == 0 {
        return Err(Error::Config("family index i must be at least 1".into()));
    }
    let i = i64::try_from(i).map_err(|_| Error::Config("family index too large".into()))?;
    let s = sign.factor();
    Ok(match d {
        2 => IntPoly::quadratic(8 * i * i, s * 4 * i, -1),
        3 => IntPoly::linear(2 * i, s),
        4 => IntPoly::linear(4 * i, s),
        6 => IntPoly::quadratic(24 * i * i, s * 12 * i, 1),
        _ => return Err(Error::Config(format!("d must be one of 2, 3, 4, 6; got {d}"))),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanEntry {
    pub i: u64,
    pub t: u64,
    pub w: i64,
    pub n: i64,
    pub b: u64,
    #[serde(rename = "N", with = "crate::bigfmt")]
    pub modulus: BigInt,
    pub value: i8,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkippedEntry {
    pub i: u64,
    pub w: i64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanReport {
    pub d: u64,
    pub sign: PolySign,
    pub polys: Vec<String>,
    pub i_range: Vec<u64>,
    pub w_range: Vec<i64>,
    pub tested: Vec<ScanEntry>,
    pub exceptions: Vec<ScanEntry>,
    pub zero_symbols: Vec<ScanEntry>,
    pub skipped: Vec<SkippedEntry>,
}

impl ScanReport {
    pub fn all_minus_one(&self) -> bool {
        self.exceptions.is_empty() && self.skipped.is_empty()
    }
}

enum Outcome {
    Tested(ScanEntry),
    Skipped(SkippedEntry),
}

fn scan_one(family: &FamilySpec, w: i64) -> Result<Outcome> {
    let n = 1 + PRIMARY_MODULUS * w;
    let b = decompose(n)?.b;
    let params = EquationParams::new(family.t)?;
    let pb = alpha_power_exact(params, b as i64).p;
    let modulus = family.poly.eval(&pb);
    match jacobi_of_index(params, n, &modulus) {
        Ok(value) => Ok(Outcome::Tested(ScanEntry { i: family.i, t: family.t, w, n, b, modulus, value })),
        Err(Error::InvalidModulus { got, .. }) => Ok(Outcome::Skipped(SkippedEntry {
            i: family.i,
            w,
            reason: format!("modulus {got} is even or below 3"),
        })),
        Err(e) => Err(e),
    }
}

/// Evaluates the family claim over every (i, w) pair, w ≠ 0.
///
/// Counterexamples land in `exceptions`; the scan never stops early.
pub fn scan_family(d: u64, i_range: &[u64], w_range: &[i64], sign: PolySign) -> Result<ScanReport> {
    let families = i_range
        .iter()
        .map(|&i| FamilySpec::new(d, i, sign))
        .collect::<Result<Vec<_>>>()?;
    let ws: Vec<i64> = w_range.iter().copied().filter(|&w| w != 0).collect();
    let jobs: Vec<(&FamilySpec, i64)> =
        families.iter().flat_map(|f| ws.iter().map(move |&w| (f, w))).collect();
    let outcomes = jobs
        .par_iter()
        .map(|&(f, w)| scan_one(f, w))
        .collect::<Result<Vec<_>>>()?;

    let mut tested = Vec::new();
    let mut skipped = Vec::new();
    for o in outcomes {
        match o {
            Outcome::Tested(e) => tested.push(e),
            Outcome::Skipped(s) => skipped.push(s),
        }
    }
    let exceptions = tested.iter().filter(|e| e.value != -1).cloned().collect();
    let zero_symbols = tested.iter().filter(|e| e.value == 0).cloned().collect();
    Ok(ScanReport {
        d,
        sign,
        polys: families.iter().map(|f| f.poly.to_string()).collect(),
        i_range: i_range.to_vec(),
        w_range: w_range.to_vec(),
        tested,
        exceptions,
        zero_symbols,
        skipped,
    })
}

/// One instance of the d = 3 conjecture with p(x) = 2ix + 1, i odd.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Conjecture31Instance {
    pub i: u64,
    pub t: u64,
    pub w: i64,
    pub n: i64,
    pub b: u64,
    #[serde(rename = "N", with = "crate::bigfmt")]
    pub modulus: BigInt,
    pub sign_factor: i8,
    /// (P_n / 2iP_b + 1)
    pub lhs: i8,
    /// (−1)^((i−1)/2) · (2tQ_b + 1 / 2iP_b + 1)
    pub middle: i8,
    pub holds: bool,
}

pub fn verify_conjecture31(i: u64, w: i64) -> Result<Conjecture31Instance> {
    if i % 2 == 0 {
        return Err(Error::Config(format!("the conjecture needs odd i, got {i}")));
    }
    let family = FamilySpec::new(3, i, PolySign::Plus)?;
    let params = EquationParams::new(family.t)?;
    let n = 1 + PRIMARY_MODULUS * w;
    let b = decompose(n)?.b;
    let ab = alpha_power_exact(params, b as i64);
    let modulus = family.poly.eval(&ab.p);
    let lhs = jacobi_of_index(params, n, &modulus)?;
    let sign_factor: i8 = if ((i - 1) / 2) % 2 == 0 { 1 } else { -1 };
    let numerator = BigInt::from(2 * family.t) * &ab.q + 1u32;
    let middle = sign_factor * jacobi(&numerator, &modulus)?;
    Ok(Conjecture31Instance {
        i,
        t: family.t,
        w,
        n,
        b,
        modulus,
        sign_factor,
        lhs,
        middle,
        holds: lhs == -1 && middle == -1,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConjectureReport {
    pub status: String,
    pub i_range: Vec<u64>,
    pub w_range: Vec<i64>,
    pub instances: Vec<Conjecture31Instance>,
    pub exceptions: Vec<Conjecture31Instance>,
}

pub const CONJECTURE_STATUS: &str =
    "open conjecture: numerical evidence over the tested range only, not a proof";

pub fn scan_conjecture31(i_range: &[u64], w_range: &[i64]) -> Result<ConjectureReport> {
    let jobs: Vec<(u64, i64)> = i_range
        .iter()
        .flat_map(|&i| w_range.iter().filter(|&&w| w != 0).map(move |&w| (i, w)))
        .collect();
    let instances = jobs
        .par_iter()
        .map(|&(i, w)| verify_conjecture31(i, w))
        .collect::<Result<Vec<_>>>()?;
    let exceptions = instances.iter().filter(|x| !x.holds).cloned().collect();
    Ok(ConjectureReport {
        status: CONJECTURE_STATUS.into(),
        i_range: i_range.to_vec(),
        w_range: w_range.to_vec(),
        instances,
        exceptions,
    })
}
