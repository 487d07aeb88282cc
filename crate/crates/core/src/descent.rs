//! Jacobi-symbol descent for 3X⁴ − 2Y² = 1 (t = 2).
//!
//! Every index n ≡ 1 (mod 840), n ≠ 1, is written as n = 1 + a·b with
//! a ≡ −8 (mod 24) and b ∈ {1, 5, 7, 35}·3^c. With N = 2P_b + 1 the symbol
//! (P_n / N) evaluates to −1, so P_n is not a square. The classes −1 and ±3
//! are reduced to this one, and everything else is eliminated by the sieve.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{integer_sqrt, jacobi, jacobi_biguint, ord3};
use crate::error::{Error, Result};
use crate::pell::{alpha_power_exact, alpha_power_mod, alpha_power_residue, triple_index_factor, EquationParams};
use crate::poly::IntPoly;
use crate::sieve::{build_factor_base_cached, run_sieve, target_classes, Escalation, FactorBaseCache, SieveConfig, SieveReport};

pub const PRIMARY_MODULUS: i64 = 840;

/// Verdict string when every index outside {±1, ±3} is certified.
pub const VERDICT_ONLY_TRIVIAL: &str = "only n ∈ {±1, ±3}";

fn t2() -> EquationParams {
    EquationParams::new(2).expect("t = 2 is valid")
}

/// n − 1 = a·b with n = 1 + 840w.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OffsetDecomposition {
    pub n: i64,
    pub w: i64,
    pub c: u32,
    pub d: i64,
    pub a: i64,
    pub b: u64,
    /// a = 24·m_a − 8
    pub m_a: i64,
}

impl OffsetDecomposition {
    pub fn holds_invariants(&self) -> bool {
        let b = self.b as i128;
        let three_c = 3i128.pow(self.c);
        (self.a as i128) * b == 840 * self.w as i128
            && self.n as i128 == 1 + 840 * self.w as i128
            && matches!(self.d.rem_euclid(24), 8 | 16)
            && self.d % 3 != 0
            && self.a.rem_euclid(24) == 16
            && self.a == 24 * self.m_a - 8
            && b % 3 == 0
            && b % 4 == 1
            && [1, 5, 7, 35].iter().any(|u| u * three_c == b)
    }
}

pub fn decompose(n: i64) -> Result<OffsetDecomposition> {
    if n == 1 {
        return Err(Error::InadmissibleIndex { n, reason: "n = 1 is the trivial solution" });
    }
    if (n - 1).rem_euclid(PRIMARY_MODULUS) != 0 {
        return Err(Error::InadmissibleIndex { n, reason: "n must be 1 modulo 840" });
    }
    let too_big = Error::InadmissibleIndex { n, reason: "index too large for the decomposition" };
    let w = (n - 1) / PRIMARY_MODULUS;
    let c = 1 + ord3(w);
    let three_c = 3i128.checked_pow(c).ok_or(too_big.clone())?;
    let d = 24 * w as i128 / three_c;
    let (a, unit) = match (d.rem_euclid(24), c % 2 == 0) {
        (8, true) => (35 * d, 1),
        (16, true) => (7 * d, 5),
        (8, false) => (5 * d, 7),
        (16, false) => (d, 35),
        _ => unreachable!("24w / 3^c is prime to 3 and divisible by 8"),
    };
    let b = unit * three_c;
    let narrow = |x: i128| i64::try_from(x).map_err(|_| too_big.clone());
    let dec = OffsetDecomposition {
        n,
        w,
        c,
        d: narrow(d)?,
        a: narrow(a)?,
        b: u64::try_from(b).map_err(|_| too_big.clone())?,
        m_a: narrow((a + 8) / 24)?,
    };
    debug_assert!(dec.holds_invariants());
    Ok(dec)
}

/// 2·P_b + 1 at t = 2.
pub fn witness_modulus_t2(b: u64) -> Result<BigInt> {
    let k = b as i64;
    if k % 2 == 0 {
        return Err(Error::EvenIndex(k));
    }
    Ok(BigInt::from(2) * alpha_power_exact(t2(), k).p + 1)
}

fn odd_modulus(n: &BigInt) -> Result<BigUint> {
    if n.is_even() || *n < BigInt::from(3) {
        return Err(Error::InvalidModulus { got: n.to_string(), min: 3 });
    }
    Ok(n.magnitude().clone())
}

/// (P_n / N) for an odd modulus N ≥ 3, with P_n reduced by modular powering.
pub fn jacobi_of_index(params: EquationParams, n: i64, modulus: &BigInt) -> Result<i8> {
    if n % 2 == 0 {
        return Err(Error::EvenIndex(n));
    }
    let m = odd_modulus(modulus)?;
    let residue = alpha_power_mod(params, n, &m)?.p;
    Ok(jacobi_biguint(residue, m))
}

/// (P_n / p(P_b)), the P_b being exact for parameter t.
pub fn jacobi_witness(params: EquationParams, n: i64, poly: &IntPoly, b: u64) -> Result<i8> {
    let pb = alpha_power_exact(params, b as i64).p;
    jacobi_of_index(params, n, &poly.eval(&pb))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainCheck {
    pub name: String,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DescentCertificate {
    pub t: u64,
    #[serde(flatten)]
    pub decomposition: OffsetDecomposition,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub poly: Option<String>,
    #[serde(with = "crate::bigfmt")]
    pub witness_modulus: BigInt,
    pub chain: Vec<ChainCheck>,
    pub jacobi_value: i8,
    pub valid: bool,
}

impl DescentCertificate {
    pub fn n(&self) -> i64 {
        self.decomposition.n
    }

    pub fn failed_checks(&self) -> Vec<&str> {
        self.chain.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect()
    }
}

struct Chain(Vec<ChainCheck>);

impl Chain {
    fn check(&mut self, name: &str, pass: bool) {
        self.0.push(ChainCheck { name: name.to_string(), pass });
    }
}

fn mod_floor(x: &BigInt, m: &BigInt) -> BigInt {
    x.mod_floor(m)
}

/// Recomputes every step of the t = 2 descent for n ≡ 1 (mod 840).
///
/// A failed step yields `valid = false`, not an error.
pub fn verify_chain_t2(n: i64) -> Result<DescentCertificate> {
    let dec = decompose(n)?;
    let params = t2();
    let b = dec.b as i64;
    let r = (b - 1) / 2;
    let two = BigInt::from(2);

    let ab = alpha_power_exact(params, b);
    let (pb, qb) = (&ab.p, &ab.q);
    let modulus = &two * pb + 1u32;
    let nu = modulus.magnitude().clone();
    let mut chain = Chain(Vec::new());

    chain.check("b_shape", b % 4 == 1 && b % 3 == 0 && r % 2 == 0 && r >= 2);

    // Q_{6b} is a multiple of 2P_b + 1.
    let q6b = alpha_power_exact(params, 6 * b).q;
    chain.check("modulus_divides_q6b", q6b.is_positive() && (&q6b % &modulus).is_zero());

    // P_n ≡ P_{1−8b} (mod Q_{6b}), then reduce modulo N.
    let q6b_mag = q6b.magnitude();
    let via_q6b = alpha_power_residue(params, n, q6b_mag).p;
    let shifted = alpha_power_residue(params, 1 - 8 * b, q6b_mag).p;
    let p8b_minus_1 = alpha_power_exact(params, 8 * b - 1).p;
    let via_q6b_mod_n = BigInt::from(&via_q6b % &nu);
    chain.check(
        "shift_congruence_mod_q6b",
        via_q6b == shifted && via_q6b_mod_n == mod_floor(&p8b_minus_1, &modulus),
    );

    let a8b = alpha_power_exact(params, 8 * b);
    chain.check("p8b_minus_1_identity", p8b_minus_1 == &a8b.p - &two * &a8b.q);

    let direct = BigInt::from(alpha_power_mod(params, n, &nu)?.p);
    chain.check("residue_paths_agree", direct == via_q6b_mod_n);
    chain.check("reduction_to_pb_minus_2qb", direct == mod_floor(&(pb - &two * qb), &modulus));

    chain.check("modulus_is_3_mod_8", mod_floor(&modulus, &BigInt::from(8)) == BigInt::from(3));

    let ar = alpha_power_exact(params, r);
    let (pr, qr) = (&ar.p, &ar.q);
    let base = &two * pr * pr - 1u32;
    let prqr = pr * qr;
    let modulus_in_r = BigInt::from(4) * pr * pr + BigInt::from(8) * &prqr - 1u32;
    chain.check(
        "doubling_identities",
        *pb == &base + BigInt::from(4) * &prqr
            && *qb == &base + BigInt::from(6) * &prqr
            && modulus_in_r == modulus,
    );

    // Each stage of the symbol chain, signs folded in.
    let jac = |a: &BigInt, m: &BigInt| -> i8 { jacobi(a, m).unwrap_or(0) };
    let small = BigInt::from(8) * &prqr - 1u32;
    let stages = [
        ("jacobi_p_n", jac(&direct, &modulus)),
        ("jacobi_pb_minus_2qb", jac(&(pb - &two * qb), &modulus)),
        ("jacobi_doubled_numerator", -jac(&(&two * pb - BigInt::from(4) * qb), &modulus)),
        ("jacobi_substitute_2pb", -jac(&(BigInt::from(-1) - BigInt::from(4) * qb), &modulus)),
        ("jacobi_4qb_plus_1", jac(&(BigInt::from(4) * qb + 1), &modulus)),
        (
            "jacobi_expanded_in_r",
            jac(&(BigInt::from(8) * pr * pr + BigInt::from(24) * &prqr - 3), &modulus_in_r),
        ),
        ("jacobi_subtract_modulus", jac(&small, &modulus)),
        ("jacobi_reciprocity", if small.is_positive() { -jac(&modulus, &small) } else { 0 }),
        (
            "jacobi_reduced_square",
            if small.is_positive() { -jac(&(BigInt::from(4) * pr * pr), &small) } else { 0 },
        ),
    ];
    for pair in stages.windows(2) {
        let (prev, cur) = (pair[0], pair[1]);
        chain.check(&format!("{} = {}", prev.0, cur.0), prev.1 == cur.1 && cur.1 != 0);
    }
    chain.check("square_numerator_gives_minus_one", stages[stages.len() - 1].1 == -1);

    let jacobi_value = stages[0].1;
    chain.check("final_value_minus_one", jacobi_value == -1);

    let valid = chain.0.iter().all(|c| c.pass) && jacobi_value == -1;
    Ok(DescentCertificate {
        t: 2,
        decomposition: dec,
        poly: None,
        witness_modulus: modulus,
        chain: chain.0,
        jacobi_value,
        valid,
    })
}

/// Single-symbol certificate (P_n / p(P_b)) for arbitrary t and p.
pub fn probe_certificate(params: EquationParams, n: i64, poly: &IntPoly) -> Result<DescentCertificate> {
    let dec = decompose(n)?;
    let pb = alpha_power_exact(params, dec.b as i64).p;
    let modulus = poly.eval(&pb);
    let jacobi_value = jacobi_of_index(params, n, &modulus)?;
    Ok(DescentCertificate {
        t: params.t(),
        decomposition: dec,
        poly: Some(poly.to_string()),
        witness_modulus: modulus,
        chain: vec![ChainCheck { name: "jacobi_value_minus_one".into(), pass: jacobi_value == -1 }],
        jacobi_value,
        valid: jacobi_value == -1,
    })
}

/// Mod-8 refutation of P_k = 3u², 3P_k² + 6Q_k² = 3v² for odd k at t = 2.
///
/// For odd k, P_k ≡ 1 (mod 8) and Q_k is odd. Then 3u² ≢ 1 and
/// P_k² + 2Q_k² ≡ 3 (mod 8), which is not a square.
pub fn check_class3_obstruction() -> bool {
    let squares: Vec<u32> = (0..8).map(|x| x * x % 8).collect();
    let cofactor_never_square = (0..8u32)
        .filter(|q| q % 2 == 1)
        .all(|q| !squares.contains(&((1 + 2 * q * q) % 8)));
    let three_u2_never_one = (0..8u32).all(|u| 3 * u * u % 8 != 1);
    cofactor_never_square && three_u2_never_one
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Referral {
    /// k mod M carries a sieve witness prime.
    SieveWitness { residue: u64, modulus: u64, p: u64, symbol: i8 },
    /// k ≡ ±1 (mod 840); the class-1 descent applies to ±k.
    ClassOneDescent { index: i64, certificate: Box<DescentCertificate> },
    Unresolved { residue: u64, modulus: u64 },
}

/// n = 3k with n ≡ ±3 (mod 840): P_n square forces P_k square.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReducedClaim {
    pub n: i64,
    pub k: i64,
    pub k_mod_280: i64,
    #[serde(with = "crate::bigfmt")]
    pub factor: BigInt,
    #[serde(with = "crate::bigfmt")]
    pub cofactor: BigInt,
    pub factorization_exact: bool,
    pub common_factor_divides_3: bool,
    pub sub_case: String,
    pub referral: Referral,
    pub valid: bool,
}

pub fn reduce_class3(n: i64, sieve: &SieveReport) -> Result<ReducedClaim> {
    if n % 3 != 0 {
        return Err(Error::InadmissibleIndex { n, reason: "3 must divide n" });
    }
    if !matches!(n.rem_euclid(PRIMARY_MODULUS), 3 | 837) {
        return Err(Error::InadmissibleIndex { n, reason: "n must be ±3 modulo 840" });
    }
    if n.abs() == 3 {
        return Err(Error::InadmissibleIndex { n, reason: "n = ±3 is the known solution" });
    }
    if sieve.t != 2 || sieve.m != PRIMARY_MODULUS as u64 {
        return Err(Error::Config("class-3 reduction needs the t = 2, m = 840 sieve".into()));
    }
    let params = t2();
    let k = n / 3;
    let (factor, cofactor) = triple_index_factor(params, k)?;
    let factorization_exact = &factor * &cofactor == alpha_power_exact(params, n).p;
    let g = factor.gcd(&cofactor);
    let common_factor_divides_3 = g.is_one() || g == BigInt::from(3);

    let residue = k.rem_euclid(sieve.modulus as i64) as u64;
    let referral = if let Some(w) = sieve.witnesses.get(&residue) {
        Referral::SieveWitness { residue, modulus: sieve.modulus, p: w.p, symbol: w.symbol }
    } else {
        match k.rem_euclid(PRIMARY_MODULUS) {
            1 => Referral::ClassOneDescent { index: k, certificate: Box::new(verify_chain_t2(k)?) },
            839 => Referral::ClassOneDescent { index: -k, certificate: Box::new(verify_chain_t2(-k)?) },
            _ => Referral::Unresolved { residue, modulus: sieve.modulus },
        }
    };
    let referral_ok = match &referral {
        Referral::SieveWitness { symbol, .. } => *symbol == -1,
        Referral::ClassOneDescent { certificate, .. } => certificate.valid,
        Referral::Unresolved { .. } => false,
    };
    let valid = factorization_exact && common_factor_divides_3 && check_class3_obstruction() && referral_ok;
    Ok(ReducedClaim {
        n,
        k,
        k_mod_280: k.rem_euclid(280),
        factor,
        cofactor,
        factorization_exact,
        common_factor_divides_3,
        sub_case: "P_k = u^2 (P_k = 3u^2 refuted modulo 8)".into(),
        referral,
        valid,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProofEntry {
    /// `via_symmetry`: n ≡ −1 (mod 840), certified through P_n = P_{−n}.
    Descent { n: i64, via_symmetry: bool, certificate: DescentCertificate },
    Class3 { n: i64, claim: ReducedClaim },
}

impl ProofEntry {
    pub fn n(&self) -> i64 {
        match self {
            ProofEntry::Descent { n, .. } | ProofEntry::Class3 { n, .. } => *n,
        }
    }

    pub fn valid(&self) -> bool {
        match self {
            ProofEntry::Descent { certificate, .. } => certificate.valid,
            ProofEntry::Class3 { claim, .. } => claim.valid,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Solution {
    #[serde(with = "crate::bigfmt")]
    pub x: BigInt,
    #[serde(with = "crate::bigfmt")]
    pub y: BigInt,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProofReport {
    pub t: u64,
    pub n_bound: u64,
    pub sieve_report_ref: String,
    pub sieve: SieveReport,
    pub class3_obstruction: bool,
    pub squares: Vec<i64>,
    pub solutions: Vec<Solution>,
    pub entries: Vec<ProofEntry>,
    pub all_certified: bool,
    pub verdict: String,
}

/// The sieve configuration behind the t = 2 argument: M = 1680, primes ≤ 10⁴.
pub fn t2_sieve_config() -> SieveConfig {
    SieveConfig::new(2, PRIMARY_MODULUS as u64, 1, 0, 10_000)
}

/// Certifies every index |n| ≤ n_bound in the classes ±1, ±3 (mod 840).
pub fn prove_t2(n_bound: u64, cache: Option<&FactorBaseCache>) -> Result<ProofReport> {
    if n_bound < 841 {
        return Err(Error::Config(format!("n_bound must be at least 841, got {n_bound}")));
    }
    let bound = i64::try_from(n_bound).map_err(|_| Error::Config("n_bound too large".into()))?;
    let config = t2_sieve_config();
    let factor_base = build_factor_base_cached(&config, cache)?;
    let outcome = run_sieve(&factor_base, config.m)?;
    let targets = target_classes(config.m);
    let converged = outcome.survivors_mod_m.iter().all(|j| targets.contains(j));
    let sieve: SieveReport = Escalation { config, factor_base, outcome, converged }.into();
    let sieve_report_ref = format!(
        "sieve:t={},m={},r={},s={},M={},prime_bound={}",
        sieve.t, sieve.m, sieve.r, sieve.s, sieve.modulus, sieve.prime_bound
    );

    let indices: Vec<i64> = (-bound..=bound)
        .filter(|n| n % 2 != 0 && n.abs() != 1 && n.abs() != 3)
        .filter(|n| matches!(n.rem_euclid(PRIMARY_MODULUS), 1 | 3 | 837 | 839))
        .collect();
    let entries = indices
        .par_iter()
        .map(|&n| match n.rem_euclid(PRIMARY_MODULUS) {
            1 => Ok(ProofEntry::Descent { n, via_symmetry: false, certificate: verify_chain_t2(n)? }),
            839 => Ok(ProofEntry::Descent { n, via_symmetry: true, certificate: verify_chain_t2(-n)? }),
            _ => Ok(ProofEntry::Class3 { n, claim: reduce_class3(n, &sieve)? }),
        })
        .collect::<Result<Vec<_>>>()?;

    let params = t2();
    let mut squares = Vec::new();
    let mut solutions = Vec::new();
    for n in [-3i64, -1, 1, 3] {
        let a = alpha_power_exact(params, n);
        let (root, exact) = integer_sqrt(&a.p)?;
        if exact {
            squares.push(n);
            if n > 0 {
                solutions.push(Solution { x: root.into(), y: a.q.abs() });
            }
        }
    }

    let class3_obstruction = check_class3_obstruction();
    let sieve_as_expected = sieve.survivors_mod_m == targets.to_vec();
    let all_certified = entries.iter().all(ProofEntry::valid);
    let verdict = if all_certified && sieve_as_expected && class3_obstruction && squares == [-3, -1, 1, 3] {
        VERDICT_ONLY_TRIVIAL.to_string()
    } else {
        let failed: Vec<i64> = entries.iter().filter(|e| !e.valid()).map(ProofEntry::n).collect();
        format!("incomplete: sieve_as_expected={sieve_as_expected}, uncertified indices {failed:?}")
    };
    Ok(ProofReport {
        t: 2,
        n_bound,
        sieve_report_ref,
        sieve,
        class3_obstruction,
        squares,
        solutions,
        entries,
        all_certified,
        verdict,
    })
}
