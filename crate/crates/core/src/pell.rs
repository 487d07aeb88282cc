//! Exact and modular arithmetic on powers of α = √(t+1) + √t.
//!
//! For odd k, α^k = P_k·√(t+1) + Q_k·√t, and (t+1)P_k² − tQ_k² = 1.
//! For even k, α^k = P_k + Q_k·√(t(t+1)), and P_k² − t(t+1)Q_k² = 1.
//!
//! A state `(P, Q, parity)` is combined with another by one of three rules,
//! obtained by multiplying out the surd forms:
//!
//! | left | right | P                          | Q                      | result |
//! |------|-------|----------------------------|------------------------|--------|
//! | odd  | odd   | (t+1)P₁P₂ + tQ₁Q₂          | P₁Q₂ + Q₁P₂            | even   |
//! | odd  | even  | P₁P₂ + tQ₁Q₂               | Q₁P₂ + (t+1)P₁Q₂       | odd    |
//! | even | even  | P₁P₂ + t(t+1)Q₁Q₂          | P₁Q₂ + Q₁P₂            | even   |
//!
//! Negative indices use P_{−k} = P_k and Q_{−k} = −Q_k.
//!
//! Identities that follow from these rules for every t (checked in the tests):
//!
//! * doubling, r even: P_{2r} = 2P_r² − 1, Q_{2r} = 2P_rQ_r, and
//!   P_{2r+1} = P_{2r} + tQ_{2r}, Q_{2r+1} = P_{2r} + (t+1)Q_{2r}.
//!   For t = 2 this is P_{2r+1} = (2P_r² − 1) + 4P_rQ_r and
//!   Q_{2r+1} = (2P_r² − 1) + 6P_rQ_r.
//! * tripling, k odd: P_{3k} = P_k·((t+1)P_k² + 3tQ_k²).
//! * sextic ratios, k odd, with x = P_k and u = 16(t+1)²x⁴ − 16(t+1)x²:
//!   P_{6k}/P_{2k} = u + 1 and Q_{6k}/Q_{2k} = u + 3.

use std::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameter t of (t+1)X⁴ − tY² = 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EquationParams {
    t: u64,
}

impl EquationParams {
    pub fn new(t: u64) -> Result<Self> {
        if t == 0 {
            return Err(Error::InvalidParameter(t));
        }
        Ok(Self { t })
    }

    pub fn t(&self) -> u64 {
        self.t
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Odd,
    Even,
}

impl Parity {
    pub fn of(k: i64) -> Self {
        if k % 2 == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    fn combine(self, other: Parity) -> Parity {
        if self == other {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Parity::Odd => "odd",
            Parity::Even => "even",
        })
    }
}

/// Applies the product rule for α^j · α^k given both states.
///
/// Generic over the coefficient ring so the exact, big-modular and word-modular
/// variants share one definition.
fn product_rule<T>(t: &T, t1: &T, x: (&T, &T, Parity), y: (&T, &T, Parity)) -> (T, T, Parity)
where
    for<'a> &'a T: std::ops::Mul<&'a T, Output = T> + std::ops::Add<&'a T, Output = T>,
{
    let ((p1, q1, par1), (p2, q2, par2)) = match (x.2, y.2) {
        (Parity::Even, Parity::Odd) => (y, x),
        _ => (x, y),
    };
    let parity = par1.combine(par2);
    match (par1, par2) {
        (Parity::Odd, Parity::Odd) => {
            let p = &(&(t1 * p1) * p2) + &(&(t * q1) * q2);
            let q = &(p1 * q2) + &(q1 * p2);
            (p, q, parity)
        }
        (Parity::Odd, Parity::Even) => {
            let p = &(p1 * p2) + &(&(t * q1) * q2);
            let q = &(q1 * p2) + &(&(t1 * p1) * q2);
            (p, q, parity)
        }
        _ => {
            let tt1 = t * t1;
            let p = &(p1 * p2) + &(&(&tt1 * q1) * q2);
            let q = &(p1 * q2) + &(q1 * p2);
            (p, q, parity)
        }
    }
}

/// Exact state of α^k.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlphaPower {
    pub params: EquationParams,
    pub k: i64,
    pub p: BigInt,
    pub q: BigInt,
    pub parity: Parity,
}

impl AlphaPower {
    pub fn identity(params: EquationParams) -> Self {
        Self { params, k: 0, p: BigInt::one(), q: BigInt::zero(), parity: Parity::Even }
    }

    pub fn alpha(params: EquationParams) -> Self {
        Self { params, k: 1, p: BigInt::one(), q: BigInt::one(), parity: Parity::Odd }
    }

    /// Checks the parity-appropriate norm identity exactly.
    pub fn satisfies_pell(&self) -> bool {
        let t = BigInt::from(self.params.t);
        let t1 = &t + 1u32;
        let lhs = match self.parity {
            Parity::Odd => &t1 * &self.p * &self.p - &t * &self.q * &self.q,
            Parity::Even => &self.p * &self.p - &t * &t1 * &self.q * &self.q,
        };
        lhs.is_one()
    }

    fn mul_unchecked(&self, other: &Self) -> Self {
        let t = BigInt::from(self.params.t);
        let t1 = &t + 1u32;
        let (p, q, parity) = product_rule(
            &t,
            &t1,
            (&self.p, &self.q, self.parity),
            (&other.p, &other.q, other.parity),
        );
        Self { params: self.params, k: self.k + other.k, p, q, parity }
    }

    /// Reduces this state modulo `modulus` (any modulus ≥ 2).
    pub fn reduce(&self, modulus: &BigUint) -> ModPair {
        let m = BigInt::from_biguint(Sign::Plus, modulus.clone());
        ModPair {
            params: self.params,
            modulus: modulus.clone(),
            p: self.p.mod_floor(&m).magnitude().clone(),
            q: self.q.mod_floor(&m).magnitude().clone(),
            parity: self.parity,
        }
    }
}

/// α^k reduced modulo a fixed modulus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModPair {
    pub params: EquationParams,
    pub modulus: BigUint,
    pub p: BigUint,
    pub q: BigUint,
    pub parity: Parity,
}

impl ModPair {
    pub fn identity(params: EquationParams, modulus: &BigUint) -> Self {
        Self {
            params,
            modulus: modulus.clone(),
            p: BigUint::one() % modulus,
            q: BigUint::zero(),
            parity: Parity::Even,
        }
    }

    pub fn is_identity(&self) -> bool {
        self.parity == Parity::Even && self.p == BigUint::one() % &self.modulus && self.q.is_zero()
    }

    pub fn satisfies_pell(&self) -> bool {
        let m = &self.modulus;
        let t = BigUint::from(self.params.t) % m;
        let t1 = (&t + 1u32) % m;
        let p2 = &self.p * &self.p % m;
        let q2 = &self.q * &self.q % m;
        let one = BigUint::one() % m;
        match self.parity {
            Parity::Odd => (t1 * p2 % m + m - t * q2 % m) % m == one,
            Parity::Even => (p2 + m - (t * t1 % m) * q2 % m) % m == one,
        }
    }

    fn mul_unchecked(&self, other: &Self) -> Self {
        let m = &self.modulus;
        let t = BigUint::from(self.params.t) % m;
        let t1 = (&t + 1u32) % m;
        let (p, q, parity) = product_rule(
            &t,
            &t1,
            (&self.p, &self.q, self.parity),
            (&other.p, &other.q, other.parity),
        );
        Self { params: self.params, modulus: m.clone(), p: p % m, q: q % m, parity }
    }

    fn negate_index(mut self) -> Self {
        if !self.q.is_zero() {
            self.q = &self.modulus - &self.q;
        }
        self
    }
}

/// Combination of two states into the state of the summed index.
pub trait PairMultiply: Sized {
    fn pair_multiply(&self, other: &Self) -> Result<Self>;
}

impl PairMultiply for AlphaPower {
    fn pair_multiply(&self, other: &Self) -> Result<Self> {
        if self.params != other.params {
            return Err(Error::Mismatch("equation parameters"));
        }
        Ok(self.mul_unchecked(other))
    }
}

impl PairMultiply for ModPair {
    fn pair_multiply(&self, other: &Self) -> Result<Self> {
        if self.params != other.params {
            return Err(Error::Mismatch("equation parameters"));
        }
        if self.modulus != other.modulus {
            return Err(Error::Mismatch("moduli"));
        }
        Ok(self.mul_unchecked(other))
    }
}

pub fn pair_multiply<T: PairMultiply>(x: &T, y: &T) -> Result<T> {
    x.pair_multiply(y)
}

/// Left-to-right binary powering of α over any state type.
fn power<T: Clone>(identity: T, base: &T, e: u64, mul: impl Fn(&T, &T) -> T) -> T {
    if e == 0 {
        return identity;
    }
    let mut acc = base.clone();
    for bit in (0..63 - e.leading_zeros()).rev() {
        acc = mul(&acc, &acc);
        if (e >> bit) & 1 == 1 {
            acc = mul(&acc, base);
        }
    }
    acc
}

/// Exact P_k, Q_k in O(log |k|) big-integer multiplications.
pub fn alpha_power_exact(params: EquationParams, k: i64) -> AlphaPower {
    let alpha = AlphaPower::alpha(params);
    let mut out = power(AlphaPower::identity(params), &alpha, k.unsigned_abs(), |a, b| {
        a.mul_unchecked(b)
    });
    if k < 0 {
        out.q = -out.q;
        out.k = k;
    }
    out
}

/// P_k, Q_k modulo an odd modulus ≥ 3.
pub fn alpha_power_mod(params: EquationParams, k: i64, modulus: &BigUint) -> Result<ModPair> {
    if modulus.is_even() || *modulus < BigUint::from(3u32) {
        return Err(Error::InvalidModulus { got: modulus.to_string(), min: 3 });
    }
    Ok(alpha_power_residue(params, k, modulus))
}

/// Like [`alpha_power_mod`] but accepts any modulus ≥ 1, including even ones.
pub(crate) fn alpha_power_residue(params: EquationParams, k: i64, modulus: &BigUint) -> ModPair {
    let alpha = ModPair {
        params,
        modulus: modulus.clone(),
        p: BigUint::one() % modulus,
        q: BigUint::one() % modulus,
        parity: Parity::Odd,
    };
    let out = power(ModPair::identity(params, modulus), &alpha, k.unsigned_abs(), |a, b| {
        a.mul_unchecked(b)
    });
    if k < 0 {
        out.negate_index()
    } else {
        out
    }
}

/// α^k modulo a word-sized modulus, for the sieve's hot loops.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WordPair {
    pub p: u64,
    pub q: u64,
    pub parity: Parity,
}

/// Word-sized modular arithmetic context for one (t, modulus).
#[derive(Debug, Clone, Copy)]
pub struct WordModulus {
    modulus: u64,
    t: u64,
    t1: u64,
    tt1: u64,
}

impl WordModulus {
    pub fn new(params: EquationParams, modulus: u64) -> Self {
        assert!(modulus >= 2, "modulus must be at least 2");
        let t = params.t % modulus;
        let t1 = (t + 1) % modulus;
        let tt1 = mulmod(t, t1, modulus);
        Self { modulus, t, t1, tt1 }
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn identity(&self) -> WordPair {
        WordPair { p: 1 % self.modulus, q: 0, parity: Parity::Even }
    }

    pub fn alpha(&self) -> WordPair {
        WordPair { p: 1 % self.modulus, q: 1 % self.modulus, parity: Parity::Odd }
    }

    pub fn mul(&self, x: WordPair, y: WordPair) -> WordPair {
        let m = self.modulus as u128;
        let (x, y) = if x.parity == Parity::Even && y.parity == Parity::Odd { (y, x) } else { (x, y) };
        let (p1, q1, p2, q2) = (x.p as u128, x.q as u128, y.p as u128, y.q as u128);
        let (t, t1, tt1) = (self.t as u128, self.t1 as u128, self.tt1 as u128);
        let (p, q) = match (x.parity, y.parity) {
            (Parity::Odd, Parity::Odd) => (
                (t1 * p1 % m * p2 + t * q1 % m * q2) % m,
                (p1 * q2 + q1 * p2) % m,
            ),
            (Parity::Odd, Parity::Even) => (
                (p1 * p2 + t * q1 % m * q2) % m,
                (q1 * p2 + t1 * p1 % m * q2) % m,
            ),
            _ => ((p1 * p2 + tt1 * q1 % m * q2) % m, (p1 * q2 + q1 * p2) % m),
        };
        WordPair { p: p as u64, q: q as u64, parity: x.parity.combine(y.parity) }
    }

    pub fn power(&self, k: i64) -> WordPair {
        let alpha = self.alpha();
        let mut out = power(self.identity(), &alpha, k.unsigned_abs(), |a, b| self.mul(*a, *b));
        if k < 0 && out.q != 0 {
            out.q = self.modulus - out.q;
        }
        out
    }
}

fn mulmod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

/// Splits P_{3k} = P_k · ((t+1)P_k² + 3tQ_k²) for odd k.
pub fn triple_index_factor(params: EquationParams, k: i64) -> Result<(BigInt, BigInt)> {
    if k % 2 == 0 {
        return Err(Error::EvenIndex(k));
    }
    let a = alpha_power_exact(params, k);
    let t = BigInt::from(params.t);
    let cofactor = (&t + 1u32) * &a.p * &a.p + BigInt::from(3u32) * &t * &a.q * &a.q;
    Ok((a.p, cofactor))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(t: u64) -> EquationParams {
        EquationParams::new(t).unwrap()
    }

    fn pq(a: &AlphaPower) -> (i64, i64) {
        (i64::try_from(&a.p).unwrap(), i64::try_from(&a.q).unwrap())
    }

    /// Repeated multiplication by α (or α⁻¹), no powering.
    fn naive(t: u64, k: i64) -> AlphaPower {
        let p = params(t);
        let step = if k >= 0 {
            AlphaPower::alpha(p)
        } else {
            AlphaPower { params: p, k: -1, p: BigInt::one(), q: -BigInt::one(), parity: Parity::Odd }
        };
        let mut acc = AlphaPower::identity(p);
        for _ in 0..k.unsigned_abs() {
            acc = acc.pair_multiply(&step).unwrap();
        }
        acc
    }

    #[test]
    fn rejects_zero_t() {
        assert!(EquationParams::new(0).is_err());
    }

    #[test]
    fn exact_examples_t2() {
        let p = params(2);
        assert_eq!(pq(&alpha_power_exact(p, 1)), (1, 1));
        assert_eq!(pq(&alpha_power_exact(p, 3)), (9, 11));
        assert_eq!(pq(&alpha_power_exact(p, 5)), (89, 109));
        let neg = alpha_power_exact(p, -3);
        assert_eq!(pq(&neg), (9, -11));
        assert_eq!(neg.parity, Parity::Odd);
        let zero = alpha_power_exact(p, 0);
        assert_eq!(pq(&zero), (1, 0));
        assert_eq!(zero.parity, Parity::Even);
    }

    #[test]
    fn powering_matches_naive() {
        for t in [1, 2, 3, 7, 20] {
            for k in -40..=40 {
                let fast = alpha_power_exact(params(t), k);
                let slow = naive(t, k);
                assert_eq!((&fast.p, &fast.q, fast.parity), (&slow.p, &slow.q, slow.parity), "t={t} k={k}");
            }
        }
    }

    #[test]
    fn modular_examples() {
        let p = params(2);
        let r = alpha_power_mod(p, 3, &BigUint::from(7u32)).unwrap();
        assert_eq!((r.p, r.q), (BigUint::from(2u32), BigUint::from(4u32)));
        let r = alpha_power_mod(p, 0, &BigUint::from(11u32)).unwrap();
        assert!(r.is_identity());
        let r = alpha_power_mod(p, -5, &BigUint::from(13u32)).unwrap();
        assert_eq!(r.p, BigUint::from(11u32));
        assert_eq!(r.q, BigUint::from((13 - 109 % 13) as u32));
    }

    #[test]
    fn modular_rejects_bad_modulus() {
        let p = params(2);
        assert!(alpha_power_mod(p, 3, &BigUint::from(8u32)).is_err());
        assert!(alpha_power_mod(p, 3, &BigUint::from(1u32)).is_err());
        assert!(alpha_power_mod(p, 3, &BigUint::zero()).is_err());
    }

    #[test]
    fn pair_multiply_examples() {
        let p = params(2);
        let a1 = alpha_power_exact(p, 1);
        let sq = pair_multiply(&a1, &a1).unwrap();
        assert_eq!((pq(&sq), sq.parity), ((5, 2), Parity::Even));
        let a5 = alpha_power_exact(p, 5);
        assert_eq!(a5.pair_multiply(&AlphaPower::identity(p)).unwrap(), a5);
        let prod = alpha_power_exact(p, 2).pair_multiply(&alpha_power_exact(p, 3)).unwrap();
        assert_eq!((pq(&prod), prod.parity, prod.k), ((89, 109), Parity::Odd, 5));
    }

    #[test]
    fn pair_multiply_mismatch() {
        let a = alpha_power_exact(params(2), 3);
        let b = alpha_power_exact(params(3), 3);
        assert_eq!(a.pair_multiply(&b), Err(Error::Mismatch("equation parameters")));
        let x = alpha_power_mod(params(2), 3, &BigUint::from(7u32)).unwrap();
        let y = alpha_power_mod(params(2), 3, &BigUint::from(11u32)).unwrap();
        assert_eq!(x.pair_multiply(&y), Err(Error::Mismatch("moduli")));
    }

    #[test]
    fn word_matches_big() {
        for t in [1, 2, 5, 26] {
            for m in [3u64, 7, 11, 97, 1_000_003, 4_294_967_291] {
                let w = WordModulus::new(params(t), m);
                for k in [-1001, -7, -1, 0, 1, 2, 3, 99, 1680, 123_457] {
                    let a = w.power(k);
                    let b = alpha_power_mod(params(t), k, &BigUint::from(m)).unwrap();
                    assert_eq!((BigUint::from(a.p), BigUint::from(a.q), a.parity), (b.p, b.q, b.parity));
                }
            }
        }
    }

    #[test]
    fn triple_factor_examples() {
        let (f1, f2) = triple_index_factor(params(2), 1).unwrap();
        assert_eq!((f1, f2), (BigInt::from(1), BigInt::from(9)));
        let (f1, f2) = triple_index_factor(params(2), 3).unwrap();
        assert_eq!((&f1, &f2), (&BigInt::from(9), &BigInt::from(969)));
        assert_eq!(f1 * f2, alpha_power_exact(params(2), 9).p);
        assert_eq!(alpha_power_exact(params(2), 9).p, BigInt::from(8721));
        let (f1, f2) = triple_index_factor(params(1), 1).unwrap();
        assert_eq!((f1, f2), (BigInt::from(1), BigInt::from(5)));
        assert_eq!(alpha_power_exact(params(1), 3).p, BigInt::from(5));
        assert_eq!(triple_index_factor(params(2), 4), Err(Error::EvenIndex(4)));
    }

    #[test]
    fn doubling_identity_t2() {
        let p = params(2);
        for r in (2..60).step_by(2) {
            let ar = alpha_power_exact(p, r);
            let b = alpha_power_exact(p, 2 * r + 1);
            let base = BigInt::from(2) * &ar.p * &ar.p - 1;
            assert_eq!(b.p, &base + BigInt::from(4) * &ar.p * &ar.q);
            assert_eq!(b.q, &base + BigInt::from(6) * &ar.p * &ar.q);
        }
    }

    #[test]
    fn general_doubling_identities() {
        for t in 1..12u64 {
            let p = params(t);
            let tb = BigInt::from(t);
            for r in (0..30).step_by(2) {
                let ar = alpha_power_exact(p, r);
                let a2 = alpha_power_exact(p, 2 * r);
                let a21 = alpha_power_exact(p, 2 * r + 1);
                assert_eq!(a2.p, BigInt::from(2) * &ar.p * &ar.p - 1);
                assert_eq!(a2.q, BigInt::from(2) * &ar.p * &ar.q);
                assert_eq!(a21.p, &a2.p + &tb * &a2.q);
                assert_eq!(a21.q, &a2.p + (&tb + 1) * &a2.q);
            }
        }
    }
}
