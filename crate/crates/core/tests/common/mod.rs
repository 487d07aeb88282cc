#![allow(dead_code)]

use num_bigint::{BigInt, BigUint, RandBigInt};
use num_integer::Integer;
use num_traits::{CheckedSub, One, Signed, Zero};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use quartic_sieve::arith::{integer_sqrt, jacobi};
use quartic_sieve::pell::{alpha_power_exact, alpha_power_mod, triple_index_factor, EquationParams, WordModulus};

pub const IDENTITY_CASES: u32 = 256;

pub fn params(t: u64) -> EquationParams {
    EquationParams::new(t).unwrap()
}

fn big(x: i64) -> BigInt {
    BigInt::from(x)
}

fn divides(d: &BigInt, x: &BigInt) -> bool {
    !d.is_zero() && x.mod_floor(&d.abs()).is_zero()
}

pub fn odd(range: std::ops::RangeInclusive<i64>) -> impl Strategy<Value = i64> {
    range.prop_map(|k| if k % 2 == 0 { k + 1 } else { k })
}

pub fn even_nonzero(range: std::ops::RangeInclusive<i64>) -> impl Strategy<Value = i64> {
    range.prop_map(|k| if k % 2 == 0 { k } else { k + 1 }).prop_filter("nonzero", |k| *k != 0)
}

pub fn check_pell(t: u64, k: i64) -> Result<(), TestCaseError> {
    let a = alpha_power_exact(params(t), k);
    prop_assert!(a.satisfies_pell(), "t={t} k={k}");
    Ok(())
}

/// P_{n+2k} ≡ P_n and Q_{n+2k} ≡ Q_n (mod Q_k), n odd, k even.
pub fn check_shift(t: u64, n: i64, k: i64) -> Result<(), TestCaseError> {
    let p = params(t);
    let qk = alpha_power_exact(p, k).q;
    let lhs = alpha_power_exact(p, n + 2 * k);
    let rhs = alpha_power_exact(p, n);
    prop_assert!(divides(&qk, &(&lhs.p - &rhs.p)), "P shift t={t} n={n} k={k}");
    prop_assert!(divides(&qk, &(&lhs.q - &rhs.q)), "Q shift t={t} n={n} k={k}");
    Ok(())
}

/// Q_h | Q_{hj} for even h.
pub fn check_q_divisibility(t: u64, h: i64, j: i64) -> Result<(), TestCaseError> {
    let p = params(t);
    let qh = alpha_power_exact(p, h).q;
    let qk = alpha_power_exact(p, h * j).q;
    prop_assert!(divides(&qh, &qk), "t={t} h={h} k={}", h * j);
    Ok(())
}

/// Q_{6k}/Q_{2k} = 3(4P_k² − 1)(12P_k² − 1) at t = 2, k odd.
pub fn check_sextic_t2(k: i64) -> Result<(), TestCaseError> {
    let p = params(2);
    let pk = alpha_power_exact(p, k).p;
    let q6 = alpha_power_exact(p, 6 * k).q;
    let q2 = alpha_power_exact(p, 2 * k).q;
    let x2 = &pk * &pk;
    let expected = big(3) * (big(4) * &x2 - 1) * (big(12) * &x2 - 1);
    let (quotient, rem) = q6.div_rem(&q2);
    prop_assert!(rem.is_zero());
    prop_assert_eq!(quotient, expected);
    Ok(())
}

/// P_{6k}/P_{2k} = u + 1 and Q_{6k}/Q_{2k} = u + 3 with
/// u = 16(t+1)²x⁴ − 16(t+1)x², x = P_k; both divide their product.
pub fn check_sextic_general(t: u64, k: i64) -> Result<(), TestCaseError> {
    let p = params(t);
    let x = alpha_power_exact(p, k).p;
    let t1 = big(t as i64 + 1);
    let x2 = &x * &x;
    let u = big(16) * &t1 * &t1 * &x2 * &x2 - big(16) * &t1 * &x2;
    let poly = (&u + 1) * (&u + 3);
    let (a6, a2) = (alpha_power_exact(p, 6 * k), alpha_power_exact(p, 2 * k));
    let (pq, prem) = a6.p.div_rem(&a2.p);
    let (qq, qrem) = a6.q.div_rem(&a2.q);
    prop_assert!(prem.is_zero() && qrem.is_zero());
    prop_assert_eq!(&pq, &(&u + 1));
    prop_assert_eq!(&qq, &(&u + 3));
    prop_assert!(divides(&pq, &poly) && divides(&qq, &poly));
    Ok(())
}

/// (2P_k + 1) | Q_{6k} at t = 2, k odd.
pub fn check_divisor(k: i64) -> Result<(), TestCaseError> {
    let p = params(2);
    let n = big(2) * alpha_power_exact(p, k).p + 1;
    let q6 = alpha_power_exact(p, 6 * k).q;
    prop_assert!(divides(&n, &q6), "k={k}");
    Ok(())
}

pub fn check_mod8(k: i64) -> Result<(), TestCaseError> {
    let pk = alpha_power_exact(params(2), k).p;
    prop_assert_eq!(pk.mod_floor(&big(8)), BigInt::one(), "k={}", k);
    Ok(())
}

pub fn check_triple(t: u64, k: i64) -> Result<(), TestCaseError> {
    let p = params(t);
    let (f1, f2) = triple_index_factor(p, k).map_err(|e| TestCaseError::fail(e.to_string()))?;
    prop_assert_eq!(f1 * f2, alpha_power_exact(p, 3 * k).p, "t={} k={}", t, k);
    Ok(())
}

pub fn check_negation(t: u64, k: i64) -> Result<(), TestCaseError> {
    let p = params(t);
    let (pos, neg) = (alpha_power_exact(p, k), alpha_power_exact(p, -k));
    prop_assert_eq!(&pos.p, &neg.p);
    prop_assert_eq!(&pos.q, &(-&neg.q));
    Ok(())
}

pub fn check_mod_exact(t: u64, k: i64, modulus: u64) -> Result<(), TestCaseError> {
    let p = params(t);
    let m = BigUint::from(modulus);
    let exact = alpha_power_exact(p, k).reduce(&m);
    let modular = alpha_power_mod(p, k, &m).map_err(|e| TestCaseError::fail(e.to_string()))?;
    prop_assert_eq!(&exact, &modular);
    let word = WordModulus::new(p, modulus).power(k);
    prop_assert_eq!(BigUint::from(word.p), exact.p);
    prop_assert_eq!(BigUint::from(word.q), exact.q);
    Ok(())
}

pub fn odd_modulus() -> impl Strategy<Value = u64> {
    (1u64..=(1 << 40)).prop_map(|m| 2 * m + 1)
}

/// Runs every identity property through a fresh runner; returns
/// (name, cases run or failure message).
pub fn run_identity_suite() -> Vec<(&'static str, Result<u32, String>)> {
    fn go<S: Strategy>(
        name: &'static str,
        strategy: S,
        test: impl Fn(S::Value) -> Result<(), TestCaseError>,
    ) -> (&'static str, Result<u32, String>) {
        let mut runner = TestRunner::new(Config { cases: IDENTITY_CASES, failure_persistence: None, ..Config::default() });
        (name, runner.run(&strategy, test).map(|_| IDENTITY_CASES).map_err(|e| e.to_string()))
    }
    vec![
        go("pell identity", (1u64..=50, -500i64..=500), |(t, k)| check_pell(t, k)),
        go("shift congruence", (1u64..=30, odd(-301..=301), even_nonzero(-120..=120)), |(t, n, k)| {
            check_shift(t, n, k)
        }),
        go("even-index Q divisibility", (1u64..=30, even_nonzero(2..=100), 1i64..=8), |(t, h, j)| {
            prop_assume!(h * j <= 200);
            check_q_divisibility(t, h, j)
        }),
        go("sextic identity t=2", odd(1..=99), check_sextic_t2),
        go("sextic identity general t", (1u64..=30, odd(1..=49)), |(t, k)| check_sextic_general(t, k)),
        go("(2P_k+1) | Q_6k", odd(-199..=199), check_divisor),
        go("P_k = 1 mod 8", odd(-999..=999), check_mod8),
        go("P_3k factorization", (1u64..=50, odd(-199..=199)), |(t, k)| check_triple(t, k)),
        go("P_-k = P_k", (1u64..=50, -500i64..=500), |(t, k)| check_negation(t, k)),
        go("modular/exact agreement", (1u64..=100, -2000i64..=2000, odd_modulus()), |(t, k, m)| {
            check_mod_exact(t, k, m)
        }),
    ]
}

/// Legendre symbol from an explicit list of squares mod p.
fn legendre_by_scan(a: u64, p: u64) -> i8 {
    let a = a % p;
    if a == 0 {
        0
    } else if (1..p).any(|x| x * x % p == a) {
        1
    } else {
        -1
    }
}

fn prime_factors_with_multiplicity(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 3;
    while d * d <= n {
        while n % d == 0 {
            out.push(d);
            n /= d;
        }
        d += 2;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Product of scanned Legendre symbols over the factorization of odd n.
pub fn jacobi_oracle(a: u64, n: u64) -> i8 {
    prime_factors_with_multiplicity(n).into_iter().map(|p| legendre_by_scan(a, p)).product()
}

/// Compares `jacobi` against the oracle for all odd n ≤ 200 and a < n.
/// Returns the number of pairs checked or the first disagreement.
pub fn jacobi_agreement() -> Result<usize, String> {
    let mut checked = 0;
    for n in (1..=200u64).step_by(2) {
        for a in 0..n {
            let got = jacobi(&BigInt::from(a), &BigInt::from(n)).map_err(|e| e.to_string())?;
            let want = jacobi_oracle(a, n);
            if got != want {
                return Err(format!("({a}/{n}): got {got}, oracle {want}"));
            }
            checked += 1;
        }
    }
    Ok(checked)
}

/// Checks integer_sqrt on `count` random values of varied size; a third
/// of them are squares or squares minus one.
pub fn isqrt_agreement(count: usize, seed: u64) -> Result<usize, String> {
    let mut rng = StdRng::seed_from_u64(seed);
    for i in 0..count {
        let bits = rng.gen_range(1..=600u64);
        let base = rng.gen_biguint(bits);
        let n = match i % 3 {
            0 => base,
            1 => &base * &base,
            _ => (&base * &base).checked_sub(&BigUint::one()).unwrap_or_default(),
        };
        let (root, exact) = integer_sqrt(&BigInt::from(n.clone())).map_err(|e| e.to_string())?;
        let next = &root + 1u32;
        if &root * &root > n || &next * &next <= n {
            return Err(format!("floor sqrt wrong for {n}"));
        }
        if exact != (&root * &root == n) {
            return Err(format!("exactness flag wrong for {n}"));
        }
    }
    Ok(count)
}
