//! Jacobi symbol and integer square root.

use std::mem::swap;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// The Jacobi symbol (a/n) for odd positive n, by the binary algorithm.
///
/// `a` may be negative or larger than `n`; it is reduced first. (a/1) = 1.
pub fn jacobi(a: &BigInt, n: &BigInt) -> Result<i8> {
    if !n.is_positive() || n.is_even() {
        return Err(Error::InvalidModulus { got: n.to_string(), min: 1 });
    }
    let n = n.magnitude().clone();
    let a = a.mod_floor(&BigInt::from_biguint(Sign::Plus, n.clone()));
    Ok(jacobi_biguint(a.magnitude().clone(), n))
}

/// Jacobi symbol on unsigned operands; `n` must be odd (not checked).
pub(crate) fn jacobi_biguint(mut a: BigUint, mut n: BigUint) -> i8 {
    a %= &n;
    let mut sign = 1i8;
    while !a.is_zero() {
        let tz = a.trailing_zeros().expect("a is nonzero");
        if tz > 0 {
            a >>= tz;
            let n8 = low_bits(&n, 8);
            if tz % 2 == 1 && (n8 == 3 || n8 == 5) {
                sign = -sign;
            }
        }
        if low_bits(&a, 4) == 3 && low_bits(&n, 4) == 3 {
            sign = -sign;
        }
        swap(&mut a, &mut n);
        a %= &n;
    }
    if n.is_one() {
        sign
    } else {
        0
    }
}

fn low_bits(x: &BigUint, modulus: u64) -> u64 {
    x.iter_u64_digits().next().unwrap_or(0) % modulus
}

/// Word-sized Jacobi symbol (a/n) for odd positive n.
pub fn jacobi_u64(a: u64, n: u64) -> Result<i8> {
    if n == 0 || n % 2 == 0 {
        return Err(Error::InvalidModulus { got: n.to_string(), min: 1 });
    }
    let (mut a, mut n) = (a % n, n);
    let mut sign = 1i8;
    while a != 0 {
        let tz = a.trailing_zeros();
        a >>= tz;
        if tz % 2 == 1 && matches!(n % 8, 3 | 5) {
            sign = -sign;
        }
        if a % 4 == 3 && n % 4 == 3 {
            sign = -sign;
        }
        swap(&mut a, &mut n);
        a %= n;
    }
    Ok(if n == 1 { sign } else { 0 })
}

/// Returns `(floor(sqrt(n)), root^2 == n)`.
pub fn integer_sqrt(n: &BigInt) -> Result<(BigUint, bool)> {
    if n.is_negative() {
        return Err(Error::NegativeSqrt(n.to_string()));
    }
    let root = n.magnitude().sqrt();
    let exact = &root * &root == *n.magnitude();
    Ok((root, exact))
}

/// 3-adic valuation of |x|, with ord3(0) = 0.
pub fn ord3(x: i64) -> u32 {
    let mut x = x.unsigned_abs();
    let mut c = 0;
    while x != 0 && x % 3 == 0 {
        x /= 3;
        c += 1;
    }
    c
}
