//! Integer polynomials of low degree, used as Jacobi-modulus generators.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::{Serialize, Serializer};

use crate::error::Error;

/// Coefficients stored lowest degree first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntPoly {
    coeffs: Vec<BigInt>,
}

impl IntPoly {
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.len() > 1 && coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    /// c1·x + c0
    pub fn linear(c1: i64, c0: i64) -> Self {
        Self::new(vec![c0.into(), c1.into()])
    }

    /// c2·x² + c1·x + c0
    pub fn quadratic(c2: i64, c1: i64, c0: i64) -> Self {
        Self::new(vec![c0.into(), c1.into(), c2.into()])
    }

    /// Highest degree first, the order a reader writes them in.
    pub fn coefficients_high_first(&self) -> Vec<BigInt> {
        self.coeffs.iter().rev().cloned().collect()
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Horner evaluation.
    pub fn eval(&self, x: &BigInt) -> BigInt {
        self.coeffs.iter().rev().fold(BigInt::zero(), |acc, c| acc * x + c)
    }
}

impl fmt::Display for IntPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (deg, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() && !(first && deg == 0) {
                continue;
            }
            let sign = if c.is_negative() { "-" } else { "+" };
            if first {
                if c.is_negative() {
                    f.write_str("-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            let mag = c.abs();
            let show_coeff = deg == 0 || mag != BigInt::from(1);
            if show_coeff {
                write!(f, "{mag}")?;
            }
            match deg {
                0 => {}
                1 => f.write_str("x")?,
                _ => write!(f, "x^{deg}")?,
            }
            first = false;
        }
        Ok(())
    }
}

impl Serialize for IntPoly {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Parses `linear:c1,c0` or `quad:c2,c1,c0`.
impl FromStr for IntPoly {
    type Err = Error;

    fn from_str(spec: &str) -> Result<Self, Error> {
        let bad = || Error::Config(format!("bad polynomial spec {spec:?}; use linear:c1,c0 or quad:c2,c1,c0"));
        let (kind, rest) = spec.split_once(':').ok_or_else(bad)?;
        let coeffs = rest
            .split(',')
            .map(|c| c.trim().parse::<BigInt>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| bad())?;
        let expected = match kind {
            "linear" => 2,
            "quad" => 3,
            _ => return Err(bad()),
        };
        if coeffs.len() != expected {
            return Err(bad());
        }
        Ok(Self::new(coeffs.into_iter().rev().collect()))
    }
}
