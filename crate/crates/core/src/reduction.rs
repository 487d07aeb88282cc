//! From Ax⁴ − By² = 1 to the canonical parameter t, plus brute-force oracles.
//!
//! If (a0, b0) is the least positive solution of Ax² − By² = 1, then
//! t = A·a0² − 1 = B·b0², and a0√A + b0√B equals α = √(t+1) + √t. The
//! solutions of Ax² − By² = 1 are then (a0·P_k, b0·Q_k) for odd k.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::integer_sqrt;
use crate::bigfmt;
use crate::pell::{AlphaPower, EquationParams, PairMultiply};

/// Periods of the continued fraction of √(AB) scanned for a solution.
pub const DEFAULT_PERIODS: usize = 2;

fn isqrt_u(n: &BigUint) -> (BigUint, bool) {
    let r = n.sqrt();
    let exact = &r * &r == *n;
    (r, exact)
}

/// Least (x, y) with x ≥ 1, y ≥ 0 and Ax² − By² = 1.
pub fn fundamental_solution(a: u64, b: u64) -> Option<(BigUint, BigUint)> {
    fundamental_solution_with(a, b, DEFAULT_PERIODS)
}

pub fn fundamental_solution_with(a: u64, b: u64, periods: usize) -> Option<(BigUint, BigUint)> {
    if a == 0 || b == 0 || a.gcd(&b) != 1 {
        return None;
    }
    if a == 1 {
        return Some((BigUint::one(), BigUint::zero()));
    }
    let (ab, bb) = (BigUint::from(a), BigUint::from(b));
    let d = &ab * &bb;
    let (s, square) = isqrt_u(&d);
    if square {
        return square_discriminant(a, &s);
    }
    // Lagrange: a primitive solution of X² − DY² = N with |N| < √D is a
    // convergent of √D. Take X = Ax (N = A) or X = By (N = −B), whichever
    // side is small.
    let a_is_small = a < b;
    let (mut m, mut den, a0) = (BigUint::zero(), BigUint::one(), s.clone());
    let (mut p_prev, mut p) = (BigUint::one(), a0.clone());
    let (mut q_prev, mut q) = (BigUint::zero(), BigUint::one());
    let mut period = None;
    let mut step = 0usize;
    loop {
        let found = if a_is_small {
            let (x, rem) = p.div_rem(&ab);
            (rem.is_zero() && &ab * &x * &x == &bb * &q * &q + 1u32).then(|| (x, q.clone()))
        } else {
            let (y, rem) = p.div_rem(&bb);
            (rem.is_zero() && &ab * &q * &q == &bb * &y * &y + 1u32).then(|| (q.clone(), y))
        };
        if found.is_some() {
            return found;
        }
        if let Some(len) = period {
            if step >= len * periods.max(1) {
                return None;
            }
        }
        m = &den * &((&a0 + &m) / &den) - &m;
        den = (&d - &m * &m) / &den;
        let term = (&a0 + &m) / &den;
        step += 1;
        if period.is_none() && term == &a0 * 2u32 {
            period = Some(step);
        }
        let p_next = &term * &p + &p_prev;
        let q_next = &term * &q + &q_prev;
        p_prev = std::mem::replace(&mut p, p_next);
        q_prev = std::mem::replace(&mut q, q_next);
    }
}

/// AB = s²: (Ax − sy)(Ax + sy) = A has finitely many solutions.
fn square_discriminant(a: u64, s: &BigUint) -> Option<(BigUint, BigUint)> {
    let ab = BigUint::from(a);
    let mut best: Option<(BigUint, BigUint)> = None;
    for e in (1..=a).take_while(|e| e * e <= a) {
        if a % e != 0 {
            continue;
        }
        let f = a / e;
        if (e + f) % 2 != 0 {
            continue;
        }
        let ax = BigUint::from((e + f) / 2);
        let sy = BigUint::from((f - e) / 2);
        if (&ax % &ab).is_zero() && (&sy % s).is_zero() {
            let cand = (ax / &ab, sy / s);
            if best.as_ref().is_none_or(|b| cand.0 < b.0) {
                best = Some(cand);
            }
        }
    }
    best
}

/// Least x ≤ x_bound with Ax² − 1 = By² for some y ≥ 0.
pub fn direct_search(a: u64, b: u64, x_bound: u64) -> Option<(BigUint, BigUint)> {
    let (ab, bb) = (BigUint::from(a), BigUint::from(b));
    (1..=x_bound).find_map(|x| {
        let x = BigUint::from(x);
        let lhs = &ab * &x * &x;
        if lhs.is_zero() {
            return None;
        }
        let v = lhs - 1u32;
        let (y2, rem) = v.div_rem(&bb);
        if !rem.is_zero() {
            return None;
        }
        let (y, exact) = isqrt_u(&y2);
        exact.then_some((x, y))
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CanonicalForm {
    pub t: u64,
    #[serde(with = "bigfmt_u")]
    pub a0: BigUint,
    #[serde(with = "bigfmt_u")]
    pub b0: BigUint,
}

/// Reduction report as written to disk.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReductionReport {
    #[serde(rename = "A")]
    pub a: u64,
    #[serde(rename = "B")]
    pub b: u64,
    pub solvable: bool,
    #[serde(with = "opt_big")]
    pub a0: Option<BigUint>,
    #[serde(with = "opt_big")]
    pub b0: Option<BigUint>,
    pub t: Option<u64>,
    pub degenerate_flag: bool,
    /// Direct search up to a0 found nothing smaller.
    pub minimality_checked: bool,
    pub note: String,
}

const DIRECT_SEARCH_LIMIT: u64 = 1_000_000;

pub fn reduce_equation(a: u64, b: u64) -> ReductionReport {
    let mut report = ReductionReport {
        a,
        b,
        solvable: false,
        a0: None,
        b0: None,
        t: None,
        degenerate_flag: false,
        minimality_checked: false,
        note: String::new(),
    };
    let Some((a0, b0)) = fundamental_solution(a, b) else {
        report.note = format!(
            "no fundamental solution found within {DEFAULT_PERIODS} continued-fraction periods"
        );
        return report;
    };
    report.solvable = true;
    if let Ok(x) = u64::try_from(&a0) {
        if x <= DIRECT_SEARCH_LIMIT {
            report.minimality_checked = direct_search(a, b, x).is_some_and(|(dx, _)| dx == a0);
        }
    }
    let t = BigUint::from(a) * &a0 * &a0 - 1u32;
    report.degenerate_flag = t.is_zero() || b0.is_zero();
    report.t = if report.degenerate_flag { None } else { u64::try_from(&t).ok() };
    report.note = if report.degenerate_flag {
        "degenerate: t = 0, the canonical family needs t >= 1".into()
    } else if report.t.is_none() {
        format!("t = {t} does not fit in 64 bits")
    } else {
        "t = A·a0² − 1 = B·b0²".into()
    };
    report.a0 = Some(a0);
    report.b0 = Some(b0);
    report
}

/// Canonical t for Ax⁴ − By² = 1; absent when unsolvable or degenerate.
pub fn to_canonical(a: u64, b: u64) -> Option<CanonicalForm> {
    let report = reduce_equation(a, b);
    Some(CanonicalForm { t: report.t?, a0: report.a0?, b0: report.b0? })
}

/// All positive (x, y), x ≤ x_bound, with Ax⁴ − By² = 1.
pub fn brute_force_quartic(a: u64, b: u64, x_bound: u64) -> Vec<(BigUint, BigUint)> {
    let (ab, bb) = (BigUint::from(a), BigUint::from(b));
    let mut out = Vec::new();
    if b == 0 {
        return out;
    }
    for x in 1..=x_bound {
        let x = BigUint::from(x);
        let x2 = &x * &x;
        let lhs = &ab * &x2 * &x2;
        if lhs.is_zero() {
            continue;
        }
        let (y2, rem) = (lhs - 1u32).div_rem(&bb);
        if !rem.is_zero() || y2.is_zero() {
            continue;
        }
        let (y, exact) = isqrt_u(&y2);
        if exact {
            out.push((x, y));
        }
    }
    out
}

/// Odd n ≤ n_bound with P_n a perfect square, from exact values.
pub fn brute_force_index(params: EquationParams, n_bound: u64) -> Vec<u64> {
    let step = AlphaPower::alpha(params).pair_multiply(&AlphaPower::alpha(params)).expect("same params");
    let mut state = AlphaPower::alpha(params);
    let mut out = Vec::new();
    let mut n = 1;
    while n <= n_bound {
        if integer_sqrt(&state.p).is_ok_and(|(_, exact)| exact) {
            out.push(n);
        }
        state = state.pair_multiply(&step).expect("same params");
        n += 2;
    }
    out
}

mod bigfmt_u {
    use num_bigint::{BigInt, BigUint};
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigUint, D::Error> {
        let v: BigInt = super::bigfmt::deserialize(d)?;
        v.to_biguint().ok_or_else(|| serde::de::Error::custom("negative value"))
    }
}

mod opt_big {
    use num_bigint::BigUint;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<BigUint>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(v) => s.serialize_str(&v.to_string()),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<BigUint>, D::Error> {
        let text: Option<String> = Option::deserialize(d)?;
        text.map(|t| t.parse().map_err(serde::de::Error::custom)).transpose()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn pair(x: u64, y: u64) -> (BigUint, BigUint) {
        (BigUint::from(x), BigUint::from(y))
    }

    #[test]
    fn fundamental_examples() {
        assert_eq!(fundamental_solution(3, 2), Some(pair(1, 1)));
        assert_eq!(fundamental_solution(2, 1), Some(pair(1, 1)));
        assert_eq!(fundamental_solution(5, 1), Some(pair(1, 2)));
        assert_eq!(fundamental_solution(5, 4), Some(pair(1, 1)));
        assert_eq!(fundamental_solution(1, 1), Some(pair(1, 0)));
        assert_eq!(fundamental_solution(4, 1), None);
        assert_eq!(fundamental_solution(6, 3), None);
    }

    #[test]
    fn fundamental_matches_direct_search() {
        for a in 2..40u64 {
            for b in 1..40u64 {
                let cf = fundamental_solution(a, b);
                let direct = direct_search(a, b, 20_000);
                match (&cf, &direct) {
                    (Some(x), Some(y)) => assert_eq!(x, y, "A={a} B={b}"),
                    (None, Some(y)) => panic!("A={a} B={b}: continued fraction missed {y:?}"),
                    // Solutions beyond the search bound are fine.
                    (Some(x), None) => assert!(x.0 > BigUint::from(20_000u32), "A={a} B={b}"),
                    (None, None) => {}
                }
            }
        }
    }

    #[test]
    fn canonical_examples() {
        assert_eq!(to_canonical(3, 2).unwrap().t, 2);
        assert_eq!(to_canonical(2, 1).unwrap().t, 1);
        assert_eq!(to_canonical(5, 1).unwrap().t, 4);
        assert_eq!(to_canonical(5, 4).unwrap().t, 4);
        let r = reduce_equation(1, 2);
        assert!(r.degenerate_flag);
        assert!(to_canonical(1, 2).is_none());
        let r = reduce_equation(4, 1);
        assert!(!r.solvable);
    }

    #[test]
    fn quartic_examples() {
        assert_eq!(brute_force_quartic(3, 2, 100), vec![pair(1, 1), pair(3, 11)]);
        assert_eq!(brute_force_quartic(2, 1, 100), vec![pair(1, 1), pair(13, 239)]);
        assert_eq!(brute_force_quartic(4, 3, 50), vec![pair(1, 1)]);
    }

    #[test]
    fn index_examples() {
        let p = |t| EquationParams::new(t).unwrap();
        assert_eq!(brute_force_index(p(2), 1000), vec![1, 3]);
        assert_eq!(brute_force_index(p(1), 1000), vec![1, 7]);
        assert_eq!(brute_force_index(p(3), 1000), vec![1]);
        assert_eq!(crate::pell::alpha_power_exact(p(1), 7).p, BigInt::from(169));
    }
}
