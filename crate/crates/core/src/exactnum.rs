//! Exact rational arithmetic, bit-complexity accounting, and Stern–Brocot
//! rational reconstruction.
//!
//! Every numeric quantity in this crate (priors, utilities, thresholds,
//! perturbation radii, …) is a [`Rational`]: an arbitrary-precision fraction
//! stored in reduced form with a positive denominator. No rounding ever
//! occurs anywhere in the pipeline.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::str::FromStr;
use thiserror::Error;

/// Exact arbitrary-precision fraction. Always reduced, denominator > 0.
pub type Rational = BigRational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExactNumError {
    /// Mediant descent ran out of tree levels before entering the interval.
    #[error("no rational found within depth {depth} in ({lo}, {hi})")]
    NoRationalWithinDepth { lo: String, hi: String, depth: u64 },
    #[error("bit complexity of an empty vector is undefined")]
    EmptyVector,
    #[error("malformed rational literal: {0:?}")]
    ParseError(String),
}

/// Convenience constructor: `rat(a, b)` = a/b.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Convenience constructor for integers.
pub fn rat_int(num: i64) -> Rational {
    Rational::from_integer(BigInt::from(num))
}

/// 2^e as an exact rational, for any (possibly negative) exponent.
pub fn pow2(e: i64) -> Rational {
    let one = BigInt::one();
    if e >= 0 {
        Rational::from_integer(one << (e as usize))
    } else {
        Rational::new(one.clone(), one << ((-e) as usize))
    }
}

/// Bit length of an integer: max(1, ⌈log2(|k|+1)⌉). Zero occupies one bit by
/// convention so that every fraction has bit-complexity at least 2 and all
/// logarithmic search budgets stay finite. The sign costs nothing.
pub fn bitlen(k: &BigInt) -> u64 {
    k.bits().max(1)
}

/// Bit-complexity of a reduced fraction: bitlen(num) + bitlen(den).
pub fn bit_complexity(q: &Rational) -> u64 {
    bitlen(q.numer()) + bitlen(q.denom())
}

/// Maximum bit-complexity among the entries of a nonempty vector.
pub fn vector_bit_complexity(v: &[Rational]) -> Result<u64, ExactNumError> {
    v.iter()
        .map(bit_complexity)
        .max()
        .ok_or(ExactNumError::EmptyVector)
}

/// Parse a rational literal: "p/q" or a bare integer "p".
pub fn parse_rational(s: &str) -> Result<Rational, ExactNumError> {
    let s = s.trim();
    let bad = || ExactNumError::ParseError(s.to_string());
    let r = match s.split_once('/') {
        Some((num, den)) => {
            let num = BigInt::from_str(num.trim()).map_err(|_| bad())?;
            let den = BigInt::from_str(den.trim()).map_err(|_| bad())?;
            if den.is_zero() {
                return Err(bad());
            }
            Rational::new(num, den)
        }
        None => Rational::from_integer(BigInt::from_str(s).map_err(|_| bad())?),
    };
    Ok(r)
}

/// Render a rational as "p/q" (always with an explicit denominator).
pub fn format_rational(q: &Rational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

/// Lossy float view, for convenience columns only; never used in computation.
pub fn to_f64(q: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    q.to_f64().unwrap_or(f64::NAN)
}

/// Depth of a rational p/q ∈ (0,1) in the mediant tree rooted between 0/1 and
/// 1/1 (the root 1/2 has depth 1): the sum of its continued-fraction partial
/// quotients minus one.
pub fn mediant_tree_depth(q: &Rational) -> u64 {
    assert!(
        q > &Rational::zero() && q < &Rational::one(),
        "depth defined for rationals strictly between 0 and 1"
    );
    let mut a: BigUint = q.numer().magnitude().clone();
    let mut b: BigUint = q.denom().magnitude().clone();
    let mut total = BigUint::zero();
    while !b.is_zero() {
        total += &a / &b;
        let r = &a % &b;
        a = b;
        b = r;
    }
    // `total` is the partial-quotient sum of q/1's reversed expansion; the
    // first quotient of p/q with p<q is 0 so this equals Σ a_i for i ≥ 1.
    let total: u64 = u64::try_from(&total).unwrap_or(u64::MAX);
    total - 1
}

/// Interval endpoint semantics for the mediant descent.
#[derive(Clone, Copy, PartialEq, Eq)]
enum IntervalKind {
    Open,
    Closed,
}

/// The rational inside the open interval (lo, hi) with the smallest
/// denominator, found by mediant descent from (0/1, 1/1) restricted to at
/// most `depth` tree levels. Runs of same-direction steps are taken in one
/// continued-fraction stride, so skewed intervals cost no extra time.
pub fn stern_brocot_search(
    lo: &Rational,
    hi: &Rational,
    depth: u64,
) -> Result<Rational, ExactNumError> {
    descend(lo, hi, depth, IntervalKind::Open)
}

/// Closed-interval variant: the minimum-denominator rational in [lo, hi].
/// Used by the segment binary search, whose bisection bracket may land with
/// the true crossing sitting exactly on an endpoint. The endpoints 0 and 1
/// (outside the mediant tree proper) are admitted as candidates.
pub fn stern_brocot_search_closed(
    lo: &Rational,
    hi: &Rational,
    depth: u64,
) -> Result<Rational, ExactNumError> {
    if lo <= &Rational::zero() && hi >= &Rational::zero() {
        return Ok(Rational::zero());
    }
    if lo <= &Rational::one() && hi >= &Rational::one() {
        return Ok(Rational::one());
    }
    descend(lo, hi, depth, IntervalKind::Closed)
}

fn descend(
    lo: &Rational,
    hi: &Rational,
    depth: u64,
    kind: IntervalKind,
) -> Result<Rational, ExactNumError> {
    let err = || ExactNumError::NoRationalWithinDepth {
        lo: format_rational(lo),
        hi: format_rational(hi),
        depth,
    };
    // The search tree only covers (0, 1); intersect the request with it.
    let zero = Rational::zero();
    let one = Rational::one();
    let lo = lo.clone().max(zero);
    let hi = hi.clone().min(one);
    if lo >= hi && !(kind == IntervalKind::Closed && lo == hi) {
        return Err(err());
    }

    let inside = |num: &BigInt, den: &BigInt| -> bool {
        // Compare num/den against lo and hi without constructing fractions.
        let v_lo = num * lo.denom() - lo.numer() * den;
        let v_hi = num * hi.denom() - hi.numer() * den;
        match kind {
            IntervalKind::Open => v_lo.is_positive() && v_hi.is_negative(),
            IntervalKind::Closed => !v_lo.is_negative() && !v_hi.is_positive(),
        }
    };

    // Bounds l < interval < r, as integer fraction pairs (num, den).
    let mut l = (BigInt::zero(), BigInt::one());
    let mut r = (BigInt::one(), BigInt::one());
    let mut used: u64 = 0;
    loop {
        let m = (&l.0 + &r.0, &l.1 + &r.1);
        used += 1;
        if used > depth {
            return Err(err());
        }
        if inside(&m.0, &m.1) {
            return Ok(Rational::new(m.0, m.1));
        }
        // m lies outside; stride over the whole run of steps in one direction.
        // Values of right-steps (l + k·r) increase with k, values of
        // left-steps (k·l + r) decrease, so a single floor computes the run.
        let below = {
            let v_lo = &m.0 * lo.denom() - lo.numer() * &m.1;
            match kind {
                IntervalKind::Open => !v_lo.is_positive(),
                IntervalKind::Closed => v_lo.is_negative(),
            }
        };
        if below {
            // Take the maximal k with (l + k·r) still below the interval.
            let (p, q) = (lo.numer(), lo.denom());
            let num = p * &l.1 - q * &l.0; // > 0 since l < lo
            let den = q * &r.0 - p * &r.1; // > 0 since r > lo
            let k = match kind {
                IntervalKind::Open => num / den, // value ≤ lo
                IntervalKind::Closed => {
                    // strict: value < lo  ⇔  k·den < num
                    let k = &num / &den;
                    if &k * &den == num {
                        k - 1
                    } else {
                        k
                    }
                }
            };
            debug_assert!(k >= BigInt::one());
            l = (&l.0 + &k * &r.0, &l.1 + &k * &r.1);
            let steps = u64::try_from(&k).map_err(|_| err())?;
            used += steps - 1; // the first step of the run is already counted
        } else {
            // Take the maximal k with (k·l + r) still above the interval.
            let (p, q) = (hi.numer(), hi.denom());
            let num = q * &r.0 - p * &r.1; // > 0 since r > hi
            let den = p * &l.1 - q * &l.0; // > 0 since l < hi
            let k = match kind {
                IntervalKind::Open => num / den, // value ≥ hi
                IntervalKind::Closed => {
                    let k = &num / &den;
                    if &k * &den == num {
                        k - 1
                    } else {
                        k
                    }
                }
            };
            debug_assert!(k >= BigInt::one());
            r = (&k * &l.0 + &r.0, &k * &l.1 + &r.1);
            let steps = u64::try_from(&k).map_err(|_| err())?;
            used += steps - 1;
        }
        if used > depth {
            return Err(err());
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bitlen_convention() {
        assert_eq!(bitlen(&BigInt::from(0)), 1);
        assert_eq!(bitlen(&BigInt::from(1)), 1);
        assert_eq!(bitlen(&BigInt::from(-1)), 1);
        assert_eq!(bitlen(&BigInt::from(7)), 3);
        assert_eq!(bitlen(&BigInt::from(12)), 4);
    }

    #[test]
    fn bit_complexity_examples() {
        assert_eq!(bit_complexity(&rat(1, 1)), 2);
        assert_eq!(bit_complexity(&rat(0, 1)), 2);
        assert_eq!(bit_complexity(&rat(7, 12)), 7);
    }

    #[test]
    fn vector_bit_complexity_examples() {
        // bit_complexity(1/2) = 1 + 2 = 3; bit_complexity(3/4) = 2 + 3 = 5.
        assert_eq!(vector_bit_complexity(&[rat(1, 2), rat(3, 4)]).unwrap(), 5);
        assert_eq!(vector_bit_complexity(&[rat(1, 1)]).unwrap(), 2);
        assert_eq!(
            vector_bit_complexity(&[rat(0, 1), rat(0, 1), rat(1, 1)]).unwrap(),
            2
        );
        assert!(vector_bit_complexity(&[]).is_err());
    }

    #[test]
    fn parse_and_format() {
        assert_eq!(parse_rational("3/4").unwrap(), rat(3, 4));
        assert_eq!(parse_rational("-1/2").unwrap(), rat(-1, 2));
        assert_eq!(parse_rational("5").unwrap(), rat_int(5));
        assert_eq!(parse_rational("2/4").unwrap(), rat(1, 2));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
        assert_eq!(format_rational(&rat(-1, 2)), "-1/2");
    }

    #[test]
    fn stern_brocot_examples() {
        assert_eq!(
            stern_brocot_search(&rat_int(0), &rat_int(1), 1).unwrap(),
            rat(1, 2)
        );
        assert_eq!(
            stern_brocot_search(&rat(1, 4), &rat(1, 2), 8).unwrap(),
            rat(1, 3)
        );
        assert_eq!(
            stern_brocot_search(&rat(32, 100), &rat(35, 100), 16).unwrap(),
            rat(1, 3)
        );
    }

    #[test]
    fn stern_brocot_depth_exhaustion() {
        // 1/3 sits at depth 2; a depth-1 budget cannot reach it.
        let res = stern_brocot_search(&rat(1, 4), &rat(1, 2), 1);
        assert!(matches!(
            res,
            Err(ExactNumError::NoRationalWithinDepth { .. })
        ));
    }

    #[test]
    fn stern_brocot_skewed_interval_is_fast() {
        // Without run compression this would take ~10^12 mediant steps.
        let lo = Rational::new(BigInt::from(1u64), BigInt::from(1_000_000_000_007u64));
        let hi = Rational::new(BigInt::from(1u64), BigInt::from(1_000_000_000_005u64));
        let got = stern_brocot_search(&lo, &hi, u64::MAX >> 1).unwrap();
        assert_eq!(
            got,
            Rational::new(BigInt::from(1u64), BigInt::from(1_000_000_000_006u64))
        );
    }

    #[test]
    fn closed_variant_accepts_endpoints() {
        assert_eq!(
            stern_brocot_search_closed(&rat(1, 2), &rat(1, 2), 4).unwrap(),
            rat(1, 2)
        );
        assert_eq!(
            stern_brocot_search_closed(&rat_int(0), &rat(1, 1000), 4).unwrap(),
            Rational::zero()
        );
        assert_eq!(
            stern_brocot_search_closed(&rat(999, 1000), &rat_int(1), 4).unwrap(),
            Rational::one()
        );
        // Open search rejects the degenerate interval the closed one accepts.
        assert!(stern_brocot_search(&rat(1, 2), &rat(1, 2), 64).is_err());
    }

    #[test]
    fn mediant_tree_depth_examples() {
        assert_eq!(mediant_tree_depth(&rat(1, 2)), 1);
        assert_eq!(mediant_tree_depth(&rat(1, 3)), 2);
        assert_eq!(mediant_tree_depth(&rat(2, 3)), 2);
        assert_eq!(mediant_tree_depth(&rat(3, 5)), 3);
    }

    #[test]
    fn round_trip_at_exact_depth() {
        for (p, q) in [(1i64, 2i64), (2, 5), (3, 7), (13, 21), (17, 64)] {
            let target = rat(p, q);
            let d = mediant_tree_depth(&target);
            let w = Rational::new(BigInt::one(), BigInt::from(4 * q * q));
            let lo = &target - &w;
            let hi = &target + &w;
            assert_eq!(stern_brocot_search(&lo, &hi, d).unwrap(), target);
            assert!(stern_brocot_search(&lo, &hi, d - 1).is_err());
        }
    }

    #[test]
    fn pow2_values() {
        assert_eq!(pow2(0), rat_int(1));
        assert_eq!(pow2(3), rat_int(8));
        assert_eq!(pow2(-2), rat(1, 4));
    }

    #[test]
    fn to_f64_sane() {
        assert!((to_f64(&rat(1, 2)) - 0.5).abs() < 1e-12);
        assert!((to_f64(&rat(-7, 3)) + 7.0 / 3.0).abs() < 1e-12);
    }
}
