//! Exact rational arithmetic and probability intervals.
//!
//! All probabilities in this crate are `BigRational`s: always reduced,
//! arbitrary precision, compared exactly. No floating point anywhere.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Zero};

pub type Rational = BigRational;

/// `n/d` as an exact rational. Panics if `d == 0`.
pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_zero() -> Rational {
    Rational::zero()
}

pub fn rat_one() -> Rational {
    Rational::one()
}

/// Renders `3/4` as `"3/4"` and whole numbers without a denominator.
pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses `"3/4"`, `"-1/2"` or `"7"`.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                None
            } else {
                Some(Rational::new(n, d))
            }
        }
        None => {
            let n: BigInt = s.parse().ok()?;
            Some(Rational::from_integer(n))
        }
    }
}

/// True if the denominator is a power of two. Every weight reachable by
/// fair binary choice is of this form.
pub fn is_dyadic(r: &Rational) -> bool {
    let mut d = r.denom().clone();
    let two = BigInt::from(2);
    while (&d % &two).is_zero() {
        d /= &two;
    }
    d.is_one()
}

/// A closed probability interval `[lo, hi]` with exact endpoints.
///
/// Intervals bound quantities that a finite fragment cannot pin down
/// exactly: `lo` is the explored mass, `hi` adds whatever the deficit
/// could still contribute.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Interval {
    pub lo: Rational,
    pub hi: Rational,
}

impl Interval {
    pub fn new(lo: Rational, hi: Rational) -> Self {
        debug_assert!(lo <= hi);
        Interval { lo, hi }
    }

    pub fn exact(p: Rational) -> Self {
        Interval { lo: p.clone(), hi: p }
    }

    pub fn zero() -> Self {
        Interval::exact(rat_zero())
    }

    pub fn one() -> Self {
        Interval::exact(rat_one())
    }

    /// The whole unit interval: nothing is known.
    pub fn unknown() -> Self {
        Interval { lo: rat_zero(), hi: rat_one() }
    }

    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }

    /// Pointwise product; valid because both operands lie in `[0, 1]`.
    pub fn mul(&self, other: &Interval) -> Interval {
        Interval { lo: &self.lo * &other.lo, hi: &self.hi * &other.hi }
    }

    pub fn add(&self, other: &Interval) -> Interval {
        Interval { lo: &self.lo + &other.lo, hi: &self.hi + &other.hi }
    }

    pub fn scale(&self, w: &Rational) -> Interval {
        Interval { lo: &self.lo * w, hi: &self.hi * w }
    }

    /// Caps `hi` at 1; probabilities never exceed 1.
    pub fn clamp_unit(mut self) -> Interval {
        if self.hi > rat_one() {
            self.hi = rat_one();
        }
        self
    }

    pub fn disjoint(&self, other: &Interval) -> bool {
        self.hi < other.lo || other.hi < self.lo
    }

    pub fn overlaps(&self, other: &Interval) -> bool {
        !self.disjoint(other)
    }
}

impl std::fmt::Display for Interval {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_exact() {
            write!(f, "{}", format_rational(&self.lo))
        } else {
            write!(f, "[{}, {}]", format_rational(&self.lo), format_rational(&self.hi))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn format_and_parse_round_trip() {
        for s in ["0", "1", "3/4", "-1/2", "7"] {
            let r = parse_rational(s).unwrap();
            assert_eq!(format_rational(&r), s);
        }
        assert_eq!(parse_rational("2/4").map(|r| format_rational(&r)).unwrap(), "1/2");
        assert!(parse_rational("1/0").is_none());
        assert!(parse_rational("x").is_none());
    }

    #[test]
    fn dyadic_detection() {
        assert!(is_dyadic(&rat(1, 2)));
        assert!(is_dyadic(&rat(3, 8)));
        assert!(is_dyadic(&rat(5, 1)));
        assert!(!is_dyadic(&rat(1, 3)));
        assert!(!is_dyadic(&rat(1, 6)));
    }

    #[test]
    fn interval_ops() {
        let a = Interval::new(rat(1, 4), rat(1, 4));
        let b = Interval::new(rat(1, 2), rat(1, 1));
        assert!(a.disjoint(&b));
        assert!(!b.disjoint(&b));
        assert_eq!(a.mul(&b), Interval::new(rat(1, 8), rat(1, 4)));
        assert_eq!(a.add(&a), Interval::exact(rat(1, 2)));
    }
}
