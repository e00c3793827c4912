//! Exact numbers of the form `a + b·√r` with rational `a`, `b`.
//!
//! Double sums weighted by `q^((n+m)/2)` split by parity into a rational part
//! and a `√q` part, so they can be compared against rationals without rounding.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Surd {
    rational: BigRational,
    root_coeff: BigRational,
    radicand: u32,
}

impl Surd {
    pub fn new(rational: BigRational, root_coeff: BigRational, radicand: u32) -> Self {
        Surd {
            rational,
            root_coeff,
            radicand,
        }
    }

    pub fn zero(radicand: u32) -> Self {
        Surd::from_rational(BigRational::zero(), radicand)
    }

    pub fn from_rational(r: BigRational, radicand: u32) -> Self {
        Surd::new(r, BigRational::zero(), radicand)
    }

    pub fn rational_part(&self) -> &BigRational {
        &self.rational
    }

    pub fn root_coeff(&self) -> &BigRational {
        &self.root_coeff
    }

    pub fn radicand(&self) -> u32 {
        self.radicand
    }

    pub fn to_f64(&self) -> f64 {
        ratio_to_f64(&self.rational) + ratio_to_f64(&self.root_coeff) * f64::from(self.radicand).sqrt()
    }

    /// Exact sign of `a + b√r`.
    pub fn signum(&self) -> Ordering {
        let sa = self.rational.cmp(&BigRational::zero());
        let sb = self.root_coeff.cmp(&BigRational::zero());
        if sb == Ordering::Equal || sa == sb {
            return if sa == Ordering::Equal { sb } else { sa };
        }
        if sa == Ordering::Equal {
            return sb;
        }
        // opposite signs: compare a² with b²r
        let a2 = &self.rational * &self.rational;
        let b2r = &self.root_coeff * &self.root_coeff * BigRational::from_integer(BigInt::from(self.radicand));
        match a2.cmp(&b2r) {
            Ordering::Greater => sa,
            Ordering::Less => sb,
            Ordering::Equal => Ordering::Equal,
        }
    }

    pub fn scale(&self, c: &BigRational) -> Surd {
        Surd::new(&self.rational * c, &self.root_coeff * c, self.radicand)
    }

    pub fn cmp_rational(&self, r: &BigRational) -> Ordering {
        Surd::new(&self.rational - r, self.root_coeff.clone(), self.radicand).signum()
    }
}

impl Add for &Surd {
    type Output = Surd;
    fn add(self, rhs: &Surd) -> Surd {
        assert_eq!(self.radicand, rhs.radicand);
        Surd::new(
            &self.rational + &rhs.rational,
            &self.root_coeff + &rhs.root_coeff,
            self.radicand,
        )
    }
}

impl Sub for &Surd {
    type Output = Surd;
    fn sub(self, rhs: &Surd) -> Surd {
        assert_eq!(self.radicand, rhs.radicand);
        Surd::new(
            &self.rational - &rhs.rational,
            &self.root_coeff - &rhs.root_coeff,
            self.radicand,
        )
    }
}

impl Mul<&BigRational> for &Surd {
    type Output = Surd;
    fn mul(self, rhs: &BigRational) -> Surd {
        self.scale(rhs)
    }
}

impl PartialOrd for Surd {
    fn partial_cmp(&self, other: &Surd) -> Option<Ordering> {
        if self.radicand != other.radicand {
            return None;
        }
        Some((self - other).signum())
    }
}

impl fmt::Display for Surd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.root_coeff.is_zero() {
            write!(f, "{}", self.rational)
        } else if self.rational.is_zero() {
            write!(f, "{}*sqrt({})", self.root_coeff, self.radicand)
        } else {
            let sign = if self.root_coeff.is_negative() { "-" } else { "+" };
            write!(
                f,
                "{} {} {}*sqrt({})",
                self.rational,
                sign,
                self.root_coeff.abs(),
                self.radicand
            )
        }
    }
}

/// Rational to `f64` that stays finite for huge numerators and denominators.
pub fn ratio_to_f64(r: &BigRational) -> f64 {
    if let Some(v) = r.to_f64() {
        if v.is_finite() {
            return v;
        }
    }
    let n = r.numer();
    let d = r.denom();
    let shift = n.bits().max(d.bits()).saturating_sub(1000);
    let ns = (n >> shift as usize).to_f64().unwrap_or(f64::NAN);
    let ds = (d >> shift as usize).to_f64().unwrap_or(f64::NAN);
    ns / ds
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn signs() {
        assert_eq!(Surd::new(r(2, 1), r(-1, 1), 3).signum(), Ordering::Greater);
        assert_eq!(Surd::new(r(1, 1), r(-1, 1), 3).signum(), Ordering::Less);
        assert_eq!(Surd::new(r(-3, 1), r(1, 1), 9).signum(), Ordering::Equal);
        assert_eq!(Surd::zero(5).signum(), Ordering::Equal);
        assert_eq!(Surd::new(r(0, 1), r(-1, 7), 5).signum(), Ordering::Less);
    }

    #[test]
    fn float_value_and_comparison() {
        let s = Surd::new(r(6, 1), r(4, 1), 3);
        assert!((s.to_f64() - (6.0 + 4.0 * 3f64.sqrt())).abs() < 1e-12);
        assert_eq!(s.cmp_rational(&r(12, 1)), Ordering::Greater);
        assert_eq!(s.cmp_rational(&r(13, 1)), Ordering::Less);
        assert!(Surd::from_rational(r(1, 2), 3) < s);
    }

    #[test]
    fn huge_ratio_to_float() {
        let big = BigRational::new(BigInt::from(10).pow(400) * 3, BigInt::from(10).pow(400));
        assert!((ratio_to_f64(&big) - 3.0).abs() < 1e-12);
    }
}
