//! Nonnegative quantities that are exact rationals where the underlying
//! computation is combinatorial and floating point otherwise.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

/// Default absolute tolerance for comparing approximate measures.
pub const TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug)]
pub enum Measure {
    Exact(BigRational),
    Approx(f64),
}

impl Measure {
    pub fn zero() -> Self {
        Measure::Exact(BigRational::zero())
    }

    pub fn one() -> Self {
        Measure::Exact(BigRational::one())
    }

    pub fn ratio(num: u128, den: u128) -> Self {
        Measure::Exact(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Measure::Exact(_))
    }

    pub fn as_exact(&self) -> Option<&BigRational> {
        match self {
            Measure::Exact(r) => Some(r),
            Measure::Approx(_) => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Measure::Exact(r) => r.to_f64().unwrap_or(f64::NAN),
            Measure::Approx(x) => *x,
        }
    }

    /// Zero exactly, or within [`TOLERANCE`] for approximate values.
    pub fn is_zero(&self) -> bool {
        match self {
            Measure::Exact(r) => r.is_zero(),
            Measure::Approx(x) => x.abs() <= TOLERANCE,
        }
    }

    /// Equality: exact when both sides are exact, otherwise within `tol`.
    pub fn approx_eq(&self, other: &Measure, tol: f64) -> bool {
        match (self, other) {
            (Measure::Exact(a), Measure::Exact(b)) => a == b,
            _ => (self.to_f64() - other.to_f64()).abs() <= tol,
        }
    }

    pub fn abs_diff(&self, other: &Measure) -> Measure {
        match (self, other) {
            (Measure::Exact(a), Measure::Exact(b)) => {
                let d = a - b;
                Measure::Exact(if d < BigRational::zero() { -d } else { d })
            }
            _ => Measure::Approx((self.to_f64() - other.to_f64()).abs()),
        }
    }
}

impl PartialEq for Measure {
    fn eq(&self, other: &Self) -> bool {
        self.approx_eq(other, TOLERANCE)
    }
}

impl PartialOrd for Measure {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        match (self, other) {
            (Measure::Exact(a), Measure::Exact(b)) => a.partial_cmp(b),
            _ => self.to_f64().partial_cmp(&other.to_f64()),
        }
    }
}

impl Add for &Measure {
    type Output = Measure;
    fn add(self, rhs: &Measure) -> Measure {
        match (self, rhs) {
            (Measure::Exact(a), Measure::Exact(b)) => Measure::Exact(a + b),
            _ => Measure::Approx(self.to_f64() + rhs.to_f64()),
        }
    }
}

impl Sub for &Measure {
    type Output = Measure;
    fn sub(self, rhs: &Measure) -> Measure {
        match (self, rhs) {
            (Measure::Exact(a), Measure::Exact(b)) => Measure::Exact(a - b),
            _ => Measure::Approx(self.to_f64() - rhs.to_f64()),
        }
    }
}

impl Mul for &Measure {
    type Output = Measure;
    fn mul(self, rhs: &Measure) -> Measure {
        match (self, rhs) {
            (Measure::Exact(a), Measure::Exact(b)) => Measure::Exact(a * b),
            _ => Measure::Approx(self.to_f64() * rhs.to_f64()),
        }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Measure::Exact(r) if r.is_integer() => write!(f, "{}", r.numer()),
            Measure::Exact(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            Measure::Approx(x) => write!(f, "{x}"),
        }
    }
}

impl Serialize for Measure {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Measure::Exact(_) => serializer.serialize_str(&self.to_string()),
            Measure::Approx(x) => serializer.serialize_f64(*x),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_arithmetic_stays_exact() {
        let a = Measure::ratio(1, 3);
        let b = Measure::ratio(1, 6);
        assert_eq!((&a + &b).to_string(), "1/2");
        assert_eq!((&a - &b).to_string(), "1/6");
        assert_eq!((&a * &b).to_string(), "1/18");
        assert!((&a - &a).is_zero());
    }

    #[test]
    fn mixed_arithmetic_degrades_to_float() {
        let a = Measure::ratio(1, 4);
        let b = Measure::Approx(0.5);
        let s = &a + &b;
        assert!(!s.is_exact());
        assert!((s.to_f64() - 0.75).abs() < 1e-15);
    }
}
