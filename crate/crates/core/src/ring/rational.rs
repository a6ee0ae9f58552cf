//! Exact rational coefficients.
//!
//! `BigRational` already keeps values in lowest terms with a positive
//! denominator, and zero is always `0/1`, so this module only adds the few
//! helpers the rest of the crate leans on.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};

pub type Rational = BigRational;

/// `num / den` reduced to lowest terms. Panics on a zero denominator.
pub fn rat(num: i64, den: i64) -> Rational {
    assert!(den != 0, "zero denominator");
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(value: i64) -> Rational {
    BigRational::from_integer(BigInt::from(value))
}

pub fn from_u64(value: u64) -> Rational {
    BigRational::from_integer(BigInt::from(value))
}

/// Canonical text form: `p` for integers, `p/q` otherwise, sign on the numerator.
pub fn format_rational(value: &Rational) -> String {
    if value.denom().is_one() {
        value.numer().to_string()
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}

pub(crate) fn abs_is_one(value: &Rational) -> bool {
    value.abs().is_one()
}
