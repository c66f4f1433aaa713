//! Exact rationals used for every distance value.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use std::str::FromStr;

use crate::error::Error;

pub type Rational = num_rational::BigRational;

/// `n/d` as a rational. Panics on `d == 0`.
pub fn q(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Parses `p/q` or `p`, reducing to lowest terms.
pub fn parse_rational(text: &str) -> Result<Rational, Error> {
    let t = text.trim();
    let bad = || Error::Parse(format!("not a rational: {t:?}"));
    if t.is_empty() || t.contains(char::is_whitespace) {
        return Err(bad());
    }
    let r = Rational::from_str(t).map_err(|_| bad())?;
    Ok(r)
}

pub fn parse_nonneg(text: &str) -> Result<Rational, Error> {
    let r = parse_rational(text)?;
    if r.is_negative() {
        return Err(Error::Parse(format!("negative distance {text:?}")));
    }
    Ok(r)
}

pub fn is_multiple(x: &Rational, step: &Rational) -> bool {
    (x / step).is_integer()
}

pub fn midpoint(a: &Rational, b: &Rational) -> Rational {
    (a + b) / int(2)
}

pub fn is_zero(x: &Rational) -> bool {
    x.is_zero()
}
