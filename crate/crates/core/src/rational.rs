//! Helpers around [`BigRational`]: construction, parsing and the canonical
//! `"a/b"` string form used by every file format in the crate.

use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::Error;

pub type Rational = BigRational;

pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// `"a"` for integers, `"a/b"` otherwise.
pub fn fmt_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses `"a"`, `"a/b"` or `"a/p^k"` (the last one is how H_p scalars are
/// written out).
pub fn parse_rational(s: &str) -> Result<Rational, Error> {
    let bad = || Error::Parse(format!("malformed rational {s:?}"));
    let s = s.trim();
    match s.split_once('/') {
        None => BigInt::from_str(s).map(Rational::from_integer).map_err(|_| bad()),
        Some((num, den)) => {
            let num = BigInt::from_str(num.trim()).map_err(|_| bad())?;
            let den = match den.split_once('^') {
                None => BigInt::from_str(den.trim()).map_err(|_| bad())?,
                Some((base, exp)) => {
                    let base = BigInt::from_str(base.trim()).map_err(|_| bad())?;
                    let exp = u32::from_str(exp.trim()).map_err(|_| bad())?;
                    num_traits::pow(base, exp as usize)
                }
            };
            if den.is_zero() || den.is_negative() {
                return Err(bad());
            }
            Ok(Rational::new(num, den))
        }
    }
}

/// Largest multiple of `unit` that is `<= x`.
pub fn floor_to(x: &Rational, unit: &Rational) -> Rational {
    (x / unit).floor() * unit
}

/// Smallest multiple of `unit` that is `>= x`.
pub fn ceil_to(x: &Rational, unit: &Rational) -> Rational {
    (x / unit).ceil() * unit
}

/// `p^e` for a possibly negative exponent.
pub fn pow_rational(p: u64, e: i64) -> Rational {
    let base = Rational::from_integer(BigInt::from(p));
    if e >= 0 {
        num_traits::pow(base, e as usize)
    } else {
        num_traits::pow(base, (-e) as usize).recip()
    }
}

/// Rough float view, only for rendering.
pub fn to_f64(r: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

pub fn is_integer(r: &Rational) -> bool {
    r.denom().is_one()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format() {
        assert_eq!(parse_rational("3").unwrap(), int(3));
        assert_eq!(parse_rational("-7/14").unwrap(), rat(-1, 2));
        assert_eq!(parse_rational("7/5^2").unwrap(), rat(7, 25));
        assert_eq!(fmt_rational(&rat(6, -4)), "-3/2");
        assert_eq!(fmt_rational(&int(0)), "0");
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x/2").is_err());
        assert!(parse_rational("").is_err());
        assert!(parse_rational("1.5").is_err());
    }

    #[test]
    fn lattice_rounding() {
        let u = rat(1, 4);
        assert_eq!(floor_to(&rat(-1, 3), &u), rat(-1, 2));
        assert_eq!(ceil_to(&rat(-1, 3), &u), rat(-1, 4));
        assert_eq!(ceil_to(&rat(1, 2), &u), rat(1, 2));
        assert_eq!(pow_rational(3, -2), rat(1, 9));
    }
}
