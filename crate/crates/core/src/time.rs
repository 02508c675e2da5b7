//! Exact time values.
//!
//! Clock values and timestamps are arbitrary-precision rationals. Guard
//! endpoints and timeout durations are integers, so every comparison the
//! semantics needs is exact.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use thiserror::Error;

pub type Rational = BigRational;

/// The rational `n`.
pub fn int(n: u64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// The rational `num / den`. Panics if `den` is zero.
pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// `⌊r⌋` for a non-negative rational, saturating at `u64::MAX`.
pub fn floor_u64(r: &Rational) -> u64 {
    r.floor().to_integer().to_u64().unwrap_or(u64::MAX)
}

pub fn is_integer(r: &Rational) -> bool {
    r.is_integer()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseRationalError {
    #[error("empty rational literal")]
    Empty,
    #[error("malformed rational literal `{0}`")]
    Malformed(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
    #[error("negative time value `{0}`")]
    Negative(String),
}

/// Parses a non-negative time literal: an integer (`3`), a fraction
/// (`5/2`) or a finite decimal (`2.25`). Decimals are converted exactly.
pub fn parse_time(text: &str) -> Result<Rational, ParseRationalError> {
    let s = text.trim();
    if s.is_empty() {
        return Err(ParseRationalError::Empty);
    }
    let malformed = || ParseRationalError::Malformed(s.to_string());
    let value = if let Some((num, den)) = s.split_once('/') {
        let num: BigInt = parse_digits(num.trim()).ok_or_else(malformed)?;
        let den: BigInt = parse_digits(den.trim()).ok_or_else(malformed)?;
        if den.is_zero() {
            return Err(ParseRationalError::ZeroDenominator(s.to_string()));
        }
        Rational::new(num, den)
    } else if let Some((whole, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(malformed());
        }
        let whole = if whole.is_empty() { "0" } else { whole };
        let whole: BigInt = parse_digits(whole).ok_or_else(malformed)?;
        let frac_num: BigInt = frac.parse().map_err(|_| malformed())?;
        let scale = num_traits::pow(BigInt::from(10u32), frac.len());
        Rational::from_integer(whole) + Rational::new(frac_num, scale)
    } else {
        Rational::from_integer(parse_digits(s).ok_or_else(malformed)?)
    };
    if value.is_negative() {
        return Err(ParseRationalError::Negative(s.to_string()));
    }
    Ok(value)
}

fn parse_digits(s: &str) -> Option<BigInt> {
    let digits = s.strip_prefix('-').unwrap_or(s);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

/// Renders a rational as `p/q`, or `p` when it is an integer.
pub fn format_time(r: &Rational) -> String {
    r.to_string()
}
