//! Exact rational rates.
//!
//! Reception rates enter through decimal literals in network files. Capacity
//! and flow computations must be exact (the duality tests demand rational
//! equality), so rates are kept as arbitrary-precision rationals end to end
//! and only lowered to `f64` at the simulation boundary.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

pub type Rate = BigRational;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RateParseError {
    #[error("empty rate literal")]
    Empty,
    #[error("invalid rate literal {0:?}")]
    Invalid(String),
    #[error("zero denominator in rate literal {0:?}")]
    ZeroDenominator(String),
}

/// Parses a rate literal: a decimal such as `2.5` or `-0.125`, or a fraction
/// `p/q` (the serializer's fallback for non-decimal rationals).
pub fn parse_rate(s: &str) -> Result<Rate, RateParseError> {
    let s = s.trim();
    if s.is_empty() {
        return Err(RateParseError::Empty);
    }
    if let Some((num, den)) = s.split_once('/') {
        let n: BigInt = num
            .parse()
            .map_err(|_| RateParseError::Invalid(s.to_string()))?;
        let d: BigInt = den
            .parse()
            .map_err(|_| RateParseError::Invalid(s.to_string()))?;
        if d.is_zero() {
            return Err(RateParseError::ZeroDenominator(s.to_string()));
        }
        return Ok(BigRational::new(n, d));
    }
    let (sign, digits) = match s.strip_prefix('-') {
        Some(rest) => (-1, rest),
        None => (1, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int_part, frac_part) = match digits.split_once('.') {
        Some((i, f)) => (i, f),
        None => (digits, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(RateParseError::Invalid(s.to_string()));
    }
    if !int_part.chars().all(|c| c.is_ascii_digit())
        || !frac_part.chars().all(|c| c.is_ascii_digit())
        || (digits.contains('.') && frac_part.is_empty())
    {
        return Err(RateParseError::Invalid(s.to_string()));
    }
    let mut numerator: BigInt = if int_part.is_empty() {
        BigInt::zero()
    } else {
        int_part
            .parse()
            .map_err(|_| RateParseError::Invalid(s.to_string()))?
    };
    let mut denominator = BigInt::one();
    for c in frac_part.chars() {
        numerator = numerator * 10 + c.to_digit(10).unwrap();
        denominator *= 10;
    }
    Ok(BigRational::new(numerator * sign, denominator))
}

/// Formats a rate canonically: an exact finite decimal whenever the reduced
/// denominator divides a power of ten, otherwise `p/q`. Round-trips through
/// [`parse_rate`].
pub fn format_rate(r: &Rate) -> String {
    let reduced = r.reduced();
    let mut den = reduced.denom().clone();
    let mut twos = 0u32;
    let mut fives = 0u32;
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    while (&den % &two).is_zero() {
        den /= &two;
        twos += 1;
    }
    while (&den % &five).is_zero() {
        den /= &five;
        fives += 1;
    }
    if !den.is_one() {
        return format!("{}/{}", reduced.numer(), reduced.denom());
    }
    let k = twos.max(fives);
    let scale = BigInt::from(10).pow(k);
    let scaled = (reduced.numer() * &scale / reduced.denom()).abs();
    let sign = if reduced.is_negative() { "-" } else { "" };
    if k == 0 {
        return format!("{sign}{scaled}");
    }
    let digits = scaled.to_string();
    let digits = if digits.len() <= k as usize {
        format!("{}{}", "0".repeat(k as usize + 1 - digits.len()), digits)
    } else {
        digits
    };
    let (int_part, frac_part) = digits.split_at(digits.len() - k as usize);
    let frac_part = frac_part.trim_end_matches('0');
    if frac_part.is_empty() {
        format!("{sign}{int_part}")
    } else {
        format!("{sign}{int_part}.{frac_part}")
    }
}

/// Lowers a rate to f64 for the simulation layer.
pub fn rate_to_f64(r: &Rate) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Convenience constructor for integer rates.
pub fn rate_from_u64(v: u64) -> Rate {
    BigRational::from_integer(BigInt::from(v))
}
