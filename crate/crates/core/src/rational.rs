//! Exact rational helpers.
//!
//! Probabilities are `num_rational::BigRational`, which keeps every value in
//! lowest terms with a positive denominator.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(v: impl Into<BigInt>) -> Rational {
    Rational::from_integer(v.into())
}

/// Parses `a/b` or a bare integer. Decimal notation is rejected.
pub fn parse_fraction(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("expected a fraction `a/b` or an integer, got `{s}`"));
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let num: BigInt = num.parse().map_err(|_| bad())?;
    let den: BigInt = den.parse().map_err(|_| bad())?;
    if den.is_zero() {
        return Err(Error::Parse(format!("zero denominator in `{s}`")));
    }
    Ok(Rational::new(num, den))
}

/// Parses a fraction, an integer, or a finite decimal such as `0.6` (read
/// exactly as 3/5). Only used where floating input is acceptable.
pub fn parse_decimal_or_fraction(s: &str) -> Result<Rational> {
    let t = s.trim();
    if let Some((whole, frac)) = t.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(Error::Parse(format!("malformed decimal `{t}`")));
        }
        let negative = whole.starts_with('-');
        let whole_digits = whole.trim_start_matches(['-', '+']);
        let digits = format!("{}{}", if whole_digits.is_empty() { "0" } else { whole_digits }, frac);
        let mut num: BigInt = digits.parse().map_err(|_| Error::Parse(format!("malformed decimal `{t}`")))?;
        if negative {
            num = -num;
        }
        let den = num_traits::pow(BigInt::from(10), frac.len());
        return Ok(Rational::new(num, den));
    }
    parse_fraction(t)
}

pub fn check_probability(p: &Rational) -> Result<()> {
    if p.is_negative() || *p > Rational::one() {
        return Err(Error::ProbabilityOutOfRange(p.to_string()));
    }
    Ok(())
}

pub fn pow(base: &Rational, exp: u64) -> Rational {
    // 0^0 = 1, matching the empty-product convention for closed boundaries.
    num_traits::pow(base.clone(), exp as usize)
}

pub fn to_f64(r: &Rational) -> f64 {
    match (r.numer().to_f64(), r.denom().to_f64()) {
        (Some(n), Some(d)) if n.is_finite() && d.is_finite() => n / d,
        _ => {
            // Scale down huge operands before dividing.
            let shift = r.denom().bits().max(r.numer().bits()).saturating_sub(1000);
            let n = (r.numer() >> shift).to_f64().unwrap_or(f64::NAN);
            let d = (r.denom() >> shift).to_f64().unwrap_or(f64::NAN);
            n / d
        }
    }
}

/// Enumerates `start, start + step, ...` up to and including `end`.
pub fn grid(start: &Rational, end: &Rational, step: &Rational) -> Result<Vec<Rational>> {
    if !step.is_positive() {
        return Err(Error::InvalidParameter(format!("grid step must be positive, got {step}")));
    }
    if start > end {
        return Err(Error::InvalidParameter(format!("grid start {start} exceeds end {end}")));
    }
    let mut out = Vec::new();
    let mut cur = start.clone();
    while cur <= *end {
        out.push(cur.clone());
        cur += step;
    }
    Ok(out)
}

/// Parses `a:b:step` where every part is a fraction.
pub fn parse_grid(s: &str) -> Result<Vec<Rational>> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::Parse(format!("expected `start:end:step`, got `{s}`")));
    }
    grid(&parse_fraction(parts[0])?, &parse_fraction(parts[1])?, &parse_fraction(parts[2])?)
}
