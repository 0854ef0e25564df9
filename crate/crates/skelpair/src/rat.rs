//! Exact rational scalars and their text form.
//!
//! Every exact quantity in this crate is a `Rat` (an arbitrary-precision
//! rational). The interchange form is the string "p/q" in lowest terms with
//! q > 0; integers are printed as "p/1" so the format is uniform.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::traits::ToPrimitive;
use thiserror::Error;

/// Exact rational number used throughout the crate.
pub type Rat = BigRational;

/// Error produced when a rational literal cannot be parsed.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseRatError {
    #[error("empty rational literal")]
    Empty,
    #[error("invalid integer part in rational literal {0:?}")]
    BadInteger(String),
    #[error("zero denominator in rational literal {0:?}")]
    ZeroDenominator(String),
}

/// Builds a `Rat` from machine integers.
pub fn rat(p: i64, q: i64) -> Rat {
    Rat::new(BigInt::from(p), BigInt::from(q))
}

/// Builds an integer `Rat`.
pub fn rat_int(p: i64) -> Rat {
    Rat::from(BigInt::from(p))
}

/// Formats a rational as "p/q" in lowest terms with positive denominator.
///
/// `Rat` normalizes on construction, so the numerator carries the sign and
/// the denominator is always positive; integers come out as "p/1".
pub fn format_rat(r: &Rat) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parses "p/q" or a bare integer "p" into a `Rat`.
pub fn parse_rat(s: &str) -> Result<Rat, ParseRatError> {
    let s = s.trim();
    if s.is_empty() {
        return Err(ParseRatError::Empty);
    }
    let (num_str, den_str) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), Some(d.trim())),
        None => (s, None),
    };
    let numer: BigInt = num_str
        .parse()
        .map_err(|_| ParseRatError::BadInteger(s.to_string()))?;
    let denom: BigInt = match den_str {
        Some(d) => d
            .parse()
            .map_err(|_| ParseRatError::BadInteger(s.to_string()))?,
        None => BigInt::from(1),
    };
    if denom == BigInt::from(0) {
        return Err(ParseRatError::ZeroDenominator(s.to_string()));
    }
    Ok(Rat::new(numer, denom))
}

/// Rounds a finite double to the nearest rational with denominator 2^53.
///
/// This is the dyadic embedding used when expression values enter the exact
/// grid path: for |x| ≤ 1 it is exact on representable doubles, and beyond
/// that it rounds, which is all the exact layer requires. Returns `None` for
/// non-finite input or magnitudes too large to make sense as grid values.
pub fn dyadic53(x: f64) -> Option<Rat> {
    if !x.is_finite() || x.abs() > 1e15 {
        return None;
    }
    let scaled = (x * DYADIC_DEN_F64).round() as i128;
    Some(Rat::new(BigInt::from(scaled), BigInt::from(DYADIC_DEN_I128)))
}

const DYADIC_DEN_I128: i128 = 1 << 53;
const DYADIC_DEN_F64: f64 = (1u64 << 53) as f64;

/// Converts a rational to the nearest double.
pub fn rat_to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}
