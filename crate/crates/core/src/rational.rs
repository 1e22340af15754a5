//! Exact rational scalars and their `"p/q"` wire format.
//!
//! Every analytic quantity in this crate is a [`Rat`] (an arbitrary-precision
//! rational, always kept in lowest terms). Floats appear only at display
//! boundaries.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact rational number in lowest terms.
pub type Rat = BigRational;

/// Shorthand for `n/d` from machine integers.
pub fn ratio(numer: i64, denom: i64) -> Rat {
    Rat::new(BigInt::from(numer), BigInt::from(denom))
}

/// Shorthand for the integer `n` as a rational.
pub fn int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Integer `n` as a rational, from a usize.
pub fn int_u(n: usize) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Parses `"p/q"` or `"n"` (optionally signed, surrounding whitespace ok).
pub fn parse_rat(s: &str) -> Result<Rat> {
    let trimmed = s.trim();
    let err = || Error::RationalParse {
        input: s.to_string(),
    };
    match trimmed.split_once('/') {
        Some((n, d)) => {
            let numer: BigInt = n.trim().parse().map_err(|_| err())?;
            let denom: BigInt = d.trim().parse().map_err(|_| err())?;
            if denom.is_zero() {
                return Err(err());
            }
            Ok(Rat::new(numer, denom))
        }
        None => {
            let numer: BigInt = trimmed.parse().map_err(|_| err())?;
            Ok(Rat::from_integer(numer))
        }
    }
}

/// Renders in lowest terms: `"p/q"`, or just `"n"` for integers.
pub fn rat_string(r: &Rat) -> String {
    r.to_string()
}

/// Nearest f64, for display-only fields.
pub fn rat_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        let n = r.numer().to_f64().unwrap_or(f64::NAN);
        let d = r.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

/// True if `r` lies strictly between 0 and 1.
pub fn strictly_between_zero_and_one(r: &Rat) -> bool {
    r.is_positive() && *r < Rat::one()
}

/// `ceil(r * 2^64)` clamped to `[0, 2^64]`, as a u128.
///
/// Used to turn a rational probability threshold into an integer that a raw
/// 64-bit uniform draw can be compared against exactly: `u < ceil(r * 2^64)`
/// iff `u / 2^64 < r` for integer `u`.
pub fn ceil_scaled_2_64(r: &Rat) -> u128 {
    if !r.is_positive() {
        return 0;
    }
    let one = Rat::one();
    let scaled = if *r >= one {
        return 1u128 << 64;
    } else {
        r * Rat::from_integer(BigInt::from(1u128 << 64))
    };
    let ceil = scaled.ceil();
    ceil.numer()
        .to_u128()
        .unwrap_or(1u128 << 64)
        .min(1u128 << 64)
}

/// serde adapter: a single rational as a `"p/q"` string.
pub mod serde_rat {
    use super::{parse_rat, rat_string, Rat};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rat, ser: S) -> std::result::Result<S::Ok, S::Error> {
        ser.serialize_str(&rat_string(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> std::result::Result<Rat, D::Error> {
        let s = String::deserialize(de)?;
        parse_rat(&s).map_err(serde::de::Error::custom)
    }
}

/// serde adapter: a vector of rationals as `"p/q"` strings.
pub mod serde_rat_vec {
    use super::{parse_rat, rat_string, Rat};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[Rat], ser: S) -> std::result::Result<S::Ok, S::Error> {
        ser.collect_seq(v.iter().map(rat_string))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        de: D,
    ) -> std::result::Result<Vec<Rat>, D::Error> {
        let strings = Vec::<String>::deserialize(de)?;
        strings
            .iter()
            .map(|s| parse_rat(s).map_err(serde::de::Error::custom))
            .collect()
    }
}
