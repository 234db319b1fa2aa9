//! Exact rational helpers: factorials, decimal parsing, and safe conversion
//! of very large or very small rationals to floating point.

use num_bigint::{BigInt, BigUint, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Arbitrary-precision rational, always stored in lowest terms with a
/// positive denominator.
pub type Rational = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid decimal literal {0:?}")]
pub struct ParseDecimalError(pub String);

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn factorial(n: u32) -> BigInt {
    (2..=n).fold(BigInt::one(), |acc, k| acc * k)
}

/// `m! / (m - i)!`, the coefficient produced by `i` rounds of integration by
/// parts on `x^m`.
pub fn falling_factorial(m: u32, i: u32) -> BigInt {
    debug_assert!(i <= m);
    ((m - i + 1)..=m).fold(BigInt::one(), |acc, k| acc * k)
}

/// Parses `12`, `-0.25`, `1.5e-3`, `3/4` exactly. Decimal points and
/// exponents never pass through a float.
pub fn parse_rational(text: &str) -> Result<Rational, ParseDecimalError> {
    let err = || ParseDecimalError(text.to_string());
    let s = text.trim();
    if s.is_empty() {
        return Err(err());
    }
    if let Some((num, den)) = s.split_once('/') {
        let num: BigInt = num.trim().parse().map_err(|_| err())?;
        let den: BigInt = den.trim().parse().map_err(|_| err())?;
        if den.is_zero() {
            return Err(err());
        }
        return Ok(Rational::new(num, den));
    }

    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => {
            let exp: i64 = s[pos + 1..].parse().map_err(|_| err())?;
            (&s[..pos], exp)
        }
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.as_bytes().first() {
        Some(b'-') => (true, &mantissa[1..]),
        Some(b'+') => (false, &mantissa[1..]),
        _ => (false, mantissa),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(err());
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return Err(err());
    }
    let all_digits = format!("{int_part}{frac_part}");
    let mut value = Rational::from_integer(all_digits.parse::<BigInt>().map_err(|_| err())?);
    let scale = exponent - frac_part.len() as i64;
    let ten = Rational::from_integer(BigInt::from(10));
    if scale >= 0 {
        value *= num_traits::pow(ten, scale as usize);
    } else {
        value /= num_traits::pow(ten, (-scale) as usize);
    }
    Ok(if negative { -value } else { value })
}

/// `10^(db/10)` rounded to 12 significant decimal digits and read back as an
/// exact rational, so grids are reproducible bit for bit.
pub fn db_to_gamma(db: f64) -> Rational {
    let linear = 10f64.powf(db / 10.0);
    parse_rational(&format!("{linear:.11e}")).expect("formatted float is a valid literal")
}

fn log10_biguint(n: &BigUint) -> f64 {
    let bits = n.bits();
    if bits <= 1000 {
        return n.to_f64().unwrap_or(f64::INFINITY).log10();
    }
    let shift = bits - 64;
    let top = (n >> shift).to_f64().unwrap_or(f64::NAN);
    top.log10() + shift as f64 * std::f64::consts::LOG10_2
}

/// log10 of a positive rational, accurate even when the value lies far
/// outside the `f64` range.
pub fn log10(x: &Rational) -> f64 {
    assert!(x.is_positive(), "log10 of a non-positive rational");
    log10_biguint(x.numer().magnitude()) - log10_biguint(x.denom().magnitude())
}

pub fn to_f64(x: &Rational) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    let direct = x.to_f64().unwrap_or(f64::NAN);
    if direct.is_finite() && direct != 0.0 {
        return direct;
    }
    let sign = if x.numer().sign() == Sign::Minus { -1.0 } else { 1.0 };
    sign * 10f64.powf(log10(&x.abs()))
}

/// Renders `num/den` (always with an explicit denominator).
pub fn to_literal(x: &Rational) -> String {
    format!("{}/{}", x.numer(), x.denom())
}
