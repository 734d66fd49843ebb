use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};

use super::LinError;

/// Ground field element: an arbitrary-precision rational, always in lowest
/// terms with positive denominator. All arithmetic is exact.
pub type Scalar = BigRational;

/// Parse `"p/q"` or `"n"`. A zero denominator is an error, never a panic.
pub fn parse_scalar(text: &str) -> Result<Scalar, LinError> {
    let bad = |reason: &str| LinError::BadScalar {
        text: text.to_owned(),
        reason: reason.to_owned(),
    };
    let s = text.trim();
    let (num_str, den_str) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), Some(d.trim())),
        None => (s, None),
    };
    let numer: BigInt = num_str.parse().map_err(|_| bad("invalid numerator"))?;
    let denom: BigInt = match den_str {
        Some(d) => d.parse().map_err(|_| bad("invalid denominator"))?,
        None => BigInt::one(),
    };
    if denom.is_zero() {
        return Err(bad("zero denominator"));
    }
    Ok(BigRational::new(numer, denom))
}

/// Render as `"p/q"`, or just `"n"` when the value is integral.
pub fn format_scalar(x: &Scalar) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Convenience constructor for integer scalars.
pub fn int(n: i64) -> Scalar {
    BigRational::from_integer(BigInt::from(n))
}

/// Convenience constructor for `p/q` scalars; panics on `q == 0`.
pub fn frac(p: i64, q: i64) -> Scalar {
    assert!(q != 0, "zero denominator");
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

#[allow(unused)]
pub fn is_negative(x: &Scalar) -> bool {
    x.is_negative()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format_round_trip() {
        for s in ["0", "5", "-7", "1/2", "-3/4", "22/7"] {
            let x = parse_scalar(s).unwrap();
            assert_eq!(format_scalar(&x), s);
        }
        // not in lowest terms normalises
        assert_eq!(format_scalar(&parse_scalar("2/4").unwrap()), "1/2");
        assert_eq!(format_scalar(&parse_scalar("4/-2").unwrap()), "-2");
    }

    #[test]
    fn zero_denominator_is_an_error() {
        assert!(matches!(
            parse_scalar("1/0"),
            Err(LinError::BadScalar { .. })
        ));
        assert!(parse_scalar("x/2").is_err());
        assert!(parse_scalar("").is_err());
    }
}
