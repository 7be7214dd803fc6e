//! Exact rational scalars shared by every layer of the crate.

use num_bigint::BigInt;
use num_rational::Ratio;
use num_traits::{One, Signed, Zero};

/// Arbitrary-precision rational. All arithmetic in this crate is exact;
/// floating point never appears in any analysis path.
pub type Rat = Ratio<BigInt>;

/// Shorthand for an integer-valued rational.
pub fn rat_int(n: i64) -> Rat {
    Ratio::from_integer(BigInt::from(n))
}

/// Shorthand for `n/d`.
pub fn rat(n: i64, d: i64) -> Rat {
    Ratio::new(BigInt::from(n), BigInt::from(d))
}

/// Renders a rational as `num/den`, omitting the denominator when it is 1.
pub fn render_rat(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses integers (`42`), decimals (`1.002` as 501/500) and fractions
/// (`3/2`) into exact rationals.
pub fn parse_rat(text: &str) -> Option<Rat> {
    let text = text.trim();
    if text.is_empty() {
        return None;
    }
    if let Some((num, den)) = text.split_once('/') {
        let n: BigInt = num.trim().parse().ok()?;
        let d: BigInt = den.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(Ratio::new(n, d));
    }
    if let Some((int_part, frac_part)) = text.split_once('.') {
        let negative = int_part.trim_start().starts_with('-');
        let int_part = if int_part.is_empty() || int_part == "-" {
            BigInt::zero()
        } else {
            int_part.parse().ok()?
        };
        if frac_part.is_empty() || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let scale = BigInt::from(10u32).pow(frac_part.len() as u32);
        let frac: BigInt = frac_part.parse().ok()?;
        let magnitude = int_part.abs() * &scale + frac;
        let signed = if negative { -magnitude } else { magnitude };
        return Some(Ratio::new(signed, scale));
    }
    let n: BigInt = text.parse().ok()?;
    Some(Ratio::from_integer(n))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_decimals_exactly() {
        assert_eq!(parse_rat("1.002").unwrap(), rat(501, 500));
        assert_eq!(parse_rat("1026.048").unwrap(), rat(128_256, 125));
        assert_eq!(parse_rat("-0.5").unwrap(), rat(-1, 2));
        assert_eq!(parse_rat("0.25").unwrap(), rat(1, 4));
    }

    #[test]
    fn parses_fractions_and_integers() {
        assert_eq!(parse_rat("3/2").unwrap(), rat(3, 2));
        assert_eq!(parse_rat("42").unwrap(), rat_int(42));
        assert_eq!(parse_rat("-7").unwrap(), rat_int(-7));
        assert!(parse_rat("1/0").is_none());
        assert!(parse_rat("abc").is_none());
        assert!(parse_rat("").is_none());
    }

    #[test]
    fn renders_with_denominator_only_when_needed() {
        assert_eq!(render_rat(&rat_int(5)), "5");
        assert_eq!(render_rat(&rat(128_256, 125)), "128256/125");
        assert_eq!(render_rat(&rat(-1, 2)), "-1/2");
    }
}
