//! Exact rational scalars.
//!
//! All coefficient arithmetic in this crate runs over arbitrary-precision
//! rationals, kept reduced with positive denominator by `num`. Rationals
//! serialize as the string `"p/q"` with the denominator omitted when it is 1.

use std::str::FromStr;

use num::{BigInt, BigRational};

use crate::error::Error;

/// Arbitrary-precision rational number, always in lowest terms.
pub type Rat = BigRational;

/// Arbitrary-precision integer.
pub type Int = BigInt;

/// The rational `n/d`.
pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(Int::from(n), Int::from(d))
}

/// The integer `n` as a rational.
pub fn rat_int(n: i64) -> Rat {
    Rat::from(Int::from(n))
}

/// Renders `"p/q"`, omitting `/q` when the denominator is 1.
///
/// This is the wire format used by all JSON output.
pub fn format_rat(r: &Rat) -> String {
    r.to_string()
}

/// Parses the `"p/q"` wire format (plain integers allowed).
pub fn parse_rat(s: &str) -> Result<Rat, Error> {
    Rat::from_str(s.trim()).map_err(|_| Error::ParseRational(s.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::One;

    #[test]
    fn wire_format_round_trip() {
        assert_eq!(format_rat(&rat(-691, 2730)), "-691/2730");
        assert_eq!(format_rat(&rat(3, 1)), "3");
        assert_eq!(format_rat(&rat(0, 5)), "0");
        assert_eq!(parse_rat("-1/2").unwrap(), rat(-1, 2));
        assert_eq!(parse_rat("7").unwrap(), rat_int(7));
        assert!(parse_rat("x/y").is_err());
    }

    #[test]
    fn always_reduced() {
        let r = rat(6, -4);
        assert_eq!(r, rat(-3, 2));
        assert!(rat(4, 4).is_one());
    }
}
