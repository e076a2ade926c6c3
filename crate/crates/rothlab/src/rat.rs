use num_bigint::BigInt;
use num_rational::BigRational;

use crate::Error;

/// Exact rational number used for all certification arithmetic.
pub type Rat = BigRational;

pub(crate) fn rat_int(v: i128) -> Rat {
    Rat::from_integer(BigInt::from(v))
}

pub(crate) fn rat_frac(num: i128, den: i128) -> Rat {
    Rat::new(BigInt::from(num), BigInt::from(den))
}

/// Renders a rational as `"p/q"` in lowest terms (`"p"` when q = 1).
pub fn ratio_string(r: &Rat) -> String {
    if r.denom() == &BigInt::from(1) {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses `"p/q"`, a plain integer, or a decimal like `0.5` into a rational.
pub fn parse_ratio(s: &str) -> Result<Rat, Error> {
    let s = s.trim();
    let bad = || Error::InvalidInput(format!("cannot parse rational from {s:?}"));
    if let Some((p, q)) = s.split_once('/') {
        let num: BigInt = p.trim().parse().map_err(|_| bad())?;
        let den: BigInt = q.trim().parse().map_err(|_| bad())?;
        if den == BigInt::from(0) {
            return Err(Error::InvalidInput("zero denominator".into()));
        }
        return Ok(Rat::new(num, den));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let digits = frac.len() as u32;
        let int_part: BigInt = if int.is_empty() { BigInt::from(0) } else { int.parse().map_err(|_| bad())? };
        let frac_part: BigInt = if frac.is_empty() { BigInt::from(0) } else { frac.parse().map_err(|_| bad())? };
        if frac_part < BigInt::from(0) {
            return Err(bad());
        }
        let scale = BigInt::from(10u32).pow(digits);
        let negative = s.starts_with('-');
        let magnitude = int_part.clone() * &scale + if negative { -frac_part } else { frac_part };
        return Ok(Rat::new(magnitude, scale));
    }
    let num: BigInt = s.parse().map_err(|_| bad())?;
    Ok(Rat::from_integer(num))
}

/// Serde helper: rationals serialize as `"p/q"` strings.
pub(crate) mod serde_ratio {
    use super::{ratio_string, Rat};
    use serde::Serializer;

    pub fn serialize<S: Serializer>(r: &Rat, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&ratio_string(r))
    }
}
