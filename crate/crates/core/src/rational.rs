//! Small helpers around [`BigRational`]: construction shorthands, decimal
//! rendering, and the `{num, den}` JSON encoding used by every report.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub type Rational = BigRational;

/// `num/den` as an exact rational. Panics on a zero denominator.
pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn to_f64(q: &Rational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

/// Renders `x` with six significant digits, trailing zeros trimmed.
pub fn sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (5 - magnitude).max(0) as usize;
    let s = format!("{x:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// `"p/q"` (or `"p"` for integers) followed by the six-digit decimal view.
pub fn describe(q: &Rational) -> String {
    format!("{q} (≈{})", sig6(to_f64(q)))
}

/// Parses `"3"`, `"-3/4"` or a terminating decimal such as `"22.5"`.
pub fn parse(s: &str) -> Option<Rational> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(Rational::new(n, d));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let negative = whole.starts_with('-');
        let whole_digits = whole.trim_start_matches(['-', '+']);
        if !whole_digits.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let digits: BigInt = format!("{whole_digits}{frac}").parse().ok()?;
        let scale = num_traits::pow(BigInt::from(10), frac.len());
        let q = Rational::new(digits, scale);
        return Some(if negative { -q } else { q });
    }
    s.parse::<BigInt>().ok().map(Rational::from_integer)
}

/// Decimal form when the expansion terminates, `p/q` otherwise.
pub fn format_terminating(q: &Rational) -> String {
    if q.is_integer() {
        return q.numer().to_string();
    }
    let mut den = q.denom().clone();
    let (two, five) = (BigInt::from(2), BigInt::from(5));
    let mut places = 0usize;
    let (mut twos, mut fives) = (0usize, 0usize);
    while (&den % &two).is_zero() {
        den /= &two;
        twos += 1;
    }
    while (&den % &five).is_zero() {
        den /= &five;
        fives += 1;
    }
    if !den.is_one() {
        return q.to_string();
    }
    places = places.max(twos).max(fives);
    let scaled = q * Rational::from_integer(num_traits::pow(BigInt::from(10), places));
    let digits = scaled.to_integer();
    let negative = digits < BigInt::zero();
    let mut body = if negative { -digits } else { digits }.to_string();
    if body.len() <= places {
        body = format!("{}{body}", "0".repeat(places + 1 - body.len()));
    }
    let split = body.len() - places;
    format!(
        "{}{}.{}",
        if negative { "-" } else { "" },
        &body[..split],
        &body[split..]
    )
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum JsonInt {
    Small(i64),
    Big(String),
}

impl JsonInt {
    fn from_big(n: &BigInt) -> Self {
        n.to_i64().map_or_else(|| JsonInt::Big(n.to_string()), JsonInt::Small)
    }

    fn into_big(self) -> Result<BigInt, String> {
        match self {
            JsonInt::Small(n) => Ok(BigInt::from(n)),
            JsonInt::Big(s) => s.parse().map_err(|_| format!("invalid integer {s:?}")),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct Frac {
    num: JsonInt,
    den: JsonInt,
}

/// `#[serde(with = "frac")]` encoding of a rational as `{"num": .., "den": ..}`.
/// Integers that overflow `i64` are written as decimal strings.
pub mod frac {
    use super::*;

    pub fn serialize<S: Serializer>(q: &Rational, s: S) -> Result<S::Ok, S::Error> {
        Frac {
            num: JsonInt::from_big(q.numer()),
            den: JsonInt::from_big(q.denom()),
        }
        .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let f = Frac::deserialize(d)?;
        let num = f.num.into_big().map_err(serde::de::Error::custom)?;
        let den = f.den.into_big().map_err(serde::de::Error::custom)?;
        if den.is_zero() {
            return Err(serde::de::Error::custom("zero denominator"));
        }
        Ok(Rational::new(num, den))
    }
}

/// Same as [`frac`] for optional values.
pub mod frac_opt {
    use super::*;

    pub fn serialize<S: Serializer>(q: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
        q.as_ref()
            .map(|q| Frac {
                num: JsonInt::from_big(q.numer()),
                den: JsonInt::from_big(q.denom()),
            })
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Rational>, D::Error> {
        match Option::<Frac>::deserialize(d)? {
            None => Ok(None),
            Some(f) => {
                let num = f.num.into_big().map_err(serde::de::Error::custom)?;
                let den = f.den.into_big().map_err(serde::de::Error::custom)?;
                if den.is_zero() {
                    return Err(serde::de::Error::custom("zero denominator"));
                }
                Ok(Some(Rational::new(num, den)))
            }
        }
    }
}
