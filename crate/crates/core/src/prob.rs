//! Exact success probabilities for Bernoulli entries.
//!
//! Every probability is held as a reduced ratio `num/den`. Decimal input such
//! as `0.25` is parsed exactly (to `1/4`), so every downstream computation can
//! stay in exact arithmetic when it wants to.

use std::fmt;
use std::str::FromStr;

use num::integer::gcd;
use num::{BigInt, BigRational};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A probability `p` in `(0, 1/2]`, stored as a reduced fraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Probability {
    num: u64,
    den: u64,
}

impl Probability {
    pub const HALF: Probability = Probability { num: 1, den: 2 };

    pub fn new(num: u64, den: u64) -> Result<Self> {
        if den == 0 || num == 0 || num.checked_mul(2).is_none_or(|twice| twice > den) {
            return Err(Error::InvalidProbability(format!("{num}/{den}")));
        }
        let g = gcd(num, den);
        Ok(Probability {
            num: num / g,
            den: den / g,
        })
    }

    pub fn num(&self) -> u64 {
        self.num
    }

    pub fn den(&self) -> u64 {
        self.den
    }

    /// Numerator of `1 - p` over the same denominator.
    pub fn complement_num(&self) -> u64 {
        self.den - self.num
    }

    pub fn as_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn complement_f64(&self) -> f64 {
        self.complement_num() as f64 / self.den as f64
    }

    pub fn ratio(&self) -> BigRational {
        BigRational::new(BigInt::from(self.num), BigInt::from(self.den))
    }

    pub fn complement_ratio(&self) -> BigRational {
        BigRational::new(BigInt::from(self.complement_num()), BigInt::from(self.den))
    }
}

impl fmt::Display for Probability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl FromStr for Probability {
    type Err = Error;

    /// Accepts `a/b` or a plain decimal such as `0.25`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::InvalidProbability(s.to_string());
        if let Some((a, b)) = s.split_once('/') {
            let a: u64 = a.trim().parse().map_err(|_| bad())?;
            let b: u64 = b.trim().parse().map_err(|_| bad())?;
            return Probability::new(a, b);
        }
        let (int_part, frac_part) = s.split_once('.').unwrap_or((s, ""));
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(bad());
        }
        if !int_part.chars().all(|c| c.is_ascii_digit())
            || !frac_part.chars().all(|c| c.is_ascii_digit())
            || frac_part.len() > 18
        {
            return Err(bad());
        }
        let den = 10u64.pow(frac_part.len() as u32);
        let int: u64 = if int_part.is_empty() {
            0
        } else {
            int_part.parse().map_err(|_| bad())?
        };
        let frac: u64 = if frac_part.is_empty() {
            0
        } else {
            frac_part.parse().map_err(|_| bad())?
        };
        let num = int
            .checked_mul(den)
            .and_then(|v| v.checked_add(frac))
            .ok_or_else(bad)?;
        Probability::new(num, den)
    }
}

impl Serialize for Probability {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Probability {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Serialize helper for exact rationals as `"num/den"` strings.
pub fn ratio_to_string(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn ratio_to_f64(r: &BigRational) -> f64 {
    use num::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

pub(crate) mod ratio_serde {
    use num::BigRational;
    use serde::Serializer;

    pub fn serialize<S: Serializer>(r: &BigRational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&super::ratio_to_string(r))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_ratio_and_decimal() {
        assert_eq!("1/2".parse::<Probability>().unwrap(), Probability::HALF);
        assert_eq!("0.25".parse::<Probability>().unwrap(), Probability::new(1, 4).unwrap());
        assert_eq!(".5".parse::<Probability>().unwrap(), Probability::HALF);
        let p: Probability = "0.3".parse().unwrap();
        assert_eq!((p.num(), p.den()), (3, 10));
        assert_eq!("2/8".parse::<Probability>().unwrap().to_string(), "1/4");
    }

    #[test]
    fn rejects_out_of_range() {
        for bad in ["0", "0.6", "3/4", "1", "-0.1", "abc", "1/0", "", "."] {
            assert!(bad.parse::<Probability>().is_err(), "{bad}");
        }
    }
}
