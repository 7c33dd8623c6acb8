//! Number formats shared by configs and reports.
//!
//! Complex numbers are written `"a+bi"` (`"2"`, `"-i"`, `"1.5e-3-2i"` are all
//! accepted). Floats in reports are strings in Rust's `{:e}` format, which is
//! the shortest text that parses back to the same `f64`.

use std::fmt;
use std::str::FromStr;

use fission_core::C64;
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A complex number read from `"a+bi"` text or a plain TOML number.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cx(pub C64);

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("cannot read {0:?} as a complex number (expected a+bi)")]
pub struct ParseComplexError(String);

fn parse_real(s: &str) -> Option<f64> {
    match s {
        "" | "+" => Some(1.0),
        "-" => Some(-1.0),
        _ => s.parse().ok(),
    }
}

impl FromStr for Cx {
    type Err = ParseComplexError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let err = || ParseComplexError(text.to_string());
        let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if s.is_empty() {
            return Err(err());
        }
        let Some(body) = s.strip_suffix('i') else {
            return s.parse().map(|re| Cx(C64::new(re, 0.0))).map_err(|_| err());
        };
        // Split at the last sign that is not an exponent sign.
        let bytes = body.as_bytes();
        let split = (1..bytes.len())
            .rev()
            .find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
        let (re, im) = match split {
            Some(i) => (body[..i].parse().map_err(|_| err())?, parse_real(&body[i..]).ok_or_else(err)?),
            None => (0.0, parse_real(body).ok_or_else(err)?),
        };
        Ok(Cx(C64::new(re, im)))
    }
}

impl fmt::Display for Cx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (re, im) = (self.0.re, self.0.im);
        if im == 0.0 {
            write!(f, "{re:e}")
        } else if im.is_sign_negative() {
            write!(f, "{re:e}-{:e}i", -im)
        } else {
            write!(f, "{re:e}+{im:e}i")
        }
    }
}

impl Serialize for Cx {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Cx {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Cx;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number or an \"a+bi\" string")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Cx, E> {
                Ok(Cx(C64::new(v, 0.0)))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Cx, E> {
                Ok(Cx(C64::new(v as f64, 0.0)))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Cx, E> {
                Ok(Cx(C64::new(v as f64, 0.0)))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<Cx, E> {
                v.parse().map_err(E::custom)
            }
        }
        d.deserialize_any(V)
    }
}

/// An `f64` serialized in scientific notation as a string.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct Sci(pub f64);

impl Serialize for Sci {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(&format_args!("{:e}", self.0))
    }
}

impl<'de> Deserialize<'de> for Sci {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Sci;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number or a numeric string")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Sci, E> {
                Ok(Sci(v))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Sci, E> {
                Ok(Sci(v as f64))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Sci, E> {
                Ok(Sci(v as f64))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<Sci, E> {
                v.parse().map(Sci).map_err(|_| E::custom(format!("not a number: {v:?}")))
            }
        }
        d.deserialize_any(V)
    }
}
