//! JSON encoding for floats that may be non-finite.
//!
//! Finite values are plain numbers; `+inf`, `-inf` and NaN become the
//! strings `"inf"`, `"-inf"` and `"undefined"`.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum Repr {
    Num(f64),
    Tag(String),
}

fn to_repr(x: f64) -> Repr {
    if x.is_finite() {
        Repr::Num(x)
    } else if x.is_nan() {
        Repr::Tag("undefined".into())
    } else if x > 0.0 {
        Repr::Tag("inf".into())
    } else {
        Repr::Tag("-inf".into())
    }
}

fn from_repr<E: serde::de::Error>(r: Repr) -> Result<f64, E> {
    match r {
        Repr::Num(x) => Ok(x),
        Repr::Tag(t) => match t.as_str() {
            "inf" => Ok(f64::INFINITY),
            "-inf" => Ok(f64::NEG_INFINITY),
            "undefined" => Ok(f64::NAN),
            other => Err(E::custom(format!("unknown float tag {other:?}"))),
        },
    }
}

/// Formats a value the way it appears in CSV exports.
pub fn display(x: f64) -> String {
    if x.is_finite() {
        format!("{x}")
    } else if x.is_nan() {
        "undefined".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// Inverse of [`display`].
pub fn parse(s: &str) -> Option<f64> {
    match s {
        "inf" => Some(f64::INFINITY),
        "-inf" => Some(f64::NEG_INFINITY),
        "undefined" => Some(f64::NAN),
        other => other.parse().ok().filter(|x: &f64| x.is_finite()),
    }
}

pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    to_repr(*x).serialize(s)
}

pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    from_repr(Repr::deserialize(d)?)
}

pub mod vec {
    use super::*;

    pub fn serialize<S: Serializer>(xs: &[f64], s: S) -> Result<S::Ok, S::Error> {
        xs.iter().map(|x| to_repr(*x)).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        Vec::<Repr>::deserialize(d)?
            .into_iter()
            .map(from_repr::<D::Error>)
            .collect()
    }
}

pub mod array4 {
    use super::*;

    pub fn serialize<S: Serializer>(xs: &[f64; 4], s: S) -> Result<S::Ok, S::Error> {
        super::vec::serialize(xs, s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<[f64; 4], D::Error> {
        let v = super::vec::deserialize(d)?;
        v.try_into()
            .map_err(|v: Vec<f64>| D::Error::custom(format!("expected 4 values, got {}", v.len())))
    }
}
