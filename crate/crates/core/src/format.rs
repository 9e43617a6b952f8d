//! Number formatting shared by the JSON and CSV emitters.

use serde::ser::{Serialize, SerializeSeq, Serializer};
use serde_json::value::RawValue;

use crate::linalg::C64;

/// Seventeen significant digits, enough to round-trip any `f64`.
pub fn sig17(x: f64) -> String {
    if x == 0.0 {
        return "0.0000000000000000e0".to_string();
    }
    format!("{x:.16e}")
}

/// An `f64` serialized as a JSON number with 17 significant digits.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sig17(pub f64);

impl Serialize for Sig17 {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return serializer.serialize_none();
        }
        let raw = RawValue::from_string(sig17(self.0)).map_err(serde::ser::Error::custom)?;
        raw.serialize(serializer)
    }
}

pub fn ser_f64<S: Serializer>(x: &f64, serializer: S) -> Result<S::Ok, S::Error> {
    Sig17(*x).serialize(serializer)
}

pub fn ser_opt_f64<S: Serializer>(x: &Option<f64>, serializer: S) -> Result<S::Ok, S::Error> {
    match x {
        Some(x) => Sig17(*x).serialize(serializer),
        None => serializer.serialize_none(),
    }
}

/// Serialize complex vectors as `[[re, im], ...]`.
pub fn complex_pairs<S: Serializer>(v: &[C64], serializer: S) -> Result<S::Ok, S::Error> {
    let mut seq = serializer.serialize_seq(Some(v.len()))?;
    for z in v {
        seq.serialize_element(&[Sig17(z.re), Sig17(z.im)])?;
    }
    seq.end()
}

/// A single complex number as `[re, im]`.
pub fn complex_scalar<S: Serializer>(z: &C64, serializer: S) -> Result<S::Ok, S::Error> {
    [Sig17(z.re), Sig17(z.im)].serialize(serializer)
}

pub fn opt_complex_pairs<S: Serializer>(v: &Option<Vec<C64>>, serializer: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(v) => complex_pairs(v, serializer),
        None => serializer.serialize_none(),
    }
}

pub fn pairs_to_complex(pairs: &[[f64; 2]]) -> Vec<C64> {
    pairs.iter().map(|p| C64::new(p[0], p[1])).collect()
}
