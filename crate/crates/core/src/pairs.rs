//! Serde helpers that encode complex vectors as arrays of `[re, im]` pairs.

use crate::CVector;
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub fn to_pairs(v: &CVector) -> Vec<[f64; 2]> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

pub fn from_pairs(pairs: &[[f64; 2]]) -> CVector {
    CVector::from_iterator(pairs.len(), pairs.iter().map(|&[re, im]| Complex64::new(re, im)))
}

pub fn serialize<S: Serializer>(v: &CVector, serializer: S) -> Result<S::Ok, S::Error> {
    to_pairs(v).serialize(serializer)
}

pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> Result<CVector, D::Error> {
    let pairs = Vec::<[f64; 2]>::deserialize(deserializer)?;
    Ok(from_pairs(&pairs))
}
