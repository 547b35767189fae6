//! JSON has no infinity; safety factors of an unstressed shaft are written as
//! `null` and read back as `+inf`.

use serde::{Deserialize, Deserializer, Serializer};

use crate::scalar::Scalar;

pub mod inf_as_null {
    use super::*;

    pub fn serialize<T: Scalar, S: Serializer>(v: &T, s: S) -> Result<S::Ok, S::Error> {
        if v.is_infinite() && v.is_sign_positive() {
            s.serialize_none()
        } else {
            s.serialize_some(&v.to_f64_lossy())
        }
    }

    pub fn deserialize<'de, T: Scalar, D: Deserializer<'de>>(d: D) -> Result<T, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.map_or(T::infinity(), T::of))
    }
}
