//! JSON integers: plain numbers up to 2^53 - 1 in magnitude, decimal
//! strings beyond that.

use num_bigint::BigInt;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serializer};
use serde_json::Value;

pub const MAX_SAFE: i64 = (1 << 53) - 1;

pub fn to_value(v: &BigInt) -> Value {
    match i64::try_from(v) {
        Ok(small) if small.abs() <= MAX_SAFE => Value::from(small),
        _ => Value::String(v.to_string()),
    }
}

pub fn i64_to_value(v: i64) -> Value {
    if v.abs() <= MAX_SAFE {
        Value::from(v)
    } else {
        Value::String(v.to_string())
    }
}

pub fn from_value(v: &Value) -> Result<BigInt, String> {
    match v {
        Value::Number(n) => n
            .as_i64()
            .map(BigInt::from)
            .or_else(|| n.as_u64().map(BigInt::from))
            .ok_or_else(|| format!("not an integer: {n}")),
        Value::String(s) => s
            .parse::<BigInt>()
            .map_err(|_| format!("not a decimal integer: {s:?}")),
        other => Err(format!("expected integer, got {other}")),
    }
}

pub fn serialize_i64_vec<S: Serializer>(v: &[i64], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|&x| i64_to_value(x)))
}

pub fn deserialize_i64_vec<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<i64>, D::Error> {
    let values = Vec::<Value>::deserialize(d)?;
    values
        .iter()
        .map(|v| {
            from_value(v).and_then(|b| i64::try_from(&b).map_err(|_| format!("{b} out of range")))
        })
        .collect::<Result<_, _>>()
        .map_err(D::Error::custom)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn threshold() {
        assert_eq!(to_value(&BigInt::from(MAX_SAFE)), Value::from(MAX_SAFE));
        assert_eq!(
            to_value(&BigInt::from(MAX_SAFE + 1)),
            Value::String((MAX_SAFE + 1).to_string())
        );
        assert_eq!(
            to_value(&BigInt::from(-MAX_SAFE - 1)),
            Value::String((-MAX_SAFE - 1).to_string())
        );
        assert_eq!(
            from_value(&Value::String("-9007199254740993".into())).unwrap(),
            BigInt::from(-9007199254740993i64)
        );
        assert!(from_value(&Value::from(1.5)).is_err());
        assert!(from_value(&Value::Bool(true)).is_err());
    }
}
