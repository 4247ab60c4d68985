/// Extended reals: `+∞` is written as the string `"inf"` since JSON has no
/// infinity literal.
pub(crate) mod extended_real {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(value: &f64, serializer: S) -> Result<S::Ok, S::Error> {
        if value.is_infinite() && *value > 0.0 {
            serializer.serialize_str("inf")
        } else if value.is_infinite() {
            serializer.serialize_str("-inf")
        } else {
            serializer.serialize_f64(*value)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Str(alloc::string::String),
        }
        match Repr::deserialize(deserializer)? {
            Repr::Num(v) => Ok(v),
            Repr::Str(s) if s == "inf" => Ok(f64::INFINITY),
            Repr::Str(s) if s == "-inf" => Ok(f64::NEG_INFINITY),
            Repr::Str(other) => Err(de::Error::custom(alloc::format!(
                "expected number or \"inf\", found {other:?}"
            ))),
        }
    }
}

/// Matrices as a list of rows.
pub(crate) fn matrix_rows<S: serde::Serializer>(
    m: &nalgebra::DMatrix<f64>,
    serializer: S,
) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = serializer.serialize_seq(Some(m.nrows()))?;
    for i in 0..m.nrows() {
        let row: alloc::vec::Vec<f64> = m.row(i).iter().copied().collect();
        seq.serialize_element(&row)?;
    }
    seq.end()
}
