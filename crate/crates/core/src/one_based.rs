//! Serde adapters: indices are zero-based in memory and one-based on the wire.

pub mod sets {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(sets: &[Vec<usize>], s: S) -> Result<S::Ok, S::Error> {
        let shifted: Vec<Vec<usize>> = sets
            .iter()
            .map(|b| b.iter().map(|i| i + 1).collect())
            .collect();
        shifted.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<usize>>, D::Error> {
        let raw = Vec::<Vec<usize>>::deserialize(d)?;
        raw.into_iter()
            .map(|b| {
                b.into_iter()
                    .map(|i| {
                        i.checked_sub(1)
                            .ok_or_else(|| serde::de::Error::custom("index 0 in one-based set"))
                    })
                    .collect()
            })
            .collect()
    }
}

pub mod intervals {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(ivs: &[(usize, usize)], s: S) -> Result<S::Ok, S::Error> {
        let shifted: Vec<[usize; 2]> = ivs.iter().map(|&(a, b)| [a + 1, b + 1]).collect();
        shifted.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<(usize, usize)>, D::Error> {
        let raw = Vec::<[usize; 2]>::deserialize(d)?;
        raw.into_iter()
            .map(|[a, b]| match (a.checked_sub(1), b.checked_sub(1)) {
                (Some(a), Some(b)) => Ok((a, b)),
                _ => Err(serde::de::Error::custom("index 0 in one-based interval")),
            })
            .collect()
    }
}
