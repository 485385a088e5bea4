//! Fixed-width bitstrings, rendered as hex.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A bitstring of known length; bit 0 is the most significant bit of the
/// first hex digit.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Bits(Vec<bool>);

impl Bits {
    pub fn zeros(len: usize) -> Self {
        Bits(vec![false; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn push_uint(&mut self, value: usize, width: u32) {
        for b in (0..width).rev() {
            self.0.push((value >> b) & 1 == 1);
        }
    }

    pub fn extend(&mut self, other: &Bits) {
        self.0.extend_from_slice(&other.0);
    }

    /// Reads `width` bits starting at `*pos`, advancing it.
    pub fn read_uint(&self, pos: &mut usize, width: u32) -> Result<usize> {
        let end = *pos + width as usize;
        if end > self.len() {
            return Err(Error::MalformedEncoding(format!(
                "need {end} bits, bitstring has {}",
                self.len()
            )));
        }
        let v = self.0[*pos..end]
            .iter()
            .fold(0usize, |acc, &b| (acc << 1) | b as usize);
        *pos = end;
        Ok(v)
    }

    pub fn to_hex(&self) -> String {
        self.0
            .chunks(4)
            .map(|c| {
                let mut v = 0u32;
                for (i, &b) in c.iter().enumerate() {
                    v |= (b as u32) << (3 - i);
                }
                char::from_digit(v, 16).unwrap()
            })
            .collect()
    }

    pub fn from_hex(hex: &str, len: usize) -> Result<Self> {
        if hex.len() != len.div_ceil(4) {
            return Err(Error::MalformedEncoding(format!(
                "{len} bits need {} hex digits, got {}",
                len.div_ceil(4),
                hex.len()
            )));
        }
        let mut bits = Vec::with_capacity(hex.len() * 4);
        for ch in hex.chars() {
            let v = ch
                .to_digit(16)
                .ok_or_else(|| Error::MalformedEncoding(format!("invalid hex digit {ch:?}")))?;
            for i in (0..4).rev() {
                bits.push((v >> i) & 1 == 1);
            }
        }
        if bits[len..].iter().any(|&b| b) {
            return Err(Error::MalformedEncoding("nonzero padding bits".into()));
        }
        bits.truncate(len);
        Ok(Bits(bits))
    }
}

#[derive(Serialize, Deserialize)]
struct BitsJson {
    len: usize,
    hex: String,
}

impl Serialize for Bits {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        BitsJson {
            len: self.len(),
            hex: self.to_hex(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Bits {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = BitsJson::deserialize(d)?;
        Bits::from_hex(&j.hex, j.len).map_err(serde::de::Error::custom)
    }
}
