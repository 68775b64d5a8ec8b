use super::FlError;

/// `encode(w) = O + ⌊w·S + ½⌋` with `S = 2^16`, `O = 2^40`. Any `|w| < 2^24`
/// lands strictly inside `(0, 2^41)`, so sums of up to 2^23 clients fit in
/// the 64-bit words hashed on both sides.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FixedPointCodec {
    pub scale_bits: u32,
    pub offset_bits: u32,
}

impl Default for FixedPointCodec {
    fn default() -> Self {
        Self { scale_bits: 16, offset_bits: 40 }
    }
}

impl FixedPointCodec {
    /// Largest magnitude (exclusive) the codec accepts.
    pub const MAX_ABS: f64 = (1u64 << 24) as f64;

    pub fn scale(&self) -> f64 {
        (1u64 << self.scale_bits) as f64
    }

    pub fn offset(&self) -> u64 {
        1u64 << self.offset_bits
    }

    pub fn encode(&self, w: f64) -> Option<u64> {
        if !w.is_finite() || w.abs() >= Self::MAX_ABS {
            return None;
        }
        let q = (w * self.scale() + 0.5).floor() as i64;
        Some((self.offset() as i64 + q) as u64)
    }

    pub fn decode(&self, e: u64) -> f64 {
        (e as i64 - self.offset() as i64) as f64 / self.scale()
    }
}

pub fn encode_weights(flat: &[f64], codec: &FixedPointCodec) -> Result<Vec<u64>, FlError> {
    flat.iter()
        .enumerate()
        .map(|(index, &value)| codec.encode(value).ok_or(FlError::Range { index, value }))
        .collect()
}

pub fn decode_weights(enc: &[u64], codec: &FixedPointCodec) -> Result<Vec<f64>, FlError> {
    enc.iter()
        .enumerate()
        .map(|(index, &value)| {
            if value >= 1u64 << 62 {
                return Err(FlError::Decode { index, value });
            }
            Ok(codec.decode(value))
        })
        .collect()
}
