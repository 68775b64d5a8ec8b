//! Proof: `A(64) ‖ B(128) ‖ C(64)`.
//! Verifying key: `α(64) ‖ β(128) ‖ γ(128) ‖ δ(128) ‖ ic_count(u32 BE) ‖ ic(64 each)`.
//! Public inputs: concatenated 32-byte big-endian scalars.

use super::{Groth16Error, Proof, VerifyingKey};
use crate::curve::{
    fr_from_bytes, fr_to_bytes, g1_from_bytes, g1_to_bytes, g2_from_bytes, g2_to_bytes, Fr,
    FR_BYTES, G1_BYTES, G2_BYTES,
};

pub const PROOF_BYTES: usize = 2 * G1_BYTES + G2_BYTES;
const VK_FIXED_BYTES: usize = G1_BYTES + 3 * G2_BYTES + 4;

impl Proof {
    pub fn to_bytes(&self) -> [u8; PROOF_BYTES] {
        let mut out = [0u8; PROOF_BYTES];
        out[..64].copy_from_slice(&g1_to_bytes(&self.a));
        out[64..192].copy_from_slice(&g2_to_bytes(&self.b));
        out[192..].copy_from_slice(&g1_to_bytes(&self.c));
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, Groth16Error> {
        if bytes.len() != PROOF_BYTES {
            return Err(Groth16Error::Encoding(format!(
                "proof must be {PROOF_BYTES} bytes, got {}",
                bytes.len()
            )));
        }
        Ok(Self {
            a: g1_from_bytes(&bytes[..64])?,
            b: g2_from_bytes(&bytes[64..192])?,
            c: g1_from_bytes(&bytes[192..])?,
        })
    }
}

impl VerifyingKey {
    pub fn encoded_len(&self) -> usize {
        VK_FIXED_BYTES + self.ic.len() * G1_BYTES
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.encoded_len());
        out.extend_from_slice(&g1_to_bytes(&self.alpha_g1));
        out.extend_from_slice(&g2_to_bytes(&self.beta_g2));
        out.extend_from_slice(&g2_to_bytes(&self.gamma_g2));
        out.extend_from_slice(&g2_to_bytes(&self.delta_g2));
        out.extend_from_slice(&(self.ic.len() as u32).to_be_bytes());
        for p in &self.ic {
            out.extend_from_slice(&g1_to_bytes(p));
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, Groth16Error> {
        if bytes.len() < VK_FIXED_BYTES {
            return Err(Groth16Error::Encoding(format!(
                "verifying key truncated at {} bytes",
                bytes.len()
            )));
        }
        let alpha = g1_from_bytes(&bytes[..64])?;
        let beta = g2_from_bytes(&bytes[64..192])?;
        let gamma = g2_from_bytes(&bytes[192..320])?;
        let delta = g2_from_bytes(&bytes[320..448])?;
        let count = u32::from_be_bytes(bytes[448..452].try_into().expect("4 bytes")) as usize;
        let rest = &bytes[VK_FIXED_BYTES..];
        if count == 0 || rest.len() != count * G1_BYTES {
            return Err(Groth16Error::Encoding(format!(
                "ic count {count} inconsistent with {} trailing bytes",
                rest.len()
            )));
        }
        let ic = rest.chunks(G1_BYTES).map(g1_from_bytes).collect::<Result<Vec<_>, _>>()?;
        Ok(VerifyingKey::new(alpha, beta, gamma, delta, ic)?)
    }
}

pub fn encode_public_inputs(values: &[Fr]) -> Vec<u8> {
    values.iter().flat_map(fr_to_bytes).collect()
}

pub fn decode_public_inputs(bytes: &[u8]) -> Result<Vec<Fr>, Groth16Error> {
    if !bytes.len().is_multiple_of(FR_BYTES) {
        return Err(Groth16Error::Encoding(format!(
            "public-input file length {} is not a multiple of {FR_BYTES}",
            bytes.len()
        )));
    }
    Ok(bytes.chunks(FR_BYTES).map(fr_from_bytes).collect::<Result<Vec<_>, _>>()?)
}
