use ark_ec::CurveGroup;

use super::{Groth16Error, Proof, VerifyingKey};
use crate::curve::{g1_msm, multi_pairing, Fr, G1Projective};

/// `Ok(false)` is a rejection; `Err` means the call itself was malformed.
/// Off-curve or out-of-subgroup proof elements are rejected.
pub fn verify(vk: &VerifyingKey, public: &[Fr], proof: &Proof) -> Result<bool, Groth16Error> {
    if public.len() + 1 != vk.ic.len() {
        return Err(Groth16Error::PublicInputCount {
            expected: vk.ic.len() - 1,
            actual: public.len(),
        });
    }
    let vk_x = G1Projective::from(vk.ic[0]) + g1_msm(&vk.ic[1..], public)?;
    let pairs = [
        (proof.a, proof.b),
        ((-vk_x).into_affine(), vk.gamma_g2),
        ((-proof.c), vk.delta_g2),
    ];
    match multi_pairing(&pairs) {
        Ok(lhs) => Ok(lhs == *vk.alpha_beta()),
        Err(_) => Ok(false),
    }
}
