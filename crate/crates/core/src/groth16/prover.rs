use ark_ec::CurveGroup;
use ark_ff::One;
use rand::RngCore;

use super::{Groth16Error, Proof, ProvingKey};
use crate::curve::{g1_msm, g2_msm, random_fr, Fr, G1Projective, G2Projective};

/// Proves knowledge of `witness` for `public`. The assignment is checked
/// against every constraint first; an unsatisfied row is reported, never
/// turned into a garbage proof.
pub fn prove<R: RngCore + ?Sized>(
    pk: &ProvingKey,
    public: &[Fr],
    witness: &[Fr],
    rng: &mut R,
) -> Result<Proof, Groth16Error> {
    let qap = pk.qap();
    if public.len() != qap.num_public() {
        return Err(Groth16Error::PublicInputCount {
            expected: qap.num_public(),
            actual: public.len(),
        });
    }
    if witness.len() != qap.num_witness() {
        return Err(Groth16Error::WitnessCount {
            expected: qap.num_witness(),
            actual: witness.len(),
        });
    }
    let mut z = Vec::with_capacity(qap.num_variables());
    z.push(Fr::one());
    z.extend_from_slice(public);
    z.extend_from_slice(witness);

    if let Some(constraint) = qap.first_unsatisfied(&z)? {
        return Err(Groth16Error::Unsatisfied { constraint });
    }
    let h = qap.quotient(&z)?;

    let r = random_fr(rng);
    let s = random_fr(rng);

    let a_sum = g1_msm(&pk.a_query, &z)?;
    let b_g2_sum = g2_msm(&pk.b_g2_query, &z)?;
    let b_g1_sum = g1_msm(&pk.b_g1_query, &z)?;
    let l_sum = g1_msm(&pk.l_query, witness)?;
    let h_sum = g1_msm(&pk.h_query, &h[..pk.h_query.len()])?;

    let delta_g1 = G1Projective::from(pk.delta_g1);
    let a = G1Projective::from(pk.vk.alpha_g1) + a_sum + delta_g1 * r;
    let b = G2Projective::from(pk.vk.beta_g2) + b_g2_sum + G2Projective::from(pk.vk.delta_g2) * s;
    let b_g1 = G1Projective::from(pk.beta_g1) + b_g1_sum + delta_g1 * s;
    let c = l_sum + h_sum + a * s + b_g1 * r - delta_g1 * (r * s);

    Ok(Proof { a: a.into_affine(), b: b.into_affine(), c: c.into_affine() })
}
