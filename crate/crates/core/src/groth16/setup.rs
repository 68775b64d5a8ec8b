use std::sync::Arc;

use ark_ec::CurveGroup;
use ark_ff::{Field, Zero};
use rand::RngCore;

use super::{Groth16Error, ProvingKey, VerifyingKey};
use crate::curve::{
    g1_generator, g2_generator, random_nonzero_fr, FixedBaseTable, Fr, G1Projective,
    G2Projective,
};
use crate::qap::Qap;

/// The setup trapdoor. Whoever holds it can forge proofs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ToxicWaste {
    pub tau: Fr,
    pub alpha: Fr,
    pub beta: Fr,
    pub gamma: Fr,
    pub delta: Fr,
}

impl ToxicWaste {
    fn sample<R: RngCore + ?Sized>(qap: &Qap, rng: &mut R) -> Self {
        let tau = loop {
            let t = random_nonzero_fr(rng);
            if !qap.domain().vanishing_at(&t).is_zero() {
                break t;
            }
        };
        Self {
            tau,
            alpha: random_nonzero_fr(rng),
            beta: random_nonzero_fr(rng),
            gamma: random_nonzero_fr(rng),
            delta: random_nonzero_fr(rng),
        }
    }
}

/// Single-party trusted setup. The trapdoor is dropped before returning.
pub fn setup<R: RngCore + ?Sized>(
    qap: Arc<Qap>,
    rng: &mut R,
) -> Result<(ProvingKey, VerifyingKey), Groth16Error> {
    let (pk, vk, _) = generate(qap, rng)?;
    Ok((pk, vk))
}

/// Setup that also hands back the trapdoor, for tests that need to inspect it.
#[cfg(any(test, feature = "insecure-trapdoor"))]
pub fn setup_with_trapdoor<R: RngCore + ?Sized>(
    qap: Arc<Qap>,
    rng: &mut R,
) -> Result<(ProvingKey, VerifyingKey, ToxicWaste), Groth16Error> {
    generate(qap, rng)
}

fn generate<R: RngCore + ?Sized>(
    qap: Arc<Qap>,
    rng: &mut R,
) -> Result<(ProvingKey, VerifyingKey, ToxicWaste), Groth16Error> {
    if let Some(i) = qap.first_unbound_public() {
        return Err(Groth16Error::UnboundPublicInput(i));
    }
    let tw = ToxicWaste::sample(&qap, rng);
    let at = qap.evaluate_at(&tw.tau).expect("tau sampled outside the domain");
    let gamma_inv = tw.gamma.inverse().expect("nonzero");
    let delta_inv = tw.delta.inverse().expect("nonzero");

    let np = qap.num_public();
    let nv = qap.num_variables();
    let n = qap.domain().size();

    let mixed = |i: usize| tw.beta * at.a[i] + tw.alpha * at.b[i] + at.c[i];
    let ic_scalars: Vec<Fr> = (0..=np).map(|i| mixed(i) * gamma_inv).collect();
    let l_scalars: Vec<Fr> = (np + 1..nv).map(|i| mixed(i) * delta_inv).collect();
    let mut h_scalars = Vec::with_capacity(n - 1);
    let mut cur = at.t * delta_inv;
    for _ in 0..n.saturating_sub(1) {
        h_scalars.push(cur);
        cur *= tw.tau;
    }

    let g1_count = 2 * nv + h_scalars.len() + l_scalars.len() + ic_scalars.len() + 4;
    let g1 = FixedBaseTable::<G1Projective>::new(g1_generator().into(), g1_count);
    let g2 = FixedBaseTable::<G2Projective>::new(g2_generator().into(), nv + 3);

    let a_query = g1.batch_mul(&at.a);
    let b_g1_query = g1.batch_mul(&at.b);
    let b_g2_query = g2.batch_mul(&at.b);
    let h_query = g1.batch_mul(&h_scalars);
    let l_query = g1.batch_mul(&l_scalars);
    let ic = g1.batch_mul(&ic_scalars);

    let vk = VerifyingKey::new(
        g1.mul(&tw.alpha).into_affine(),
        g2.mul(&tw.beta).into_affine(),
        g2.mul(&tw.gamma).into_affine(),
        g2.mul(&tw.delta).into_affine(),
        ic,
    )?;
    let pk = ProvingKey {
        vk: vk.clone(),
        beta_g1: g1.mul(&tw.beta).into_affine(),
        delta_g1: g1.mul(&tw.delta).into_affine(),
        a_query,
        b_g1_query,
        b_g2_query,
        h_query,
        l_query,
        qap,
    };
    Ok((pk, vk, tw))
}
