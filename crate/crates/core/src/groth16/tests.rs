use std::sync::Arc;

use ark_ec::{AffineRepr, CurveGroup};
use ark_ff::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use super::*;
use crate::curve::{g1_generator, g1_mul, g2_generator, pairing, random_fr, Fr};
use crate::qap::to_qap;
use crate::r1cs::{ConstraintSink, ConstraintSystem, LinearCombination, Variable};

fn fr(v: u64) -> Fr {
    Fr::from(v)
}

/// `x · x = y` with `y` public.
fn squaring_qap() -> Arc<Qap> {
    let mut cs = ConstraintSystem::new();
    let y = cs.alloc_public(None).unwrap();
    let x = cs.alloc_witness(None).unwrap();
    cs.enforce(x.into(), x.into(), y.into()).unwrap();
    Arc::new(to_qap(&cs).unwrap())
}

/// Forward-evaluated random system: every row defines a fresh witness as the
/// product of two random linear combinations of earlier variables.
fn random_system(rng: &mut ChaCha20Rng, rows: usize) -> (ConstraintSystem, Vec<Fr>) {
    let mut cs = ConstraintSystem::new();
    let np = rng.gen_range(1..4);
    let mut vars = vec![Variable::ONE];
    for _ in 0..np {
        vars.push(cs.alloc_public(Some(random_fr(rng))).unwrap());
    }
    let public_lc = vars[1..]
        .iter()
        .fold(LinearCombination::zero(), |acc, v| acc.with(*v, random_fr(rng)));
    for row in 0..rows {
        let pick = |rng: &mut ChaCha20Rng| {
            let mut lc = LinearCombination::zero();
            for _ in 0..rng.gen_range(1..4) {
                lc.add_term(vars[rng.gen_range(0..vars.len())], random_fr(rng));
            }
            lc
        };
        let mut a = pick(rng);
        if row == 0 {
            a = a + &public_lc;
        }
        let b = pick(rng);
        let value = cs.eval(&a).unwrap() * cs.eval(&b).unwrap();
        let out = cs.alloc_witness(Some(value)).unwrap();
        cs.enforce(a, b, out.into()).unwrap();
        vars.push(out);
    }
    let z = cs.assignment().unwrap();
    (cs, z)
}

#[test]
fn minimal_circuit_completeness() {
    let mut rng = ChaCha20Rng::seed_from_u64(41);
    let (pk, vk) = setup(squaring_qap(), &mut rng).unwrap();
    let proof = prove(&pk, &[fr(9)], &[fr(3)], &mut rng).unwrap();
    assert!(verify(&vk, &[fr(9)], &proof).unwrap());
    assert!(!verify(&vk, &[fr(10)], &proof).unwrap());
}

#[test]
fn setup_is_deterministic_per_seed() {
    let qap = squaring_qap();
    let (pk1, vk1) = setup(qap.clone(), &mut ChaCha20Rng::seed_from_u64(7)).unwrap();
    let (pk2, vk2) = setup(qap.clone(), &mut ChaCha20Rng::seed_from_u64(7)).unwrap();
    assert_eq!(vk1.to_bytes(), vk2.to_bytes());
    assert!(pk1.same_elements(&pk2));
    let (pk3, _) = setup(qap, &mut ChaCha20Rng::seed_from_u64(8)).unwrap();
    assert!(!pk1.same_elements(&pk3));
}

#[test]
fn alpha_beta_cache_matches_recomputed_pairing() {
    let mut rng = ChaCha20Rng::seed_from_u64(42);
    let (_, vk, tw) = setup_with_trapdoor(squaring_qap(), &mut rng).unwrap();
    let raw = pairing(&vk.alpha_g1, &vk.beta_g2).unwrap();
    assert_eq!(*vk.alpha_beta(), raw);
    let base = pairing(&g1_generator(), &g2_generator()).unwrap();
    assert_eq!(raw, base * (tw.alpha * tw.beta));
}

#[test]
fn key_shapes_follow_qap() {
    let mut rng = ChaCha20Rng::seed_from_u64(43);
    let (cs, _) = random_system(&mut rng, 9);
    let qap = Arc::new(to_qap(&cs).unwrap());
    let (pk, vk) = setup(qap.clone(), &mut rng).unwrap();
    assert_eq!(vk.ic.len(), cs.num_public() + 1);
    assert_eq!(pk.l_query.len(), cs.num_witness());
    assert_eq!(pk.a_query.len(), cs.num_variables());
    assert_eq!(pk.h_query.len(), qap.degree() - 1);
}

#[test]
fn proofs_are_rerandomized() {
    let mut rng = ChaCha20Rng::seed_from_u64(44);
    let (pk, vk) = setup(squaring_qap(), &mut rng).unwrap();
    let p1 = prove(&pk, &[fr(9)], &[fr(3)], &mut ChaCha20Rng::seed_from_u64(1)).unwrap();
    let p2 = prove(&pk, &[fr(9)], &[fr(3)], &mut ChaCha20Rng::seed_from_u64(2)).unwrap();
    assert_ne!(p1.to_bytes(), p2.to_bytes());
    assert!(verify(&vk, &[fr(9)], &p1).unwrap());
    assert!(verify(&vk, &[fr(9)], &p2).unwrap());
}

#[test]
fn unsatisfied_witness_is_refused() {
    let mut rng = ChaCha20Rng::seed_from_u64(45);
    let (pk, _) = setup(squaring_qap(), &mut rng).unwrap();
    assert_eq!(
        prove(&pk, &[fr(9)], &[fr(4)], &mut rng),
        Err(Groth16Error::Unsatisfied { constraint: 0 })
    );
    let (cs, z) = random_system(&mut rng, 6);
    let (pk, _) = setup(Arc::new(to_qap(&cs).unwrap()), &mut rng).unwrap();
    let (public, mut witness) = cs.split_assignment(&z).unwrap();
    witness[2] += Fr::one();
    assert_eq!(
        prove(&pk, &public, &witness, &mut rng),
        Err(Groth16Error::Unsatisfied { constraint: 2 })
    );
}

#[test]
fn argument_errors() {
    let mut rng = ChaCha20Rng::seed_from_u64(46);
    let (pk, vk) = setup(squaring_qap(), &mut rng).unwrap();
    let proof = prove(&pk, &[fr(9)], &[fr(3)], &mut rng).unwrap();
    assert_eq!(
        verify(&vk, &[], &proof),
        Err(Groth16Error::PublicInputCount { expected: 1, actual: 0 })
    );
    assert_eq!(
        prove(&pk, &[fr(9)], &[], &mut rng),
        Err(Groth16Error::WitnessCount { expected: 1, actual: 0 })
    );

    let mut cs = ConstraintSystem::new();
    let _unused = cs.alloc_public(None).unwrap();
    let x = cs.alloc_witness(None).unwrap();
    cs.enforce(x.into(), x.into(), x.into()).unwrap();
    assert_eq!(
        setup(Arc::new(to_qap(&cs).unwrap()), &mut rng).unwrap_err(),
        Groth16Error::UnboundPublicInput(1)
    );
}

#[test]
fn forged_a_component_rejected() {
    let mut rng = ChaCha20Rng::seed_from_u64(47);
    let (pk, vk) = setup(squaring_qap(), &mut rng).unwrap();
    let proof = prove(&pk, &[fr(9)], &[fr(3)], &mut rng).unwrap();
    for _ in 0..100 {
        let forged = Proof { a: g1_mul(&g1_generator(), &random_fr(&mut rng)), ..proof };
        assert!(!verify(&vk, &[fr(9)], &forged).unwrap());
    }
    // the identity in every slot is not a valid proof either
    let zero = Proof { a: AffineRepr::zero(), b: AffineRepr::zero(), c: AffineRepr::zero() };
    assert!(!verify(&vk, &[fr(9)], &zero).unwrap());
}

#[test]
fn random_circuits_complete_and_reject_mutations() {
    let mut rng = ChaCha20Rng::seed_from_u64(48);
    for _ in 0..10 {
        let rows = rng.gen_range(1..=32);
        let (cs, z) = random_system(&mut rng, rows);
        let (pk, vk) = setup(Arc::new(to_qap(&cs).unwrap()), &mut rng).unwrap();
        let (public, witness) = cs.split_assignment(&z).unwrap();
        let proof = prove(&pk, &public, &witness, &mut rng).unwrap();
        assert!(verify(&vk, &public, &proof).unwrap());

        let mut bad_public = public.clone();
        let i = rng.gen_range(0..bad_public.len());
        bad_public[i] += Fr::one();
        assert!(!verify(&vk, &bad_public, &proof).unwrap());
        let shifted = Proof { c: (proof.c + g1_generator()).into_affine(), ..proof };
        assert!(!verify(&vk, &public, &shifted).unwrap());
    }
}

#[test]
fn encodings_round_trip() {
    let mut rng = ChaCha20Rng::seed_from_u64(49);
    let (pk, vk) = setup(squaring_qap(), &mut rng).unwrap();
    let proof = prove(&pk, &[fr(9)], &[fr(3)], &mut rng).unwrap();
    let bytes = proof.to_bytes();
    assert_eq!(bytes.len(), 256);
    assert_eq!(Proof::from_bytes(&bytes).unwrap(), proof);
    let vk_bytes = vk.to_bytes();
    assert_eq!(vk_bytes.len(), 64 + 3 * 128 + 4 + 2 * 64);
    assert_eq!(&vk_bytes[448..452], &[0, 0, 0, 2]);
    let decoded = VerifyingKey::from_bytes(&vk_bytes).unwrap();
    assert_eq!(decoded, vk);
    assert!(verify(&decoded, &[fr(9)], &proof).unwrap());
    assert!(VerifyingKey::from_bytes(&vk_bytes[..vk_bytes.len() - 1]).is_err());
    assert!(Proof::from_bytes(&bytes[..255]).is_err());

    let publics = vec![fr(1), -Fr::one()];
    assert_eq!(decode_public_inputs(&encode_public_inputs(&publics)).unwrap(), publics);
    assert!(decode_public_inputs(&[0u8; 33]).is_err());
}
