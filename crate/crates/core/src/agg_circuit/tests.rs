use std::sync::Arc;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use ark_ff::Field;

use super::*;
use crate::fl::{decode_weights, encode_weights, fed_avg, FixedPointCodec};
use crate::groth16::{prove, setup, verify};
use crate::mimc::{mimc7_hash_vec, pack, GADGET_CONSTRAINTS};
use crate::qap::to_qap;

/// Independent count: per parameter the sum row, 48+1 quotient rows and two
/// b+1 remainder checks; per hashed vector one gadget per packed element plus
/// the digest equality; one row for the hash sum.
fn count_oracle(m: usize, p: usize) -> usize {
    let b = match m {
        1 => 0,
        _ => (m as f64).log2().ceil() as usize,
    };
    p * (1 + 49 + 2 * (b + 1)) + (m + 1) * (GADGET_CONSTRAINTS * p.div_ceil(3) + 1) + 1
}

fn satisfied(circuit: &AggCircuit, w: &AggWitness) -> bool {
    let cs = circuit.build().unwrap();
    let z = cs.full_assignment(&w.public, &w.witness).unwrap();
    cs.is_satisfied(&z).unwrap()
}

#[test]
fn remainder_bit_widths() {
    let got: Vec<usize> = [1, 2, 3, 4, 5, 8, 9, 10, 20, 64, 65].map(rem_bits).to_vec();
    assert_eq!(got, vec![0, 1, 2, 2, 3, 3, 4, 4, 5, 6, 7]);
}

#[test]
fn counts_match_oracle_and_build() {
    let params = MimcParams::default();
    for (m, p) in [(1, 1), (2, 2), (3, 1), (4, 5), (5, 7), (7, 3)] {
        let c = AggCircuit::new(m, p, params.clone()).unwrap();
        let built = c.build().unwrap();
        assert_eq!(built.num_constraints(), count_oracle(m, p), "m={m} P={p}");
        assert_eq!(c.constraint_count().unwrap(), built.num_constraints());
        assert_eq!(built.num_public(), m + 2);
    }
    for (m, p) in [(10, 669), (20, 669), (5, 669), (10, 4029)] {
        assert_eq!(constraint_count(m, p, &params).unwrap(), count_oracle(m, p));
    }
    assert_eq!(constraint_count(10, 669, &params).unwrap(), 933_044);
}

#[test]
fn identity_aggregation() {
    let c = AggCircuit::new(1, 1, MimcParams::default()).unwrap();
    let w = c.assign_witness(&[vec![12345]]).unwrap();
    assert_eq!(w.values.quotient, vec![12345]);
    assert_eq!(w.values.remainder, vec![0]);
    assert!(satisfied(&c, &w));
    // any other quotient breaks it
    let mut v = w.values.clone();
    v.quotient[0] += 1;
    v.w_hash = hash_encoded(&v.quotient, c.mimc()).unwrap();
    assert!(!satisfied(&c, &c.assign_values(v).unwrap()));
}

/// (encoded vectors, quotients, remainders)
type DivCase = (Vec<Vec<u64>>, Vec<u64>, Vec<u64>);

#[test]
fn integer_division_examples() {
    let params = MimcParams::default();
    let cases: [DivCase; 3] = [
        (vec![vec![10, 11], vec![12, 15]], vec![11, 13], vec![0, 0]),
        (vec![vec![1], vec![2], vec![3]], vec![2], vec![0]),
        (vec![vec![1], vec![2], vec![4]], vec![2], vec![1]),
    ];
    for (e, q, rem) in cases {
        let c = AggCircuit::new(e.len(), e[0].len(), params.clone()).unwrap();
        let w = c.assign_witness(&e).unwrap();
        assert_eq!(w.values.quotient, q);
        assert_eq!(w.values.remainder, rem);
        assert!(satisfied(&c, &w));
    }
}

#[test]
fn public_inputs_are_canonical() {
    let params = MimcParams::default();
    let e = vec![vec![5, 6, 7, 8], vec![1, 2, 3, 4], vec![9, 9, 9, 9]];
    let w = assign_witness(&e, &params).unwrap();
    assert_eq!(w.public.len(), 5);
    for (k, ek) in e.iter().enumerate() {
        assert_eq!(w.public[k], mimc7_hash_vec(&pack(ek), &params).unwrap());
    }
    assert_eq!(w.public[3], mimc7_hash_vec(&pack(&w.values.quotient), &params).unwrap());
    assert_eq!(w.public[4], w.public[0] + w.public[1] + w.public[2]);
    assert_eq!(w.public, w.values.public_inputs());
}

#[test]
fn argument_errors() {
    let params = MimcParams::default();
    assert!(matches!(AggCircuit::new(0, 3, params.clone()), Err(AggError::EmptyShape { .. })));
    let c = AggCircuit::new(2, 2, params).unwrap();
    assert!(matches!(c.assign_witness(&[vec![1, 2]]), Err(AggError::ClientCount { .. })));
    assert!(matches!(c.assign_witness(&[vec![1, 2], vec![1]]), Err(AggError::Shape { client: 1, .. })));
    assert_eq!(
        c.assign_witness(&[vec![1, 2], vec![1, E_BOUND]]),
        Err(AggError::Range { client: 1, index: 1, value: E_BOUND })
    );
}

#[test]
fn tampered_input_after_hashing_unsatisfied() {
    let c = AggCircuit::new(3, 4, MimcParams::default()).unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(8);
    let e: Vec<Vec<u64>> = (0..3).map(|_| (0..4).map(|_| rng.gen_range(0..1 << 41)).collect()).collect();
    let honest = c.compute_values(&e).unwrap();
    for k in 0..3 {
        for j in 0..4 {
            let mut v = honest.clone();
            v.encoded[k][j] += 1;
            // keep the sum row consistent so only the digest can catch it
            let sum: u128 = v.encoded.iter().map(|x| x[j] as u128).sum();
            v.quotient[j] = (sum / 3) as u64;
            v.remainder[j] = (sum % 3) as u64;
            v.w_hash = hash_encoded(&v.quotient, c.mimc()).unwrap();
            assert!(!satisfied(&c, &c.assign_values(v).unwrap()));
        }
    }
}

#[test]
fn every_single_value_perturbation_breaks_satisfiability() {
    let mut rng = ChaCha20Rng::seed_from_u64(9);
    for (m, p) in [(2, 2), (3, 1), (4, 4)] {
        let c = AggCircuit::new(m, p, MimcParams::default()).unwrap();
        let e: Vec<Vec<u64>> =
            (0..m).map(|_| (0..p).map(|_| rng.gen_range(0..1 << 41)).collect()).collect();
        let w = c.assign_witness(&e).unwrap();
        let cs = c.build().unwrap();
        let z = cs.full_assignment(&w.public, &w.witness).unwrap();
        assert!(cs.is_satisfied(&z).unwrap());
        for i in 1..z.len() {
            let mut bad = z.clone();
            bad[i] += Fr::one();
            assert!(cs.first_unsatisfied(&bad).unwrap().is_some(), "m={m} P={p} var {i}");
        }
    }
}

#[test]
fn quotient_is_unique_under_range_checks() {
    let mut rng = ChaCha20Rng::seed_from_u64(10);
    for m in 2..=6u64 {
        for _ in 0..20 {
            let sum: u64 = (0..m).map(|_| rng.gen_range(0..1u64 << 41)).sum();
            let m_inv = Fr::from(m).inverse().unwrap();
            let fits: Vec<u64> = (0..m)
                .filter(|&r| {
                    let q = (Fr::from(sum) - Fr::from(r)) * m_inv;
                    let limbs = q.into_bigint().0;
                    limbs[1] == 0 && limbs[2] == 0 && limbs[3] == 0 && limbs[0] < 1 << Q_BITS
                })
                .collect();
            assert_eq!(fits, vec![sum % m]);
        }
    }
}

#[test]
fn wrong_remainder_with_field_quotient_unsatisfied() {
    // q' = (Σe − rem')/m is a huge field element when rem' is wrong; the
    // truncated bit decomposition cannot recompose it.
    let c = AggCircuit::new(3, 1, MimcParams::new(crate::mimc::DEFAULT_SEED, 3).unwrap()).unwrap();
    let e = vec![vec![1], vec![2], vec![4]];
    let w = c.assign_witness(&e).unwrap();
    let cs = c.build().unwrap();
    let z = cs.full_assignment(&w.public, &w.witness).unwrap();
    // witness layout: e (3), q, rem, then q bits ...
    let (q_idx, rem_idx) = (1 + 5 + 3, 1 + 5 + 4);
    assert_eq!(z[q_idx], Fr::from(2u64));
    assert_eq!(z[rem_idx], Fr::from(1u64));
    for r in [0u64, 2] {
        let mut bad = z.clone();
        bad[rem_idx] = Fr::from(r);
        bad[q_idx] = (Fr::from(7u64) - Fr::from(r)) * Fr::from(3u64).inverse().unwrap();
        assert!(!cs.is_satisfied(&bad).unwrap());
    }
}

#[test]
fn decoded_output_tracks_float_fedavg() {
    let codec = FixedPointCodec::default();
    let mut rng = ChaCha20Rng::seed_from_u64(12);
    let (m, p) = (5, 40);
    let ws: Vec<Vec<f64>> = (0..m).map(|_| (0..p).map(|_| rng.gen_range(-3.0..3.0)).collect()).collect();
    let enc: Vec<Vec<u64>> = ws.iter().map(|w| encode_weights(w, &codec).unwrap()).collect();
    let c = AggCircuit::new(m, p, MimcParams::default()).unwrap();
    let v = c.compute_values(&enc).unwrap();
    let decoded = decode_weights(&v.quotient, &codec).unwrap();
    let avg = fed_avg(&ws, &vec![1; m]).unwrap();
    for (d, a) in decoded.iter().zip(&avg) {
        assert!((d - a).abs() <= 2.0 / codec.scale());
    }
}

#[test]
fn end_to_end_proof() {
    let mut rng = ChaCha20Rng::seed_from_u64(13);
    let c = AggCircuit::new(2, 3, MimcParams::default()).unwrap();
    let cs = c.build().unwrap();
    let (pk, vk) = setup(Arc::new(to_qap(&cs).unwrap()), &mut rng).unwrap();
    let w = c.assign_witness(&[vec![100, 200, 301], vec![103, 1, 2]]).unwrap();
    let proof = prove(&pk, &w.public, &w.witness, &mut rng).unwrap();
    assert!(verify(&vk, &w.public, &proof).unwrap());
    let mut bad = w.public.clone();
    *bad.last_mut().unwrap() += Fr::one();
    assert!(!verify(&vk, &bad, &proof).unwrap());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn honest_witness_satisfies(seed in any::<u64>(), m in 1usize..5, p in 1usize..6) {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let c = AggCircuit::new(m, p, MimcParams::new(seed, 4).unwrap()).unwrap();
        let e: Vec<Vec<u64>> =
            (0..m).map(|_| (0..p).map(|_| rng.gen_range(0..E_BOUND)).collect()).collect();
        let w = c.assign_witness(&e).unwrap();
        prop_assert!(satisfied(&c, &w));
        for j in 0..p {
            let sum: u128 = e.iter().map(|x| x[j] as u128).sum();
            prop_assert_eq!(
                w.values.quotient[j] as u128 * m as u128 + w.values.remainder[j] as u128,
                sum
            );
            prop_assert!((w.values.remainder[j] as usize) < m);
        }
    }
}
