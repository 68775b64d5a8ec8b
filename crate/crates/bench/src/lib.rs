//! Shared fixtures for the benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use zkdfl::curve::{g1_generator, g1_mul, random_fr, Fr, G1Affine};
use zkdfl::fl::ClientDataset;

pub fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

pub fn scalars(n: usize, seed: u64) -> Vec<Fr> {
    let mut r = rng(seed);
    (0..n).map(|_| random_fr(&mut r)).collect()
}

pub fn g1_points(n: usize, seed: u64) -> Vec<G1Affine> {
    let g = g1_generator();
    scalars(n, seed).iter().map(|s| g1_mul(&g, s)).collect()
}

/// Encoded client vectors below the circuit's input bound.
pub fn encoded_clients(m: usize, p: usize, seed: u64) -> Vec<Vec<u64>> {
    let mut r = rng(seed);
    (0..m).map(|_| (0..p).map(|_| r.gen_range(0..1u64 << 41)).collect()).collect()
}

/// Random 45-feature rows over 19 labels.
pub fn client_data(rows: usize, seed: u64) -> ClientDataset {
    let mut r = rng(seed);
    let features = (0..rows).map(|_| (0..45).map(|_| r.gen_range(-2.0..2.0)).collect()).collect();
    let labels = (0..rows).map(|_| r.gen_range(0..19)).collect();
    ClientDataset::new(0, features, labels).expect("matching lengths")
}
