//! One global round as a sequential state machine. Clients train in
//! parallel; the server aggregates and proves; every chain interaction goes
//! through the single ledger queue; clients then check the broadcast model
//! against the on-chain digest before adopting it.

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_xoshiro::SplitMix64;
use rayon::prelude::*;

use super::{partition, Dataset, OrchestratorError};
use crate::agg_circuit::{AggCircuit, AggValues, E_BOUND};
use crate::curve::{g1_generator, g1_mul, g2_generator, g2_mul, random_nonzero_fr, Fr};
use crate::fl::{
    client_update, decode_weights, encode_weights, ClientDataset, FixedPointCodec, FlatWeights,
    MlpModel, ModelId, TrainConfig,
};
use crate::groth16::{
    decode_public_inputs, encode_public_inputs, prove, setup, verify, Proof, ProvingKey,
    VerifyingKey, PROOF_BYTES,
};
use crate::ledger::{
    baseline_round, Address, BaselineOutcome, GasSchedule, Receipt, SimChain, TxStatus,
};
use crate::mimc::{hash_encoded, MimcParams};
use crate::qap::Qap;

/// Fraction of rows held out for testing.
const HOLDOUT: f64 = 0.2;

/// Network shape: one of the five named models or an explicit hidden-layer list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Architecture {
    Model(ModelId),
    Hidden(Vec<usize>),
}

impl Architecture {
    pub fn layer_sizes(&self) -> Vec<usize> {
        match self {
            Self::Model(id) => id.layer_sizes(),
            Self::Hidden(h) => {
                let mut s = vec![crate::fl::NUM_FEATURES];
                s.extend(h);
                s.push(crate::fl::NUM_CLASSES);
                s
            }
        }
    }

    pub fn num_params(&self) -> usize {
        crate::fl::param_count(&self.layer_sizes())
    }
}

impl fmt::Display for Architecture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Model(id) => write!(f, "{id}"),
            Self::Hidden(h) => {
                let parts: Vec<String> = h.iter().map(usize::to_string).collect();
                write!(f, "hidden[{}]", parts.join("-"))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RoundConfig {
    /// Total clients `K`.
    pub clients: usize,
    /// Participation fraction `C`.
    pub fraction: f64,
    pub arch: Architecture,
    /// Local training settings. `seed` is replaced per client and round.
    pub train: TrainConfig,
    pub seed: u64,
    pub codec: FixedPointCodec,
    pub gas: GasSchedule,
}

impl RoundConfig {
    pub fn new(model: ModelId, clients: usize) -> Self {
        Self {
            clients,
            fraction: 1.0,
            arch: Architecture::Model(model),
            train: TrainConfig::default(),
            seed: 0,
            codec: FixedPointCodec::default(),
            gas: GasSchedule::default(),
        }
    }

    /// `m = max(⌊C·K⌋, 1)`.
    pub fn selected(&self) -> usize {
        (((self.fraction * self.clients as f64) + 1e-9).floor() as usize).clamp(1, self.clients.max(1))
    }

    pub fn validate(&self) -> Result<(), OrchestratorError> {
        if self.clients == 0 {
            return Err(OrchestratorError::Config("need at least one client".into()));
        }
        if !(self.fraction > 0.0 && self.fraction <= 1.0) {
            return Err(OrchestratorError::Config(format!(
                "participation fraction {} not in (0, 1]",
                self.fraction
            )));
        }
        if let Architecture::Hidden(h) = &self.arch {
            if h.contains(&0) {
                return Err(OrchestratorError::Config("hidden layers must be non-empty".into()));
            }
        }
        self.train.validate()?;
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProveMode {
    Full,
    /// Count constraints and run the chain phase with a placeholder key and
    /// proof of the right shape. Gas is unaffected; nothing is verified.
    Skip,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stage {
    Training,
    Encoding,
    Proving,
    Deployment,
    ClientHashCheck,
    HashSubmission,
    HashSumFinalize,
    ProofVerification,
    ModelCheck,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Party {
    Server,
    /// Client by ordinal.
    Client(usize),
    HashSumContract,
    ProofContract,
}

impl fmt::Display for Party {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Server => f.write_str("server"),
            Self::Client(k) => write!(f, "client {k}"),
            Self::HashSumContract => f.write_str("hash-sum contract"),
            Self::ProofContract => f.write_str("proof contract"),
        }
    }
}

/// Why a round was aborted, and who noticed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RoundFailure {
    pub round: usize,
    pub stage: Stage,
    pub party: Party,
    pub reason: String,
}

/// A single deliberate deviation by the server. Client positions index the
/// selected list, not ordinals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tamper {
    /// Change a client's vector after its hash is published; the average and
    /// `w_hash` follow the altered vector.
    ClientWeightsPostHash { client: usize, index: usize, delta: u64 },
    /// Substitute a client's vector and publish a digest consistent with it.
    PublishedHash { client: usize, index: usize, delta: u64 },
    /// Deploy the hash-sum contract with a different claimed sum.
    ClaimedHashSum { delta: u64 },
    /// XOR a byte of the serialized proof.
    ProofBytes { byte: usize, mask: u8 },
    /// Submit a different `w_hash` to the proof contract.
    PublicWHash { delta: u64 },
    /// Broadcast a quotient vector other than the proven one.
    BroadcastQuotient { index: usize, delta: u64 },
    /// Average over everyone but one client while keeping its hash public.
    OmitClient { client: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TamperPoint {
    ClientWeightsPostHash,
    PublishedHash,
    ClaimedHashSum,
    ProofBytes,
    PublicWHash,
    BroadcastQuotient,
    OmitClient,
}

impl TamperPoint {
    /// The six single-point tampers of the totality property.
    pub const SIX: [TamperPoint; 6] = [
        Self::ClientWeightsPostHash,
        Self::PublishedHash,
        Self::ClaimedHashSum,
        Self::ProofBytes,
        Self::PublicWHash,
        Self::BroadcastQuotient,
    ];

    /// Whether the tamper takes effect before the proof exists.
    pub fn before_proof(self) -> bool {
        matches!(self, Self::ClientWeightsPostHash | Self::PublishedHash | Self::OmitClient)
    }

    /// Random nonzero instance for `m` clients and `p` parameters.
    pub fn sample<R: RngCore + ?Sized>(self, m: usize, p: usize, rng: &mut R) -> Tamper {
        let delta = rng.gen_range(1..1u64 << 20);
        match self {
            Self::ClientWeightsPostHash => {
                Tamper::ClientWeightsPostHash { client: rng.gen_range(0..m), index: rng.gen_range(0..p), delta }
            }
            Self::PublishedHash => {
                Tamper::PublishedHash { client: rng.gen_range(0..m), index: rng.gen_range(0..p), delta }
            }
            Self::ClaimedHashSum => Tamper::ClaimedHashSum { delta },
            Self::ProofBytes => {
                Tamper::ProofBytes { byte: rng.gen_range(0..PROOF_BYTES), mask: rng.gen_range(1..=255) }
            }
            Self::PublicWHash => Tamper::PublicWHash { delta },
            Self::BroadcastQuotient => Tamper::BroadcastQuotient { index: rng.gen_range(0..p), delta },
            Self::OmitClient => Tamper::OmitClient { client: rng.gen_range(0..m) },
        }
    }
}

/// Gas per round, split by transaction.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct GasBreakdown {
    pub deploy_hash_sum: u64,
    pub deploy_verifier: u64,
    /// All client hash submissions.
    pub submissions: u64,
    pub finalize: u64,
    pub verify: u64,
}

impl GasBreakdown {
    pub fn deploys(&self) -> u64 {
        self.deploy_hash_sum + self.deploy_verifier
    }

    pub fn calls(&self) -> u64 {
        self.submissions + self.finalize + self.verify
    }

    pub fn total(&self) -> u64 {
        self.deploys() + self.calls()
    }
}

/// What a third party needs to re-check the round's proof.
#[derive(Clone, Debug, PartialEq)]
pub struct RoundArtifacts {
    pub vk: VerifyingKey,
    pub public: Vec<Fr>,
    pub proof: Proof,
}

#[derive(Clone, Debug)]
pub struct RoundRecord {
    pub round: usize,
    /// Participating ordinals, in public-input order.
    pub selected: Vec<usize>,
    pub arch: Architecture,
    pub params: usize,
    pub accuracy: f64,
    pub constraints: usize,
    /// `None` when the keys came from the cache.
    pub setup_ms: Option<u128>,
    /// `None` when proving was skipped.
    pub prove_ms: Option<u128>,
    /// Best-effort peak resident set of the process, in KiB.
    pub peak_memory_kb: Option<u64>,
    pub gas: GasBreakdown,
    pub baseline: BaselineOutcome,
    pub hash_sum_ok: bool,
    /// `None` when proving was skipped.
    pub proof_ok: Option<bool>,
    /// Every client recomputed `w_hash` from the broadcast and agreed.
    pub clients_ok: bool,
    pub artifacts: Option<RoundArtifacts>,
}

impl RoundRecord {
    pub fn all_verified(&self) -> bool {
        self.hash_sum_ok && self.proof_ok == Some(true) && self.clients_ok
    }
}

/// Phase A output: what each selected client produced and published.
#[derive(Clone, Debug)]
pub struct Contributions {
    pub round: usize,
    pub selected: Vec<usize>,
    pub weights: Vec<FlatWeights>,
    pub encoded: Vec<Vec<u64>>,
    /// Each client's own digest, computed locally.
    pub hashes: Vec<Fr>,
}

/// Phase B output: the server's claims.
#[derive(Clone, Debug)]
pub struct ServerOutput {
    pub public: Vec<Fr>,
    pub claimed_h_sum: Fr,
    pub broadcast: Vec<u64>,
    pub vk: Arc<VerifyingKey>,
    /// Serialized proof; a placeholder when proving was skipped.
    pub proof: Vec<u8>,
    pub proved: bool,
    pub constraints: usize,
    pub setup_ms: Option<u128>,
    pub prove_ms: Option<u128>,
}

struct Keys {
    circuit: AggCircuit,
    pk: ProvingKey,
    vk: Arc<VerifyingKey>,
    constraints: usize,
}

/// Long-lived protocol state: client data, the global model, the chain and
/// the CRS cache.
pub struct Protocol {
    cfg: RoundConfig,
    clients: Vec<ClientDataset>,
    test: Dataset,
    global: MlpModel,
    round: usize,
    mimc: MimcParams,
    chain: SimChain,
    keys: HashMap<(usize, usize), Arc<Keys>>,
    counts: HashMap<(usize, usize), usize>,
}

fn derive_seed(base: u64, round: usize, slot: u64) -> u64 {
    let mut s = SplitMix64::seed_from_u64(base ^ ((round as u64) << 32) ^ slot.rotate_left(17));
    s.next_u64()
}

const SLOT_INIT: u64 = 0xA11C_E000;
const SLOT_SELECT: u64 = 0x5E1E_C700;
const SLOT_SETUP: u64 = 0x5E7C_0000;
const SLOT_PROVE: u64 = 0x9807_E000;

fn fail(round: usize, stage: Stage, party: Party, reason: impl Into<String>) -> OrchestratorError {
    OrchestratorError::Round(RoundFailure { round, stage, party, reason: reason.into() })
}

impl Protocol {
    /// Splits `data` among `cfg.clients` clients with a 20% holdout.
    pub fn new(cfg: RoundConfig, data: &Dataset) -> Result<Self, OrchestratorError> {
        cfg.validate()?;
        let (clients, test) = partition(data, cfg.clients, HOLDOUT, cfg.seed)?;
        Self::with_clients(cfg, clients, test)
    }

    pub fn with_clients(
        cfg: RoundConfig,
        clients: Vec<ClientDataset>,
        test: Dataset,
    ) -> Result<Self, OrchestratorError> {
        cfg.validate()?;
        if clients.len() != cfg.clients {
            return Err(OrchestratorError::Config(format!(
                "{} client datasets for K = {}",
                clients.len(),
                cfg.clients
            )));
        }
        let mut rng = ChaCha20Rng::seed_from_u64(derive_seed(cfg.seed, 0, SLOT_INIT));
        let global = MlpModel::random(&cfg.arch.layer_sizes(), &mut rng)?;
        let chain = SimChain::new(cfg.gas);
        Ok(Self {
            cfg,
            clients,
            test,
            global,
            round: 0,
            mimc: MimcParams::default(),
            chain,
            keys: HashMap::new(),
            counts: HashMap::new(),
        })
    }

    pub fn config(&self) -> &RoundConfig {
        &self.cfg
    }

    /// Local-training settings for the following rounds.
    pub fn set_train(&mut self, train: TrainConfig) -> Result<(), OrchestratorError> {
        train.validate()?;
        self.cfg.train = train;
        Ok(())
    }

    pub fn global(&self) -> &MlpModel {
        &self.global
    }

    pub fn chain(&self) -> &SimChain {
        &self.chain
    }

    /// Rounds completed so far.
    pub fn rounds_done(&self) -> usize {
        self.round
    }

    pub fn test_accuracy(&self) -> f64 {
        self.global.accuracy(&self.test.features, &self.test.labels)
    }

    pub fn run_round(&mut self, mode: ProveMode) -> Result<RoundRecord, OrchestratorError> {
        self.run_round_with(mode, None)
    }

    /// Full round with an optional server-side tamper.
    pub fn run_round_with(
        &mut self,
        mode: ProveMode,
        tamper: Option<&Tamper>,
    ) -> Result<RoundRecord, OrchestratorError> {
        let contrib = self.train()?;
        let out = self.aggregate(&contrib, mode, tamper)?;
        self.settle(&contrib, &out, tamper)
    }

    /// Phase A: select, train in parallel, encode, hash locally.
    pub fn train(&self) -> Result<Contributions, OrchestratorError> {
        let round = self.round;
        let selected = crate::fl::select_clients(
            self.cfg.clients,
            self.cfg.fraction,
            derive_seed(self.cfg.seed, round, SLOT_SELECT),
        )?;
        let weights: Vec<FlatWeights> = selected
            .par_iter()
            .map(|&k| {
                let cfg = TrainConfig { seed: derive_seed(self.cfg.seed, round, k as u64), ..self.cfg.train.clone() };
                client_update(&self.global, &self.clients[k], &cfg)
                    .map_err(|e| fail(round, Stage::Training, Party::Client(k), e.to_string()))
            })
            .collect::<Result<_, _>>()?;
        let mut encoded = Vec::with_capacity(weights.len());
        let mut hashes = Vec::with_capacity(weights.len());
        for (w, &k) in weights.iter().zip(&selected) {
            let e = encode_weights(w, &self.cfg.codec)
                .map_err(|e| fail(round, Stage::Encoding, Party::Client(k), e.to_string()))?;
            let h = hash_encoded(&e, &self.mimc)
                .map_err(|e| fail(round, Stage::Encoding, Party::Client(k), e.to_string()))?;
            encoded.push(e);
            hashes.push(h);
        }
        Ok(Contributions { round, selected, weights, encoded, hashes })
    }

    fn keys_for(&mut self, m: usize, p: usize) -> Result<(Arc<Keys>, Option<u128>), OrchestratorError> {
        if let Some(k) = self.keys.get(&(m, p)) {
            return Ok((k.clone(), None));
        }
        let start = Instant::now();
        let circuit = AggCircuit::new(m, p, self.mimc.clone())?;
        let cs = circuit.build()?;
        let constraints = cs.num_constraints();
        let qap = Arc::new(Qap::from_system(&cs).map_err(crate::groth16::Groth16Error::from)?);
        drop(cs);
        let mut rng = ChaCha20Rng::seed_from_u64(derive_seed(self.cfg.seed, m, SLOT_SETUP ^ p as u64));
        let (pk, vk) = setup(qap, &mut rng)?;
        let keys = Arc::new(Keys { circuit, pk, vk: Arc::new(vk), constraints });
        self.keys.insert((m, p), keys.clone());
        self.counts.insert((m, p), constraints);
        Ok((keys, Some(start.elapsed().as_millis())))
    }

    fn count_for(&mut self, m: usize, p: usize) -> Result<usize, OrchestratorError> {
        if let Some(&c) = self.counts.get(&(m, p)) {
            return Ok(c);
        }
        let c = AggCircuit::new(m, p, self.mimc.clone())?.constraint_count()?;
        self.counts.insert((m, p), c);
        Ok(c)
    }

    /// Phase B: the server aggregates (applying any pre-proof tamper), then
    /// proves.
    pub fn aggregate(
        &mut self,
        contrib: &Contributions,
        mode: ProveMode,
        tamper: Option<&Tamper>,
    ) -> Result<ServerOutput, OrchestratorError> {
        let round = contrib.round;
        let m = contrib.encoded.len();
        let p = self.cfg.arch.num_params();
        let circuit = AggCircuit::new(m, p, self.mimc.clone())?;
        let server_err = |stage: Stage, e: &dyn fmt::Display| fail(round, stage, Party::Server, e.to_string());

        let values = match tamper {
            Some(&Tamper::ClientWeightsPostHash { client, index, delta }) => {
                let mut enc = contrib.encoded.clone();
                bump(&mut enc[client][index], delta);
                let forged = circuit.compute_values(&enc).map_err(|e| server_err(Stage::Proving, &e))?;
                AggValues {
                    client_hashes: contrib.hashes.clone(),
                    h_sum: contrib.hashes.iter().sum(),
                    ..forged
                }
            }
            Some(&Tamper::PublishedHash { client, index, delta }) => {
                let mut enc = contrib.encoded.clone();
                bump(&mut enc[client][index], delta);
                circuit.compute_values(&enc).map_err(|e| server_err(Stage::Proving, &e))?
            }
            Some(&Tamper::OmitClient { client }) => {
                if m < 2 {
                    return Err(OrchestratorError::Config("cannot omit the only client".into()));
                }
                let rest: Vec<&Vec<u64>> =
                    contrib.encoded.iter().enumerate().filter(|(k, _)| *k != client).map(|(_, e)| e).collect();
                let honest = circuit.compute_values(&contrib.encoded).map_err(|e| server_err(Stage::Proving, &e))?;
                let (quotient, remainder): (Vec<u64>, Vec<u64>) = (0..p)
                    .map(|j| {
                        let s: u128 = rest.iter().map(|e| e[j] as u128).sum();
                        let d = rest.len() as u128;
                        ((s / d) as u64, (s % d) as u64)
                    })
                    .unzip();
                let w_hash = hash_encoded(&quotient, &self.mimc).map_err(|e| server_err(Stage::Proving, &e))?;
                AggValues { quotient, remainder, w_hash, ..honest }
            }
            _ => circuit.compute_values(&contrib.encoded).map_err(|e| server_err(Stage::Proving, &e))?,
        };
        let public = values.public_inputs();
        let claimed_h_sum = values.h_sum;
        let broadcast = values.quotient.clone();

        match mode {
            ProveMode::Full => {
                let (keys, setup_ms) = self.keys_for(m, p)?;
                let assignment = keys.circuit.assign_values(values).map_err(|e| server_err(Stage::Proving, &e))?;
                let mut rng = ChaCha20Rng::seed_from_u64(derive_seed(self.cfg.seed, round, SLOT_PROVE));
                let start = Instant::now();
                let proof = prove(&keys.pk, &assignment.public, &assignment.witness, &mut rng)
                    .map_err(|e| server_err(Stage::Proving, &e))?;
                let prove_ms = start.elapsed().as_millis();
                Ok(ServerOutput {
                    public,
                    claimed_h_sum,
                    broadcast,
                    vk: keys.vk.clone(),
                    proof: proof.to_bytes().to_vec(),
                    proved: true,
                    constraints: keys.constraints,
                    setup_ms,
                    prove_ms: Some(prove_ms),
                })
            }
            ProveMode::Skip => {
                let constraints = self.count_for(m, p)?;
                let mut rng = ChaCha20Rng::seed_from_u64(derive_seed(self.cfg.seed, round, SLOT_PROVE));
                let (vk, proof) = placeholder_key_and_proof(m + 2, &mut rng)?;
                Ok(ServerOutput {
                    public,
                    claimed_h_sum,
                    broadcast,
                    vk: Arc::new(vk),
                    proof: proof.to_bytes().to_vec(),
                    proved: false,
                    constraints,
                    setup_ms: None,
                    prove_ms: None,
                })
            }
        }
    }

    /// Phase C: contracts, client checks, adoption. The global model only
    /// changes if every check passes.
    pub fn settle(
        &mut self,
        contrib: &Contributions,
        out: &ServerOutput,
        tamper: Option<&Tamper>,
    ) -> Result<RoundRecord, OrchestratorError> {
        let round = contrib.round;
        let m = contrib.selected.len();
        let mut public = out.public.clone();
        let mut claimed = out.claimed_h_sum;
        let mut proof = out.proof.clone();
        let mut broadcast = out.broadcast.clone();
        match tamper {
            Some(&Tamper::ClaimedHashSum { delta }) => claimed += Fr::from(delta),
            Some(&Tamper::ProofBytes { byte, mask }) => {
                let n = proof.len();
                proof[byte % n] ^= mask.max(1)
            }
            Some(&Tamper::PublicWHash { delta }) => public[m] += Fr::from(delta),
            Some(&Tamper::BroadcastQuotient { index, delta }) => bump(&mut broadcast[index], delta),
            _ => {}
        }

        let addrs: Vec<Address> = contrib.selected.iter().map(|&k| Address::client(k)).collect();
        let server = Address::server();
        let mut gas = GasBreakdown::default();

        let deploy_h = self.chain.deploy_hash_sum(server, claimed, &addrs);
        gas.deploy_hash_sum = deploy_h.gas;
        let contract_h = created(round, &deploy_h)?;
        let deploy_p = self.chain.deploy_verifier(server, &out.vk);
        gas.deploy_verifier = deploy_p.gas;
        let contract_p = created(round, &deploy_p)?;

        // off-chain: the server publishes the public inputs; each client
        // finds its own digest at its index before submitting
        for (i, (&k, own)) in contrib.selected.iter().zip(&contrib.hashes).enumerate() {
            let recomputed = hash_encoded(&contrib.encoded[i], &self.mimc)
                .map_err(|e| fail(round, Stage::ClientHashCheck, Party::Client(k), e.to_string()))?;
            if recomputed != *own || public.get(i) != Some(own) {
                return Err(fail(
                    round,
                    Stage::ClientHashCheck,
                    Party::Client(k),
                    format!("published digest at index {i} is not this client's"),
                ));
            }
        }
        for ((&k, h), a) in contrib.selected.iter().zip(&contrib.hashes).zip(&addrs) {
            let r = self.chain.submit_hash(contract_h, *a, h);
            gas.submissions += r.gas;
            if let TxStatus::Revert(reason) = &r.status {
                return Err(fail(round, Stage::HashSubmission, Party::Client(k), reason.clone()));
            }
        }
        let last = *addrs.last().expect("at least one client");
        let fin = self.chain.finalize_hash_sum(contract_h, last);
        gas.finalize = fin.gas;
        if fin.bool_output() != Some(true) {
            return Err(fail(
                round,
                Stage::HashSumFinalize,
                Party::HashSumContract,
                format!("submitted digests do not sum to the claim ({:?})", fin.status),
            ));
        }

        let ver = self.chain.verify_proof_bytes(contract_p, server, &public, &proof);
        gas.verify = ver.gas;
        let proof_ok = match (out.proved, ver.bool_output()) {
            (true, Some(true)) => Some(true),
            (true, _) => {
                return Err(fail(
                    round,
                    Stage::ProofVerification,
                    Party::ProofContract,
                    format!("proof rejected ({:?})", ver.status),
                ))
            }
            (false, _) => None,
        };

        // the public list the clients trust: what the contract accepted, or
        // the server's announcement when nothing was proven
        let trusted = if out.proved { self.chain.proof_state(&contract_p)?.public.clone() } else { public.clone() };
        let codec = self.cfg.codec;
        let sizes = self.cfg.arch.layer_sizes();
        let mut adopted: Option<FlatWeights> = None;
        for (i, (&k, own)) in contrib.selected.iter().zip(&contrib.hashes).enumerate() {
            let check = |reason: String| fail(round, Stage::ModelCheck, Party::Client(k), reason);
            if trusted.get(i) != Some(own) || trusted.get(m + 1) != Some(&claimed) {
                return Err(check("accepted public inputs disagree with the hash-sum contract".into()));
            }
            let h = hash_encoded(&broadcast, &self.mimc).map_err(|e| check(e.to_string()))?;
            if Some(&h) != trusted.get(m) {
                return Err(check("broadcast model does not match the accepted w_hash".into()));
            }
            let w = decode_weights(&broadcast, &codec).map_err(|e| check(e.to_string()))?;
            MlpModel::unflatten(&w, &sizes).map_err(|e| check(e.to_string()))?;
            match &adopted {
                None => adopted = Some(w),
                Some(prev) if *prev == w => {}
                Some(_) => return Err(check("decoded model differs between clients".into())),
            }
        }
        let adopted = adopted.expect("at least one client");
        self.global.load(&adopted)?;
        self.round += 1;

        let mut scratch = SimChain::new(self.cfg.gas);
        let baseline = baseline_round(&mut scratch, &contrib.encoded)?;

        let artifacts = if out.proved {
            Some(RoundArtifacts { vk: (*out.vk).clone(), public, proof: Proof::from_bytes(&proof)? })
        } else {
            None
        };
        Ok(RoundRecord {
            round,
            selected: contrib.selected.clone(),
            arch: self.cfg.arch.clone(),
            params: self.cfg.arch.num_params(),
            accuracy: self.test_accuracy(),
            constraints: out.constraints,
            setup_ms: out.setup_ms,
            prove_ms: out.prove_ms,
            peak_memory_kb: peak_memory_kb(),
            gas,
            baseline,
            hash_sum_ok: true,
            proof_ok,
            clients_ok: true,
            artifacts,
        })
    }
}

fn bump(v: &mut u64, delta: u64) {
    // stay inside the encoded range so the change is not caught by a
    // trivial bound check
    *v = (*v + delta) % E_BOUND;
}

fn created(round: usize, r: &Receipt) -> Result<Address, OrchestratorError> {
    r.created().ok_or_else(|| fail(round, Stage::Deployment, Party::Server, format!("{:?}", r.status)))
}

/// A well-formed verifying key for `publics` inputs and a proof, both made
/// of random valid points. They cost exactly what real ones do on-chain.
fn placeholder_key_and_proof<R: RngCore + ?Sized>(
    publics: usize,
    rng: &mut R,
) -> Result<(VerifyingKey, Proof), OrchestratorError> {
    let g1 = g1_generator();
    let g2 = g2_generator();
    let mut p1 = || g1_mul(&g1, &random_nonzero_fr(rng));
    let ic = (0..=publics).map(|_| p1()).collect();
    let alpha = p1();
    let (a, c) = (p1(), p1());
    let mut p2 = || g2_mul(&g2, &random_nonzero_fr(rng));
    let vk = VerifyingKey::new(alpha, p2(), p2(), p2(), ic).map_err(crate::groth16::Groth16Error::from)?;
    Ok((vk, Proof { a, b: p2(), c }))
}

/// Chain-phase gas for `m` clients, measured by running the honest contract
/// sequence with random digests and a placeholder key and proof.
pub fn gas_dry_run(m: usize, schedule: GasSchedule, seed: u64) -> Result<GasBreakdown, OrchestratorError> {
    if m == 0 {
        return Err(OrchestratorError::Config("need at least one client".into()));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let hashes: Vec<Fr> = (0..m).map(|_| random_nonzero_fr(&mut rng)).collect();
    let (vk, proof) = placeholder_key_and_proof(m + 2, &mut rng)?;
    let mut public = hashes.clone();
    public.push(random_nonzero_fr(&mut rng));
    public.push(hashes.iter().sum());
    let mut chain = SimChain::new(schedule);
    let server = Address::server();
    let addrs: Vec<Address> = (0..m).map(Address::client).collect();
    let mut gas = GasBreakdown::default();
    let r = chain.deploy_hash_sum(server, public[m + 1], &addrs);
    gas.deploy_hash_sum = r.gas;
    let h = created(0, &r)?;
    let r = chain.deploy_verifier(server, &vk);
    gas.deploy_verifier = r.gas;
    let p = created(0, &r)?;
    for (a, x) in addrs.iter().zip(&hashes) {
        gas.submissions += chain.submit_hash(h, *a, x).gas;
    }
    let fin = chain.finalize_hash_sum(h, addrs[m - 1]);
    debug_assert_eq!(fin.bool_output(), Some(true));
    gas.finalize = fin.gas;
    gas.verify = chain.verify_proof_onchain(p, server, &public, &proof).gas;
    Ok(gas)
}

/// `VmHWM` from `/proc/self/status`; `None` where that is unavailable.
pub fn peak_memory_kb() -> Option<u64> {
    let status = fs::read_to_string("/proc/self/status").ok()?;
    status
        .lines()
        .find_map(|l| l.strip_prefix("VmHWM:"))
        .and_then(|v| v.trim().trim_end_matches("kB").trim().parse().ok())
}

const VK_FILE: &str = "vk.bin";
const PUBLIC_FILE: &str = "public.bin";
const PROOF_FILE: &str = "proof.bin";

/// Writes `vk.bin`, `public.bin`, `proof.bin` into `dir`.
pub fn write_artifacts(dir: &Path, a: &RoundArtifacts) -> Result<[PathBuf; 3], OrchestratorError> {
    fs::create_dir_all(dir).map_err(|e| OrchestratorError::io(dir, e))?;
    let paths = [dir.join(VK_FILE), dir.join(PUBLIC_FILE), dir.join(PROOF_FILE)];
    let blobs = [a.vk.to_bytes(), encode_public_inputs(&a.public), a.proof.to_bytes().to_vec()];
    for (path, bytes) in paths.iter().zip(blobs) {
        fs::write(path, bytes).map_err(|e| OrchestratorError::io(path, e))?;
    }
    Ok(paths)
}

pub fn read_artifacts(vk: &Path, public: &Path, proof: &Path) -> Result<RoundArtifacts, OrchestratorError> {
    let read = |p: &Path| fs::read(p).map_err(|e| OrchestratorError::io(p, e));
    Ok(RoundArtifacts {
        vk: VerifyingKey::from_bytes(&read(vk)?)?,
        public: decode_public_inputs(&read(public)?)?,
        proof: Proof::from_bytes(&read(proof)?)?,
    })
}

pub fn verify_artifacts(a: &RoundArtifacts) -> Result<bool, OrchestratorError> {
    Ok(verify(&a.vk, &a.public, &a.proof)?)
}
