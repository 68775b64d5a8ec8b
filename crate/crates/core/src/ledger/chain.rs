use std::collections::BTreeMap;

use ark_ff::Zero;
use sha2::{Digest, Sha256};

use super::{
    Address, ContractKind, GasSchedule, LedgerError, Receipt, TxKind, TxOutput, TxRecord, TxStatus,
};
use crate::curve::{fr_from_bytes, fr_to_bytes, Fr, FR_BYTES};
use crate::groth16::{decode_public_inputs, encode_public_inputs, verify, Proof, VerifyingKey, PROOF_BYTES};

/// Contract_h: sums the participants' digests and compares with the claim.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HashSumState {
    pub expected: Vec<Address>,
    pub claimed: Fr,
    pub submitted: BTreeMap<Address, Fr>,
    pub running_sum: Fr,
    pub finalized: bool,
    pub result: Option<bool>,
    sum_written: bool,
}

/// Contract_p: holds a verifying key and records a successful verification.
#[derive(Clone, Debug, PartialEq)]
pub struct ProofVerifyState {
    pub vk: VerifyingKey,
    pub accepted: bool,
    pub public: Vec<Fr>,
}

/// Naive aggregation: every client writes its full vector on-chain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BaselineState {
    pub participants: Vec<Address>,
    pub params: usize,
    pub stored: BTreeMap<Address, Vec<u64>>,
    pub aggregate: Option<Vec<u64>>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ContractState {
    HashSum(HashSumState),
    ProofVerify(Box<ProofVerifyState>),
    Baseline(BaselineState),
}

impl ContractState {
    pub fn kind(&self) -> ContractKind {
        match self {
            Self::HashSum(_) => ContractKind::HashSum,
            Self::ProofVerify(_) => ContractKind::ProofVerify,
            Self::Baseline(_) => ContractKind::Baseline,
        }
    }
}

/// Transactions apply one at a time, in submission order. Reverts still pay.
#[derive(Clone, Debug)]
pub struct SimChain {
    schedule: GasSchedule,
    contracts: BTreeMap<Address, ContractState>,
    log: Vec<TxRecord>,
    gas_by_account: BTreeMap<Address, u64>,
    gas_by_contract: BTreeMap<Address, u64>,
}

impl Default for SimChain {
    fn default() -> Self {
        Self::new(GasSchedule::default())
    }
}

fn revert(gas: u64, reason: impl Into<String>) -> (u64, TxStatus, TxOutput) {
    (gas, TxStatus::Revert(reason.into()), TxOutput::None)
}

fn ok(gas: u64, output: TxOutput) -> (u64, TxStatus, TxOutput) {
    (gas, TxStatus::Success, output)
}

fn parse_addresses(bytes: &[u8]) -> Option<Vec<Address>> {
    if bytes.is_empty() || !bytes.len().is_multiple_of(20) {
        return None;
    }
    let list: Vec<Address> = bytes.chunks(20).map(|c| Address(c.try_into().expect("20"))).collect();
    let mut sorted = list.clone();
    sorted.sort();
    sorted.dedup();
    (sorted.len() == list.len()).then_some(list)
}

/// 32-byte big-endian word holding a `u64`.
fn word_to_u64(w: &[u8]) -> Option<u64> {
    w[..24].iter().all(|&b| b == 0).then(|| u64::from_be_bytes(w[24..].try_into().expect("8")))
}

pub(crate) fn u64_word(v: u64) -> [u8; 32] {
    let mut w = [0u8; 32];
    w[24..].copy_from_slice(&v.to_be_bytes());
    w
}

impl SimChain {
    pub fn new(schedule: GasSchedule) -> Self {
        Self {
            schedule,
            contracts: BTreeMap::new(),
            log: Vec::new(),
            gas_by_account: BTreeMap::new(),
            gas_by_contract: BTreeMap::new(),
        }
    }

    pub fn schedule(&self) -> &GasSchedule {
        &self.schedule
    }

    pub fn log(&self) -> &[TxRecord] {
        &self.log
    }

    pub fn total_gas(&self) -> u64 {
        self.log.iter().map(|r| r.gas).sum()
    }

    pub fn gas_of_account(&self, a: &Address) -> u64 {
        self.gas_by_account.get(a).copied().unwrap_or(0)
    }

    pub fn gas_of_contract(&self, a: &Address) -> u64 {
        self.gas_by_contract.get(a).copied().unwrap_or(0)
    }

    pub fn contract(&self, a: &Address) -> Option<&ContractState> {
        self.contracts.get(a)
    }

    pub fn hash_sum_state(&self, a: &Address) -> Result<&HashSumState, LedgerError> {
        match self.contracts.get(a) {
            Some(ContractState::HashSum(s)) => Ok(s),
            Some(other) => Err(self.wrong(*a, ContractKind::HashSum, other.kind())),
            None => Err(LedgerError::UnknownContract(*a)),
        }
    }

    pub fn proof_state(&self, a: &Address) -> Result<&ProofVerifyState, LedgerError> {
        match self.contracts.get(a) {
            Some(ContractState::ProofVerify(s)) => Ok(s),
            Some(other) => Err(self.wrong(*a, ContractKind::ProofVerify, other.kind())),
            None => Err(LedgerError::UnknownContract(*a)),
        }
    }

    pub fn baseline_state(&self, a: &Address) -> Result<&BaselineState, LedgerError> {
        match self.contracts.get(a) {
            Some(ContractState::Baseline(s)) => Ok(s),
            Some(other) => Err(self.wrong(*a, ContractKind::Baseline, other.kind())),
            None => Err(LedgerError::UnknownContract(*a)),
        }
    }

    fn wrong(&self, address: Address, expected: ContractKind, actual: ContractKind) -> LedgerError {
        LedgerError::WrongContract { address, expected: expected.name(), actual: actual.name() }
    }

    /// SHA-256 over storage and gas ledgers in canonical order.
    pub fn state_hash(&self) -> [u8; 32] {
        let mut h = Sha256::new();
        for (addr, c) in &self.contracts {
            h.update(addr.0);
            h.update(c.kind().name());
            match c {
                ContractState::HashSum(s) => {
                    for a in &s.expected {
                        h.update(a.0);
                    }
                    h.update(fr_to_bytes(&s.claimed));
                    for (a, v) in &s.submitted {
                        h.update(a.0);
                        h.update(fr_to_bytes(v));
                    }
                    h.update(fr_to_bytes(&s.running_sum));
                    h.update([s.finalized as u8, s.result.map_or(2, u8::from)]);
                }
                ContractState::ProofVerify(s) => {
                    h.update(s.vk.to_bytes());
                    h.update([s.accepted as u8]);
                    h.update(encode_public_inputs(&s.public));
                }
                ContractState::Baseline(s) => {
                    for a in &s.participants {
                        h.update(a.0);
                    }
                    for (a, v) in &s.stored {
                        h.update(a.0);
                        v.iter().for_each(|x| h.update(x.to_be_bytes()));
                    }
                    if let Some(agg) = &s.aggregate {
                        agg.iter().for_each(|x| h.update(x.to_be_bytes()));
                    }
                }
            }
        }
        for (a, g) in self.gas_by_account.iter().chain(&self.gas_by_contract) {
            h.update(a.0);
            h.update(g.to_be_bytes());
        }
        h.update((self.log.len() as u64).to_be_bytes());
        h.finalize().into()
    }

    /// Applies one raw transaction. Every transaction, reverted or not, is
    /// logged and charged.
    pub fn execute(
        &mut self,
        sender: Address,
        contract: Option<Address>,
        kind: TxKind,
        calldata: Vec<u8>,
    ) -> Receipt {
        let index = self.log.len();
        let (gas, status, output) = self.apply(sender, contract, kind, &calldata, index);
        debug_assert!(gas > 0);
        *self.gas_by_account.entry(sender).or_default() += gas;
        let charged_to = match &output {
            TxOutput::Created(a) => Some(*a),
            _ => contract,
        };
        if let Some(c) = charged_to {
            *self.gas_by_contract.entry(c).or_default() += gas;
        }
        self.log.push(TxRecord { sender, contract, kind, calldata, gas, success: status.is_success() });
        Receipt { index, gas, status, output }
    }

    fn apply(
        &mut self,
        sender: Address,
        contract: Option<Address>,
        kind: TxKind,
        data: &[u8],
        index: usize,
    ) -> (u64, TxStatus, TxOutput) {
        let g = self.schedule;
        let base = g.tx_base + g.calldata(data);
        let (kind, target) = match (kind, contract) {
            (TxKind::Deploy(k), None) => return self.deploy_inner(k, data, index),
            (TxKind::Deploy(_), Some(_)) => return revert(base, "deployments take no target"),
            (_, None) => return revert(base, "call without a target contract"),
            (k, Some(t)) => (k, t),
        };
        let Some(state) = self.contracts.get_mut(&target) else {
            return revert(base, format!("no contract at {target}"));
        };
        match (kind, state) {
            (TxKind::SubmitHash, ContractState::HashSum(s)) => {
                let fail = base + g.sload;
                if s.finalized {
                    return revert(fail, "already finalized");
                }
                if !s.expected.contains(&sender) {
                    return revert(fail, "sender not in participant set");
                }
                if s.submitted.contains_key(&sender) {
                    return revert(fail, "duplicate submission");
                }
                let Ok(h) = fr_from_bytes(data) else {
                    return revert(fail, "calldata is not a canonical field element");
                };
                let store = if s.sum_written { g.sstore_update } else { g.sstore_new };
                s.running_sum += h;
                s.sum_written = true;
                s.submitted.insert(sender, h);
                ok(base + g.sload + g.arith_add + store, TxOutput::None)
            }
            (TxKind::Finalize, ContractState::HashSum(s)) => {
                if s.finalized {
                    return revert(base + g.sload, "already finalized");
                }
                if s.submitted.len() != s.expected.len() {
                    return revert(base + g.sload, "missing submissions");
                }
                let result = s.running_sum == s.claimed;
                s.finalized = true;
                s.result = Some(result);
                ok(base + 2 * g.sload + g.arith_add, TxOutput::Bool(result))
            }
            (TxKind::VerifyProof, ContractState::ProofVerify(s)) => {
                let n = s.vk.num_public();
                if data.len() != PROOF_BYTES + FR_BYTES * n {
                    return revert(base + g.sload, format!("expected {n} public inputs"));
                }
                let gas = base + g.verify_compute(n);
                let accepted = Proof::from_bytes(&data[..PROOF_BYTES])
                    .ok()
                    .zip(decode_public_inputs(&data[PROOF_BYTES..]).ok())
                    .is_some_and(|(proof, public)| {
                        let good = verify(&s.vk, &public, &proof).unwrap_or(false);
                        if good {
                            s.public = public;
                        }
                        good
                    });
                s.accepted |= accepted;
                ok(gas, TxOutput::Bool(accepted))
            }
            (TxKind::BaselineSubmit, ContractState::Baseline(s)) => {
                let fail = base + g.sload;
                if !s.participants.contains(&sender) {
                    return revert(fail, "sender not in participant set");
                }
                if s.stored.contains_key(&sender) {
                    return revert(fail, "duplicate submission");
                }
                if data.len() != 32 * s.params {
                    return revert(fail, format!("expected {} parameters", s.params));
                }
                let Some(values) = data.chunks(32).map(word_to_u64).collect::<Option<Vec<_>>>() else {
                    return revert(fail, "parameter word exceeds 64 bits");
                };
                let p = s.params as u64;
                let mut gas = base + p * g.sstore_new;
                s.stored.insert(sender, values);
                if s.stored.len() == s.participants.len() {
                    // the last write triggers the on-chain averaging pass
                    let m = s.participants.len() as u64;
                    gas += p * (m * (g.sload + g.arith_add) + g.arith_mul + g.sstore_update);
                    let agg = (0..s.params)
                        .map(|j| {
                            let sum: u128 = s.stored.values().map(|v| v[j] as u128).sum();
                            (sum / m as u128) as u64
                        })
                        .collect();
                    s.aggregate = Some(agg);
                }
                ok(gas, TxOutput::None)
            }
            (_, state) => revert(base, format!("{} does not accept {}", state.kind().name(), kind.name())),
        }
    }

    fn deploy_inner(&mut self, kind: ContractKind, init: &[u8], index: usize) -> (u64, TxStatus, TxOutput) {
        let gas = self.schedule.contract_deploy + self.schedule.calldata(init);
        let state = match kind {
            ContractKind::HashSum => {
                let Some(expected) = init.get(FR_BYTES..).and_then(parse_addresses) else {
                    return revert(gas, "init must be H_sum followed by distinct addresses");
                };
                let Ok(claimed) = fr_from_bytes(&init[..FR_BYTES]) else {
                    return revert(gas, "claimed sum is not a canonical field element");
                };
                ContractState::HashSum(HashSumState {
                    expected,
                    claimed,
                    submitted: BTreeMap::new(),
                    running_sum: Fr::zero(),
                    finalized: false,
                    result: None,
                    sum_written: false,
                })
            }
            ContractKind::ProofVerify => match VerifyingKey::from_bytes(init) {
                Ok(vk) => ContractState::ProofVerify(Box::new(ProofVerifyState {
                    vk,
                    accepted: false,
                    public: Vec::new(),
                })),
                Err(e) => return revert(gas, format!("bad verifying key: {e}")),
            },
            ContractKind::Baseline => {
                let params = init.get(..4).map(|b| u32::from_be_bytes(b.try_into().expect("4")));
                let participants = init.get(4..).and_then(parse_addresses);
                match (params, participants) {
                    (Some(p), Some(participants)) if p > 0 => ContractState::Baseline(BaselineState {
                        participants,
                        params: p as usize,
                        stored: BTreeMap::new(),
                        aggregate: None,
                    }),
                    _ => return revert(gas, "init must be P (u32) followed by distinct addresses"),
                }
            }
        };
        let mut seed = Sha256::new();
        seed.update(b"contract");
        seed.update((index as u64).to_be_bytes());
        let digest = seed.finalize();
        let address = Address(digest[..20].try_into().expect("20"));
        self.contracts.insert(address, state);
        ok(gas, TxOutput::Created(address))
    }

    // Typed entry points.

    pub fn deploy(&mut self, sender: Address, kind: ContractKind, init: &[u8]) -> Receipt {
        self.execute(sender, None, TxKind::Deploy(kind), init.to_vec())
    }

    pub fn deploy_hash_sum(&mut self, sender: Address, claimed: Fr, participants: &[Address]) -> Receipt {
        let mut init = fr_to_bytes(&claimed).to_vec();
        participants.iter().for_each(|a| init.extend_from_slice(&a.0));
        self.deploy(sender, ContractKind::HashSum, &init)
    }

    pub fn deploy_verifier(&mut self, sender: Address, vk: &VerifyingKey) -> Receipt {
        self.deploy(sender, ContractKind::ProofVerify, &vk.to_bytes())
    }

    pub fn deploy_baseline(&mut self, sender: Address, params: usize, participants: &[Address]) -> Receipt {
        let mut init = (params as u32).to_be_bytes().to_vec();
        participants.iter().for_each(|a| init.extend_from_slice(&a.0));
        self.deploy(sender, ContractKind::Baseline, &init)
    }

    pub fn submit_hash(&mut self, contract: Address, sender: Address, h: &Fr) -> Receipt {
        self.execute(sender, Some(contract), TxKind::SubmitHash, fr_to_bytes(h).to_vec())
    }

    pub fn finalize_hash_sum(&mut self, contract: Address, sender: Address) -> Receipt {
        self.execute(sender, Some(contract), TxKind::Finalize, Vec::new())
    }

    pub fn verify_proof_onchain(&mut self, contract: Address, sender: Address, public: &[Fr], proof: &Proof) -> Receipt {
        self.verify_proof_bytes(contract, sender, public, &proof.to_bytes())
    }

    /// Same as [`Self::verify_proof_onchain`] with raw proof bytes, which may be garbage.
    pub fn verify_proof_bytes(&mut self, contract: Address, sender: Address, public: &[Fr], proof: &[u8]) -> Receipt {
        let mut data = proof.to_vec();
        data.extend(encode_public_inputs(public));
        self.execute(sender, Some(contract), TxKind::VerifyProof, data)
    }

    pub fn baseline_submit(&mut self, contract: Address, sender: Address, weights: &[u64]) -> Receipt {
        let data = weights.iter().flat_map(|&w| u64_word(w)).collect();
        self.execute(sender, Some(contract), TxKind::BaselineSubmit, data)
    }
}

/// Outcome of a full naive-aggregation round.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BaselineOutcome {
    pub aggregate: Vec<u64>,
    /// Client submissions including the aggregation pass.
    pub call_gas: u64,
    pub deploy_gas: u64,
}

/// Deploys a baseline contract and has every client write its vector.
pub fn baseline_round(chain: &mut SimChain, weights: &[Vec<u64>]) -> Result<BaselineOutcome, LedgerError> {
    let p = weights.first().map_or(0, Vec::len);
    if p == 0 || weights.iter().any(|w| w.len() != p) {
        return Err(LedgerError::Invalid("baseline needs equal, non-empty weight vectors".into()));
    }
    let clients: Vec<Address> = (0..weights.len()).map(Address::client).collect();
    let deploy = chain.deploy_baseline(Address::server(), p, &clients);
    let contract = deploy
        .created()
        .ok_or_else(|| LedgerError::Invalid(format!("baseline deploy reverted: {:?}", deploy.status)))?;
    let mut call_gas = 0;
    for (w, a) in weights.iter().zip(&clients) {
        let r = chain.baseline_submit(contract, *a, w);
        if let TxStatus::Revert(reason) = &r.status {
            return Err(LedgerError::Invalid(format!("baseline submission reverted: {reason}")));
        }
        call_gas += r.gas;
    }
    let aggregate = chain.baseline_state(&contract)?.aggregate.clone().expect("all clients submitted");
    Ok(BaselineOutcome { aggregate, call_gas, deploy_gas: deploy.gas })
}
