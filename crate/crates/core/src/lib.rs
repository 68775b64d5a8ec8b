pub mod curve;
pub mod r1cs;
pub mod qap;
pub mod groth16;
pub mod mimc;
pub mod fl;
pub mod agg_circuit;
pub mod ledger;
pub mod orchestrator;
