//! Line-delimited audit log: `sender,contract,kind,calldata-hex,gas,status`,
//! with `-` for the contract of a deployment and `ok` / `revert` as status.

use std::fmt::Write as _;

use super::{GasSchedule, LedgerError, SimChain, TxRecord};

pub const LOG_HEADER: &str = "# sender,contract,kind,calldata,gas,status";

impl TxRecord {
    pub fn to_line(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.sender,
            self.contract.map_or_else(|| "-".to_string(), |c| c.to_string()),
            self.kind.name(),
            hex::encode(&self.calldata),
            self.gas,
            if self.success { "ok" } else { "revert" }
        )
    }
}

impl SimChain {
    pub fn export_log(&self) -> String {
        let mut out = String::from(LOG_HEADER);
        out.push('\n');
        for r in self.log() {
            writeln!(out, "{}", r.to_line()).expect("writing to a String");
        }
        out
    }
}

pub fn parse_log(text: &str) -> Result<Vec<TxRecord>, LedgerError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |reason: String| LedgerError::Log { line: i + 1, reason };
        let fields: Vec<&str> = line.split(',').collect();
        let [sender, contract, kind, data, gas, status] = fields[..] else {
            return Err(err(format!("expected 6 fields, got {}", fields.len())));
        };
        out.push(TxRecord {
            sender: sender.parse().map_err(|e: LedgerError| err(e.to_string()))?,
            contract: match contract {
                "-" => None,
                c => Some(c.parse().map_err(|e: LedgerError| err(e.to_string()))?),
            },
            kind: kind.parse().map_err(|e: LedgerError| err(e.to_string()))?,
            calldata: hex::decode(data).map_err(|e| err(format!("calldata: {e}")))?,
            gas: gas.parse().map_err(|e| err(format!("gas: {e}")))?,
            success: match status {
                "ok" => true,
                "revert" => false,
                s => return Err(err(format!("unknown status `{s}`"))),
            },
        });
    }
    Ok(out)
}

/// Re-applies `records` to a fresh chain, insisting that every gas charge and
/// status matches what was logged.
pub fn replay(schedule: GasSchedule, records: &[TxRecord]) -> Result<SimChain, LedgerError> {
    let mut chain = SimChain::new(schedule);
    for (index, r) in records.iter().enumerate() {
        let receipt = chain.execute(r.sender, r.contract, r.kind, r.calldata.clone());
        if receipt.gas != r.gas || receipt.is_success() != r.success {
            return Err(LedgerError::Replay {
                index,
                reason: format!(
                    "logged gas {} / success {}, replayed gas {} / success {}",
                    r.gas,
                    r.success,
                    receipt.gas,
                    receipt.is_success()
                ),
            });
        }
    }
    Ok(chain)
}
