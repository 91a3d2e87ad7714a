//! Single-sequencer ledger: one transaction per block, a controllable clock,
//! gas metering and an append-only log that can be replayed into an
//! identical state.

mod gas;

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufReader, Write as _};
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codec::{DecodeError, Decoder, Encoder};
use crate::contracts::{
    self, Call, ContractError, ContractId, ContractKind, ContractState, ExecFlags, ExecOutcome,
};
use crate::wallet::{keccak256, Address};

pub use gas::{
    function_key, Gas, GasError, GasMode, GasSchedule, Preset, StorageWrites, CALIBRATED_CREATE_GROUP,
    CALIBRATED_CREATE_USER, CALIBRATED_DEPLOY, CALIBRATED_OTHER_FUNCTION,
};

#[derive(Debug, Error)]
pub enum LedgerError {
    #[error("bad nonce for {sender}: expected {expected}, got {got}")]
    BadNonce {
        sender: Address,
        expected: u64,
        got: u64,
    },
    #[error("unknown contract {0}")]
    UnknownContract(ContractId),
    #[error("malformed transaction: {0}")]
    InvalidTransaction(String),
    #[error("time cannot move backwards: current {current}, requested {requested}")]
    TimeRegression { current: u64, requested: u64 },
    #[error("corrupt log at entry {index}: {reason}")]
    CorruptLog { index: usize, reason: String },
    #[error(transparent)]
    Gas(#[from] GasError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TxKind {
    DeployContract,
    CallFunction,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transaction {
    pub sender: Address,
    pub kind: TxKind,
    pub target: Option<ContractId>,
    /// Function name for calls, contract kind name for deployments.
    pub function_name: String,
    #[serde(with = "hex_bytes")]
    pub payload: Vec<u8>,
    pub nonce: u64,
}

mod hex_bytes {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(b: &[u8], s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&hex::encode(b))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<u8>, D::Error> {
        hex::decode(String::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}

impl Transaction {
    pub fn deploy(sender: Address, ctor: &contracts::Constructor, nonce: u64) -> Self {
        Self {
            sender,
            kind: TxKind::DeployContract,
            target: None,
            function_name: ctor.kind().name().to_string(),
            payload: ctor.encode(),
            nonce,
        }
    }

    pub fn call(sender: Address, target: ContractId, call: &Call, nonce: u64) -> Self {
        Self {
            sender,
            kind: TxKind::CallFunction,
            target: Some(target),
            function_name: call.function_name().to_string(),
            payload: call.encode(),
            nonce,
        }
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut enc = Encoder::new();
        enc.fixed(self.sender.as_bytes());
        enc.u8(match self.kind {
            TxKind::DeployContract => 0,
            TxKind::CallFunction => 1,
        });
        match &self.target {
            Some(t) => enc.u8(1).fixed(t.as_bytes()),
            None => enc.u8(0),
        };
        enc.str(&self.function_name).bytes(&self.payload).u64(self.nonce);
        enc.finish()
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, DecodeError> {
        let mut dec = Decoder::new(bytes);
        let sender = Address(dec.fixed::<20>()?);
        let kind = match dec.u8()? {
            0 => TxKind::DeployContract,
            1 => TxKind::CallFunction,
            _ => return Err(DecodeError::Invalid("transaction kind")),
        };
        let target = match dec.u8()? {
            0 => None,
            1 => Some(Address(dec.fixed::<20>()?)),
            _ => return Err(DecodeError::Invalid("target flag")),
        };
        let tx = Transaction {
            sender,
            kind,
            target,
            function_name: dec.string()?,
            payload: dec.bytes()?.to_vec(),
            nonce: dec.u64()?,
        };
        dec.finish()?;
        Ok(tx)
    }

    pub fn hash(&self) -> [u8; 32] {
        keccak256(&self.encode())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Event {
    pub contract: ContractId,
    pub name: String,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", content = "reason", rename_all = "lowercase")]
pub enum TxStatus {
    Success,
    Reverted(ContractError),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Receipt {
    #[serde(with = "hex_array")]
    pub tx_hash: [u8; 32],
    #[serde(flatten)]
    pub status: TxStatus,
    pub gas_used: Gas,
    pub events: Vec<Event>,
    pub block_height: u64,
    pub block_time: u64,
    /// Contract created by this transaction, if any.
    pub contract_address: Option<ContractId>,
}

mod hex_array {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(b: &[u8; 32], s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format!("0x{}", hex::encode(b)))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<[u8; 32], D::Error> {
        let s = String::deserialize(d)?;
        let raw = hex::decode(s.trim_start_matches("0x")).map_err(serde::de::Error::custom)?;
        raw.try_into()
            .map_err(|_| serde::de::Error::custom("expected 32 bytes"))
    }
}

impl Receipt {
    pub fn is_success(&self) -> bool {
        self.status == TxStatus::Success
    }

    pub fn revert_reason(&self) -> Option<&ContractError> {
        match &self.status {
            TxStatus::Reverted(e) => Some(e),
            TxStatus::Success => None,
        }
    }

    pub fn digest(&self) -> [u8; 32] {
        let mut enc = Encoder::new();
        enc.fixed(&self.tx_hash);
        match &self.status {
            TxStatus::Success => enc.u8(0),
            TxStatus::Reverted(e) => enc.u8(1).str(&e.to_string()),
        };
        enc.u64(self.gas_used);
        enc.list(&self.events, |e, ev| {
            e.fixed(ev.contract.as_bytes()).str(&ev.name).str(&ev.message);
        });
        enc.u64(self.block_height).u64(self.block_time);
        match &self.contract_address {
            Some(a) => enc.u8(1).fixed(a.as_bytes()),
            None => enc.u8(0),
        };
        keccak256(&enc.finish())
    }
}

/// One line of the ledger log.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LogEntry {
    pub tx: Transaction,
    pub block_time: u64,
    pub receipt_digest: [u8; 32],
}

impl LogEntry {
    /// `hex(tx)<TAB>block_time<TAB>hex(receipt digest)`.
    pub fn to_line(&self) -> String {
        format!(
            "{}\t{}\t{}",
            hex::encode(self.tx.encode()),
            self.block_time,
            hex::encode(self.receipt_digest)
        )
    }

    pub fn from_line(line: &str) -> Result<Self, String> {
        let mut parts = line.split('\t');
        let (Some(tx), Some(time), Some(digest), None) =
            (parts.next(), parts.next(), parts.next(), parts.next())
        else {
            return Err("expected three tab-separated fields".into());
        };
        let tx = hex::decode(tx).map_err(|e| e.to_string())?;
        let tx = Transaction::decode(&tx).map_err(|e| e.to_string())?;
        let block_time = time.parse().map_err(|_| "bad block time".to_string())?;
        let digest = hex::decode(digest).map_err(|e| e.to_string())?;
        let receipt_digest = digest
            .try_into()
            .map_err(|_| "receipt digest must be 32 bytes".to_string())?;
        Ok(Self {
            tx,
            block_time,
            receipt_digest,
        })
    }
}

pub fn write_log(path: &Path, entries: &[LogEntry]) -> std::io::Result<()> {
    let mut file = fs::File::create(path)?;
    for e in entries {
        writeln!(file, "{}", e.to_line())?;
    }
    file.sync_all()
}

pub fn read_log(path: &Path) -> Result<Vec<LogEntry>, LedgerError> {
    let file = fs::File::open(path)?;
    let mut out = Vec::new();
    for (index, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(
            LogEntry::from_line(line.trim_end())
                .map_err(|reason| LedgerError::CorruptLog { index, reason })?,
        );
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Clock {
    /// Time only moves via `set_time` or per-transaction overrides.
    Manual(u64),
    /// Wall clock, clamped so block times never decrease.
    System,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LedgerConfig {
    pub schedule: GasSchedule,
    pub flags: ExecFlags,
    pub genesis_time: u64,
    pub clock: Clock,
}

impl Default for LedgerConfig {
    fn default() -> Self {
        Self {
            schedule: GasSchedule::calibrated(),
            flags: ExecFlags::default(),
            genesis_time: 0,
            clock: Clock::System,
        }
    }
}

impl LedgerConfig {
    /// Manual clock starting at `genesis_time`.
    pub fn manual(schedule: GasSchedule, genesis_time: u64) -> Self {
        Self {
            schedule,
            flags: ExecFlags::default(),
            genesis_time,
            clock: Clock::Manual(genesis_time),
        }
    }
}

/// Everything that determines future execution. Serializes canonically.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerState {
    pub height: u64,
    pub time: u64,
    pub nonces: BTreeMap<Address, u64>,
    pub contracts: BTreeMap<ContractId, ContractState>,
}

impl LedgerState {
    pub fn genesis(time: u64) -> Self {
        Self {
            height: 0,
            time,
            nonces: BTreeMap::new(),
            contracts: BTreeMap::new(),
        }
    }

    pub fn canonical_bytes(&self) -> Vec<u8> {
        serde_json::to_vec(self).expect("ledger state serializes")
    }

    pub fn root(&self) -> [u8; 32] {
        keccak256(&self.canonical_bytes())
    }

    /// Digest of contract storage alone. Reverted transactions leave it
    /// unchanged even though they advance height and nonces.
    pub fn contracts_root(&self) -> [u8; 32] {
        keccak256(&serde_json::to_vec(&self.contracts).expect("contract state serializes"))
    }
}

#[derive(Debug)]
pub struct Ledger {
    config: LedgerConfig,
    clock: Clock,
    state: LedgerState,
    receipts: Vec<Receipt>,
    log: Vec<LogEntry>,
}

fn system_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

impl Ledger {
    pub fn new(config: LedgerConfig) -> Self {
        let state = LedgerState::genesis(config.genesis_time);
        Self {
            clock: config.clock,
            config,
            state,
            receipts: Vec::new(),
            log: Vec::new(),
        }
    }

    pub fn config(&self) -> &LedgerConfig {
        &self.config
    }

    pub fn schedule(&self) -> &GasSchedule {
        &self.config.schedule
    }

    pub fn state(&self) -> &LedgerState {
        &self.state
    }

    pub fn state_root(&self) -> [u8; 32] {
        self.state.root()
    }

    pub fn contracts_root(&self) -> [u8; 32] {
        self.state.contracts_root()
    }

    pub fn receipts(&self) -> &[Receipt] {
        &self.receipts
    }

    pub fn log(&self) -> &[LogEntry] {
        &self.log
    }

    pub fn events(&self) -> impl Iterator<Item = &Event> {
        self.receipts.iter().flat_map(|r| r.events.iter())
    }

    pub fn contract(&self, id: &ContractId) -> Option<&ContractState> {
        self.state.contracts.get(id)
    }

    pub fn nonce(&self, sender: &Address) -> u64 {
        self.state.nonces.get(sender).copied().unwrap_or(0)
    }

    /// Time the next block would carry.
    pub fn now(&self) -> u64 {
        match self.clock {
            Clock::Manual(t) => t.max(self.state.time),
            Clock::System => system_now().max(self.state.time),
        }
    }

    /// Switches clock source. Block times still never decrease.
    pub fn set_clock(&mut self, clock: Clock) {
        self.clock = clock;
    }

    /// Pins the clock; later blocks carry `t` until it is moved again.
    pub fn set_time(&mut self, t: u64) -> Result<(), LedgerError> {
        let current = self.now();
        if t < current {
            return Err(LedgerError::TimeRegression {
                current,
                requested: t,
            });
        }
        self.clock = Clock::Manual(t);
        Ok(())
    }

    /// Resolves the target kind, checking the transaction's shape.
    fn precheck(&self, tx: &Transaction) -> Result<ContractKind, LedgerError> {
        let expected = self.nonce(&tx.sender);
        if tx.nonce != expected {
            return Err(LedgerError::BadNonce {
                sender: tx.sender,
                expected,
                got: tx.nonce,
            });
        }
        let kind = match (tx.kind, &tx.target) {
            (TxKind::DeployContract, None) => tx
                .function_name
                .parse::<ContractKind>()
                .map_err(LedgerError::InvalidTransaction)?,
            (TxKind::DeployContract, Some(_)) => {
                return Err(LedgerError::InvalidTransaction(
                    "deployment must not name a target".into(),
                ))
            }
            (TxKind::CallFunction, None) => {
                return Err(LedgerError::InvalidTransaction("call requires a target".into()))
            }
            (TxKind::CallFunction, Some(target)) => self
                .contract(target)
                .ok_or(LedgerError::UnknownContract(*target))?
                .kind(),
        };
        // Surfaces UnknownFunction before inclusion.
        self.config.schedule.gas_of(kind, tx, StorageWrites::default())?;
        Ok(kind)
    }

    /// Gas `tx` would consume if submitted now, without changing state.
    pub fn estimate_gas(&self, tx: &Transaction) -> Result<Gas, LedgerError> {
        let kind = self.precheck(tx)?;
        let writes = match self.execute(kind, tx, self.now()) {
            Ok(outcome) => outcome.writes,
            Err(_) => StorageWrites::default(),
        };
        Ok(self.config.schedule.gas_of(kind, tx, writes)?)
    }

    fn execute(
        &self,
        kind: ContractKind,
        tx: &Transaction,
        block_time: u64,
    ) -> Result<ExecOutcome, ContractError> {
        match tx.kind {
            TxKind::DeployContract => {
                let address = contracts::deploy_address(&tx.sender, tx.nonce);
                contracts::execute_deploy(
                    &self.state.contracts,
                    tx.sender,
                    address,
                    kind,
                    &tx.payload,
                    block_time,
                )
            }
            TxKind::CallFunction => {
                let call = Call::decode(&tx.function_name, &tx.payload)
                    .map_err(|e| ContractError::BadPayload(e.to_string()))?;
                contracts::execute_call(
                    &self.state.contracts,
                    tx.sender,
                    tx.target.expect("checked in precheck"),
                    call,
                    block_time,
                    self.config.flags,
                )
            }
        }
    }

    /// Applies `tx` as the next block. Contract reverts still produce a
    /// receipt, consume gas and take a log slot; shape, nonce and
    /// unknown-target errors are rejected before inclusion.
    pub fn submit_tx(&mut self, tx: Transaction, now: Option<u64>) -> Result<Receipt, LedgerError> {
        let kind = self.precheck(&tx)?;
        let block_time = match now {
            Some(t) => {
                let current = self.now();
                if t < current {
                    return Err(LedgerError::TimeRegression {
                        current,
                        requested: t,
                    });
                }
                t
            }
            None => self.now(),
        };

        let (status, writes, events, created, dirty) = match self.execute(kind, &tx, block_time) {
            Ok(out) => (TxStatus::Success, out.writes, out.events, out.created, out.dirty),
            Err(reason) => (
                TxStatus::Reverted(reason),
                StorageWrites::default(),
                Vec::new(),
                None,
                BTreeMap::new(),
            ),
        };
        let gas_used = self.config.schedule.gas_of(kind, &tx, writes)?;

        self.state.contracts.extend(dirty);
        self.state.nonces.insert(tx.sender, tx.nonce + 1);
        self.state.height += 1;
        self.state.time = block_time;
        if let Clock::Manual(t) = &mut self.clock {
            *t = (*t).max(block_time);
        }

        let receipt = Receipt {
            tx_hash: tx.hash(),
            status,
            gas_used,
            events,
            block_height: self.state.height,
            block_time,
            contract_address: created,
        };
        self.log.push(LogEntry {
            tx,
            block_time,
            receipt_digest: receipt.digest(),
        });
        self.receipts.push(receipt.clone());
        Ok(receipt)
    }

    /// Rebuilds a ledger from its log. Every entry must apply at its recorded
    /// time and reproduce its recorded receipt digest.
    pub fn replay(config: LedgerConfig, log: &[LogEntry]) -> Result<Ledger, LedgerError> {
        let mut config = config;
        config.clock = Clock::Manual(config.genesis_time);
        let mut ledger = Ledger::new(config);
        for (index, entry) in log.iter().enumerate() {
            let corrupt = |reason: String| LedgerError::CorruptLog { index, reason };
            let expected = ledger.nonce(&entry.tx.sender);
            if entry.tx.nonce != expected {
                return Err(corrupt(format!(
                    "nonce {} out of order, expected {expected}",
                    entry.tx.nonce
                )));
            }
            let receipt = ledger
                .submit_tx(entry.tx.clone(), Some(entry.block_time))
                .map_err(|e| corrupt(e.to_string()))?;
            if receipt.digest() != entry.receipt_digest {
                return Err(corrupt("receipt digest mismatch".into()));
            }
        }
        Ok(ledger)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contracts::Constructor;

    fn ledger() -> Ledger {
        Ledger::new(LedgerConfig::manual(GasSchedule::calibrated(), 1_700_000_000))
    }

    fn deploy_factory(l: &mut Ledger, sender: Address) -> Receipt {
        let nonce = l.nonce(&sender);
        l.submit_tx(
            Transaction::deploy(sender, &Constructor::UserMetadataFactory, nonce),
            None,
        )
        .unwrap()
    }

    #[test]
    fn transaction_encoding_roundtrip() {
        let tx = Transaction::deploy(Address([4; 20]), &Constructor::UserMetadataFactory, 3);
        assert_eq!(Transaction::decode(&tx.encode()).unwrap(), tx);
    }

    #[test]
    fn deploy_and_nonce() {
        let mut l = ledger();
        let a = Address([1; 20]);
        let r = deploy_factory(&mut l, a);
        assert!(r.is_success());
        assert_eq!(r.gas_used, 2_249_679);
        assert_eq!(r.block_height, 1);
        assert_eq!(l.nonce(&a), 1);
        let stale = Transaction::deploy(a, &Constructor::UserMetadataFactory, 0);
        assert!(matches!(
            l.submit_tx(stale, None),
            Err(LedgerError::BadNonce { expected: 1, got: 0, .. })
        ));
    }

    #[test]
    fn unknown_contract_changes_nothing() {
        let mut l = ledger();
        let before = l.state().canonical_bytes();
        let tx = Transaction {
            sender: Address([1; 20]),
            kind: TxKind::CallFunction,
            target: Some(Address([9; 20])),
            function_name: "setUserAccess".into(),
            payload: vec![],
            nonce: 0,
        };
        assert!(matches!(
            l.submit_tx(tx, None),
            Err(LedgerError::UnknownContract(_))
        ));
        assert_eq!(l.state().canonical_bytes(), before);
        assert!(l.log().is_empty());
    }

    #[test]
    fn set_time_and_regression() {
        let mut l = ledger();
        l.set_time(1_711_497_600).unwrap();
        let r = deploy_factory(&mut l, Address([1; 20]));
        assert_eq!(r.block_time, 1_711_497_600);
        assert!(matches!(
            l.set_time(1_711_497_599),
            Err(LedgerError::TimeRegression { .. })
        ));
        assert!(matches!(
            l.submit_tx(
                Transaction::deploy(Address([1; 20]), &Constructor::UserMetadataFactory, 1),
                Some(5)
            ),
            Err(LedgerError::TimeRegression { .. })
        ));
    }

    #[test]
    fn system_clock_is_monotone() {
        let mut l = Ledger::new(LedgerConfig::default());
        let a = Address([1; 20]);
        let mut last = 0;
        for _ in 0..3 {
            let r = deploy_factory(&mut l, a);
            assert!(r.block_time >= last);
            last = r.block_time;
        }
    }

    #[test]
    fn shape_errors() {
        let mut l = ledger();
        let mut tx = Transaction::deploy(Address([1; 20]), &Constructor::UserMetadataFactory, 0);
        tx.target = Some(Address([2; 20]));
        assert!(matches!(
            l.submit_tx(tx, None),
            Err(LedgerError::InvalidTransaction(_))
        ));
        let mut tx = Transaction::deploy(Address([1; 20]), &Constructor::UserMetadataFactory, 0);
        tx.function_name = "Token".into();
        assert!(matches!(
            l.submit_tx(tx, None),
            Err(LedgerError::InvalidTransaction(_))
        ));
    }

    #[test]
    fn log_line_roundtrip_and_replay() {
        let mut l = ledger();
        deploy_factory(&mut l, Address([1; 20]));
        deploy_factory(&mut l, Address([2; 20]));
        let lines: Vec<_> = l.log().iter().map(LogEntry::to_line).collect();
        let parsed: Vec<_> = lines.iter().map(|s| LogEntry::from_line(s).unwrap()).collect();
        assert_eq!(parsed, l.log());
        let replayed = Ledger::replay(l.config().clone(), &parsed).unwrap();
        assert_eq!(replayed.state().canonical_bytes(), l.state().canonical_bytes());
    }

    #[test]
    fn empty_log_replays_to_genesis() {
        let l = ledger();
        let replayed = Ledger::replay(l.config().clone(), &[]).unwrap();
        assert_eq!(replayed.state(), &LedgerState::genesis(1_700_000_000));
    }

    #[test]
    fn tampered_digest_is_corrupt() {
        let mut l = ledger();
        deploy_factory(&mut l, Address([1; 20]));
        let mut log = l.log().to_vec();
        log[0].receipt_digest[0] ^= 1;
        assert!(matches!(
            Ledger::replay(l.config().clone(), &log),
            Err(LedgerError::CorruptLog { index: 0, .. })
        ));
    }
}
