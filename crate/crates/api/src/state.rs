//! Shared server state: the ledger with its on-disk log, the object store,
//! the key network and the session table.

use std::fs::OpenOptions;
use std::io::Write;
use std::path::PathBuf;
use std::sync::{Arc, RwLock, RwLockReadGuard, RwLockWriteGuard};

use dvre_core::contracts::{Deployment, ExecFlags};
use dvre_core::keynet::{KeyNetwork, LedgerView, NetworkParams};
use dvre_core::ledger::{read_log, Clock, GasSchedule, Ledger, LedgerConfig, LedgerError};
use dvre_core::store::{Quota, Store, StoreError};
use dvre_core::wallet::{keccak256, Address};
use thiserror::Error;

use crate::config::{ApiConfig, ConfigError};
use crate::session::Sessions;

#[derive(Debug, Error)]
pub enum StartupError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("ledger: {0}")]
    Ledger(#[from] LedgerError),
    #[error("store: {0}")]
    Store(#[from] StoreError),
    #[error("bootstrap: {0}")]
    Bootstrap(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

/// Deploys the root contracts. Fixed so that a replayed log reproduces the
/// same deployment addresses.
pub fn operator_address() -> Address {
    let h = keccak256(b"dvre-operator");
    let mut a = [0u8; 20];
    a.copy_from_slice(&h[12..]);
    Address(a)
}

/// The ledger plus how much of its log has reached disk.
pub struct Chain {
    pub ledger: Ledger,
    pub deployment: Deployment,
    log_path: Option<PathBuf>,
    persisted: usize,
}

impl Chain {
    pub fn view(&self) -> LedgerView<'_> {
        LedgerView {
            ledger: &self.ledger,
            deployment: &self.deployment,
        }
    }

    /// Appends log entries written since the last call.
    pub fn persist(&mut self) -> std::io::Result<()> {
        let log = self.ledger.log();
        if let Some(path) = &self.log_path {
            if self.persisted < log.len() {
                let mut f = OpenOptions::new().create(true).append(true).open(path)?;
                let mut text = String::new();
                for entry in &log[self.persisted..] {
                    text.push_str(&entry.to_line());
                    text.push('\n');
                }
                f.write_all(text.as_bytes())?;
                f.sync_data()?;
            }
        }
        self.persisted = log.len();
        Ok(())
    }
}

pub struct AppState {
    pub config: ApiConfig,
    pub params: NetworkParams,
    pub chain: RwLock<Chain>,
    pub store: Store,
    pub network: Arc<KeyNetwork>,
    pub sessions: Arc<Sessions>,
}

impl AppState {
    /// Opens the store, replays `ledger.log` if present (bootstrapping a
    /// fresh deployment otherwise) and starts the key network.
    pub fn open(config: ApiConfig) -> Result<Self, StartupError> {
        config.validate()?;
        std::fs::create_dir_all(&config.data_dir)?;
        let store = Store::open(
            config.store_root(),
            Quota {
                max_pinned_files: config.max_pinned_files,
                max_total_bytes: config.max_total_bytes,
            },
        )?;

        let start = config.start()?;
        let ledger_config = LedgerConfig {
            schedule: GasSchedule::preset(config.preset()?),
            flags: ExecFlags {
                paper_faithful_add_files: config.paper_faithful_add_files,
            },
            genesis_time: start.unwrap_or(0),
            clock: match start {
                Some(t) => Clock::Manual(t),
                None => Clock::System,
            },
        };
        let log_path = config.ledger_log();
        let entries = if log_path.exists() {
            read_log(&log_path)?
        } else {
            Vec::new()
        };
        let (ledger, deployment) = if entries.is_empty() {
            let mut ledger = Ledger::new(ledger_config);
            let deployment = Deployment::bootstrap(&mut ledger, operator_address())
                .map_err(|e| StartupError::Bootstrap(e.to_string()))?;
            (ledger, deployment)
        } else {
            let clock = ledger_config.clock;
            let mut ledger = Ledger::replay(ledger_config, &entries)?;
            ledger.set_clock(clock);
            let created: Vec<_> = ledger
                .receipts()
                .iter()
                .take(2)
                .filter_map(|r| r.contract_address)
                .collect();
            let [user_factory, policy_manager] = created[..] else {
                return Err(StartupError::Bootstrap(
                    "log does not start with the root deployments".into(),
                ));
            };
            (
                ledger,
                Deployment {
                    user_factory,
                    policy_manager,
                },
            )
        };
        let persisted = entries.len();
        let mut chain = Chain {
            ledger,
            deployment,
            log_path: Some(log_path),
            persisted,
        };
        chain.persist()?;

        let params = config.network_params();
        let sessions = Arc::new(Sessions::new(config.session_ttl_secs));
        let network = Arc::new(
            KeyNetwork::new(params.lit_network.clone(), params.chain.clone(), params.n)
                .with_sessions(sessions.clone()),
        );
        Ok(Self {
            config,
            params,
            chain: RwLock::new(chain),
            store,
            network,
            sessions,
        })
    }

    pub fn read_chain(&self) -> RwLockReadGuard<'_, Chain> {
        self.chain.read().unwrap_or_else(|e| e.into_inner())
    }

    pub fn write_chain(&self) -> RwLockWriteGuard<'_, Chain> {
        self.chain.write().unwrap_or_else(|e| e.into_inner())
    }
}
