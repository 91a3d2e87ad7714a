//! Local research-data sharing stack: wallet identities, a gas-metered
//! ledger hosting the collaboration contracts, a content-addressed object
//! store and a threshold key network gating decryption.

pub mod codec;
pub mod contracts;
pub mod ledger;
pub mod wallet;
pub mod gas_report;
pub mod keynet;
pub mod store;
pub mod workload;
