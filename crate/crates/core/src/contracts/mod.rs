//! The four research-collaboration contracts: `UserMetadataFactory` and
//! `UserMetadata` for identity, `PolicyManager` and `GroupContract` for
//! sharing agreements, membership windows and shared files.
//!
//! Contract code runs natively; the ledger only sees canonical payloads.
//! Each kind has a code manifest (its interface and storage layout) that
//! stands in for bytecode when deploying and when metering gas.

mod calls;
mod client;
mod exec;
mod manifest;

use std::fmt;
use std::str::FromStr;

use chrono::{NaiveDate, TimeZone, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::wallet::Address;

pub use calls::{Call, Constructor};
pub use client::{CallError, Deployment};
pub use exec::{deploy_address, execute_call, execute_deploy, ExecFlags, ExecOutcome};
pub use manifest::manifest;

pub type ContractId = Address;

/// Sentinel for an access window without an end.
pub const UNLIMITED: u64 = (1u64 << 63) - 1;

pub const SUCCESS_EVENT: &str = "Success";
pub const MSG_FILES_SHARED: &str = "Files successfullly shared in the group";
pub const MSG_USERS_ADDED: &str = "Users successfully added to the group";
pub const MSG_USER_ACCESS_SET: &str = "User access successfully updated";
pub const MSG_GROUP_CREATED: &str = "Group contract successfully created";
pub const MSG_USER_CREATED: &str = "User contract successfully created";

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ContractKind {
    PolicyManager,
    UserMetadataFactory,
    GroupContract,
    UserMetadata,
}

impl ContractKind {
    pub const ALL: [ContractKind; 4] = [
        ContractKind::PolicyManager,
        ContractKind::UserMetadataFactory,
        ContractKind::GroupContract,
        ContractKind::UserMetadata,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ContractKind::PolicyManager => "PolicyManager",
            ContractKind::UserMetadataFactory => "UserMetadataFactory",
            ContractKind::GroupContract => "GroupContract",
            ContractKind::UserMetadata => "UserMetadata",
        }
    }

    /// State-changing functions, in declaration order.
    pub fn functions(self) -> &'static [&'static str] {
        match self {
            ContractKind::PolicyManager => &["createGroupContract"],
            ContractKind::UserMetadataFactory => &["createUserContract"],
            ContractKind::GroupContract => {
                &["associateUsersToGroup", "addFilesToGroup", "setUserAccess"]
            }
            ContractKind::UserMetadata => &[],
        }
    }
}

impl fmt::Display for ContractKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ContractKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "PolicyManager" => Ok(ContractKind::PolicyManager),
            "UserMetadataFactory" | "UserMetaFactory" => Ok(ContractKind::UserMetadataFactory),
            "GroupContract" => Ok(ContractKind::GroupContract),
            "UserMetadata" => Ok(ContractKind::UserMetadata),
            other => Err(format!("unknown contract kind {other:?}")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserProfile {
    pub public_address: Address,
    pub username: String,
    pub organization: String,
    pub country: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContractDetails {
    pub group_name: String,
    pub group_owner_address: Address,
    pub permissions: String,
    pub organizations: Vec<String>,
    pub countries: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDetails {
    pub ipfs_hash: String,
    pub file_name: String,
    pub added_by: Address,
    pub added_at: u64,
}

/// What a caller submits; the contract stamps `added_by` and `added_at`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileInput {
    pub ipfs_hash: String,
    pub file_name: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserAccess {
    pub eoa_address: Address,
    pub access_from: u64,
    pub access_to: u64,
}

impl UserAccess {
    pub fn covers(&self, at: u64) -> bool {
        self.access_from <= at && at <= self.access_to
    }
}

/// Revert reasons. `Display` is the exact string recorded in the receipt.
#[derive(Clone, Debug, PartialEq, Eq, Error, Serialize, Deserialize)]
pub enum ContractError {
    #[error("User already registered")]
    AlreadyRegistered,
    #[error("Caller does not match the profile public address")]
    AddressMismatch,
    #[error("User is not registered")]
    NotRegistered,
    #[error("Caller must be the group owner named in the details")]
    OwnerMismatch,
    #[error("Only group owner can call this function")]
    OnlyGroupOwner,
    #[error("Access window starts after it ends")]
    InvalidWindow,
    #[error("Caller is not an active group member")]
    NotMember,
    #[error("File already shared in the group")]
    DuplicateHash,
    #[error("{0} must not be empty")]
    EmptyField(String),
    #[error("Contract code does not match {0}")]
    CodeMismatch(String),
    #[error("Malformed call payload: {0}")]
    BadPayload(String),
    #[error("Referenced contract {0} is missing or has the wrong kind")]
    BadReference(String),
}

/// On-ledger state of one contract instance.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ContractState {
    UserMetadataFactory(FactoryState),
    UserMetadata(UserMetadataState),
    PolicyManager(PolicyManagerState),
    GroupContract(GroupState),
}

impl ContractState {
    pub fn kind(&self) -> ContractKind {
        match self {
            ContractState::UserMetadataFactory(_) => ContractKind::UserMetadataFactory,
            ContractState::UserMetadata(_) => ContractKind::UserMetadata,
            ContractState::PolicyManager(_) => ContractKind::PolicyManager,
            ContractState::GroupContract(_) => ContractKind::GroupContract,
        }
    }

    pub fn as_group(&self) -> Option<&GroupState> {
        match self {
            ContractState::GroupContract(g) => Some(g),
            _ => None,
        }
    }

    pub fn as_factory(&self) -> Option<&FactoryState> {
        match self {
            ContractState::UserMetadataFactory(f) => Some(f),
            _ => None,
        }
    }

    pub fn as_user(&self) -> Option<&UserMetadataState> {
        match self {
            ContractState::UserMetadata(u) => Some(u),
            _ => None,
        }
    }

    pub fn as_policy_manager(&self) -> Option<&PolicyManagerState> {
        match self {
            ContractState::PolicyManager(p) => Some(p),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactoryState {
    pub users: std::collections::BTreeMap<Address, ContractId>,
    pub children: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserMetadataState {
    pub profile: UserProfile,
    pub parent: Option<ContractId>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolicyManagerState {
    pub user_factory: ContractId,
    pub groups: Vec<ContractId>,
    pub children: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupState {
    pub contract_details: ContractDetails,
    pub user_access: std::collections::BTreeMap<Address, UserAccess>,
    pub shared_ipfs_hashes: std::collections::BTreeSet<String>,
    pub added_file_details: Vec<FileDetails>,
    pub parent: Option<ContractId>,
}

impl GroupState {
    pub fn owner(&self) -> Address {
        self.contract_details.group_owner_address
    }

    /// Owner always; otherwise a stored window must contain `at`.
    pub fn check_access(&self, user: &Address, at: u64) -> bool {
        if *user == self.owner() {
            return true;
        }
        self.user_access
            .get(user)
            .map(|w| w.covers(at))
            .unwrap_or(false)
    }
}

/// Expands day-granular dates to `[00:00:00, 23:59:59]` UTC.
pub fn day_window(from: NaiveDate, to: NaiveDate) -> (u64, u64) {
    (day_start(from), day_end(to))
}

pub fn day_start(day: NaiveDate) -> u64 {
    Utc.from_utc_datetime(&day.and_hms_opt(0, 0, 0).unwrap())
        .timestamp() as u64
}

pub fn day_end(day: NaiveDate) -> u64 {
    Utc.from_utc_datetime(&day.and_hms_opt(23, 59, 59).unwrap())
        .timestamp() as u64
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("expected YYYY-MM-DD or an RFC-3339 timestamp, got {0:?}")]
pub struct DateParseError(pub String);

/// Parses a date flag. A bare day maps to its first second when `end` is
/// false and to its last second when `end` is true.
pub fn parse_time_bound(text: &str, end: bool) -> Result<u64, DateParseError> {
    if let Ok(day) = NaiveDate::parse_from_str(text, "%Y-%m-%d") {
        return Ok(if end { day_end(day) } else { day_start(day) });
    }
    chrono::DateTime::parse_from_rfc3339(text)
        .ok()
        .and_then(|t| u64::try_from(t.timestamp()).ok())
        .ok_or_else(|| DateParseError(text.to_string()))
}
