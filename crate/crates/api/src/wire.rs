//! Request and response bodies. Field names follow the domain types.

use dvre_core::contracts::{ContractDetails, ContractId, FileInput, UserAccess, UserProfile};
use dvre_core::keynet::{KeyId, NetworkParams, NodeDenial};
use dvre_core::ledger::{GasMode, Receipt};
use dvre_core::store::Cid;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChallengeResponse {
    pub challenge: String,
    pub expires_at: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UserCreated {
    pub contract: ContractId,
    pub receipt: Receipt,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserRecord {
    pub contract: ContractId,
    #[serde(flatten)]
    pub profile: UserProfile,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupCreated {
    pub group: ContractId,
    pub receipt: Receipt,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub group: ContractId,
    pub contract_details: ContractDetails,
    pub members: Vec<UserAccess>,
    pub file_count: usize,
    /// Whether the session's address passes `check_access` now.
    pub has_access: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MembersRequest {
    pub users: Vec<UserAccess>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilesRequest {
    pub files: Vec<FileInput>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TxResponse {
    pub receipt: Receipt,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssetUploaded {
    pub cid: Cid,
    pub file_name: String,
    pub key_id: KeyId,
    pub size: u64,
    pub group: ContractId,
    pub receipt: Receipt,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    /// Stable machine-readable class, e.g. `reverted`, `access_denied`.
    pub error: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub receipt: Option<Receipt>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub reasons: Vec<NodeDenial>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatusResponse {
    pub time: u64,
    pub height: u64,
    pub user_factory: ContractId,
    pub policy_manager: ContractId,
    pub gas_mode: GasMode,
    pub network: NetworkParams,
    pub pinned_files: usize,
    pub pinned_bytes: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SetTimeRequest {
    /// `YYYY-MM-DD` or RFC 3339.
    pub time: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimeResponse {
    pub time: u64,
}
