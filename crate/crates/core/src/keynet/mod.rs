//! Threshold key network.
//!
//! Each node holds one Shamir share per bundle key together with the access
//! condition it was registered under. A node releases its share only to a
//! requester whose signature verifies and who satisfies the condition at the
//! ledger's current block time. Clients combine `t` shares themselves; nodes
//! never see the key or any plaintext.

pub mod acc;
pub mod bundle;
pub mod shamir;

use std::collections::{BTreeMap, BTreeSet};
use std::sync::{Arc, Mutex, MutexGuard};

use rand::RngCore;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use acc::{evaluate_acc, AccDigest, AccError, AccessControlCondition, ChainView};
pub use bundle::{BundleError, BundleMetadata, EncryptedBundle};
pub use shamir::{combine_shares, split_key, KeyId, KeyShare, ShareError};

use crate::contracts::{ContractId, Deployment};
use crate::ledger::Ledger;
use crate::store::{Cid, Store, StoreError};
use crate::wallet::{sign_auth, verify_signature, Address, AuthSig, Wallet, WalletError};

pub const DECRYPT_PREFIX: &str = "dvre-decrypt:";
pub const DEPOSIT_PREFIX: &str = "dvre-deposit:";
pub const DEFAULT_LABEL: &str = "dvre-local";

/// Denial reasons reported by nodes.
pub mod reason {
    pub const BAD_SIGNATURE: &str = "bad_signature";
    pub const BAD_CHALLENGE: &str = "bad_challenge";
    pub const REPLAYED_NONCE: &str = "replayed_nonce";
    pub const SESSION_INVALID: &str = "session_invalid";
    pub const ACC_MISMATCH: &str = "acc_mismatch";
    pub const ACC_FAILED: &str = "acc_failed";
    pub const ACC_ERROR: &str = "acc_error";
    pub const NOT_OWNER: &str = "not_owner";
    pub const NOT_REGISTERED: &str = "not_registered";
    pub const DUPLICATE_KEY_ID: &str = "duplicate_key_id";
    pub const NODE_UNAVAILABLE: &str = "node_unavailable";
    pub const UNKNOWN_KEY_ID: &str = "unknown_key_id";
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkParams {
    pub lit_network: String,
    pub chain: String,
    pub n: u8,
    pub t: u8,
}

impl Default for NetworkParams {
    fn default() -> Self {
        Self {
            lit_network: DEFAULT_LABEL.into(),
            chain: DEFAULT_LABEL.into(),
            n: 5,
            t: 3,
        }
    }
}

impl NetworkParams {
    pub fn validate(&self) -> Result<(), KeynetError> {
        if self.t == 0 || self.t > self.n {
            return Err(ShareError::BadThreshold {
                n: self.n as usize,
                t: self.t as usize,
            }
            .into());
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum KeynetError {
    #[error("node {0} does not hold key {1}")]
    UnknownKeyId(u8, KeyId),
    #[error("no node with index {0}")]
    NoSuchNode(u8),
    #[error("only {accepted} of {needed} nodes accepted shares")]
    NodeUnavailable { accepted: usize, needed: usize },
    #[error("{what} mismatch: expected {expected:?}, found {found:?}")]
    NetworkMismatch {
        what: &'static str,
        expected: String,
        found: String,
    },
    #[error("{0} is not registered on the ledger")]
    NotRegistered(Address),
    #[error("access denied: {granted} of {needed} shares granted ({})", format_reasons(.reasons))]
    AccessDenied {
        granted: usize,
        needed: usize,
        reasons: Vec<NodeDenial>,
    },
    #[error("integrity failure: {0}")]
    IntegrityFailure(String),
    #[error(transparent)]
    Acc(#[from] AccError),
    #[error(transparent)]
    Share(#[from] ShareError),
    #[error(transparent)]
    Store(StoreError),
    #[error(transparent)]
    Wallet(#[from] WalletError),
}

impl From<StoreError> for KeynetError {
    fn from(e: StoreError) -> Self {
        match e {
            StoreError::IntegrityFailure(cid) => {
                KeynetError::IntegrityFailure(format!("stored bytes for {cid} do not match"))
            }
            other => KeynetError::Store(other),
        }
    }
}

impl From<BundleError> for KeynetError {
    fn from(e: BundleError) -> Self {
        KeynetError::IntegrityFailure(e.to_string())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeDenial {
    pub node: u8,
    pub reason: String,
}

fn format_reasons(reasons: &[NodeDenial]) -> String {
    reasons
        .iter()
        .map(|d| format!("node {}: {}", d.node, d.reason))
        .collect::<Vec<_>>()
        .join(", ")
}

/// Validates API login sessions on behalf of nodes.
pub trait SessionRegistry: Send + Sync {
    /// True when `auth_sig` is the login signature of a live session.
    fn is_live(&self, auth_sig: &AuthSig) -> bool;
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShareRequest {
    pub key_id: KeyId,
    pub auth_sig: AuthSig,
    /// Requester-claimed time. Nodes evaluate at ledger time instead.
    pub at: u64,
    pub acc_digest: AccDigest,
    /// `auth_sig` is a session login signature rather than a per-request one.
    #[serde(default)]
    pub session: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "decision", rename_all = "snake_case")]
pub enum ShareResponse {
    Granted { share: KeyShare },
    Denied { reason: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DepositRequest {
    pub share: KeyShare,
    pub acc: AccessControlCondition,
    pub chain: String,
    pub owner_sig: AuthSig,
    #[serde(default)]
    pub session: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AuditAction {
    Deposit,
    ShareRequest,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditEntry {
    pub action: AuditAction,
    pub key_id: KeyId,
    /// Signer of the request, when the signature recovered.
    pub requester: Option<Address>,
    pub claimed_at: Option<u64>,
    pub evaluated_at: u64,
    pub granted: bool,
    pub reason: Option<String>,
}

#[derive(Debug)]
struct HeldKey {
    share: KeyShare,
    acc: AccessControlCondition,
    acc_digest: AccDigest,
    chain: String,
}

#[derive(Debug, Default)]
struct Node {
    online: bool,
    keys: BTreeMap<KeyId, HeldKey>,
    seen_messages: BTreeSet<String>,
    audit: Vec<AuditEntry>,
}

pub struct KeyNetwork {
    label: String,
    chain: String,
    nodes: Vec<Mutex<Node>>,
    sessions: Option<Arc<dyn SessionRegistry>>,
}

impl std::fmt::Debug for KeyNetwork {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("KeyNetwork")
            .field("label", &self.label)
            .field("chain", &self.chain)
            .field("nodes", &self.nodes.len())
            .finish_non_exhaustive()
    }
}

/// `prefix + key_id + ":" + hex(nonce)`.
pub fn request_message(prefix: &str, key_id: &KeyId, nonce: &[u8; 16]) -> String {
    format!("{prefix}{key_id}:{}", hex::encode(nonce))
}

fn message_binds(message: &str, prefix: &str, key_id: &KeyId) -> bool {
    let Some(rest) = message.strip_prefix(prefix) else {
        return false;
    };
    let Some((id, nonce)) = rest.split_once(':') else {
        return false;
    };
    id == key_id.to_string() && nonce.len() == 32 && hex::decode(nonce).is_ok()
}

impl KeyNetwork {
    /// `node_count` online nodes, indexed from 1.
    pub fn new(label: impl Into<String>, chain: impl Into<String>, node_count: u8) -> Self {
        Self {
            label: label.into(),
            chain: chain.into(),
            nodes: (0..node_count)
                .map(|_| {
                    Mutex::new(Node {
                        online: true,
                        ..Node::default()
                    })
                })
                .collect(),
            sessions: None,
        }
    }

    pub fn with_sessions(mut self, registry: Arc<dyn SessionRegistry>) -> Self {
        self.sessions = Some(registry);
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn chain(&self) -> &str {
        &self.chain
    }

    pub fn node_count(&self) -> u8 {
        self.nodes.len() as u8
    }

    fn node(&self, index: u8) -> Result<MutexGuard<'_, Node>, KeynetError> {
        let slot = (index as usize)
            .checked_sub(1)
            .and_then(|i| self.nodes.get(i))
            .ok_or(KeynetError::NoSuchNode(index))?;
        Ok(slot.lock().expect("node state poisoned"))
    }

    pub fn set_online(&self, index: u8, online: bool) -> Result<(), KeynetError> {
        self.node(index)?.online = online;
        Ok(())
    }

    /// Takes exactly the listed nodes offline; all others come online.
    pub fn set_offline(&self, offline: &[u8]) {
        for i in 1..=self.node_count() {
            self.node(i).expect("index in range").online = !offline.contains(&i);
        }
    }

    pub fn is_online(&self, index: u8) -> bool {
        self.node(index).map(|n| n.online).unwrap_or(false)
    }

    pub fn audit_log(&self, index: u8) -> Result<Vec<AuditEntry>, KeynetError> {
        Ok(self.node(index)?.audit.clone())
    }

    pub fn holds(&self, index: u8, key_id: &KeyId) -> bool {
        self.node(index)
            .map(|n| n.keys.contains_key(key_id))
            .unwrap_or(false)
    }

    /// Checks `sig` and returns its signer, or the denial reason.
    fn authenticate(
        &self,
        node: &mut Node,
        sig: &AuthSig,
        session: bool,
        prefix: &str,
        key_id: &KeyId,
    ) -> Result<Address, (Option<Address>, &'static str)> {
        let signer = verify_signature(sig).map_err(|_| (None, reason::BAD_SIGNATURE))?;
        if session {
            let live = self.sessions.as_ref().is_some_and(|s| s.is_live(sig));
            if !live {
                return Err((Some(signer), reason::SESSION_INVALID));
            }
            return Ok(signer);
        }
        if !message_binds(&sig.signed_message, prefix, key_id) {
            return Err((Some(signer), reason::BAD_CHALLENGE));
        }
        if !node.seen_messages.insert(sig.signed_message.clone()) {
            return Err((Some(signer), reason::REPLAYED_NONCE));
        }
        Ok(signer)
    }

    /// Stores a share. The depositor must be registered and sign for the
    /// key id; a node never overwrites a key it already holds.
    pub fn node_deposit(
        &self,
        index: u8,
        req: &DepositRequest,
        chain: &dyn ChainView,
    ) -> Result<Result<(), String>, KeynetError> {
        let mut node = self.node(index)?;
        if !node.online {
            return Err(KeynetError::NodeUnavailable {
                accepted: 0,
                needed: 1,
            });
        }
        let key_id = req.share.key_id;
        let now = chain.now();
        let verdict = (|| {
            let signer = self
                .authenticate(&mut node, &req.owner_sig, req.session, DEPOSIT_PREFIX, &key_id)
                .map_err(|(who, r)| (who, r.to_string()))?;
            let who = Some(signer);
            if !chain.is_registered(&signer) {
                return Err((who, reason::NOT_REGISTERED.to_string()));
            }
            if req.share.node_index != index {
                return Err((who, "wrong_node".to_string()));
            }
            if node.keys.contains_key(&key_id) {
                return Err((who, reason::DUPLICATE_KEY_ID.to_string()));
            }
            req.acc
                .validate()
                .map_err(|e| (who, format!("{}: {e}", reason::ACC_ERROR)))?;
            Ok(signer)
        })();
        let (requester, outcome) = match verdict {
            Ok(signer) => {
                node.keys.insert(
                    key_id,
                    HeldKey {
                        share: req.share.clone(),
                        acc: req.acc.clone(),
                        acc_digest: req.acc.digest(),
                        chain: req.chain.clone(),
                    },
                );
                (Some(signer), Ok(()))
            }
            Err((who, r)) => (who, Err(r)),
        };
        node.audit.push(AuditEntry {
            action: AuditAction::Deposit,
            key_id,
            requester,
            claimed_at: None,
            evaluated_at: now,
            granted: outcome.is_ok(),
            reason: outcome.clone().err(),
        });
        Ok(outcome)
    }

    /// Drops `key_id` from every node, e.g. when the bundle it protects was
    /// never recorded on the ledger.
    pub fn withdraw(&self, key_id: &KeyId) {
        for i in 1..=self.node_count() {
            self.discard(i, key_id);
        }
    }

    /// Rollback for an aborted upload.
    fn discard(&self, index: u8, key_id: &KeyId) {
        if let Ok(mut node) = self.node(index) {
            node.keys.remove(key_id);
        }
    }

    /// Releases the node's share iff the signature verifies and the stored
    /// condition holds for the signer at ledger time. Every decision lands
    /// in the node's audit log.
    pub fn node_handle_share_request(
        &self,
        index: u8,
        req: &ShareRequest,
        chain: &dyn ChainView,
    ) -> Result<ShareResponse, KeynetError> {
        let mut node = self.node(index)?;
        if !node.online {
            return Err(KeynetError::NodeUnavailable {
                accepted: 0,
                needed: 1,
            });
        }
        if !node.keys.contains_key(&req.key_id) {
            return Err(KeynetError::UnknownKeyId(index, req.key_id));
        }
        let now = chain.now();
        let verdict = match self.authenticate(&mut node, &req.auth_sig, req.session, DECRYPT_PREFIX, &req.key_id) {
            Err((who, r)) => Err((who, r.to_string())),
            Ok(signer) => {
                let held = &node.keys[&req.key_id];
                if held.acc_digest != req.acc_digest || held.chain != self.chain {
                    Err((Some(signer), reason::ACC_MISMATCH.to_string()))
                } else {
                    match evaluate_acc(&held.acc, &signer, now, chain) {
                        Ok(true) => Ok((signer, held.share.clone())),
                        Ok(false) => Err((Some(signer), reason::ACC_FAILED.to_string())),
                        Err(e) => Err((Some(signer), format!("{}: {e}", reason::ACC_ERROR))),
                    }
                }
            }
        };
        let (requester, response) = match verdict {
            Ok((signer, share)) => (Some(signer), ShareResponse::Granted { share }),
            Err((who, reason)) => (who, ShareResponse::Denied { reason }),
        };
        node.audit.push(AuditEntry {
            action: AuditAction::ShareRequest,
            key_id: req.key_id,
            requester,
            claimed_at: Some(req.at),
            evaluated_at: now,
            granted: matches!(response, ShareResponse::Granted { .. }),
            reason: match &response {
                ShareResponse::Denied { reason } => Some(reason.clone()),
                ShareResponse::Granted { .. } => None,
            },
        });
        Ok(response)
    }
}

/// `ChainView` over a ledger and its root contracts.
#[derive(Clone, Copy)]
pub struct LedgerView<'a> {
    pub ledger: &'a Ledger,
    pub deployment: &'a Deployment,
}

impl ChainView for LedgerView<'_> {
    fn now(&self) -> u64 {
        self.ledger.now()
    }

    fn group_owner(&self, group: &ContractId) -> Option<Address> {
        self.deployment.group(self.ledger, group).ok().map(|g| g.owner())
    }

    fn check_access(&self, group: &ContractId, user: &Address, at: u64) -> Option<bool> {
        self.deployment.check_access(self.ledger, group, user, at).ok()
    }

    fn is_registered(&self, address: &Address) -> bool {
        self.deployment.is_registered(self.ledger, address)
    }
}

/// How a client proves its identity to nodes.
#[derive(Clone, Copy, Debug)]
pub enum Credential<'a> {
    /// Signs a fresh request message per operation.
    Wallet(&'a Wallet),
    /// Presents an API login signature, checked against the session registry.
    Session(&'a AuthSig),
}

impl Credential<'_> {
    pub fn address(&self) -> Address {
        match self {
            Credential::Wallet(w) => w.address(),
            Credential::Session(s) => s.address,
        }
    }

    fn authorize(&self, prefix: &str, key_id: &KeyId) -> Result<(AuthSig, bool), KeynetError> {
        match self {
            Credential::Wallet(w) => {
                let mut nonce = [0u8; 16];
                rand::rngs::OsRng.fill_bytes(&mut nonce);
                Ok((sign_auth(w, &request_message(prefix, key_id, &nonce))?, false))
            }
            Credential::Session(s) => Ok(((*s).clone(), true)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NamedFile {
    pub file_name: String,
    #[serde(with = "hex_bytes")]
    pub bytes: Vec<u8>,
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

impl NamedFile {
    pub fn new(file_name: impl Into<String>, bytes: impl Into<Vec<u8>>) -> Self {
        Self {
            file_name: file_name.into(),
            bytes: bytes.into(),
        }
    }
}

/// Store response for an uploaded bundle.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UploadReceipt {
    pub cid: Cid,
    pub file_name: String,
    pub key_id: KeyId,
    /// Size of the bundle archive in bytes.
    pub size: u64,
    pub pinned_at: u64,
}

/// The services a client talks to.
#[derive(Clone, Copy)]
pub struct Services<'a> {
    pub network: &'a KeyNetwork,
    pub store: &'a Store,
    pub chain: &'a dyn ChainView,
}

impl Services<'_> {
    fn check_params(&self, params: &NetworkParams) -> Result<(), KeynetError> {
        params.validate()?;
        let mismatch = |what, expected: &str, found: &str| KeynetError::NetworkMismatch {
            what,
            expected: expected.to_string(),
            found: found.to_string(),
        };
        if params.lit_network != self.network.label {
            return Err(mismatch("lit_network", &self.network.label, &params.lit_network));
        }
        if params.chain != self.network.chain {
            return Err(mismatch("chain", &self.network.chain, &params.chain));
        }
        if params.n > self.network.node_count() {
            return Err(KeynetError::NodeUnavailable {
                accepted: self.network.node_count() as usize,
                needed: params.n as usize,
            });
        }
        Ok(())
    }
}

/// Encrypts `file` under a fresh key, deposits one share with each of the
/// `n` nodes and pins the bundle. If any node refuses or is offline, shares
/// already deposited are withdrawn and nothing is pinned.
pub fn encrypt_file_and_upload(
    svc: Services<'_>,
    file: &NamedFile,
    acc: &AccessControlCondition,
    owner: Credential<'_>,
    params: &NetworkParams,
) -> Result<(Cid, UploadReceipt), KeynetError> {
    svc.check_params(params)?;
    let owner_address = owner.address();
    if !svc.chain.is_registered(&owner_address) {
        return Err(KeynetError::NotRegistered(owner_address));
    }
    acc.validate()?;
    for g in acc.groups() {
        if svc.chain.group_owner(&g).is_none() {
            return Err(AccError::UnknownGroup(g).into());
        }
    }

    let mut rng = rand::rngs::OsRng;
    let key_id = KeyId::random(&mut rng);
    let dek = shamir::random_field_element(&mut rng);
    let payload = bundle::seal(&dek, &key_id, acc, &file.bytes, &mut rng);
    let shares = split_key(&dek, key_id, params.n as usize, params.t as usize, &mut rng)?;

    let needed = shares.len();
    let online = (1..=params.n).filter(|i| svc.network.is_online(*i)).count();
    if online < needed {
        return Err(KeynetError::NodeUnavailable {
            accepted: online,
            needed,
        });
    }
    let mut deposited = Vec::new();
    let rollback = |deposited: &[u8]| {
        for i in deposited {
            svc.network.discard(*i, &key_id);
        }
    };
    for share in shares {
        let index = share.node_index;
        let (owner_sig, session) = owner.authorize(DEPOSIT_PREFIX, &key_id)?;
        let req = DepositRequest {
            share,
            acc: acc.clone(),
            chain: params.chain.clone(),
            owner_sig,
            session,
        };
        match svc.network.node_deposit(index, &req, svc.chain) {
            Ok(Ok(())) => deposited.push(index),
            Ok(Err(_)) | Err(_) => {
                rollback(&deposited);
                return Err(KeynetError::NodeUnavailable {
                    accepted: deposited.len(),
                    needed,
                });
            }
        }
    }

    let bundle = EncryptedBundle {
        metadata: BundleMetadata {
            version: bundle::BUNDLE_VERSION,
            file_name: file.file_name.clone(),
            content_length: file.bytes.len() as u64,
            acc: hex::encode(acc.canonical_bytes()),
            chain: params.chain.clone(),
            key_id,
            n: params.n,
            t: params.t,
            owner: owner_address,
            created_at: svc.chain.now(),
        },
        payload,
    };
    let archive = bundle.to_zip();
    let cid = match svc.store.put(&archive) {
        Ok(cid) => cid,
        Err(e) => {
            rollback(&deposited);
            return Err(e.into());
        }
    };
    let pinned_at = svc.store.pin(&cid).map(|p| p.timestamp).unwrap_or_default();
    Ok((
        cid,
        UploadReceipt {
            cid,
            file_name: file.file_name.clone(),
            key_id,
            size: archive.len() as u64,
            pinned_at,
        },
    ))
}

/// Fetches and parses a pinned bundle.
pub fn fetch_bundle(store: &Store, cid: &Cid) -> Result<EncryptedBundle, KeynetError> {
    let bytes = store.get(cid)?;
    Ok(EncryptedBundle::from_zip(&bytes)?)
}

/// Asks all `n` nodes for their share, combines `t` grants and opens the
/// payload.
pub fn decrypt_file_and_download(
    svc: Services<'_>,
    cid: &Cid,
    requester: Credential<'_>,
    params: &NetworkParams,
) -> Result<NamedFile, KeynetError> {
    svc.check_params(params)?;
    let address = requester.address();
    if !svc.chain.is_registered(&address) {
        return Err(KeynetError::NotRegistered(address));
    }
    let bundle = fetch_bundle(svc.store, cid)?;
    let meta = &bundle.metadata;
    if meta.chain != params.chain {
        return Err(KeynetError::NetworkMismatch {
            what: "chain",
            expected: params.chain.clone(),
            found: meta.chain.clone(),
        });
    }
    let acc = meta.acc()?;
    let (auth_sig, session) = requester.authorize(DECRYPT_PREFIX, &meta.key_id)?;
    let req = ShareRequest {
        key_id: meta.key_id,
        auth_sig,
        at: svc.chain.now(),
        acc_digest: acc.digest(),
        session,
    };

    let mut grants = Vec::new();
    let mut reasons = Vec::new();
    for node in 1..=meta.n {
        match svc.network.node_handle_share_request(node, &req, svc.chain) {
            Ok(ShareResponse::Granted { share }) => grants.push(share),
            Ok(ShareResponse::Denied { reason }) => reasons.push(NodeDenial { node, reason }),
            Err(KeynetError::NodeUnavailable { .. }) => reasons.push(NodeDenial {
                node,
                reason: reason::NODE_UNAVAILABLE.into(),
            }),
            Err(KeynetError::UnknownKeyId(..)) => reasons.push(NodeDenial {
                node,
                reason: reason::UNKNOWN_KEY_ID.into(),
            }),
            Err(e) => return Err(e),
        }
    }
    let needed = meta.t as usize;
    if grants.len() < needed {
        return Err(KeynetError::AccessDenied {
            granted: grants.len(),
            needed,
            reasons,
        });
    }
    let dek = combine_shares(&grants, needed)?;
    let bytes = bundle::open(&dek, &meta.key_id, &acc, &bundle.payload)?;
    if bytes.len() as u64 != meta.content_length {
        return Err(KeynetError::IntegrityFailure(
            "content length does not match metadata".into(),
        ));
    }
    Ok(NamedFile {
        file_name: meta.file_name.clone(),
        bytes,
    })
}
