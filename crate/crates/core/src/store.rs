//! Content-addressed object store with pin quotas.
//!
//! Layout under the root directory: `blocks/<cid>` holds the bytes and
//! `pins.tsv` lists pinned objects as `cid<TAB>size<TAB>timestamp`. The store
//! never encrypts; confidentiality is the key network's job.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Mutex;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub const CID_PREFIX: &str = "dvre1-";
pub const DEFAULT_MAX_PINNED_FILES: usize = 500;
pub const DEFAULT_MAX_TOTAL_BYTES: u64 = 1 << 30;

const BLOCKS_DIR: &str = "blocks";
const PIN_INDEX: &str = "pins.tsv";

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("pin limit of {limit} files reached")]
    QuotaExceededFiles { limit: usize },
    #[error("storing {requested} more bytes would exceed the {limit}-byte quota")]
    QuotaExceededBytes { limit: u64, requested: u64 },
    #[error("{0} is not pinned")]
    NotFound(Cid),
    #[error("stored bytes for {0} do not match their content id")]
    IntegrityFailure(Cid),
    #[error("invalid content id {0:?}")]
    InvalidCid(String),
    #[error("corrupt pin index line {line}: {reason}")]
    CorruptIndex { line: usize, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// SHA-256 digest of the content, rendered as `dvre1-` + 64 hex chars.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cid(pub [u8; 32]);

impl Cid {
    pub fn of(content: &[u8]) -> Self {
        Cid(Sha256::digest(content).into())
    }

    pub fn digest(&self) -> &[u8; 32] {
        &self.0
    }

    pub fn verify(&self, content: &[u8]) -> bool {
        Cid::of(content) == *self
    }
}

impl fmt::Display for Cid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{CID_PREFIX}{}", hex::encode(self.0))
    }
}

impl fmt::Debug for Cid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Cid({self})")
    }
}

impl FromStr for Cid {
    type Err = StoreError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let body = s
            .strip_prefix(CID_PREFIX)
            .ok_or_else(|| StoreError::InvalidCid(s.to_string()))?;
        let raw = hex::decode(body).map_err(|_| StoreError::InvalidCid(s.to_string()))?;
        let digest: [u8; 32] = raw
            .try_into()
            .map_err(|_| StoreError::InvalidCid(s.to_string()))?;
        Ok(Cid(digest))
    }
}

impl Serialize for Cid {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Cid {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        String::deserialize(deserializer)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Quota {
    pub max_pinned_files: usize,
    pub max_total_bytes: u64,
}

impl Default for Quota {
    fn default() -> Self {
        Self {
            max_pinned_files: DEFAULT_MAX_PINNED_FILES,
            max_total_bytes: DEFAULT_MAX_TOTAL_BYTES,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pin {
    pub size: u64,
    pub timestamp: u64,
}

#[derive(Debug, Default)]
struct PinIndex {
    pins: BTreeMap<Cid, Pin>,
    total_bytes: u64,
}

#[derive(Debug)]
pub struct Store {
    root: PathBuf,
    quota: Quota,
    index: Mutex<PinIndex>,
}

fn unix_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

/// Write to a sibling temp file, then rename over the target.
fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let tmp = path.with_extension(format!("tmp-{}", std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(tmp, path)
}

impl Store {
    /// Opens (or initialises) a store rooted at `root`.
    pub fn open(root: impl Into<PathBuf>, quota: Quota) -> Result<Self, StoreError> {
        let root = root.into();
        fs::create_dir_all(root.join(BLOCKS_DIR))?;
        let mut index = PinIndex::default();
        let index_path = root.join(PIN_INDEX);
        if index_path.exists() {
            for (i, line) in fs::read_to_string(&index_path)?.lines().enumerate() {
                if line.is_empty() {
                    continue;
                }
                let corrupt = |reason: &str| StoreError::CorruptIndex {
                    line: i + 1,
                    reason: reason.to_string(),
                };
                let fields: Vec<&str> = line.split('\t').collect();
                let [cid, size, ts] = fields[..] else {
                    return Err(corrupt("expected three fields"));
                };
                let cid: Cid = cid.parse().map_err(|_| corrupt("bad cid"))?;
                let size: u64 = size.parse().map_err(|_| corrupt("bad size"))?;
                let timestamp: u64 = ts.parse().map_err(|_| corrupt("bad timestamp"))?;
                index.total_bytes += size;
                index.pins.insert(cid, Pin { size, timestamp });
            }
        }
        Ok(Self {
            root,
            quota,
            index: Mutex::new(index),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn quota(&self) -> Quota {
        self.quota
    }

    /// Path of the block file backing `cid`.
    pub fn block_path(&self, cid: &Cid) -> PathBuf {
        self.root.join(BLOCKS_DIR).join(cid.to_string())
    }

    fn persist_index(&self, index: &PinIndex) -> std::io::Result<()> {
        let mut text = String::new();
        for (cid, pin) in &index.pins {
            text.push_str(&format!("{cid}\t{}\t{}\n", pin.size, pin.timestamp));
        }
        write_atomic(&self.root.join(PIN_INDEX), text.as_bytes())
    }

    /// Stores and pins `content`. Re-putting pinned bytes is a no-op.
    pub fn put(&self, content: &[u8]) -> Result<Cid, StoreError> {
        let cid = Cid::of(content);
        let mut index = self.index.lock().expect("store index poisoned");
        if index.pins.contains_key(&cid) {
            return Ok(cid);
        }
        if index.pins.len() + 1 > self.quota.max_pinned_files {
            return Err(StoreError::QuotaExceededFiles {
                limit: self.quota.max_pinned_files,
            });
        }
        let size = content.len() as u64;
        if index.total_bytes + size > self.quota.max_total_bytes {
            return Err(StoreError::QuotaExceededBytes {
                limit: self.quota.max_total_bytes,
                requested: size,
            });
        }
        write_atomic(&self.block_path(&cid), content)?;
        index.pins.insert(
            cid,
            Pin {
                size,
                timestamp: unix_now(),
            },
        );
        index.total_bytes += size;
        if let Err(e) = self.persist_index(&index) {
            index.pins.remove(&cid);
            index.total_bytes -= size;
            let _ = fs::remove_file(self.block_path(&cid));
            return Err(e.into());
        }
        Ok(cid)
    }

    pub fn get(&self, cid: &Cid) -> Result<Vec<u8>, StoreError> {
        if !self.is_pinned(cid) {
            return Err(StoreError::NotFound(*cid));
        }
        let bytes = match fs::read(self.block_path(cid)) {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                return Err(StoreError::IntegrityFailure(*cid))
            }
            Err(e) => return Err(e.into()),
        };
        if !cid.verify(&bytes) {
            return Err(StoreError::IntegrityFailure(*cid));
        }
        Ok(bytes)
    }

    /// Releases the pin and deletes the block.
    pub fn unpin(&self, cid: &Cid) -> Result<(), StoreError> {
        let mut index = self.index.lock().expect("store index poisoned");
        let pin = index.pins.remove(cid).ok_or(StoreError::NotFound(*cid))?;
        index.total_bytes -= pin.size;
        self.persist_index(&index)?;
        match fs::remove_file(self.block_path(cid)) {
            Ok(()) => Ok(()),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(()),
            Err(e) => Err(e.into()),
        }
    }

    pub fn is_pinned(&self, cid: &Cid) -> bool {
        self.index
            .lock()
            .expect("store index poisoned")
            .pins
            .contains_key(cid)
    }

    pub fn pin(&self, cid: &Cid) -> Option<Pin> {
        self.index
            .lock()
            .expect("store index poisoned")
            .pins
            .get(cid)
            .copied()
    }

    /// `(pinned files, pinned bytes)`.
    pub fn usage(&self) -> (usize, u64) {
        let index = self.index.lock().expect("store index poisoned");
        (index.pins.len(), index.total_bytes)
    }

    pub fn pins(&self) -> Vec<(Cid, Pin)> {
        let index = self.index.lock().expect("store index poisoned");
        index.pins.iter().map(|(c, p)| (*c, *p)).collect()
    }
}
