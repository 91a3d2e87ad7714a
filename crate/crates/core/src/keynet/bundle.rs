//! Encrypted bundle: a zip archive holding `payload.enc`, `metadata.json`
//! and `README.txt`.
//!
//! `payload.enc` is `nonce(12) || ciphertext || tag(16)` under AES-256-GCM.
//! The associated data binds the key id and the ACC digest, so editing the
//! metadata's condition breaks decryption.

use std::io::{Cursor, Read, Write};

use aes_gcm::aead::{Aead, Payload};
use aes_gcm::{Aes256Gcm, KeyInit, Nonce};
use rand::{CryptoRng, RngCore};
use serde::{Deserialize, Serialize};
use thiserror::Error;
use zip::write::SimpleFileOptions;
use zip::{CompressionMethod, DateTime, ZipArchive, ZipWriter};

use super::acc::{AccError, AccessControlCondition};
use super::shamir::KeyId;
use crate::wallet::Address;

pub const BUNDLE_VERSION: u32 = 1;
pub const PAYLOAD_FILE: &str = "payload.enc";
pub const METADATA_FILE: &str = "metadata.json";
pub const README_FILE: &str = "README.txt";
pub const NONCE_LEN: usize = 12;
pub const TAG_LEN: usize = 16;

const AAD_DOMAIN: &[u8] = b"dvre-bundle-v1";
const MAX_METADATA_LEN: u64 = 1 << 20;

const README: &str = "\
This archive was produced by dvre.

payload.enc holds an encrypted research asset. The key that opens it is split
across the key network and is released only to wallets that satisfy the
access condition recorded in metadata.json. Download it through dvre with a
registered wallet to recover the original file.
";

#[derive(Debug, Error)]
pub enum BundleError {
    #[error("archive is malformed: {0}")]
    Malformed(String),
    #[error("unsupported bundle version {0}")]
    Version(u32),
    #[error("payload failed authentication")]
    Integrity,
    #[error("access condition in metadata is invalid: {0}")]
    Acc(#[from] AccError),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BundleMetadata {
    pub version: u32,
    pub file_name: String,
    pub content_length: u64,
    /// Hex of the canonical ACC encoding.
    pub acc: String,
    pub chain: String,
    pub key_id: KeyId,
    pub n: u8,
    pub t: u8,
    pub owner: Address,
    pub created_at: u64,
}

impl BundleMetadata {
    pub fn acc(&self) -> Result<AccessControlCondition, BundleError> {
        let raw = hex::decode(&self.acc).map_err(|e| BundleError::Malformed(e.to_string()))?;
        Ok(AccessControlCondition::from_canonical_bytes(&raw)?)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncryptedBundle {
    pub metadata: BundleMetadata,
    pub payload: Vec<u8>,
}

fn aad(key_id: &KeyId, acc: &AccessControlCondition) -> Vec<u8> {
    [AAD_DOMAIN, &key_id.0, &acc.digest().0].concat()
}

pub fn seal<R: RngCore + CryptoRng>(
    dek: &[u8; 32],
    key_id: &KeyId,
    acc: &AccessControlCondition,
    plaintext: &[u8],
    rng: &mut R,
) -> Vec<u8> {
    let mut nonce = [0u8; NONCE_LEN];
    rng.fill_bytes(&mut nonce);
    let cipher = Aes256Gcm::new(dek.into());
    let aad = aad(key_id, acc);
    let ct = cipher
        .encrypt(
            Nonce::from_slice(&nonce),
            Payload {
                msg: plaintext,
                aad: &aad,
            },
        )
        .expect("AES-GCM encryption of in-memory data");
    [nonce.as_slice(), &ct].concat()
}

pub fn open(
    dek: &[u8; 32],
    key_id: &KeyId,
    acc: &AccessControlCondition,
    payload: &[u8],
) -> Result<Vec<u8>, BundleError> {
    if payload.len() < NONCE_LEN + TAG_LEN {
        return Err(BundleError::Integrity);
    }
    let (nonce, ct) = payload.split_at(NONCE_LEN);
    let aad = aad(key_id, acc);
    Aes256Gcm::new(dek.into())
        .decrypt(Nonce::from_slice(nonce), Payload { msg: ct, aad: &aad })
        .map_err(|_| BundleError::Integrity)
}

fn malformed(e: impl std::fmt::Display) -> BundleError {
    BundleError::Malformed(e.to_string())
}

impl EncryptedBundle {
    /// Zip bytes. Entry order and timestamps are fixed, so equal bundles
    /// produce equal archives.
    pub fn to_zip(&self) -> Vec<u8> {
        let stamp = DateTime::default();
        let stored = SimpleFileOptions::default()
            .compression_method(CompressionMethod::Stored)
            .last_modified_time(stamp);
        let deflated = SimpleFileOptions::default()
            .compression_method(CompressionMethod::Deflated)
            .last_modified_time(stamp);
        let metadata = serde_json::to_vec_pretty(&self.metadata).expect("metadata serializes");
        let mut zip = ZipWriter::new(Cursor::new(Vec::new()));
        let mut entry = |name: &str, opts: SimpleFileOptions, data: &[u8]| {
            zip.start_file(name, opts).expect("in-memory zip");
            zip.write_all(data).expect("in-memory zip");
        };
        entry(PAYLOAD_FILE, stored, &self.payload);
        entry(METADATA_FILE, deflated, &metadata);
        entry(README_FILE, deflated, README.as_bytes());
        zip.finish().expect("in-memory zip").into_inner()
    }

    pub fn from_zip(bytes: &[u8]) -> Result<Self, BundleError> {
        let mut archive = ZipArchive::new(Cursor::new(bytes)).map_err(malformed)?;
        let mut read = |name: &str, limit: u64| -> Result<Vec<u8>, BundleError> {
            let file = archive.by_name(name).map_err(malformed)?;
            let mut out = Vec::new();
            file.take(limit).read_to_end(&mut out).map_err(malformed)?;
            Ok(out)
        };
        let metadata: BundleMetadata =
            serde_json::from_slice(&read(METADATA_FILE, MAX_METADATA_LEN)?).map_err(malformed)?;
        if metadata.version != BUNDLE_VERSION {
            return Err(BundleError::Version(metadata.version));
        }
        metadata.acc()?;
        let payload = read(PAYLOAD_FILE, u64::MAX)?;
        Ok(Self { metadata, payload })
    }
}
