//! Externally owned accounts: secp256k1 keys, Ethereum-style addresses and
//! personal-message signatures used for challenge login.

use std::fmt;
use std::fs;
use std::io::Write as _;
use std::path::Path;
use std::str::FromStr;

use k256::ecdsa::{RecoveryId, Signature, SigningKey, VerifyingKey};
use rand::RngCore;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha3::{Digest, Keccak256};
use thiserror::Error;

pub const LOGIN_PREFIX: &str = "dvre-login:";

#[derive(Debug, Error)]
pub enum WalletError {
    #[error("entropy does not map to a valid secp256k1 scalar")]
    InvalidEntropy,
    #[error("challenge must not be empty")]
    EmptyChallenge,
    #[error("signed message does not match the expected challenge")]
    ChallengeMismatch,
    #[error("signature is invalid or does not recover to the claimed address")]
    SignatureInvalid,
    #[error("invalid address: {0}")]
    InvalidAddress(String),
    #[error("invalid key file: {0}")]
    InvalidKeyFile(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub fn keccak256(data: &[u8]) -> [u8; 32] {
    Keccak256::digest(data).into()
}

/// 20-byte account identifier, rendered with the EIP-55 checksum.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Address(pub [u8; 20]);

impl Address {
    pub const ZERO: Address = Address([0; 20]);

    /// Last 20 bytes of Keccak-256 over the 64-byte public key (no 0x04 tag).
    pub fn from_public_key(key: &VerifyingKey) -> Self {
        let point = key.to_encoded_point(false);
        let hash = keccak256(&point.as_bytes()[1..]);
        let mut out = [0u8; 20];
        out.copy_from_slice(&hash[12..]);
        Address(out)
    }

    pub fn as_bytes(&self) -> &[u8; 20] {
        &self.0
    }

    pub fn to_checksum(&self) -> String {
        let lower = hex::encode(self.0);
        let hash = keccak256(lower.as_bytes());
        let mut out = String::with_capacity(42);
        out.push_str("0x");
        for (i, c) in lower.chars().enumerate() {
            let nibble = (hash[i / 2] >> (if i % 2 == 0 { 4 } else { 0 })) & 0x0f;
            if c.is_ascii_alphabetic() && nibble >= 8 {
                out.push(c.to_ascii_uppercase());
            } else {
                out.push(c);
            }
        }
        out
    }
}

impl fmt::Display for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_checksum())
    }
}

impl fmt::Debug for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Address({})", self.to_checksum())
    }
}

impl FromStr for Address {
    type Err = WalletError;

    /// Accepts all-lowercase or all-uppercase hex, or mixed case that passes
    /// the EIP-55 checksum.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let body = s
            .strip_prefix("0x")
            .or_else(|| s.strip_prefix("0X"))
            .unwrap_or(s);
        if body.len() != 40 {
            return Err(WalletError::InvalidAddress(s.to_string()));
        }
        let raw = hex::decode(body).map_err(|_| WalletError::InvalidAddress(s.to_string()))?;
        let mut out = [0u8; 20];
        out.copy_from_slice(&raw);
        let addr = Address(out);
        let has_lower = body.chars().any(|c| c.is_ascii_lowercase());
        let has_upper = body.chars().any(|c| c.is_ascii_uppercase());
        if has_lower && has_upper && addr.to_checksum()[2..] != *body {
            return Err(WalletError::InvalidAddress(format!("{s}: bad checksum")));
        }
        Ok(addr)
    }
}

impl Serialize for Address {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_checksum())
    }
}

impl<'de> Deserialize<'de> for Address {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone)]
pub struct Wallet {
    signing_key: SigningKey,
    address: Address,
}

impl fmt::Debug for Wallet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Wallet")
            .field("address", &self.address)
            .finish_non_exhaustive()
    }
}

impl Wallet {
    pub fn address(&self) -> Address {
        self.address
    }

    pub fn public_key(&self) -> VerifyingKey {
        *self.signing_key.verifying_key()
    }

    /// 65-byte uncompressed SEC1 encoding (0x04 || x || y).
    pub fn public_key_uncompressed(&self) -> Vec<u8> {
        self.public_key().to_encoded_point(false).as_bytes().to_vec()
    }

    pub fn private_key_bytes(&self) -> [u8; 32] {
        self.signing_key.to_bytes().into()
    }

    pub fn from_private_key(bytes: &[u8; 32]) -> Result<Self, WalletError> {
        let signing_key =
            SigningKey::from_bytes(bytes.into()).map_err(|_| WalletError::InvalidEntropy)?;
        let address = Address::from_public_key(signing_key.verifying_key());
        Ok(Self {
            signing_key,
            address,
        })
    }

    /// Writes the private key as one line of hex, readable only by the owner.
    pub fn save_key_file(&self, path: &Path) -> Result<(), WalletError> {
        let mut opts = fs::OpenOptions::new();
        opts.write(true).create(true).truncate(true);
        #[cfg(unix)]
        {
            use std::os::unix::fs::OpenOptionsExt;
            opts.mode(0o600);
        }
        let mut file = opts.open(path)?;
        writeln!(file, "{}", hex::encode(self.private_key_bytes()))?;
        #[cfg(unix)]
        {
            use std::os::unix::fs::PermissionsExt;
            fs::set_permissions(path, fs::Permissions::from_mode(0o600))?;
        }
        Ok(())
    }

    pub fn load_key_file(path: &Path) -> Result<Self, WalletError> {
        let text = fs::read_to_string(path)?;
        Self::from_hex(text.trim())
    }

    pub fn from_hex(text: &str) -> Result<Self, WalletError> {
        let text = text.strip_prefix("0x").unwrap_or(text);
        let raw = hex::decode(text).map_err(|e| WalletError::InvalidKeyFile(e.to_string()))?;
        let bytes: [u8; 32] = raw
            .try_into()
            .map_err(|_| WalletError::InvalidKeyFile("expected 32 bytes".into()))?;
        Self::from_private_key(&bytes)
    }
}

/// Deterministic when `entropy` is given, otherwise drawn from the OS RNG.
pub fn generate_wallet(entropy: Option<[u8; 32]>) -> Result<Wallet, WalletError> {
    match entropy {
        Some(bytes) => Wallet::from_private_key(&bytes),
        None => loop {
            let mut bytes = [0u8; 32];
            rand::rngs::OsRng.fill_bytes(&mut bytes);
            if let Ok(w) = Wallet::from_private_key(&bytes) {
                return Ok(w);
            }
        },
    }
}

/// Keccak-256 of `"\x19Ethereum Signed Message:\n" + len + message`.
pub fn personal_message_hash(message: &[u8]) -> [u8; 32] {
    let mut hasher = Keccak256::new();
    hasher.update(b"\x19Ethereum Signed Message:\n");
    hasher.update(message.len().to_string().as_bytes());
    hasher.update(message);
    hasher.finalize().into()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuthSig {
    pub signed_message: String,
    #[serde(with = "hex_sig")]
    pub signature: [u8; 65],
    pub address: Address,
}

mod hex_sig {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(sig: &[u8; 65], s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format!("0x{}", hex::encode(sig)))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<[u8; 65], D::Error> {
        let s = String::deserialize(d)?;
        let raw = hex::decode(s.trim_start_matches("0x")).map_err(serde::de::Error::custom)?;
        raw.try_into()
            .map_err(|_| serde::de::Error::custom("signature must be 65 bytes"))
    }
}

/// Signs `challenge` as an Ethereum personal message. RFC-6979 nonces make the
/// signature a pure function of (key, challenge).
pub fn sign_auth(wallet: &Wallet, challenge: &str) -> Result<AuthSig, WalletError> {
    if challenge.is_empty() {
        return Err(WalletError::EmptyChallenge);
    }
    let digest = personal_message_hash(challenge.as_bytes());
    let (sig, recid) = wallet
        .signing_key
        .sign_prehash_recoverable(&digest)
        .map_err(|_| WalletError::SignatureInvalid)?;
    let mut signature = [0u8; 65];
    signature[..64].copy_from_slice(&sig.to_bytes());
    signature[64] = 27 + recid.to_byte();
    Ok(AuthSig {
        signed_message: challenge.to_string(),
        signature,
        address: wallet.address,
    })
}

/// Recovers the signer of a personal-message signature.
pub fn recover_signer(message: &[u8], signature: &[u8; 65]) -> Result<Address, WalletError> {
    let v = match signature[64] {
        27 | 28 => signature[64] - 27,
        0 | 1 => signature[64],
        _ => return Err(WalletError::SignatureInvalid),
    };
    let recid = RecoveryId::from_byte(v).ok_or(WalletError::SignatureInvalid)?;
    let sig = Signature::from_slice(&signature[..64]).map_err(|_| WalletError::SignatureInvalid)?;
    let digest = personal_message_hash(message);
    let key = VerifyingKey::recover_from_prehash(&digest, &sig, recid)
        .map_err(|_| WalletError::SignatureInvalid)?;
    Ok(Address::from_public_key(&key))
}

pub fn verify_auth(sig: &AuthSig, expected_challenge: &str) -> Result<Address, WalletError> {
    if sig.signed_message != expected_challenge {
        return Err(WalletError::ChallengeMismatch);
    }
    verify_signature(sig)
}

/// Signature check alone, for callers that validate the message themselves.
pub fn verify_signature(sig: &AuthSig) -> Result<Address, WalletError> {
    let signer = recover_signer(sig.signed_message.as_bytes(), &sig.signature)?;
    if signer != sig.address {
        return Err(WalletError::SignatureInvalid);
    }
    Ok(signer)
}

/// `"dvre-login:" + hex(nonce)`.
pub fn login_challenge(nonce: &[u8; 16]) -> String {
    format!("{LOGIN_PREFIX}{}", hex::encode(nonce))
}

pub fn random_login_challenge() -> String {
    let mut nonce = [0u8; 16];
    rand::rngs::OsRng.fill_bytes(&mut nonce);
    login_challenge(&nonce)
}
