//! Shamir secret sharing over GF(p), p = 2^256 - 189 (the largest prime
//! below 2^256).

use std::collections::BTreeMap;
use std::fmt;
use std::sync::OnceLock;

use num_bigint::BigUint;
use rand::{CryptoRng, RngCore};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Field modulus, big-endian hex.
pub const PRIME_HEX: &str = "ffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffff43";

pub fn prime() -> &'static BigUint {
    static P: OnceLock<BigUint> = OnceLock::new();
    P.get_or_init(|| BigUint::parse_bytes(PRIME_HEX.as_bytes(), 16).unwrap())
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ShareError {
    #[error("threshold must satisfy 1 <= t <= n <= 255 (got t={t}, n={n})")]
    BadThreshold { n: usize, t: usize },
    #[error("secret is not a field element")]
    SecretOutOfField,
    #[error("need {need} distinct shares, have {have}")]
    InsufficientShares { have: usize, need: usize },
    #[error("shares belong to different keys")]
    MixedKeyIds,
    #[error("two shares for node {0} disagree")]
    InconsistentShares(u8),
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct KeyId(pub [u8; 16]);

impl KeyId {
    pub fn random<R: RngCore + CryptoRng>(rng: &mut R) -> Self {
        let mut id = [0u8; 16];
        rng.fill_bytes(&mut id);
        KeyId(id)
    }
}

impl fmt::Display for KeyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&hex::encode(self.0))
    }
}

impl fmt::Debug for KeyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "KeyId({self})")
    }
}

impl std::str::FromStr for KeyId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let raw = hex::decode(s).map_err(|e| e.to_string())?;
        Ok(KeyId(raw.try_into().map_err(|_| "key id must be 16 bytes".to_string())?))
    }
}

impl Serialize for KeyId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for KeyId {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeyShare {
    pub key_id: KeyId,
    pub node_index: u8,
    /// Big-endian field element.
    #[serde(with = "hex32")]
    pub share_value: [u8; 32],
}

impl fmt::Debug for KeyShare {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KeyShare")
            .field("key_id", &self.key_id)
            .field("node_index", &self.node_index)
            .finish_non_exhaustive()
    }
}

mod hex32 {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(b: &[u8; 32], s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&hex::encode(b))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<[u8; 32], D::Error> {
        let raw = hex::decode(String::deserialize(d)?).map_err(serde::de::Error::custom)?;
        raw.try_into()
            .map_err(|_| serde::de::Error::custom("expected 32 bytes"))
    }
}

pub fn to_bytes(x: &BigUint) -> [u8; 32] {
    let raw = x.to_bytes_be();
    let mut out = [0u8; 32];
    out[32 - raw.len()..].copy_from_slice(&raw);
    out
}

pub fn from_bytes(b: &[u8; 32]) -> BigUint {
    BigUint::from_bytes_be(b)
}

pub fn is_field_element(b: &[u8; 32]) -> bool {
    from_bytes(b) < *prime()
}

/// Uniform field element by rejection sampling.
pub fn random_field_element<R: RngCore + CryptoRng>(rng: &mut R) -> [u8; 32] {
    loop {
        let mut b = [0u8; 32];
        rng.fill_bytes(&mut b);
        if is_field_element(&b) {
            return b;
        }
    }
}

fn inverse(x: &BigUint) -> BigUint {
    let p = prime();
    x.modpow(&(p - 2u32), p)
}

/// Splits `secret` into `n` shares, any `t` of which reconstruct it. Share
/// `i` is the degree-(t-1) polynomial evaluated at x = i.
pub fn split_key<R: RngCore + CryptoRng>(
    secret: &[u8; 32],
    key_id: KeyId,
    n: usize,
    t: usize,
    rng: &mut R,
) -> Result<Vec<KeyShare>, ShareError> {
    if t == 0 || t > n || n > 255 {
        return Err(ShareError::BadThreshold { n, t });
    }
    if !is_field_element(secret) {
        return Err(ShareError::SecretOutOfField);
    }
    let p = prime();
    let mut coeffs = vec![from_bytes(secret)];
    coeffs.extend((1..t).map(|_| from_bytes(&random_field_element(rng))));
    Ok((1..=n)
        .map(|i| {
            let x = BigUint::from(i);
            // Horner
            let y = coeffs
                .iter()
                .rev()
                .fold(BigUint::default(), |acc, c| (acc * &x + c) % p);
            KeyShare {
                key_id,
                node_index: i as u8,
                share_value: to_bytes(&y),
            }
        })
        .collect())
}

/// Lagrange interpolation at x = 0 over the first `t` distinct shares.
pub fn combine_shares(shares: &[KeyShare], t: usize) -> Result<[u8; 32], ShareError> {
    let Some(first) = shares.first() else {
        return Err(ShareError::InsufficientShares { have: 0, need: t });
    };
    if shares.iter().any(|s| s.key_id != first.key_id) {
        return Err(ShareError::MixedKeyIds);
    }
    let mut distinct: BTreeMap<u8, &[u8; 32]> = BTreeMap::new();
    for s in shares {
        if let Some(prev) = distinct.insert(s.node_index, &s.share_value) {
            if prev != &s.share_value {
                return Err(ShareError::InconsistentShares(s.node_index));
            }
        }
    }
    distinct.remove(&0);
    if t == 0 || distinct.len() < t {
        return Err(ShareError::InsufficientShares {
            have: distinct.len(),
            need: t,
        });
    }
    let p = prime();
    let points: Vec<(BigUint, BigUint)> = distinct
        .into_iter()
        .take(t)
        .map(|(i, v)| (BigUint::from(i), from_bytes(v) % p))
        .collect();
    let mut secret = BigUint::default();
    for (j, (xj, yj)) in points.iter().enumerate() {
        let mut num = BigUint::from(1u32);
        let mut den = BigUint::from(1u32);
        for (m, (xm, _)) in points.iter().enumerate() {
            if m == j {
                continue;
            }
            // basis term xm / (xm - xj)
            num = num * xm % p;
            den = den * ((xm + p - xj) % p) % p;
        }
        secret = (secret + yj * num % p * inverse(&den)) % p;
    }
    Ok(to_bytes(&secret))
}
