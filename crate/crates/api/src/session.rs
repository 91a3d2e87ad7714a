//! Login challenges and bearer sessions.
//!
//! A session is bound to the wallet signature that opened it. Key-network
//! nodes accept that signature as a credential for as long as the session
//! is live, so the browser signs once per login rather than once per
//! download.

use std::collections::HashMap;
use std::sync::Mutex;
use std::time::{SystemTime, UNIX_EPOCH};

use dvre_core::keynet::SessionRegistry;
use dvre_core::wallet::{login_challenge, verify_auth, Address, AuthSig};
use rand::RngCore;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const CHALLENGE_TTL_SECS: u64 = 300;

pub fn unix_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Session {
    pub token: String,
    pub address: Address,
    pub expires_at: u64,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SessionError {
    #[error("challenge was not issued by this server or has expired")]
    UnknownChallenge,
    #[error("challenge has already been used")]
    ChallengeReused,
    #[error("signature does not verify")]
    BadSignature,
    #[error("missing or malformed bearer token")]
    MissingToken,
    #[error("session is unknown or expired")]
    Expired,
}

#[derive(Debug)]
enum Challenge {
    Issued { expires_at: u64 },
    Used,
}

#[derive(Debug)]
struct Live {
    session: Session,
    login: AuthSig,
}

#[derive(Debug)]
pub struct Sessions {
    ttl: u64,
    challenges: Mutex<HashMap<String, Challenge>>,
    live: Mutex<HashMap<String, Live>>,
}

impl Sessions {
    pub fn new(ttl_secs: u64) -> Self {
        Self {
            ttl: ttl_secs,
            challenges: Mutex::new(HashMap::new()),
            live: Mutex::new(HashMap::new()),
        }
    }

    /// Issues a fresh single-use challenge and its expiry.
    pub fn issue_challenge(&self) -> (String, u64) {
        let mut nonce = [0u8; 16];
        rand::rngs::OsRng.fill_bytes(&mut nonce);
        let challenge = login_challenge(&nonce);
        let expires_at = unix_now() + CHALLENGE_TTL_SECS;
        let mut map = self.challenges.lock().expect("challenge table poisoned");
        let now = unix_now();
        map.retain(|_, c| !matches!(c, Challenge::Issued { expires_at } if *expires_at < now));
        map.insert(challenge.clone(), Challenge::Issued { expires_at });
        (challenge, expires_at)
    }

    /// Consumes the challenge named in `sig` and opens a session for its
    /// signer. A bad signature leaves the challenge usable.
    pub fn login(&self, sig: &AuthSig) -> Result<Session, SessionError> {
        let mut challenges = self.challenges.lock().expect("challenge table poisoned");
        match challenges.get(&sig.signed_message) {
            None => return Err(SessionError::UnknownChallenge),
            Some(Challenge::Used) => return Err(SessionError::ChallengeReused),
            Some(Challenge::Issued { expires_at }) if *expires_at < unix_now() => {
                return Err(SessionError::UnknownChallenge)
            }
            Some(Challenge::Issued { .. }) => {}
        }
        let address =
            verify_auth(sig, &sig.signed_message).map_err(|_| SessionError::BadSignature)?;
        challenges.insert(sig.signed_message.clone(), Challenge::Used);
        drop(challenges);

        let mut token = [0u8; 32];
        rand::rngs::OsRng.fill_bytes(&mut token);
        let session = Session {
            token: hex::encode(token),
            address,
            expires_at: unix_now() + self.ttl,
        };
        self.live.lock().expect("session table poisoned").insert(
            session.token.clone(),
            Live {
                session: session.clone(),
                login: sig.clone(),
            },
        );
        Ok(session)
    }

    /// The session and its login signature, if live.
    pub fn resolve(&self, token: &str) -> Result<(Session, AuthSig), SessionError> {
        let live = self.live.lock().expect("session table poisoned");
        match live.get(token) {
            Some(l) if l.session.expires_at > unix_now() => Ok((l.session.clone(), l.login.clone())),
            _ => Err(SessionError::Expired),
        }
    }

    /// Ends a session immediately.
    pub fn expire(&self, token: &str) {
        if let Some(l) = self.live.lock().expect("session table poisoned").get_mut(token) {
            l.session.expires_at = 0;
        }
    }
}

impl SessionRegistry for Sessions {
    fn is_live(&self, sig: &AuthSig) -> bool {
        let now = unix_now();
        self.live
            .lock()
            .expect("session table poisoned")
            .values()
            .any(|l| l.login == *sig && l.session.expires_at > now)
    }
}
