//! Access-control conditions: AND/OR trees over ledger predicates.

use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::codec::{DecodeError, Decoder, Encoder};
use crate::contracts::ContractId;
use crate::wallet::Address;

/// Read-only ledger access needed to evaluate conditions.
pub trait ChainView {
    /// Current block time.
    fn now(&self) -> u64;
    fn group_owner(&self, group: &ContractId) -> Option<Address>;
    /// `None` when the group does not exist.
    fn check_access(&self, group: &ContractId, user: &Address, at: u64) -> Option<bool>;
    fn is_registered(&self, address: &Address) -> bool;
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum AccessControlCondition {
    GroupMember { group: ContractId },
    TimeWindow { from: u64, to: u64 },
    IsOwner { group: ContractId },
    And { all: Vec<AccessControlCondition> },
    Or { any: Vec<AccessControlCondition> },
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AccError {
    #[error("unknown group {0}")]
    UnknownGroup(ContractId),
    #[error("empty AND/OR node")]
    Empty,
    #[error("time window starts after it ends")]
    InvalidWindow,
    #[error("malformed condition encoding: {0}")]
    Decode(#[from] DecodeError),
}

const TAG_GROUP_MEMBER: u8 = 1;
const TAG_TIME_WINDOW: u8 = 2;
const TAG_IS_OWNER: u8 = 3;
const TAG_AND: u8 = 4;
const TAG_OR: u8 = 5;
const MAX_DEPTH: usize = 64;

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct AccDigest(pub [u8; 32]);

impl fmt::Display for AccDigest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&hex::encode(self.0))
    }
}

impl fmt::Debug for AccDigest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "AccDigest({self})")
    }
}

impl Serialize for AccDigest {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for AccDigest {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = hex::decode(String::deserialize(d)?).map_err(serde::de::Error::custom)?;
        Ok(AccDigest(
            raw.try_into()
                .map_err(|_| serde::de::Error::custom("expected 32 bytes"))?,
        ))
    }
}

impl AccessControlCondition {
    pub fn and(all: Vec<Self>) -> Self {
        Self::And { all }
    }

    pub fn or(any: Vec<Self>) -> Self {
        Self::Or { any }
    }

    /// Structural checks that do not need the ledger.
    pub fn validate(&self) -> Result<(), AccError> {
        match self {
            Self::TimeWindow { from, to } if from > to => Err(AccError::InvalidWindow),
            Self::And { all: c } | Self::Or { any: c } => {
                if c.is_empty() {
                    return Err(AccError::Empty);
                }
                c.iter().try_for_each(Self::validate)
            }
            _ => Ok(()),
        }
    }

    pub fn groups(&self) -> Vec<ContractId> {
        let mut out = Vec::new();
        self.collect_groups(&mut out);
        out.sort();
        out.dedup();
        out
    }

    fn collect_groups(&self, out: &mut Vec<ContractId>) {
        match self {
            Self::GroupMember { group } | Self::IsOwner { group } => out.push(*group),
            Self::TimeWindow { .. } => {}
            Self::And { all: c } | Self::Or { any: c } => {
                c.iter().for_each(|x| x.collect_groups(out))
            }
        }
    }

    /// Depth-first, one tag byte per node, leaf fields in name order.
    pub fn canonical_bytes(&self) -> Vec<u8> {
        let mut enc = Encoder::new();
        self.encode_into(&mut enc);
        enc.finish()
    }

    fn encode_into(&self, enc: &mut Encoder) {
        match self {
            Self::GroupMember { group } => {
                enc.u8(TAG_GROUP_MEMBER);
                enc.fixed(&group.0);
            }
            Self::TimeWindow { from, to } => {
                enc.u8(TAG_TIME_WINDOW);
                enc.u64(*from);
                enc.u64(*to);
            }
            Self::IsOwner { group } => {
                enc.u8(TAG_IS_OWNER);
                enc.fixed(&group.0);
            }
            Self::And { all: c } | Self::Or { any: c } => {
                enc.u8(if matches!(self, Self::And { .. }) { TAG_AND } else { TAG_OR });
                enc.u32(c.len() as u32);
                c.iter().for_each(|x| x.encode_into(enc));
            }
        }
    }

    pub fn from_canonical_bytes(bytes: &[u8]) -> Result<Self, AccError> {
        let mut dec = Decoder::new(bytes);
        let acc = Self::decode_from(&mut dec, 0)?;
        dec.finish()?;
        Ok(acc)
    }

    fn decode_from(dec: &mut Decoder, depth: usize) -> Result<Self, AccError> {
        if depth > MAX_DEPTH {
            return Err(DecodeError::Invalid("condition nested too deeply").into());
        }
        let address = |dec: &mut Decoder| -> Result<Address, AccError> {
            Ok(Address(dec.fixed::<20>()?))
        };
        Ok(match dec.u8()? {
            TAG_GROUP_MEMBER => Self::GroupMember { group: address(dec)? },
            TAG_TIME_WINDOW => Self::TimeWindow {
                from: dec.u64()?,
                to: dec.u64()?,
            },
            TAG_IS_OWNER => Self::IsOwner { group: address(dec)? },
            tag @ (TAG_AND | TAG_OR) => {
                let count = dec.u32()? as usize;
                if count > dec.remaining() {
                    return Err(DecodeError::Invalid("child count exceeds input").into());
                }
                let children = (0..count)
                    .map(|_| Self::decode_from(dec, depth + 1))
                    .collect::<Result<Vec<_>, _>>()?;
                if tag == TAG_AND {
                    Self::And { all: children }
                } else {
                    Self::Or { any: children }
                }
            }
            _ => return Err(DecodeError::Invalid("unknown condition tag").into()),
        })
    }

    pub fn digest(&self) -> AccDigest {
        AccDigest(Sha256::digest(self.canonical_bytes()).into())
    }
}

impl fmt::Display for AccessControlCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |f: &mut fmt::Formatter<'_>, c: &[Self], op: &str| {
            f.write_str("(")?;
            for (i, x) in c.iter().enumerate() {
                if i > 0 {
                    write!(f, " {op} ")?;
                }
                write!(f, "{x}")?;
            }
            f.write_str(")")
        };
        match self {
            Self::GroupMember { group } => write!(f, "member({group})"),
            Self::TimeWindow { from, to } => write!(f, "window({from}..={to})"),
            Self::IsOwner { group } => write!(f, "owner({group})"),
            Self::And { all } => join(f, all, "AND"),
            Self::Or { any } => join(f, any, "OR"),
        }
    }
}

/// Evaluates the whole tree. Every referenced group is resolved first, so an
/// unknown group is reported even where short-circuiting would skip it.
pub fn evaluate_acc(
    acc: &AccessControlCondition,
    subject: &Address,
    at: u64,
    chain: &dyn ChainView,
) -> Result<bool, AccError> {
    acc.validate()?;
    for g in acc.groups() {
        if chain.group_owner(&g).is_none() {
            return Err(AccError::UnknownGroup(g));
        }
    }
    Ok(eval(acc, subject, at, chain))
}

fn eval(acc: &AccessControlCondition, subject: &Address, at: u64, chain: &dyn ChainView) -> bool {
    use AccessControlCondition::*;
    match acc {
        GroupMember { group } => chain.check_access(group, subject, at).unwrap_or(false),
        TimeWindow { from, to } => *from <= at && at <= *to,
        IsOwner { group } => chain.group_owner(group) == Some(*subject),
        And { all } => all.iter().all(|c| eval(c, subject, at, chain)),
        Or { any } => any.iter().any(|c| eval(c, subject, at, chain)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    use AccessControlCondition as Acc;

    struct Fixed {
        owners: BTreeMap<ContractId, Address>,
        members: Vec<(ContractId, Address, u64, u64)>,
    }

    impl ChainView for Fixed {
        fn now(&self) -> u64 {
            0
        }

        fn group_owner(&self, group: &ContractId) -> Option<Address> {
            self.owners.get(group).copied()
        }

        fn check_access(&self, group: &ContractId, user: &Address, at: u64) -> Option<bool> {
            let owner = self.owners.get(group)?;
            Some(
                owner == user
                    || self
                        .members
                        .iter()
                        .any(|(g, u, f, t)| g == group && u == user && *f <= at && at <= *t),
            )
        }

        fn is_registered(&self, _: &Address) -> bool {
            true
        }
    }

    fn addr(b: u8) -> Address {
        Address([b; 20])
    }

    fn chain() -> Fixed {
        Fixed {
            owners: [(addr(0xa0), addr(1))].into_iter().collect(),
            members: vec![(addr(0xa0), addr(2), 100, 200)],
        }
    }

    #[test]
    fn leaves() {
        let c = chain();
        let g = addr(0xa0);
        let member = Acc::GroupMember { group: g };
        assert!(evaluate_acc(&member, &addr(1), 0, &c).unwrap());
        assert!(evaluate_acc(&member, &addr(2), 150, &c).unwrap());
        assert!(!evaluate_acc(&member, &addr(2), 201, &c).unwrap());
        assert!(!evaluate_acc(&Acc::IsOwner { group: g }, &addr(2), 150, &c).unwrap());
        let past = Acc::TimeWindow { from: 0, to: 10 };
        assert!(!evaluate_acc(&Acc::and(vec![member.clone(), past.clone()]), &addr(1), 50, &c).unwrap());
        assert!(evaluate_acc(&Acc::or(vec![past, member]), &addr(1), 50, &c).unwrap());
    }

    #[test]
    fn unknown_group_even_behind_short_circuit() {
        let c = chain();
        let acc = Acc::or(vec![
            Acc::TimeWindow { from: 0, to: u64::MAX },
            Acc::GroupMember { group: addr(0x77) },
        ]);
        assert_eq!(
            evaluate_acc(&acc, &addr(1), 5, &c),
            Err(AccError::UnknownGroup(addr(0x77)))
        );
    }

    #[test]
    fn empty_nodes_rejected() {
        assert_eq!(Acc::and(vec![]).validate(), Err(AccError::Empty));
        assert_eq!(
            Acc::or(vec![Acc::TimeWindow { from: 2, to: 1 }]).validate(),
            Err(AccError::InvalidWindow)
        );
    }

    #[test]
    fn canonical_roundtrip_and_digest() {
        let acc = Acc::and(vec![
            Acc::GroupMember { group: addr(9) },
            Acc::or(vec![
                Acc::TimeWindow { from: 1, to: 2 },
                Acc::IsOwner { group: addr(9) },
            ]),
        ]);
        let bytes = acc.canonical_bytes();
        assert_eq!(Acc::from_canonical_bytes(&bytes).unwrap(), acc);
        let mut longer = bytes.clone();
        longer.push(0);
        assert!(Acc::from_canonical_bytes(&longer).is_err());
        let swapped = Acc::and(vec![
            Acc::or(vec![
                Acc::TimeWindow { from: 1, to: 2 },
                Acc::IsOwner { group: addr(9) },
            ]),
            Acc::GroupMember { group: addr(9) },
        ]);
        assert_ne!(acc.digest(), swapped.digest());
    }

    #[test]
    fn json_shape() {
        let acc = Acc::TimeWindow { from: 1, to: 2 };
        let json = serde_json::to_value(&acc).unwrap();
        assert_eq!(json, serde_json::json!({"kind": "TimeWindow", "from": 1, "to": 2}));
    }
}
