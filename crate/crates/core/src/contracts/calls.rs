use crate::codec::{DecodeError, Decoder, Encoder};
use crate::wallet::Address;

use super::{ContractDetails, ContractKind, FileInput, UserAccess, UserProfile};

/// Constructor arguments for a direct deployment.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Constructor {
    UserMetadataFactory,
    PolicyManager { user_factory: Address },
    GroupContract(ContractDetails),
    UserMetadata(UserProfile),
}

/// A state-changing contract function with its arguments.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Call {
    CreateUserContract(UserProfile),
    CreateGroupContract(ContractDetails),
    AssociateUsersToGroup(Vec<UserAccess>),
    AddFilesToGroup(Vec<FileInput>),
    SetUserAccess(UserAccess),
}

fn put_address(enc: &mut Encoder, a: &Address) {
    enc.fixed(a.as_bytes());
}

fn get_address(dec: &mut Decoder<'_>) -> Result<Address, DecodeError> {
    Ok(Address(dec.fixed::<20>()?))
}

fn put_profile(enc: &mut Encoder, p: &UserProfile) {
    put_address(enc, &p.public_address);
    enc.str(&p.username).str(&p.organization).str(&p.country);
}

fn get_profile(dec: &mut Decoder<'_>) -> Result<UserProfile, DecodeError> {
    Ok(UserProfile {
        public_address: get_address(dec)?,
        username: dec.string()?,
        organization: dec.string()?,
        country: dec.string()?,
    })
}

fn put_details(enc: &mut Encoder, d: &ContractDetails) {
    enc.str(&d.group_name);
    put_address(enc, &d.group_owner_address);
    enc.str(&d.permissions);
    enc.list(&d.organizations, |e, s| {
        e.str(s);
    });
    enc.list(&d.countries, |e, s| {
        e.str(s);
    });
}

fn get_details(dec: &mut Decoder<'_>) -> Result<ContractDetails, DecodeError> {
    Ok(ContractDetails {
        group_name: dec.string()?,
        group_owner_address: get_address(dec)?,
        permissions: dec.string()?,
        organizations: dec.list(|d| d.string())?,
        countries: dec.list(|d| d.string())?,
    })
}

fn put_access(enc: &mut Encoder, a: &UserAccess) {
    put_address(enc, &a.eoa_address);
    enc.u64(a.access_from).u64(a.access_to);
}

fn get_access(dec: &mut Decoder<'_>) -> Result<UserAccess, DecodeError> {
    Ok(UserAccess {
        eoa_address: get_address(dec)?,
        access_from: dec.u64()?,
        access_to: dec.u64()?,
    })
}

impl Constructor {
    pub fn kind(&self) -> ContractKind {
        match self {
            Constructor::UserMetadataFactory => ContractKind::UserMetadataFactory,
            Constructor::PolicyManager { .. } => ContractKind::PolicyManager,
            Constructor::GroupContract(_) => ContractKind::GroupContract,
            Constructor::UserMetadata(_) => ContractKind::UserMetadata,
        }
    }

    /// Deployment payload: the kind's code manifest followed by the
    /// encoded constructor arguments.
    pub fn encode(&self) -> Vec<u8> {
        let mut args = Encoder::new();
        match self {
            Constructor::UserMetadataFactory => {}
            Constructor::PolicyManager { user_factory } => put_address(&mut args, user_factory),
            Constructor::GroupContract(d) => put_details(&mut args, d),
            Constructor::UserMetadata(p) => put_profile(&mut args, p),
        }
        let mut enc = Encoder::new();
        enc.bytes(super::manifest(self.kind()).as_bytes())
            .bytes(&args.finish());
        enc.finish()
    }

    /// Returns the constructor and the code bytes it was shipped with.
    pub fn decode(kind: ContractKind, payload: &[u8]) -> Result<(Self, Vec<u8>), DecodeError> {
        let mut outer = Decoder::new(payload);
        let code = outer.bytes()?.to_vec();
        let args = outer.bytes()?;
        outer.finish()?;
        let mut dec = Decoder::new(args);
        let ctor = match kind {
            ContractKind::UserMetadataFactory => Constructor::UserMetadataFactory,
            ContractKind::PolicyManager => Constructor::PolicyManager {
                user_factory: get_address(&mut dec)?,
            },
            ContractKind::GroupContract => Constructor::GroupContract(get_details(&mut dec)?),
            ContractKind::UserMetadata => Constructor::UserMetadata(get_profile(&mut dec)?),
        };
        dec.finish()?;
        Ok((ctor, code))
    }
}

impl Call {
    pub fn function_name(&self) -> &'static str {
        match self {
            Call::CreateUserContract(_) => "createUserContract",
            Call::CreateGroupContract(_) => "createGroupContract",
            Call::AssociateUsersToGroup(_) => "associateUsersToGroup",
            Call::AddFilesToGroup(_) => "addFilesToGroup",
            Call::SetUserAccess(_) => "setUserAccess",
        }
    }

    pub fn target_kind(&self) -> ContractKind {
        match self {
            Call::CreateUserContract(_) => ContractKind::UserMetadataFactory,
            Call::CreateGroupContract(_) => ContractKind::PolicyManager,
            Call::AssociateUsersToGroup(_) | Call::AddFilesToGroup(_) | Call::SetUserAccess(_) => {
                ContractKind::GroupContract
            }
        }
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut enc = Encoder::new();
        match self {
            Call::CreateUserContract(p) => put_profile(&mut enc, p),
            Call::CreateGroupContract(d) => put_details(&mut enc, d),
            Call::AssociateUsersToGroup(users) => {
                enc.list(users, put_access);
            }
            Call::AddFilesToGroup(files) => {
                enc.list(files, |e, f| {
                    e.str(&f.ipfs_hash).str(&f.file_name);
                });
            }
            Call::SetUserAccess(a) => put_access(&mut enc, a),
        }
        enc.finish()
    }

    pub fn decode(function: &str, payload: &[u8]) -> Result<Self, DecodeError> {
        let mut dec = Decoder::new(payload);
        let call = match function {
            "createUserContract" => Call::CreateUserContract(get_profile(&mut dec)?),
            "createGroupContract" => Call::CreateGroupContract(get_details(&mut dec)?),
            "associateUsersToGroup" => Call::AssociateUsersToGroup(dec.list(get_access)?),
            "addFilesToGroup" => Call::AddFilesToGroup(dec.list(|d| {
                Ok(FileInput {
                    ipfs_hash: d.string()?,
                    file_name: d.string()?,
                })
            })?),
            "setUserAccess" => Call::SetUserAccess(get_access(&mut dec)?),
            _ => return Err(DecodeError::Invalid("unknown function")),
        };
        dec.finish()?;
        Ok(call)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decode_inverts_encode() {
        let a = Address([1; 20]);
        let calls = vec![
            Call::CreateUserContract(UserProfile {
                public_address: a,
                username: "alice".into(),
                organization: "UvA".into(),
                country: "Netherlands".into(),
            }),
            Call::CreateGroupContract(ContractDetails {
                group_name: "DataSharing".into(),
                group_owner_address: a,
                permissions: "Full Access".into(),
                organizations: vec!["UvA".into(), "UiS".into()],
                countries: vec![],
            }),
            Call::AssociateUsersToGroup(vec![UserAccess {
                eoa_address: a,
                access_from: 1,
                access_to: 2,
            }]),
            Call::AddFilesToGroup(vec![FileInput {
                ipfs_hash: "dvre1-00".into(),
                file_name: "#binary#mask.png".into(),
            }]),
            Call::SetUserAccess(UserAccess {
                eoa_address: a,
                access_from: 0,
                access_to: super::super::UNLIMITED,
            }),
        ];
        for call in calls {
            let bytes = call.encode();
            assert_eq!(Call::decode(call.function_name(), &bytes).unwrap(), call);
        }
    }

    #[test]
    fn constructor_payload_carries_manifest() {
        let ctor = Constructor::PolicyManager {
            user_factory: Address([9; 20]),
        };
        let (back, code) = Constructor::decode(ContractKind::PolicyManager, &ctor.encode()).unwrap();
        assert_eq!(back, ctor);
        assert_eq!(code, super::super::manifest(ContractKind::PolicyManager).as_bytes());
    }
}
