use std::collections::BTreeMap;

use crate::ledger::{Event, StorageWrites};
use crate::wallet::{keccak256, Address};

use super::calls::{Call, Constructor};
use super::*;

/// Result of executing one transaction against the contract set.
#[derive(Debug, Default)]
pub struct ExecOutcome {
    /// Contracts touched or created; committed only on success.
    pub dirty: BTreeMap<ContractId, ContractState>,
    pub events: Vec<Event>,
    pub writes: StorageWrites,
    pub created: Option<ContractId>,
}

/// Execution flags that change contract semantics.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExecFlags {
    /// Drop the membership guard on `addFilesToGroup`, letting any caller
    /// add files.
    pub paper_faithful_add_files: bool,
}

struct Ctx<'a> {
    base: &'a BTreeMap<ContractId, ContractState>,
    out: ExecOutcome,
    sender: Address,
    block_time: u64,
    flags: ExecFlags,
}

/// Storage slots occupied by a string: short strings share their length slot.
fn string_slots(s: &str) -> u64 {
    if s.len() <= 31 {
        1
    } else {
        1 + (s.len() as u64).div_ceil(32)
    }
}

fn code_slots(code_len: usize) -> u64 {
    (code_len as u64).div_ceil(32)
}

fn profile_slots(p: &UserProfile) -> u64 {
    // publicAddress + three strings + parent pointer
    1 + string_slots(&p.username) + string_slots(&p.organization) + string_slots(&p.country) + 1
}

fn details_slots(d: &ContractDetails) -> u64 {
    let list = |xs: &[String]| 1 + xs.iter().map(|s| string_slots(s)).sum::<u64>();
    string_slots(&d.group_name)
        + 1
        + string_slots(&d.permissions)
        + list(&d.organizations)
        + list(&d.countries)
        + 1 // parent pointer
}

fn child_address(creator: &Address, counter: u64) -> ContractId {
    let mut buf = Vec::with_capacity(28);
    buf.extend_from_slice(creator.as_bytes());
    buf.extend_from_slice(&counter.to_be_bytes());
    let hash = keccak256(&buf);
    let mut out = [0u8; 20];
    out.copy_from_slice(&hash[12..]);
    Address(out)
}

/// Address of a contract deployed directly by an account at `nonce`.
pub fn deploy_address(sender: &Address, nonce: u64) -> ContractId {
    child_address(sender, nonce)
}

impl<'a> Ctx<'a> {
    fn get(&self, id: &ContractId) -> Option<&ContractState> {
        self.out.dirty.get(id).or_else(|| self.base.get(id))
    }

    fn get_mut(&mut self, id: &ContractId) -> Option<&mut ContractState> {
        if !self.out.dirty.contains_key(id) {
            let state = self.base.get(id)?.clone();
            self.out.dirty.insert(*id, state);
        }
        self.out.dirty.get_mut(id)
    }

    fn emit(&mut self, contract: ContractId, message: &str) {
        self.out.events.push(Event {
            contract,
            name: SUCCESS_EVENT.to_string(),
            message: message.to_string(),
        });
    }

    fn create(&mut self, id: ContractId, state: ContractState) {
        let kind = state.kind();
        self.out.writes.new += code_slots(manifest(kind).len());
        self.out.dirty.insert(id, state);
        self.out.created = Some(id);
    }

    fn factory(&self, id: &ContractId) -> Result<&FactoryState, ContractError> {
        self.get(id)
            .and_then(ContractState::as_factory)
            .ok_or_else(|| ContractError::BadReference(id.to_string()))
    }

    fn group_mut(&mut self, id: &ContractId) -> Result<&mut GroupState, ContractError> {
        match self.get_mut(id) {
            Some(ContractState::GroupContract(g)) => Ok(g),
            _ => Err(ContractError::BadReference(id.to_string())),
        }
    }

    fn group(&self, id: &ContractId) -> Result<&GroupState, ContractError> {
        self.get(id)
            .and_then(ContractState::as_group)
            .ok_or_else(|| ContractError::BadReference(id.to_string()))
    }
}

fn validate_profile(p: &UserProfile) -> Result<(), ContractError> {
    if p.username.is_empty() {
        return Err(ContractError::EmptyField("username".into()));
    }
    Ok(())
}

fn validate_details(d: &ContractDetails) -> Result<(), ContractError> {
    if d.group_name.is_empty() {
        return Err(ContractError::EmptyField("group_name".into()));
    }
    Ok(())
}

fn validate_window(a: &UserAccess) -> Result<(), ContractError> {
    if a.access_from > a.access_to {
        return Err(ContractError::InvalidWindow);
    }
    Ok(())
}

/// Runs a direct deployment. `address` is precomputed by the ledger.
pub fn execute_deploy(
    base: &BTreeMap<ContractId, ContractState>,
    sender: Address,
    address: ContractId,
    kind: ContractKind,
    payload: &[u8],
    block_time: u64,
) -> Result<ExecOutcome, ContractError> {
    let (ctor, code) =
        Constructor::decode(kind, payload).map_err(|e| ContractError::BadPayload(e.to_string()))?;
    if code != manifest(kind).as_bytes() {
        return Err(ContractError::CodeMismatch(kind.name().to_string()));
    }
    let mut ctx = Ctx {
        base,
        out: ExecOutcome::default(),
        sender,
        block_time,
        flags: ExecFlags::default(),
    };
    let state = match ctor {
        Constructor::UserMetadataFactory => {
            ContractState::UserMetadataFactory(FactoryState::default())
        }
        Constructor::PolicyManager { user_factory } => {
            ctx.factory(&user_factory)?;
            ctx.out.writes.new += 1;
            ContractState::PolicyManager(PolicyManagerState {
                user_factory,
                groups: Vec::new(),
                children: 0,
            })
        }
        Constructor::GroupContract(details) => {
            validate_details(&details)?;
            ctx.out.writes.new += details_slots(&details);
            ContractState::GroupContract(GroupState {
                contract_details: details,
                user_access: BTreeMap::new(),
                shared_ipfs_hashes: Default::default(),
                added_file_details: Vec::new(),
                parent: None,
            })
        }
        Constructor::UserMetadata(profile) => {
            validate_profile(&profile)?;
            ctx.out.writes.new += profile_slots(&profile);
            ContractState::UserMetadata(UserMetadataState {
                profile,
                parent: None,
            })
        }
    };
    ctx.create(address, state);
    Ok(ctx.out)
}

/// Runs a function call on `target`. The caller has already checked that
/// `target` exists and that `call` belongs to its kind.
pub fn execute_call(
    base: &BTreeMap<ContractId, ContractState>,
    sender: Address,
    target: ContractId,
    call: Call,
    block_time: u64,
    flags: ExecFlags,
) -> Result<ExecOutcome, ContractError> {
    let mut ctx = Ctx {
        base,
        out: ExecOutcome::default(),
        sender,
        block_time,
        flags,
    };
    match call {
        Call::CreateUserContract(profile) => create_user(&mut ctx, target, profile)?,
        Call::CreateGroupContract(details) => create_group(&mut ctx, target, details)?,
        Call::AssociateUsersToGroup(users) => associate_users(&mut ctx, target, users)?,
        Call::AddFilesToGroup(files) => add_files(&mut ctx, target, files)?,
        Call::SetUserAccess(access) => {
            only_group_owner(&ctx, &target)?;
            validate_window(&access)?;
            set_user_access(&mut ctx, &target, access)?;
            ctx.emit(target, MSG_USER_ACCESS_SET);
        }
    }
    Ok(ctx.out)
}

fn create_user(ctx: &mut Ctx<'_>, factory: ContractId, profile: UserProfile) -> Result<(), ContractError> {
    if ctx.sender != profile.public_address {
        return Err(ContractError::AddressMismatch);
    }
    if ctx.factory(&factory)?.users.contains_key(&profile.public_address) {
        return Err(ContractError::AlreadyRegistered);
    }
    validate_profile(&profile)?;

    let ContractState::UserMetadataFactory(f) = ctx.get_mut(&factory).unwrap() else {
        unreachable!()
    };
    let child = child_address(&factory, f.children);
    f.children += 1;
    f.users.insert(profile.public_address, child);
    // mapping entry, array element, array length, child counter
    ctx.out.writes.new += 2;
    ctx.out.writes.update += 2;

    ctx.out.writes.new += profile_slots(&profile);
    ctx.create(
        child,
        ContractState::UserMetadata(UserMetadataState {
            profile,
            parent: Some(factory),
        }),
    );
    ctx.emit(factory, MSG_USER_CREATED);
    Ok(())
}

fn create_group(ctx: &mut Ctx<'_>, manager: ContractId, details: ContractDetails) -> Result<(), ContractError> {
    let user_factory = match ctx.get(&manager) {
        Some(ContractState::PolicyManager(pm)) => pm.user_factory,
        _ => return Err(ContractError::BadReference(manager.to_string())),
    };
    if !ctx.factory(&user_factory)?.users.contains_key(&ctx.sender) {
        return Err(ContractError::NotRegistered);
    }
    if ctx.sender != details.group_owner_address {
        return Err(ContractError::OwnerMismatch);
    }
    validate_details(&details)?;

    let ContractState::PolicyManager(pm) = ctx.get_mut(&manager).unwrap() else {
        unreachable!()
    };
    let child = child_address(&manager, pm.children);
    pm.children += 1;
    pm.groups.push(child);
    // groups element, owner-index element; groups length, owner-index length, counter
    ctx.out.writes.new += 2;
    ctx.out.writes.update += 3;

    ctx.out.writes.new += details_slots(&details);
    ctx.create(
        child,
        ContractState::GroupContract(GroupState {
            contract_details: details,
            user_access: BTreeMap::new(),
            shared_ipfs_hashes: Default::default(),
            added_file_details: Vec::new(),
            parent: Some(manager),
        }),
    );
    ctx.emit(manager, MSG_GROUP_CREATED);
    Ok(())
}

fn only_group_owner(ctx: &Ctx<'_>, group: &ContractId) -> Result<(), ContractError> {
    if ctx.group(group)?.owner() != ctx.sender {
        return Err(ContractError::OnlyGroupOwner);
    }
    Ok(())
}

fn set_user_access(ctx: &mut Ctx<'_>, group: &ContractId, access: UserAccess) -> Result<(), ContractError> {
    let g = ctx.group_mut(group)?;
    let existed = g.user_access.insert(access.eoa_address, access).is_some();
    if existed {
        ctx.out.writes.update += 2;
    } else {
        // from, to, exists flag, members element; members length
        ctx.out.writes.new += 4;
        ctx.out.writes.update += 1;
    }
    Ok(())
}

fn associate_users(ctx: &mut Ctx<'_>, group: ContractId, users: Vec<UserAccess>) -> Result<(), ContractError> {
    only_group_owner(ctx, &group)?;
    for user in &users {
        validate_window(user)?;
    }
    for user in users {
        set_user_access(ctx, &group, user)?;
    }
    ctx.emit(group, MSG_USERS_ADDED);
    Ok(())
}

fn add_files(ctx: &mut Ctx<'_>, group: ContractId, files: Vec<FileInput>) -> Result<(), ContractError> {
    let sender = ctx.sender;
    let now = ctx.block_time;
    let strict = !ctx.flags.paper_faithful_add_files;
    {
        let g = ctx.group(&group)?;
        if strict && !g.check_access(&sender, now) {
            return Err(ContractError::NotMember);
        }
        let mut seen = std::collections::BTreeSet::new();
        for f in &files {
            if f.ipfs_hash.is_empty() {
                return Err(ContractError::EmptyField("ipfs_hash".into()));
            }
            if g.shared_ipfs_hashes.contains(&f.ipfs_hash) || !seen.insert(f.ipfs_hash.as_str()) {
                return Err(ContractError::DuplicateHash);
            }
        }
    }
    for f in files {
        let slots = 1 + string_slots(&f.ipfs_hash) + string_slots(&f.file_name) + 2;
        let g = ctx.group_mut(&group)?;
        g.shared_ipfs_hashes.insert(f.ipfs_hash.clone());
        g.added_file_details.push(FileDetails {
            ipfs_hash: f.ipfs_hash,
            file_name: f.file_name,
            added_by: sender,
            added_at: now,
        });
        // hash flag + record fields new; array length update
        ctx.out.writes.new += slots;
        ctx.out.writes.update += 1;
        ctx.emit(group, MSG_FILES_SHARED);
    }
    Ok(())
}
