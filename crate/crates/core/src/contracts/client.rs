use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ledger::{Ledger, LedgerError, Receipt, Transaction};
use crate::wallet::Address;

use super::*;

#[derive(Debug, Error)]
pub enum CallError {
    #[error(transparent)]
    Ledger(#[from] LedgerError),
    #[error("{reason}")]
    Reverted {
        reason: ContractError,
        receipt: Box<Receipt>,
    },
    #[error("unknown group {0}")]
    UnknownGroup(ContractId),
    #[error("address {0} is not registered")]
    NotRegistered(Address),
    #[error("access denied for {0}")]
    AccessDenied(Address),
}

impl CallError {
    pub fn revert_reason(&self) -> Option<&ContractError> {
        match self {
            CallError::Reverted { reason, .. } => Some(reason),
            _ => None,
        }
    }
}

/// Addresses of the two root contracts, plus typed wrappers that turn
/// contract operations into ledger transactions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Deployment {
    pub user_factory: ContractId,
    pub policy_manager: ContractId,
}

fn submit(ledger: &mut Ledger, tx: Transaction) -> Result<Receipt, CallError> {
    let receipt = ledger.submit_tx(tx, None)?;
    match receipt.revert_reason() {
        Some(reason) => Err(CallError::Reverted {
            reason: reason.clone(),
            receipt: Box::new(receipt),
        }),
        None => Ok(receipt),
    }
}

fn call(ledger: &mut Ledger, caller: Address, target: ContractId, c: Call) -> Result<Receipt, CallError> {
    let nonce = ledger.nonce(&caller);
    submit(ledger, Transaction::call(caller, target, &c, nonce))
}

impl Deployment {
    /// Deploys `UserMetadataFactory` then `PolicyManager` from `operator`.
    pub fn bootstrap(ledger: &mut Ledger, operator: Address) -> Result<Self, CallError> {
        let nonce = ledger.nonce(&operator);
        let r = submit(
            ledger,
            Transaction::deploy(operator, &Constructor::UserMetadataFactory, nonce),
        )?;
        let user_factory = r.contract_address.expect("deploy creates a contract");
        let r = submit(
            ledger,
            Transaction::deploy(operator, &Constructor::PolicyManager { user_factory }, nonce + 1),
        )?;
        Ok(Self {
            user_factory,
            policy_manager: r.contract_address.expect("deploy creates a contract"),
        })
    }

    /// `createUserContract`: returns the new `UserMetadata` instance.
    pub fn register_user(
        &self,
        ledger: &mut Ledger,
        caller: Address,
        profile: UserProfile,
    ) -> Result<(ContractId, Receipt), CallError> {
        let r = call(ledger, caller, self.user_factory, Call::CreateUserContract(profile))?;
        Ok((r.contract_address.expect("child created"), r))
    }

    pub fn user_contract(&self, ledger: &Ledger, address: &Address) -> Option<ContractId> {
        ledger
            .contract(&self.user_factory)
            .and_then(ContractState::as_factory)
            .and_then(|f| f.users.get(address).copied())
    }

    pub fn is_registered(&self, ledger: &Ledger, address: &Address) -> bool {
        self.user_contract(ledger, address).is_some()
    }

    pub fn get_user(&self, ledger: &Ledger, address: &Address) -> Result<UserProfile, CallError> {
        self.user_contract(ledger, address)
            .and_then(|id| ledger.contract(&id))
            .and_then(ContractState::as_user)
            .map(|u| u.profile.clone())
            .ok_or(CallError::NotRegistered(*address))
    }

    /// `createGroupContract`: returns the new `GroupContract` instance.
    pub fn create_group(
        &self,
        ledger: &mut Ledger,
        caller: Address,
        details: ContractDetails,
    ) -> Result<(ContractId, Receipt), CallError> {
        let r = call(ledger, caller, self.policy_manager, Call::CreateGroupContract(details))?;
        Ok((r.contract_address.expect("child created"), r))
    }

    pub fn groups(&self, ledger: &Ledger) -> Vec<ContractId> {
        ledger
            .contract(&self.policy_manager)
            .and_then(ContractState::as_policy_manager)
            .map(|pm| pm.groups.clone())
            .unwrap_or_default()
    }

    pub fn group<'l>(&self, ledger: &'l Ledger, group: &ContractId) -> Result<&'l GroupState, CallError> {
        ledger
            .contract(group)
            .and_then(ContractState::as_group)
            .ok_or(CallError::UnknownGroup(*group))
    }

    pub fn associate_users_to_group(
        &self,
        ledger: &mut Ledger,
        group: ContractId,
        caller: Address,
        users: Vec<UserAccess>,
    ) -> Result<Receipt, CallError> {
        self.group(ledger, &group)?;
        call(ledger, caller, group, Call::AssociateUsersToGroup(users))
    }

    pub fn set_user_access(
        &self,
        ledger: &mut Ledger,
        group: ContractId,
        caller: Address,
        access: UserAccess,
    ) -> Result<Receipt, CallError> {
        self.group(ledger, &group)?;
        call(ledger, caller, group, Call::SetUserAccess(access))
    }

    pub fn add_files_to_group(
        &self,
        ledger: &mut Ledger,
        group: ContractId,
        caller: Address,
        files: Vec<FileInput>,
    ) -> Result<Receipt, CallError> {
        self.group(ledger, &group)?;
        call(ledger, caller, group, Call::AddFilesToGroup(files))
    }

    pub fn check_access(
        &self,
        ledger: &Ledger,
        group: &ContractId,
        user: &Address,
        at: u64,
    ) -> Result<bool, CallError> {
        Ok(self.group(ledger, group)?.check_access(user, at))
    }

    /// Files in insertion order, for a caller with access at the ledger's
    /// current time.
    pub fn list_group_files(
        &self,
        ledger: &Ledger,
        group: &ContractId,
        caller: &Address,
    ) -> Result<Vec<FileDetails>, CallError> {
        let g = self.group(ledger, group)?;
        if !g.check_access(caller, ledger.now()) {
            return Err(CallError::AccessDenied(*caller));
        }
        Ok(g.added_file_details.clone())
    }
}
