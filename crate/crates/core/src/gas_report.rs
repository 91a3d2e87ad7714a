//! Gas study: deploys every contract and calls every state-changing function
//! once on a fresh ledger, then tabulates gas per deployment and function.

use serde::{Deserialize, Serialize};

use crate::contracts::{
    Constructor, ContractDetails, ContractKind, Deployment, FileInput, UserAccess, UserProfile,
};
use crate::ledger::{Gas, GasMode, GasSchedule, Ledger, LedgerConfig, Receipt, Transaction};
use crate::wallet::{generate_wallet, Address};

/// 2024-03-27T00:00:00Z.
const STUDY_TIME: u64 = 1_711_497_600;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeployGas {
    pub contract: ContractKind,
    pub gas_used: Gas,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunctionGas {
    pub contract: ContractKind,
    pub function: String,
    pub gas_used: Gas,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GasChecks {
    /// PolicyManager > UserMetadataFactory > GroupContract > UserMetadata.
    pub deploy_ordering: bool,
    pub parents_exceed_children: bool,
    pub policy_manager_minus_factory: i64,
    pub group_minus_user_metadata: i64,
    pub other_functions_median: f64,
    pub create_group_ratio: f64,
    pub create_user_ratio: f64,
    /// Both create functions cost at least five times the median of the rest.
    pub create_functions_dominate: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GasReport {
    pub mode: GasMode,
    pub deployments: Vec<DeployGas>,
    pub functions: Vec<FunctionGas>,
    pub checks: GasChecks,
}

#[derive(Debug, thiserror::Error)]
#[error("gas study step {step} failed: {reason}")]
pub struct StudyError {
    pub step: &'static str,
    pub reason: String,
}

fn step<T, E: std::fmt::Display>(step: &'static str, r: Result<T, E>) -> Result<T, StudyError> {
    r.map_err(|e| StudyError {
        step,
        reason: e.to_string(),
    })
}

fn wallet_address(seed: u8) -> Address {
    let mut key = [0u8; 32];
    key[0] = 0x5e;
    key[31] = seed;
    generate_wallet(Some(key)).expect("valid scalar").address()
}

fn profile(address: Address, username: &str, organization: &str, country: &str) -> UserProfile {
    UserProfile {
        public_address: address,
        username: username.into(),
        organization: organization.into(),
        country: country.into(),
    }
}

pub fn sample_details(owner: Address) -> ContractDetails {
    ContractDetails {
        group_name: "DataSharing".into(),
        group_owner_address: owner,
        permissions: "Full Access".into(),
        organizations: vec!["UvA".into(), "UiS".into(), "UPV".into()],
        countries: vec!["Netherlands".into(), "Norway".into(), "Spain".into()],
    }
}

fn median(values: &mut [Gas]) -> f64 {
    values.sort_unstable();
    let n = values.len();
    if n == 0 {
        return 0.0;
    }
    if n % 2 == 1 {
        values[n / 2] as f64
    } else {
        (values[n / 2 - 1] as f64 + values[n / 2] as f64) / 2.0
    }
}

pub fn run_gas_study(schedule: GasSchedule) -> Result<GasReport, StudyError> {
    let mode = schedule.mode;
    let mut ledger = Ledger::new(LedgerConfig::manual(schedule, STUDY_TIME));
    let operator = wallet_address(1);
    let alice = wallet_address(2);
    let bob = wallet_address(3);
    let carol = wallet_address(4);

    let deploy = |ledger: &mut Ledger, ctor: Constructor| -> Result<Receipt, StudyError> {
        let nonce = ledger.nonce(&operator);
        let r = step("deploy", ledger.submit_tx(Transaction::deploy(operator, &ctor, nonce), None))?;
        if !r.is_success() {
            return Err(StudyError {
                step: "deploy",
                reason: format!("{:?}", r.status),
            });
        }
        Ok(r)
    };

    let factory = deploy(&mut ledger, Constructor::UserMetadataFactory)?;
    let user_factory = factory.contract_address.unwrap();
    let manager = deploy(&mut ledger, Constructor::PolicyManager { user_factory })?;
    let group = deploy(&mut ledger, Constructor::GroupContract(sample_details(operator)))?;
    let user = deploy(
        &mut ledger,
        Constructor::UserMetadata(profile(operator, "operator", "UvA", "Netherlands")),
    )?;
    let deployments = vec![
        DeployGas {
            contract: ContractKind::PolicyManager,
            gas_used: manager.gas_used,
        },
        DeployGas {
            contract: ContractKind::UserMetadataFactory,
            gas_used: factory.gas_used,
        },
        DeployGas {
            contract: ContractKind::GroupContract,
            gas_used: group.gas_used,
        },
        DeployGas {
            contract: ContractKind::UserMetadata,
            gas_used: user.gas_used,
        },
    ];

    let dep = Deployment {
        user_factory,
        policy_manager: manager.contract_address.unwrap(),
    };
    let (_, create_user) = step(
        "createUserContract",
        dep.register_user(&mut ledger, alice, profile(alice, "alice", "UvA", "Netherlands")),
    )?;
    step(
        "createUserContract",
        dep.register_user(&mut ledger, bob, profile(bob, "bob", "UiS", "Norway")),
    )?;
    let (group_id, create_group) = step(
        "createGroupContract",
        dep.create_group(&mut ledger, alice, sample_details(alice)),
    )?;
    let window = |who| UserAccess {
        eoa_address: who,
        access_from: STUDY_TIME,
        access_to: STUDY_TIME + 3 * 86_400 - 1,
    };
    let associate = step(
        "associateUsersToGroup",
        dep.associate_users_to_group(&mut ledger, group_id, alice, vec![window(bob)]),
    )?;
    let set_access = step(
        "setUserAccess",
        dep.set_user_access(&mut ledger, group_id, alice, window(carol)),
    )?;
    let add_files = step(
        "addFilesToGroup",
        dep.add_files_to_group(
            &mut ledger,
            group_id,
            bob,
            vec![FileInput {
                ipfs_hash: format!("dvre1-{}", "ab".repeat(32)),
                file_name: "#binary#mask.png".into(),
            }],
        ),
    )?;

    let fg = |contract: ContractKind, c: &str, r: &Receipt| FunctionGas {
        contract,
        function: c.to_string(),
        gas_used: r.gas_used,
    };
    let functions = vec![
        fg(ContractKind::PolicyManager, "createGroupContract", &create_group),
        fg(ContractKind::UserMetadataFactory, "createUserContract", &create_user),
        fg(ContractKind::GroupContract, "associateUsersToGroup", &associate),
        fg(ContractKind::GroupContract, "addFilesToGroup", &add_files),
        fg(ContractKind::GroupContract, "setUserAccess", &set_access),
    ];

    let checks = checks(&deployments, &functions);
    Ok(GasReport {
        mode,
        deployments,
        functions,
        checks,
    })
}

fn checks(deployments: &[DeployGas], functions: &[FunctionGas]) -> GasChecks {
    let d = |k: ContractKind| {
        deployments
            .iter()
            .find(|x| x.contract == k)
            .map(|x| x.gas_used)
            .unwrap_or(0)
    };
    let pm = d(ContractKind::PolicyManager);
    let uf = d(ContractKind::UserMetadataFactory);
    let gc = d(ContractKind::GroupContract);
    let um = d(ContractKind::UserMetadata);
    let is_create = |f: &FunctionGas| f.function.starts_with("create");
    let mut others: Vec<Gas> = functions.iter().filter(|f| !is_create(f)).map(|f| f.gas_used).collect();
    let med = median(&mut others);
    let f = |name: &str| {
        functions
            .iter()
            .find(|x| x.function == name)
            .map(|x| x.gas_used)
            .unwrap_or(0)
    };
    let ratio = |g: Gas| if med > 0.0 { g as f64 / med } else { f64::INFINITY };
    let create_group_ratio = ratio(f("createGroupContract"));
    let create_user_ratio = ratio(f("createUserContract"));
    GasChecks {
        deploy_ordering: pm > uf && uf > gc && gc > um,
        parents_exceed_children: pm > gc && uf > um,
        policy_manager_minus_factory: pm as i64 - uf as i64,
        group_minus_user_metadata: gc as i64 - um as i64,
        other_functions_median: med,
        create_group_ratio,
        create_user_ratio,
        create_functions_dominate: create_group_ratio >= 5.0 && create_user_ratio >= 5.0,
    }
}

impl GasReport {
    pub fn deploy_gas(&self, kind: ContractKind) -> Option<Gas> {
        self.deployments.iter().find(|d| d.contract == kind).map(|d| d.gas_used)
    }

    pub fn function_gas(&self, function: &str) -> Option<Gas> {
        self.functions
            .iter()
            .find(|f| f.function == function)
            .map(|f| f.gas_used)
    }

    /// Plain-text table with thousands separators.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("gas report ({:?} schedule)\n\n", self.mode).to_lowercase());
        out.push_str(&format!("{:<22} {:>12}\n", "deployment", "gas used"));
        for d in &self.deployments {
            out.push_str(&format!("{:<22} {:>12}\n", d.contract.name(), thousands(d.gas_used)));
        }
        out.push_str(&format!("\n{:<44} {:>12}\n", "function", "gas used"));
        for f in &self.functions {
            let name = format!("{}.{}", f.contract.name(), f.function);
            out.push_str(&format!("{:<44} {:>12}\n", name, thousands(f.gas_used)));
        }
        let c = &self.checks;
        out.push_str(&format!(
            "\ndeploy ordering PM > UMF > GC > UM: {}\n\
             PolicyManager - UserMetadataFactory: {}\n\
             GroupContract - UserMetadata: {}\n\
             createGroupContract / median(other): {:.2}\n\
             createUserContract / median(other): {:.2}\n\
             create functions >= 5x median: {}\n",
            c.deploy_ordering,
            thousands_signed(c.policy_manager_minus_factory),
            thousands_signed(c.group_minus_user_metadata),
            c.create_group_ratio,
            c.create_user_ratio,
            c.create_functions_dominate,
        ));
        out
    }
}

pub fn thousands(v: u64) -> String {
    let digits = v.to_string();
    let mut out = String::new();
    for (i, ch) in digits.chars().enumerate() {
        if i > 0 && (digits.len() - i).is_multiple_of(3) {
            out.push(',');
        }
        out.push(ch);
    }
    out
}

fn thousands_signed(v: i64) -> String {
    if v < 0 {
        format!("-{}", thousands(v.unsigned_abs()))
    } else {
        thousands(v as u64)
    }
}
