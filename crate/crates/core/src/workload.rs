//! Random sequences of valid contract operations, for soak and replay tests.

use std::collections::BTreeMap;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::contracts::{
    CallError, ContractDetails, ContractId, Deployment, FileInput, UserAccess, UserProfile,
    UNLIMITED,
};
use crate::ledger::Ledger;
use crate::wallet::Address;

const USER_POOL: usize = 16;
const ORGS: [&str; 4] = ["UvA", "UiS", "UPV", "TUD"];
const COUNTRIES: [&str; 4] = ["Netherlands", "Norway", "Spain", "Germany"];

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorkloadReport {
    pub transactions: usize,
    pub registrations: usize,
    pub groups: usize,
    pub associations: usize,
    pub access_updates: usize,
    pub file_batches: usize,
    pub clock_advances: usize,
}

fn pool_address(i: usize) -> Address {
    let mut a = [0u8; 20];
    a[0] = 0xd0;
    a[19] = i as u8;
    Address(a)
}

struct Sim<'a> {
    ledger: &'a mut Ledger,
    dep: Deployment,
    rng: StdRng,
    registered: Vec<Address>,
    /// group -> owner
    groups: BTreeMap<ContractId, Address>,
    files: u64,
    report: WorkloadReport,
}

impl Sim<'_> {
    fn pick<T: Copy>(&mut self, items: &[T]) -> T {
        items[self.rng.gen_range(0..items.len())]
    }

    fn window(&mut self) -> (u64, u64) {
        let now = self.ledger.now();
        let from = now.saturating_sub(self.rng.gen_range(0..3 * 86_400));
        let to = if self.rng.gen_bool(0.1) {
            UNLIMITED
        } else {
            from + self.rng.gen_range(0..10 * 86_400)
        };
        (from, to)
    }

    fn register(&mut self) -> Result<(), CallError> {
        let i = self.registered.len();
        let who = pool_address(i);
        let profile = UserProfile {
            public_address: who,
            username: format!("user{i}"),
            organization: self.pick(&ORGS).into(),
            country: self.pick(&COUNTRIES).into(),
        };
        self.dep.register_user(self.ledger, who, profile)?;
        self.registered.push(who);
        self.report.registrations += 1;
        Ok(())
    }

    fn create_group(&mut self) -> Result<(), CallError> {
        let owner = self.pick(&self.registered.clone());
        let n = self.rng.gen_range(1..=3);
        let details = ContractDetails {
            group_name: format!("group{}", self.groups.len()),
            group_owner_address: owner,
            permissions: "Full Access".into(),
            organizations: (0..n).map(|i| ORGS[i].to_string()).collect(),
            countries: (0..n).map(|i| COUNTRIES[i].to_string()).collect(),
        };
        let (id, _) = self.dep.create_group(self.ledger, owner, details)?;
        self.groups.insert(id, owner);
        self.report.groups += 1;
        Ok(())
    }

    fn some_group(&mut self) -> (ContractId, Address) {
        let i = self.rng.gen_range(0..self.groups.len());
        let (g, o) = self.groups.iter().nth(i).expect("index in range");
        (*g, *o)
    }

    fn access(&mut self) -> UserAccess {
        let who = pool_address(self.rng.gen_range(0..USER_POOL));
        let (access_from, access_to) = self.window();
        UserAccess {
            eoa_address: who,
            access_from,
            access_to,
        }
    }

    fn associate(&mut self) -> Result<(), CallError> {
        let (g, owner) = self.some_group();
        let users = (0..self.rng.gen_range(1..=3)).map(|_| self.access()).collect();
        self.dep.associate_users_to_group(self.ledger, g, owner, users)?;
        self.report.associations += 1;
        Ok(())
    }

    fn set_access(&mut self) -> Result<(), CallError> {
        let (g, owner) = self.some_group();
        let access = self.access();
        self.dep.set_user_access(self.ledger, g, owner, access)?;
        self.report.access_updates += 1;
        Ok(())
    }

    fn add_files(&mut self) -> Result<(), CallError> {
        let (g, owner) = self.some_group();
        let now = self.ledger.now();
        let members: Vec<Address> = self
            .dep
            .group(self.ledger, &g)?
            .user_access
            .values()
            .filter(|a| a.covers(now))
            .map(|a| a.eoa_address)
            .collect();
        let caller = if !members.is_empty() && self.rng.gen_bool(0.5) {
            self.pick(&members)
        } else {
            owner
        };
        let files = (0..self.rng.gen_range(1..=3))
            .map(|_| {
                self.files += 1;
                FileInput {
                    ipfs_hash: format!("dvre1-{:064x}", self.files),
                    file_name: format!("file{}.bin", self.files),
                }
            })
            .collect();
        self.dep.add_files_to_group(self.ledger, g, caller, files)?;
        self.report.file_batches += 1;
        Ok(())
    }
}

/// Submits `count` successful transactions chosen at random from the
/// state-changing contract functions, occasionally moving the clock forward
/// between them. Any revert is returned as an error.
pub fn run_random_ops(
    ledger: &mut Ledger,
    dep: Deployment,
    seed: u64,
    count: usize,
) -> Result<WorkloadReport, CallError> {
    let mut sim = Sim {
        ledger,
        dep,
        rng: StdRng::seed_from_u64(seed),
        registered: Vec::new(),
        groups: BTreeMap::new(),
        files: 0,
        report: WorkloadReport::default(),
    };
    for _ in 0..count {
        if sim.rng.gen_bool(0.05) {
            let now = sim.ledger.now();
            let step = sim.rng.gen_range(1..2 * 86_400);
            sim.ledger.set_time(now + step)?;
            sim.report.clock_advances += 1;
        }
        let can_register = sim.registered.len() < USER_POOL;
        let roll = sim.rng.gen_range(0..100);
        if sim.registered.is_empty() || (can_register && roll < 10) {
            sim.register()?;
        } else if sim.groups.is_empty() || roll < 20 {
            sim.create_group()?;
        } else if roll < 45 {
            sim.associate()?;
        } else if roll < 65 {
            sim.set_access()?;
        } else {
            sim.add_files()?;
        }
        sim.report.transactions += 1;
    }
    Ok(sim.report)
}
