#![allow(dead_code)]

use dvre_core::contracts::{day_end, day_start, ContractId, Deployment, UserAccess, UserProfile};
use dvre_core::gas_report::sample_details;
use dvre_core::keynet::{KeyNetwork, LedgerView, NetworkParams, Services};
use dvre_core::ledger::{GasSchedule, Ledger, LedgerConfig};
use dvre_core::store::{Quota, Store};
use dvre_core::wallet::{generate_wallet, Wallet};

use chrono::NaiveDate;

pub fn date(y: i32, m: u32, d: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(y, m, d).unwrap()
}

pub fn wallet(seed: u8) -> Wallet {
    let mut key = [0u8; 32];
    key[0] = 0x11;
    key[31] = seed;
    generate_wallet(Some(key)).unwrap()
}

pub fn profile(w: &Wallet, name: &str, org: &str, country: &str) -> UserProfile {
    UserProfile {
        public_address: w.address(),
        username: name.into(),
        organization: org.into(),
        country: country.into(),
    }
}

/// Ledger at 2024-03-27 with alice (owner) and bob registered, a DataSharing
/// group owned by alice and bob granted 2024-03-27..2024-03-29. Carol is a
/// registered non-member.
pub struct World {
    pub ledger: Ledger,
    pub deployment: Deployment,
    pub group: ContractId,
    pub alice: Wallet,
    pub bob: Wallet,
    pub carol: Wallet,
    pub network: KeyNetwork,
    pub store: Store,
    pub params: NetworkParams,
    _dir: tempfile::TempDir,
}

impl World {
    pub fn new() -> Self {
        Self::with_quota(Quota::default())
    }

    pub fn with_quota(quota: Quota) -> Self {
        let start = day_start(date(2024, 3, 27));
        let mut ledger = Ledger::new(LedgerConfig::manual(GasSchedule::calibrated(), start));
        let operator = wallet(1);
        let alice = wallet(2);
        let bob = wallet(3);
        let carol = wallet(4);
        let deployment = Deployment::bootstrap(&mut ledger, operator.address()).unwrap();
        deployment
            .register_user(&mut ledger, alice.address(), profile(&alice, "alice", "UvA", "Netherlands"))
            .unwrap();
        deployment
            .register_user(&mut ledger, bob.address(), profile(&bob, "bob", "UiS", "Norway"))
            .unwrap();
        deployment
            .register_user(&mut ledger, carol.address(), profile(&carol, "carol", "UPV", "Spain"))
            .unwrap();
        let (group, _) = deployment
            .create_group(&mut ledger, alice.address(), sample_details(alice.address()))
            .unwrap();
        deployment
            .associate_users_to_group(
                &mut ledger,
                group,
                alice.address(),
                vec![UserAccess {
                    eoa_address: bob.address(),
                    access_from: start,
                    access_to: day_end(date(2024, 3, 29)),
                }],
            )
            .unwrap();
        let params = NetworkParams::default();
        let network = KeyNetwork::new(params.lit_network.clone(), params.chain.clone(), params.n);
        let dir = tempfile::tempdir().unwrap();
        let store = Store::open(dir.path().join("store"), quota).unwrap();
        Self {
            ledger,
            deployment,
            group,
            alice,
            bob,
            carol,
            network,
            store,
            params,
            _dir: dir,
        }
    }

    pub fn view(&self) -> LedgerView<'_> {
        LedgerView {
            ledger: &self.ledger,
            deployment: &self.deployment,
        }
    }

    pub fn with_services<T>(&self, f: impl FnOnce(Services<'_>) -> T) -> T {
        let view = self.view();
        f(Services {
            network: &self.network,
            store: &self.store,
            chain: &view,
        })
    }
}
