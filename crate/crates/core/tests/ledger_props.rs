mod common;

use std::collections::BTreeSet;

use common::{date, World};
use dvre_core::contracts::{
    day_start, ContractError, ContractState, Deployment, FileInput, UserAccess, UserProfile,
};
use dvre_core::ledger::{read_log, write_log, GasSchedule, Ledger, LedgerConfig, LedgerError};
use dvre_core::wallet::Address;
use dvre_core::workload::run_random_ops;
use proptest::prelude::*;

const T0: u64 = 1_711_497_600;

fn fresh(schedule: GasSchedule) -> (Ledger, Deployment) {
    let mut ledger = Ledger::new(LedgerConfig::manual(schedule, T0));
    let dep = Deployment::bootstrap(&mut ledger, Address([0xaa; 20])).unwrap();
    (ledger, dep)
}

#[test]
fn replay_of_random_workload_is_byte_identical() {
    let (mut live, dep) = fresh(GasSchedule::formula());
    let report = run_random_ops(&mut live, dep, 42, 1_000).unwrap();
    assert_eq!(report.transactions, 1_000);
    assert!(report.file_batches > 0 && report.associations > 0 && report.access_updates > 0);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ledger.log");
    write_log(&path, live.log()).unwrap();
    let entries = read_log(&path).unwrap();
    assert_eq!(entries.len(), 1_002);

    let replayed = Ledger::replay(live.config().clone(), &entries).unwrap();
    assert_eq!(replayed.state().canonical_bytes(), live.state().canonical_bytes());
    assert_eq!(replayed.receipts(), live.receipts());
}

#[test]
fn corrupt_logs_are_rejected() {
    let (mut live, dep) = fresh(GasSchedule::calibrated());
    run_random_ops(&mut live, dep, 7, 40).unwrap();
    let log = live.log().to_vec();
    let config = live.config().clone();

    assert_eq!(
        Ledger::replay(config.clone(), &[]).unwrap().state(),
        &dvre_core::ledger::LedgerState::genesis(T0)
    );

    // swap two adjacent transactions from the same sender
    let i = (0..log.len() - 1)
        .find(|&i| log[i].tx.sender == log[i + 1].tx.sender)
        .unwrap();
    let mut swapped = log.clone();
    swapped.swap(i, i + 1);
    assert!(matches!(
        Ledger::replay(config.clone(), &swapped),
        Err(LedgerError::CorruptLog { index, .. }) if index == i
    ));

    let mut forged = log.clone();
    forged[5].receipt_digest[0] ^= 1;
    assert!(matches!(
        Ledger::replay(config, &forged),
        Err(LedgerError::CorruptLog { index: 5, .. })
    ));
}

#[test]
fn identical_sequences_give_identical_ledgers() {
    let (mut a, da) = fresh(GasSchedule::formula());
    let (mut b, db) = fresh(GasSchedule::formula());
    run_random_ops(&mut a, da, 9, 200).unwrap();
    run_random_ops(&mut b, db, 9, 200).unwrap();
    assert_eq!(a.receipts(), b.receipts());
    assert_eq!(a.state_root(), b.state_root());
}

#[test]
fn receipts_are_append_only() {
    let (mut l, dep) = fresh(GasSchedule::calibrated());
    run_random_ops(&mut l, dep, 3, 50).unwrap();
    let before = l.receipts().to_vec();
    // a revert still appends
    let group = dep.groups(&l)[0];
    let err = dep
        .add_files_to_group(
            &mut l,
            group,
            Address([0x42; 20]),
            vec![FileInput {
                ipfs_hash: "x".into(),
                file_name: "x".into(),
            }],
        )
        .unwrap_err();
    assert!(err.revert_reason().is_some());
    assert_eq!(&l.receipts()[..before.len()], &before[..]);
    assert_eq!(l.receipts().len(), before.len() + 1);
}

#[test]
fn block_times_never_decrease() {
    let (mut l, dep) = fresh(GasSchedule::calibrated());
    run_random_ops(&mut l, dep, 5, 300).unwrap();
    assert!(l.receipts().windows(2).all(|w| w[0].block_time <= w[1].block_time));
    assert!(matches!(l.set_time(T0 - 1), Err(LedgerError::TimeRegression { .. })));
}

fn random_address(seed: u64) -> Address {
    let mut a = [0u8; 20];
    a[..8].copy_from_slice(&seed.to_be_bytes());
    a[19] = 0x5a;
    Address(a)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn non_owner_associations_revert_without_effect(
        seeds in proptest::collection::vec(any::<u64>(), 1..8),
        from in 0u64..1_000_000,
        len in 0u64..1_000_000,
    ) {
        let mut w = World::new();
        let contracts_before = w.ledger.contracts_root();
        for s in seeds {
            let caller = random_address(s);
            prop_assume!(caller != w.alice.address());
            let err = w.deployment.associate_users_to_group(
                &mut w.ledger,
                w.group,
                caller,
                vec![UserAccess { eoa_address: caller, access_from: T0 + from, access_to: T0 + from + len }],
            ).unwrap_err();
            prop_assert_eq!(err.revert_reason(), Some(&ContractError::OnlyGroupOwner));
            prop_assert_eq!(
                err.revert_reason().unwrap().to_string(),
                "Only group owner can call this function"
            );
        }
        prop_assert_eq!(w.ledger.contracts_root(), contracts_before);
    }

    #[test]
    fn latest_grant_wins(a in (0u64..500, 0u64..500), b in (0u64..500, 0u64..500), probe in 0u64..1_200) {
        let mut w = World::new();
        let who = w.carol.address();
        let base = day_start(date(2024, 4, 1));
        for (from, len) in [a, b] {
            w.deployment.set_user_access(
                &mut w.ledger, w.group, w.alice.address(),
                UserAccess { eoa_address: who, access_from: base + from, access_to: base + from + len },
            ).unwrap();
        }
        let at = base + probe;
        let expected = base + b.0 <= at && at <= base + b.0 + b.1;
        prop_assert_eq!(w.deployment.check_access(&w.ledger, &w.group, &who, at).unwrap(), expected);
        // pure in its arguments
        prop_assert_eq!(w.deployment.check_access(&w.ledger, &w.group, &who, at).unwrap(), expected);
    }

    #[test]
    fn registry_is_a_bijection(n in 1usize..12) {
        let (mut l, dep) = fresh(GasSchedule::calibrated());
        let mut contracts = BTreeSet::new();
        for i in 0..n {
            let who = random_address(i as u64);
            let (c, _) = dep.register_user(&mut l, who, UserProfile {
                public_address: who,
                username: format!("u{i}"),
                organization: "UvA".into(),
                country: "Netherlands".into(),
            }).unwrap();
            prop_assert!(contracts.insert(c));
            let again = dep.register_user(&mut l, who, UserProfile {
                public_address: who,
                username: "dup".into(),
                organization: "UvA".into(),
                country: "Netherlands".into(),
            });
            prop_assert_eq!(
                again.unwrap_err().revert_reason().cloned(),
                Some(ContractError::AlreadyRegistered)
            );
        }
        let factory = l.contract(&dep.user_factory).and_then(ContractState::as_factory).unwrap();
        prop_assert_eq!(factory.users.len(), n);
        for (addr, c) in &factory.users {
            let user = l.contract(c).and_then(ContractState::as_user).unwrap();
            prop_assert_eq!(&user.profile.public_address, addr);
        }
    }

    #[test]
    fn file_list_only_grows(batches in proptest::collection::vec(1usize..4, 1..8), dup_at in any::<prop::sample::Index>()) {
        let mut w = World::new();
        let mut seen: Vec<String> = Vec::new();
        let mut counter = 0;
        for (bi, size) in batches.iter().enumerate() {
            let mut files: Vec<FileInput> = (0..*size).map(|_| {
                counter += 1;
                FileInput { ipfs_hash: format!("h{counter}"), file_name: format!("f{counter}") }
            }).collect();
            let inject_dup = !seen.is_empty() && bi % 3 == 2;
            if inject_dup {
                files.push(FileInput { ipfs_hash: dup_at.get(&seen).clone(), file_name: "dup".into() });
            }
            let before = w.ledger.contracts_root();
            let r = w.deployment.add_files_to_group(&mut w.ledger, w.group, w.bob.address(), files.clone());
            if inject_dup {
                prop_assert_eq!(r.unwrap_err().revert_reason().cloned(), Some(ContractError::DuplicateHash));
                prop_assert_eq!(w.ledger.contracts_root(), before);
            } else {
                let r = r.unwrap();
                prop_assert_eq!(r.events.len(), files.len());
                seen.extend(files.iter().map(|f| f.ipfs_hash.clone()));
            }
            let listed: Vec<String> = w.deployment
                .list_group_files(&w.ledger, &w.group, &w.bob.address())
                .unwrap()
                .into_iter()
                .map(|f| f.ipfs_hash)
                .collect();
            prop_assert_eq!(&listed, &seen);
        }
    }
}
