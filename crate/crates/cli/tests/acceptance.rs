//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each
//! with its runtime, and exits nonzero if any fails.

mod common;

use std::time::{Duration, Instant};

use common::{stdout_json, wallet, Node};
use dvre_core::contracts::{
    parse_time_bound, ContractDetails, ContractId, Deployment, UserAccess, UserProfile,
};
use dvre_core::gas_report::run_gas_study;
use dvre_core::keynet::{
    decrypt_file_and_download, encrypt_file_and_upload, fetch_bundle, AccessControlCondition,
    Credential, KeyNetwork, KeynetError, LedgerView, NamedFile, NetworkParams, Services,
};
use dvre_core::ledger::{read_log, write_log, GasSchedule, Ledger, LedgerConfig};
use dvre_core::store::{Quota, Store, StoreError};
use dvre_core::wallet::{Address, Wallet};
use dvre_core::workload::run_random_ops;
use rand::rngs::StdRng;
use rand::{Rng, RngCore, SeedableRng};

type Check = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn t(s: &str, end: bool) -> u64 {
    parse_time_bound(s, end).unwrap()
}

fn profile(w: &Wallet, name: &str) -> UserProfile {
    UserProfile {
        public_address: w.address(),
        username: name.into(),
        organization: "UvA".into(),
        country: "Netherlands".into(),
    }
}

fn details(owner: Address, name: &str) -> ContractDetails {
    ContractDetails {
        group_name: name.into(),
        group_owner_address: owner,
        permissions: "Full Access".into(),
        organizations: vec!["UvA".into(), "UiS".into(), "UPV".into()],
        countries: vec!["Netherlands".into(), "Norway".into(), "Spain".into()],
    }
}

/// alice owns `group` (bob is a member 2024-03-27..29) and `closed` (no
/// members); the ledger clock sits at 2024-03-28T12:00Z.
struct Fixture {
    ledger: Ledger,
    dep: Deployment,
    group: ContractId,
    closed: ContractId,
    alice: Wallet,
    bob: Wallet,
    network: KeyNetwork,
    store: Store,
    params: NetworkParams,
    _dir: tempfile::TempDir,
}

impl Fixture {
    fn new(quota: Quota) -> Self {
        let mut ledger = Ledger::new(LedgerConfig::manual(
            GasSchedule::calibrated(),
            t("2024-03-27", false),
        ));
        let dep = Deployment::bootstrap(&mut ledger, Address([0xee; 20])).unwrap();
        let (alice, bob) = (wallet(1), wallet(2));
        dep.register_user(&mut ledger, alice.address(), profile(&alice, "alice")).unwrap();
        dep.register_user(&mut ledger, bob.address(), profile(&bob, "bob")).unwrap();
        let (group, _) = dep
            .create_group(&mut ledger, alice.address(), details(alice.address(), "DataSharing"))
            .unwrap();
        let (closed, _) = dep
            .create_group(&mut ledger, alice.address(), details(alice.address(), "Closed"))
            .unwrap();
        dep.associate_users_to_group(
            &mut ledger,
            group,
            alice.address(),
            vec![UserAccess {
                eoa_address: bob.address(),
                access_from: t("2024-03-27", false),
                access_to: t("2024-03-29", true),
            }],
        )
        .unwrap();
        ledger.set_time(t("2024-03-28T12:00:00Z", false)).unwrap();
        let params = NetworkParams::default();
        let dir = tempfile::tempdir().unwrap();
        Self {
            ledger,
            dep,
            group,
            closed,
            alice,
            bob,
            network: KeyNetwork::new(params.lit_network.clone(), params.chain.clone(), params.n),
            store: Store::open(dir.path().join("store"), quota).unwrap(),
            params,
            _dir: dir,
        }
    }

    fn services<T>(&self, f: impl FnOnce(Services<'_>) -> T) -> T {
        let view = LedgerView {
            ledger: &self.ledger,
            deployment: &self.dep,
        };
        f(Services {
            network: &self.network,
            store: &self.store,
            chain: &view,
        })
    }
}

fn gas_calibration() -> Check {
    let out = std::process::Command::new(env!("CARGO_BIN_EXE_dvre"))
        .args(["gas", "report", "--preset", "calibrated", "--output", "json"])
        .output()
        .map_err(|e| e.to_string())?;
    ensure!(out.status.success(), "dvre exited with {}", out.status);
    let v = stdout_json(&out);
    let deploy = |name: &str| {
        v["deployments"]
            .as_array()
            .and_then(|a| a.iter().find(|d| d["contract"] == name))
            .and_then(|d| d["gas_used"].as_u64())
    };
    let function = |name: &str| {
        v["functions"]
            .as_array()
            .and_then(|a| a.iter().find(|f| f["function"] == name))
            .and_then(|f| f["gas_used"].as_u64())
    };
    let pm = deploy("PolicyManager");
    let umf = deploy("UserMetadataFactory");
    let gc = deploy("GroupContract");
    let um = deploy("UserMetadata");
    ensure!(
        (pm, umf, gc, um) == (Some(2_738_927), Some(2_249_679), Some(1_917_322), Some(1_602_341)),
        "deployments {pm:?} {umf:?} {gc:?} {um:?}"
    );
    let cg = function("createGroupContract");
    let cu = function("createUserContract");
    ensure!((cg, cu) == (Some(1_832_050), Some(1_535_460)), "functions {cg:?} {cu:?}");
    let d1 = pm.unwrap() - umf.unwrap();
    let d2 = gc.unwrap() - um.unwrap();
    ensure!(d1 == 489_248 && d2 == 314_981, "deltas {d1} {d2}");
    ensure!(
        v["checks"]["policy_manager_minus_factory"] == 489_248
            && v["checks"]["group_minus_user_metadata"] == 314_981,
        "report checks disagree: {}",
        v["checks"]
    );
    Ok(format!("PM-UMF {d1}, GC-UM {d2}"))
}

fn median(mut v: Vec<u64>) -> f64 {
    v.sort_unstable();
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2] as f64
    } else {
        (v[n / 2 - 1] + v[n / 2]) as f64 / 2.0
    }
}

fn gas_ordering() -> Check {
    let r = run_gas_study(GasSchedule::formula()).map_err(|e| e.to_string())?;
    let d = |name: &str| {
        r.deployments
            .iter()
            .find(|x| x.contract.name() == name)
            .map(|x| x.gas_used)
            .unwrap_or(0)
    };
    let (pm, umf, gc, um) = (
        d("PolicyManager"),
        d("UserMetadataFactory"),
        d("GroupContract"),
        d("UserMetadata"),
    );
    ensure!(pm > umf && umf > gc && gc > um, "ordering {pm} {umf} {gc} {um}");
    let creates = ["createGroupContract", "createUserContract"];
    let others: Vec<u64> = r
        .functions
        .iter()
        .filter(|f| !creates.contains(&f.function.as_str()))
        .map(|f| f.gas_used)
        .collect();
    ensure!(!others.is_empty(), "no other functions measured");
    let m = median(others);
    let ratio = |name: &str| {
        r.functions
            .iter()
            .find(|f| f.function == name)
            .map(|f| f.gas_used as f64 / m)
            .unwrap_or(0.0)
    };
    let (rg, ru) = (ratio("createGroupContract"), ratio("createUserContract"));
    ensure!(rg >= 5.0 && ru >= 5.0, "ratios {rg:.2} {ru:.2}");
    Ok(format!("{pm} > {umf} > {gc} > {um}; createGroup {rg:.2}x, createUser {ru:.2}x median"))
}

fn sharing_scenario() -> Check {
    let node = Node::start();
    let cwd = node.dir.path();
    let ka = node.keyfile("alice", &wallet(1));
    let kb = node.keyfile("bob", &wallet(2));
    let run = |key, args: &[&str]| {
        let out = node.dvre(key, cwd, args);
        if out.status.success() {
            Ok(stdout_json(&out))
        } else {
            Err(format!(
                "{args:?} exited {:?}: {}",
                out.status.code(),
                String::from_utf8_lossy(&out.stderr)
            ))
        }
    };
    run(&ka, &["register", "--username", "alice", "--org", "UvA", "--country", "Netherlands"])?;
    run(&kb, &["register", "--username", "bob", "--org", "UiS", "--country", "Norway"])?;
    let g = run(&ka, &[
        "group", "create", "--name", "DataSharing", "--permissions", "Full Access",
        "--orgs", "UvA,UiS,UPV", "--countries", "Netherlands,Norway,Spain",
    ])?;
    ensure!(g["receipt"]["gas_used"] == 1_832_050, "createGroup gas {}", g["receipt"]["gas_used"]);
    let group = g["group"].as_str().ok_or("no group id")?.to_string();
    let bob = wallet(2).address().to_string();
    run(&ka, &["group", "add-member", &group, "--user", &bob, "--from", "2024-03-27", "--to", "2024-03-29"])?;

    let mut content = vec![0u8; 20_000];
    StdRng::seed_from_u64(11).fill_bytes(&mut content);
    content[..8].copy_from_slice(b"\x89PNG\r\n\x1a\n");
    std::fs::write(cwd.join("#binary#mask.png"), &content).map_err(|e| e.to_string())?;
    let up = run(&ka, &["asset", "put", &group, "#binary#mask.png"])?;
    ensure!(up["file_name"] == "#binary#mask.png", "uploaded as {}", up["file_name"]);
    let cid = up["cid"].as_str().ok_or("no cid")?.to_string();

    node.set_time("2024-03-28");
    let got = run(&kb, &["asset", "get", &cid, "--out", "got.png"])?;
    ensure!(got["file_name"] == "#binary#mask.png", "downloaded name {}", got["file_name"]);
    let bytes = std::fs::read(cwd.join("got.png")).map_err(|e| e.to_string())?;
    ensure!(bytes == content, "downloaded bytes differ");

    node.set_time("2024-03-30");
    let out = node.dvre(&kb, cwd, &["asset", "get", &cid, "--out", "late.png"]);
    ensure!(out.status.code() == Some(3), "after window: exit {:?}", out.status.code());
    ensure!(!cwd.join("late.png").exists(), "denied download wrote a file");
    Ok("member gets identical bytes on 2024-03-28, exit 3 on 2024-03-30".into())
}

fn subsets(n: u8, k: usize) -> Vec<Vec<u8>> {
    fn go(start: u8, n: u8, k: usize, cur: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..=n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(1, n, k, &mut Vec::new(), &mut out);
    out
}

fn threshold() -> Check {
    let f = Fixture::new(Quota::default());
    let file = NamedFile::new("scan.nii", b"threshold test payload".to_vec());
    let acc = AccessControlCondition::GroupMember { group: f.group };
    let (cid, _) = f
        .services(|s| encrypt_file_and_upload(s, &file, &acc, Credential::Wallet(&f.alice), &f.params))
        .map_err(|e| e.to_string())?;
    let threes = subsets(5, 3);
    let twos = subsets(5, 2);
    for online in &threes {
        let offline: Vec<u8> = (1..=5).filter(|i| !online.contains(i)).collect();
        f.network.set_offline(&offline);
        let got = f
            .services(|s| decrypt_file_and_download(s, &cid, Credential::Wallet(&f.bob), &f.params))
            .map_err(|e| format!("online {online:?}: {e}"))?;
        ensure!(got == file, "online {online:?}: wrong plaintext");
    }
    for online in &twos {
        let offline: Vec<u8> = (1..=5).filter(|i| !online.contains(i)).collect();
        f.network.set_offline(&offline);
        match f.services(|s| decrypt_file_and_download(s, &cid, Credential::Wallet(&f.bob), &f.params)) {
            Err(KeynetError::AccessDenied { granted: 2, needed: 3, .. }) => {}
            other => return Err(format!("online {online:?}: {:?}", other.map(|_| "plaintext"))),
        }
    }
    Ok(format!("{} three-node subsets decrypt, {} two-node subsets refused", threes.len(), twos.len()))
}

fn owner_only() -> Check {
    let mut f = Fixture::new(Quota::default());
    let mut rng = StdRng::seed_from_u64(200);
    let contracts_before = f.ledger.contracts_root();
    let group_before = f.dep.group(&f.ledger, &f.group).map_err(|e| e.to_string())?.clone();
    for i in 0..200 {
        let caller = if i % 10 == 0 {
            f.bob.address()
        } else {
            let mut a = [0u8; 20];
            rng.fill_bytes(&mut a);
            Address(a)
        };
        ensure!(caller != f.alice.address(), "drew the owner");
        let users = (0..rng.gen_range(1..4))
            .map(|_| {
                let mut a = [0u8; 20];
                rng.fill_bytes(&mut a);
                let from = rng.gen_range(1_700_000_000u64..1_800_000_000);
                UserAccess {
                    eoa_address: Address(a),
                    access_from: from,
                    access_to: from + rng.gen_range(0..10_000_000),
                }
            })
            .collect();
        let target = if i % 2 == 0 { f.group } else { f.closed };
        let err = match f.dep.associate_users_to_group(&mut f.ledger, target, caller, users) {
            Ok(_) => return Err(format!("attempt {i} succeeded")),
            Err(e) => e,
        };
        let reason = err.revert_reason().map(|r| r.to_string());
        ensure!(
            reason.as_deref() == Some("Only group owner can call this function"),
            "attempt {i}: {err}"
        );
    }
    ensure!(f.ledger.contracts_root() == contracts_before, "contract state changed");
    let group_after = f.dep.group(&f.ledger, &f.group).map_err(|e| e.to_string())?;
    ensure!(*group_after == group_before, "group state changed");
    Ok("200 reverts, contract state hash unchanged".into())
}

fn replay_equivalence() -> Check {
    let mut live = Ledger::new(LedgerConfig::manual(GasSchedule::formula(), t("2024-03-27", false)));
    let dep = Deployment::bootstrap(&mut live, Address([0xee; 20])).map_err(|e| e.to_string())?;
    let report = run_random_ops(&mut live, dep, 1_000, 1_000).map_err(|e| e.to_string())?;
    ensure!(report.transactions == 1_000, "ran {} ops", report.transactions);
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path().join("ledger.log");
    write_log(&path, live.log()).map_err(|e| e.to_string())?;
    let entries = read_log(&path).map_err(|e| e.to_string())?;
    let replayed = Ledger::replay(live.config().clone(), &entries).map_err(|e| e.to_string())?;
    let (a, b) = (live.state().canonical_bytes(), replayed.state().canonical_bytes());
    ensure!(a == b, "state bytes differ");
    ensure!(live.receipts() == replayed.receipts(), "receipts differ");
    Ok(format!("{} log entries, {} state bytes identical", entries.len(), a.len()))
}

fn quota() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let store = Store::open(dir.path().join("files"), Quota::default()).map_err(|e| e.to_string())?;
    for i in 0u32..500 {
        store.put(format!("file {i}").as_bytes()).map_err(|e| format!("pin {i}: {e}"))?;
    }
    match store.put(b"file 500") {
        Err(StoreError::QuotaExceededFiles { limit: 500 }) => {}
        other => return Err(format!("501st pin: {other:?}")),
    }

    const LIMIT: u64 = 10 << 20;
    let store = Store::open(
        dir.path().join("bytes"),
        Quota {
            max_pinned_files: 500,
            max_total_bytes: LIMIT,
        },
    )
    .map_err(|e| e.to_string())?;
    for i in 0..10u8 {
        store.put(&vec![i; 1 << 20]).map_err(|e| format!("chunk {i}: {e}"))?;
    }
    ensure!(store.usage().1 == LIMIT, "usage {:?}", store.usage());
    match store.put(&[0xff]) {
        Err(StoreError::QuotaExceededBytes { limit: LIMIT, requested: 1 }) => {}
        other => return Err(format!("byte overflow: {other:?}")),
    }
    Ok("501st pin refused; 10 MiB + 1 byte refused".into())
}

/// A condition bob satisfies at 2024-03-28T12:00Z.
fn satisfiable(f: &Fixture, rng: &mut StdRng, depth: u32) -> AccessControlCondition {
    let now = f.ledger.now();
    match if depth == 0 { rng.gen_range(0..2) } else { rng.gen_range(0..4) } {
        0 => AccessControlCondition::GroupMember { group: f.group },
        1 => AccessControlCondition::TimeWindow {
            from: now - rng.gen_range(0..100_000),
            to: now + rng.gen_range(0..100_000),
        },
        2 => AccessControlCondition::And {
            all: (0..rng.gen_range(1..4)).map(|_| satisfiable(f, rng, depth - 1)).collect(),
        },
        _ => {
            let mut any: Vec<_> = (0..rng.gen_range(0..3)).map(|_| arbitrary(f, rng, depth - 1)).collect();
            let at = rng.gen_range(0..=any.len());
            any.insert(at, satisfiable(f, rng, depth - 1));
            AccessControlCondition::Or { any }
        }
    }
}

fn arbitrary(f: &Fixture, rng: &mut StdRng, depth: u32) -> AccessControlCondition {
    match rng.gen_range(0..4) {
        0 => AccessControlCondition::IsOwner { group: f.group },
        1 => AccessControlCondition::GroupMember { group: f.closed },
        2 => AccessControlCondition::TimeWindow {
            from: t("2020-01-01", false),
            to: t("2020-12-31", true),
        },
        _ => satisfiable(f, rng, depth),
    }
}

fn crypto_roundtrip() -> Check {
    let f = Fixture::new(Quota {
        max_pinned_files: 1_000,
        max_total_bytes: 1 << 30,
    });
    let mut rng = StdRng::seed_from_u64(500);
    for i in 0..500 {
        let len = rng.gen_range(0..=64 * 1024);
        let mut bytes = vec![0u8; len];
        rng.fill_bytes(&mut bytes);
        let file = NamedFile::new(format!("file-{i}.bin"), bytes);
        let acc = satisfiable(&f, &mut rng, 3);
        let (cid, _) = f
            .services(|s| encrypt_file_and_upload(s, &file, &acc, Credential::Wallet(&f.alice), &f.params))
            .map_err(|e| format!("file {i} upload: {e}"))?;
        let got = f
            .services(|s| decrypt_file_and_download(s, &cid, Credential::Wallet(&f.bob), &f.params))
            .map_err(|e| format!("file {i} ({len} bytes, {acc}): {e}"))?;
        ensure!(got == file, "file {i}: plaintext differs");

        let mut bundle = fetch_bundle(&f.store, &cid).map_err(|e| e.to_string())?;
        let at = rng.gen_range(0..bundle.payload.len());
        bundle.payload[at] ^= 1 << rng.gen_range(0..8);
        let tampered = f.store.put(&bundle.to_zip()).map_err(|e| e.to_string())?;
        match f.services(|s| decrypt_file_and_download(s, &tampered, Credential::Wallet(&f.bob), &f.params)) {
            Err(KeynetError::IntegrityFailure(_)) => {}
            other => {
                return Err(format!(
                    "file {i}: flipped byte {at} gave {:?}",
                    other.map(|_| "plaintext")
                ))
            }
        }
    }
    Ok("500 files roundtrip; 500 single-byte flips rejected".into())
}

struct Criterion {
    name: &'static str,
    limit: Option<Duration>,
    run: fn() -> Check,
}

fn main() {
    let criteria = [
        Criterion { name: "gas calibration", limit: Some(Duration::from_secs(1)), run: gas_calibration },
        Criterion { name: "gas ordering (formula)", limit: Some(Duration::from_secs(1)), run: gas_ordering },
        Criterion { name: "end-to-end sharing scenario", limit: Some(Duration::from_secs(5)), run: sharing_scenario },
        Criterion { name: "threshold 3-of-5", limit: Some(Duration::from_secs(10)), run: threshold },
        Criterion { name: "owner-only membership", limit: None, run: owner_only },
        Criterion { name: "replay equivalence", limit: Some(Duration::from_secs(30)), run: replay_equivalence },
        Criterion { name: "store quota", limit: None, run: quota },
        Criterion { name: "crypto roundtrip", limit: None, run: crypto_roundtrip },
    ];
    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let result = (c.run)();
        let elapsed = start.elapsed();
        let verdict = match (&result, c.limit) {
            (Err(e), _) => Err(e.clone()),
            (Ok(_), Some(limit)) if elapsed > limit => {
                Err(format!("took {elapsed:.2?}, limit {limit:?}"))
            }
            (Ok(detail), _) => Ok(detail.clone()),
        };
        match verdict {
            Ok(detail) => println!("PASS  {:<30} {:>9.3?}  {detail}", c.name, elapsed),
            Err(why) => {
                failed += 1;
                println!("FAIL  {:<30} {:>9.3?}  {why}", c.name, elapsed);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
