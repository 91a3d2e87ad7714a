#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::Arc;

use dvre_api::{router, ApiConfig, AppState};
use dvre_core::wallet::{generate_wallet, Wallet};

pub fn wallet(seed: u8) -> Wallet {
    let mut key = [0u8; 32];
    key[0] = 0x33;
    key[31] = seed;
    generate_wallet(Some(key)).unwrap()
}

/// An API server on its own runtime thread, on a manual clock at
/// 2024-03-27 with the demo clock enabled.
pub struct Node {
    pub base: String,
    pub state: Arc<AppState>,
    pub dir: tempfile::TempDir,
}

impl Node {
    pub fn start() -> Self {
        let dir = tempfile::tempdir().unwrap();
        let config = ApiConfig {
            bind: "127.0.0.1:0".into(),
            data_dir: dir.path().join("data"),
            start_time: Some("2024-03-27".into()),
            demo_clock: true,
            ..ApiConfig::default()
        };
        let state = Arc::new(AppState::open(config).unwrap());
        let (tx, rx) = std::sync::mpsc::channel();
        let app = router(state.clone());
        std::thread::spawn(move || {
            let rt = tokio::runtime::Builder::new_multi_thread()
                .worker_threads(2)
                .enable_all()
                .build()
                .unwrap();
            rt.block_on(async move {
                let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
                tx.send(listener.local_addr().unwrap()).unwrap();
                axum::serve(listener, app).await.unwrap();
            });
        });
        let addr = rx.recv().unwrap();
        Self {
            base: format!("http://{addr}"),
            state,
            dir,
        }
    }

    /// Writes `w` to a key file inside the node's temp dir.
    pub fn keyfile(&self, name: &str, w: &Wallet) -> PathBuf {
        let path = self.dir.path().join(format!("{name}.key"));
        w.save_key_file(&path).unwrap();
        path
    }

    pub fn set_time(&self, time: &str) {
        let resp = reqwest::blocking::Client::new()
            .post(format!("{}/admin/time", self.base))
            .json(&serde_json::json!({ "time": time }))
            .send()
            .unwrap();
        assert!(resp.status().is_success(), "set_time {time}: {}", resp.status());
    }

    /// Runs the `dvre` binary against this node with `keyfile` and JSON
    /// output, in `cwd`.
    pub fn dvre(&self, keyfile: &Path, cwd: &Path, args: &[&str]) -> Output {
        Command::new(env!("CARGO_BIN_EXE_dvre"))
            .args(args)
            .arg("--output")
            .arg("json")
            .env("DVRE_SERVER", &self.base)
            .env("DVRE_KEYFILE", keyfile)
            .env_remove("DVRE_TOKEN")
            .current_dir(cwd)
            .output()
            .unwrap()
    }
}

pub fn stdout_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "bad json ({e}): stdout={} stderr={}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}
