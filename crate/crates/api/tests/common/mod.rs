#![allow(dead_code)]

use std::sync::Arc;

use dvre_api::{router, ApiConfig, AppState};
use dvre_core::contracts::UserProfile;
use dvre_core::wallet::{generate_wallet, sign_auth, Wallet};
use reqwest::StatusCode;
use serde_json::{json, Value};

pub fn wallet(seed: u8) -> Wallet {
    let mut key = [0u8; 32];
    key[0] = 0x22;
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

/// Config for a server on a manual clock at 2024-03-27 with the demo clock
/// enabled, rooted in `dir`.
pub fn test_config(dir: &std::path::Path) -> ApiConfig {
    ApiConfig {
        bind: "127.0.0.1:0".into(),
        data_dir: dir.to_path_buf(),
        start_time: Some("2024-03-27".into()),
        demo_clock: true,
        ..ApiConfig::default()
    }
}

pub struct Server {
    pub base: String,
    pub state: Arc<AppState>,
    pub http: reqwest::Client,
}

impl Server {
    pub async fn start(config: ApiConfig) -> Self {
        let state = Arc::new(AppState::open(config).unwrap());
        let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
        let addr = listener.local_addr().unwrap();
        let app = router(state.clone());
        tokio::spawn(async move {
            axum::serve(listener, app).await.unwrap();
        });
        Self {
            base: format!("http://{addr}"),
            state,
            http: reqwest::Client::new(),
        }
    }

    pub fn url(&self, path: &str) -> String {
        format!("{}{}", self.base, path)
    }

    /// Challenge, sign, login. Returns the bearer token.
    pub async fn login(&self, w: &Wallet) -> String {
        let c: Value = self
            .http
            .post(self.url("/auth/challenge"))
            .send()
            .await
            .unwrap()
            .json()
            .await
            .unwrap();
        let sig = sign_auth(w, c["challenge"].as_str().unwrap()).unwrap();
        let resp = self.http.post(self.url("/auth/login")).json(&sig).send().await.unwrap();
        assert_eq!(resp.status(), StatusCode::OK);
        let session: Value = resp.json().await.unwrap();
        session["token"].as_str().unwrap().to_string()
    }

    pub async fn register(&self, w: &Wallet, name: &str, org: &str, country: &str) -> String {
        let token = self.login(w).await;
        let resp = self
            .http
            .post(self.url("/users"))
            .bearer_auth(&token)
            .json(&profile(w, name, org, country))
            .send()
            .await
            .unwrap();
        assert_eq!(resp.status(), StatusCode::CREATED);
        token
    }

    pub async fn post(&self, token: &str, path: &str, body: Value) -> (StatusCode, Value) {
        let resp = self
            .http
            .post(self.url(path))
            .bearer_auth(token)
            .json(&body)
            .send()
            .await
            .unwrap();
        let status = resp.status();
        (status, resp.json().await.unwrap_or(Value::Null))
    }

    pub async fn get(&self, token: &str, path: &str) -> (StatusCode, Value) {
        let resp = self.http.get(self.url(path)).bearer_auth(token).send().await.unwrap();
        let status = resp.status();
        (status, resp.json().await.unwrap_or(Value::Null))
    }

    pub async fn upload(&self, token: &str, group: &str, name: &str, bytes: Vec<u8>) -> reqwest::Response {
        let form = reqwest::multipart::Form::new().text("group", group.to_string()).part(
            "file",
            reqwest::multipart::Part::bytes(bytes).file_name(name.to_string()),
        );
        self.http
            .post(self.url("/assets"))
            .bearer_auth(token)
            .multipart(form)
            .send()
            .await
            .unwrap()
    }

    pub async fn set_time(&self, time: &str) -> StatusCode {
        self.http
            .post(self.url("/admin/time"))
            .json(&json!({ "time": time }))
            .send()
            .await
            .unwrap()
            .status()
    }
}

pub fn details(owner: &Wallet) -> Value {
    json!({
        "group_name": "DataSharing",
        "group_owner_address": owner.address(),
        "permissions": "Full Access",
        "organizations": ["UvA", "UiS", "UPV"],
        "countries": ["Netherlands", "Norway", "Spain"],
    })
}
