//! Blocking HTTP client for the API server.

use std::path::Path;

use dvre_core::wallet::{sign_auth, Wallet};
use reqwest::blocking::{multipart, Client, RequestBuilder, Response};
use reqwest::StatusCode;
use serde_json::{json, Value};

use crate::error::CliError;

pub struct Remote {
    base: String,
    http: Client,
    token: Option<String>,
}

fn classify(status: StatusCode, body: &Value) -> CliError {
    let message = body["message"]
        .as_str()
        .map(str::to_string)
        .unwrap_or_else(|| format!("server returned {status}"));
    let kind = body["error"].as_str().unwrap_or("");
    match status {
        StatusCode::UNAUTHORIZED => CliError::Auth(message),
        StatusCode::CONFLICT if kind == "challenge_reused" => CliError::Auth(message),
        StatusCode::FORBIDDEN => CliError::Access(message),
        StatusCode::INSUFFICIENT_STORAGE => CliError::Quota(message),
        StatusCode::SERVICE_UNAVAILABLE => CliError::Network(message),
        _ => CliError::Other(message),
    }
}

fn network(e: reqwest::Error) -> CliError {
    CliError::Network(e.to_string())
}

impl Remote {
    pub fn new(base: &str) -> Self {
        Self {
            base: base.trim_end_matches('/').to_string(),
            http: Client::new(),
            token: None,
        }
    }

    pub fn with_token(mut self, token: Option<String>) -> Self {
        self.token = token;
        self
    }

    fn url(&self, path: &str) -> String {
        format!("{}{}", self.base, path)
    }

    fn authed(&self, req: RequestBuilder) -> RequestBuilder {
        match &self.token {
            Some(t) => req.bearer_auth(t),
            None => req,
        }
    }

    fn send(&self, req: RequestBuilder) -> Result<Response, CliError> {
        let resp = self.authed(req).send().map_err(network)?;
        if resp.status().is_success() {
            return Ok(resp);
        }
        let status = resp.status();
        let body: Value = resp.json().unwrap_or(Value::Null);
        Err(classify(status, &body))
    }

    fn json(&self, req: RequestBuilder) -> Result<Value, CliError> {
        self.send(req)?
            .json()
            .map_err(|e| CliError::Other(format!("bad response body: {e}")))
    }

    /// Challenge, sign, login. Keeps the token for later calls.
    pub fn login(&mut self, wallet: &Wallet) -> Result<Value, CliError> {
        let c = self.json(self.http.post(self.url("/auth/challenge")))?;
        let challenge = c["challenge"]
            .as_str()
            .ok_or_else(|| CliError::Other("challenge missing from response".into()))?;
        let sig = sign_auth(wallet, challenge).map_err(|e| CliError::Auth(e.to_string()))?;
        let session = self.json(self.http.post(self.url("/auth/login")).json(&sig))?;
        self.token = session["token"].as_str().map(str::to_string);
        Ok(session)
    }

    /// Logs in unless a token was supplied.
    pub fn ensure_session(&mut self, wallet: &Wallet) -> Result<(), CliError> {
        if self.token.is_none() {
            self.login(wallet)?;
        }
        Ok(())
    }

    pub fn get(&self, path: &str) -> Result<Value, CliError> {
        self.json(self.http.get(self.url(path)))
    }

    pub fn post(&self, path: &str, body: &Value) -> Result<Value, CliError> {
        self.json(self.http.post(self.url(path)).json(body))
    }

    pub fn upload(&self, group: &str, path: &Path, acc: Option<&str>) -> Result<Value, CliError> {
        let name = path
            .file_name()
            .and_then(|n| n.to_str())
            .ok_or_else(|| CliError::Other(format!("{} has no file name", path.display())))?;
        let bytes = std::fs::read(path).map_err(|e| CliError::Other(format!("{}: {e}", path.display())))?;
        let mut form = multipart::Form::new()
            .text("group", group.to_string())
            .part("file", multipart::Part::bytes(bytes).file_name(name.to_string()));
        if let Some(acc) = acc {
            form = form.text("acc", acc.to_string());
        }
        self.json(self.http.post(self.url("/assets")).multipart(form))
    }

    /// Plaintext bytes and the original file name.
    pub fn download(&self, cid: &str) -> Result<(Vec<u8>, Option<String>), CliError> {
        let resp = self.send(self.http.get(self.url(&format!("/assets/{cid}"))))?;
        let name = resp
            .headers()
            .get(reqwest::header::CONTENT_DISPOSITION)
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.split("filename=\"").nth(1))
            .map(|v| v.trim_end_matches('"').to_string());
        let bytes = resp.bytes().map_err(network)?.to_vec();
        Ok((bytes, name))
    }
}

pub fn members_body(users: &[String], from: u64, to: u64) -> Value {
    json!({
        "users": users
            .iter()
            .map(|u| json!({ "eoa_address": u, "access_from": from, "access_to": to }))
            .collect::<Vec<_>>()
    })
}
