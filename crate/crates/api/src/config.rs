//! Server configuration from a TOML file with `DVRE_*` environment
//! overrides.

use std::path::{Path, PathBuf};

use dvre_core::contracts::parse_time_bound;
use dvre_core::keynet::{NetworkParams, DEFAULT_LABEL};
use dvre_core::ledger::Preset;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("reading {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("parsing config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("environment variable {name}: {reason}")]
    Env { name: &'static str, reason: String },
    #[error("invalid setting: {0}")]
    Invalid(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ApiConfig {
    pub bind: String,
    /// Holds `store/` and `ledger.log`.
    pub data_dir: PathBuf,
    /// Overrides `data_dir/store`.
    pub store_root: Option<PathBuf>,
    pub max_pinned_files: usize,
    pub max_total_bytes: u64,
    pub gas_preset: String,
    pub keynet_n: u8,
    pub keynet_t: u8,
    pub lit_network: String,
    pub chain: String,
    pub upload_cap_bytes: usize,
    pub session_ttl_secs: u64,
    /// Start the ledger on a manual clock at this date or RFC 3339 time
    /// instead of following the system clock.
    pub start_time: Option<String>,
    /// Enables `POST /admin/time`.
    pub demo_clock: bool,
    pub paper_faithful_add_files: bool,
}

impl Default for ApiConfig {
    fn default() -> Self {
        Self {
            bind: "127.0.0.1:7878".into(),
            data_dir: PathBuf::from("dvre-data"),
            store_root: None,
            max_pinned_files: dvre_core::store::DEFAULT_MAX_PINNED_FILES,
            max_total_bytes: dvre_core::store::DEFAULT_MAX_TOTAL_BYTES,
            gas_preset: "calibrated".into(),
            keynet_n: 5,
            keynet_t: 3,
            lit_network: DEFAULT_LABEL.into(),
            chain: DEFAULT_LABEL.into(),
            upload_cap_bytes: 8 << 20,
            session_ttl_secs: 3600,
            start_time: None,
            demo_clock: false,
            paper_faithful_add_files: false,
        }
    }
}

fn env_parse<T: std::str::FromStr>(name: &'static str) -> Result<Option<T>, ConfigError>
where
    T::Err: std::fmt::Display,
{
    match std::env::var(name) {
        Ok(v) => v.parse().map(Some).map_err(|e: T::Err| ConfigError::Env {
            name,
            reason: e.to_string(),
        }),
        Err(_) => Ok(None),
    }
}

impl ApiConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        Ok(toml::from_str(text)?)
    }

    /// File (if given) then environment.
    pub fn load(path: Option<&Path>) -> Result<Self, ConfigError> {
        let mut cfg = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|source| ConfigError::Read {
                    path: p.to_path_buf(),
                    source,
                })?;
                Self::from_toml(&text)?
            }
            None => Self::default(),
        };
        cfg.apply_env()?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn apply_env(&mut self) -> Result<(), ConfigError> {
        if let Some(v) = env_parse("DVRE_BIND")? {
            self.bind = v;
        }
        if let Some(v) = env_parse::<String>("DVRE_DATA_DIR")? {
            self.data_dir = v.into();
        }
        if let Some(v) = env_parse::<String>("DVRE_STORE_ROOT")? {
            self.store_root = Some(v.into());
        }
        if let Some(v) = env_parse("DVRE_MAX_PINNED_FILES")? {
            self.max_pinned_files = v;
        }
        if let Some(v) = env_parse("DVRE_MAX_TOTAL_BYTES")? {
            self.max_total_bytes = v;
        }
        if let Some(v) = env_parse("DVRE_GAS_PRESET")? {
            self.gas_preset = v;
        }
        if let Some(v) = env_parse("DVRE_KEYNET_N")? {
            self.keynet_n = v;
        }
        if let Some(v) = env_parse("DVRE_KEYNET_T")? {
            self.keynet_t = v;
        }
        if let Some(v) = env_parse("DVRE_UPLOAD_CAP")? {
            self.upload_cap_bytes = v;
        }
        if let Some(v) = env_parse("DVRE_SESSION_TTL")? {
            self.session_ttl_secs = v;
        }
        if let Some(v) = env_parse("DVRE_START_TIME")? {
            self.start_time = Some(v);
        }
        if let Some(v) = env_parse("DVRE_DEMO_CLOCK")? {
            self.demo_clock = v;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.preset()?;
        self.start()?;
        self.network_params()
            .validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(())
    }

    pub fn preset(&self) -> Result<Preset, ConfigError> {
        self.gas_preset
            .parse()
            .map_err(|e: dvre_core::ledger::GasError| ConfigError::Invalid(e.to_string()))
    }

    pub fn start(&self) -> Result<Option<u64>, ConfigError> {
        self.start_time
            .as_deref()
            .map(|s| parse_time_bound(s, false).map_err(|e| ConfigError::Invalid(e.to_string())))
            .transpose()
    }

    pub fn store_root(&self) -> PathBuf {
        self.store_root
            .clone()
            .unwrap_or_else(|| self.data_dir.join("store"))
    }

    pub fn ledger_log(&self) -> PathBuf {
        self.data_dir.join("ledger.log")
    }

    pub fn network_params(&self) -> NetworkParams {
        NetworkParams {
            lit_network: self.lit_network.clone(),
            chain: self.chain.clone(),
            n: self.keynet_n,
            t: self.keynet_t,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_overrides_defaults() {
        let cfg = ApiConfig::from_toml(
            "bind = \"0.0.0.0:9000\"\nkeynet_n = 7\nkeynet_t = 4\nstart_time = \"2024-03-27\"\n",
        )
        .unwrap();
        assert_eq!(cfg.bind, "0.0.0.0:9000");
        assert_eq!(cfg.network_params().n, 7);
        assert_eq!(cfg.start().unwrap(), Some(1_711_497_600));
        assert_eq!(cfg.upload_cap_bytes, 8 * 1024 * 1024);
    }

    #[test]
    fn rejects_bad_values() {
        assert!(ApiConfig::from_toml("unknown_key = 1").is_err());
        let cfg = ApiConfig {
            keynet_t: 9,
            ..ApiConfig::default()
        };
        assert!(cfg.validate().is_err());
        let cfg = ApiConfig {
            gas_preset: "cheap".into(),
            ..ApiConfig::default()
        };
        assert!(cfg.validate().is_err());
    }
}
