//! Engine configuration: a TOML file plus `CONCIERGE_*` environment
//! overrides.
//!
//! ```toml
//! seed = 7
//! alpha = 0.5
//! metric = "euclidean"
//! data-dir = "/var/lib/concierge"
//!
//! [server]
//! port = 8080
//! admin-token = "secret"
//!
//! [egc]
//! beta = 0.5
//! intensity = "geometric-mean"
//!
//! [mstn]
//! idle-mode = "deterministic"
//! tie-break = "lowest-group"
//! learn = true
//! group-targets = ["happy", "happy", "sad", "sad", "sad", "disgust", "angry", "fear", "surprise"]
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::egc::EgcConfig;
use crate::mstn::MstnConfig;
use crate::recommend::{DistanceMetric, DEFAULT_ALPHA};
use crate::Error;

pub const ENV_PREFIX: &str = "CONCIERGE_";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case")]
pub struct ServerConfig {
    pub host: String,
    pub port: u16,
    pub admin_token: Option<String>,
}

impl Default for ServerConfig {
    fn default() -> Self {
        Self { host: "127.0.0.1".into(), port: 8080, admin_token: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case")]
pub struct EngineConfig {
    /// Seed of every session's random generator (stochastic idle drift).
    pub seed: u64,
    /// Smoothing factor of the user's feeling profile.
    pub alpha: f64,
    pub metric: DistanceMetric,
    /// Overrides for the bundled data files and home of the session logs.
    pub data_dir: Option<PathBuf>,
    pub server: ServerConfig,
    pub egc: EgcConfig,
    pub mstn: MstnConfig,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            alpha: DEFAULT_ALPHA,
            metric: DistanceMetric::default(),
            data_dir: None,
            server: ServerConfig::default(),
            egc: EgcConfig::default(),
            mstn: MstnConfig::default(),
        }
    }
}

impl EngineConfig {
    pub fn from_toml(text: &str) -> Result<Self, Error> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, Error> {
        let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Applies `CONCIERGE_PORT`, `_HOST`, `_DATA_DIR`, `_ALPHA`, `_BETA`,
    /// `_IDLE_MODE`, `_SEED` and `_ADMIN_TOKEN`.
    pub fn apply_env(&mut self) -> Result<(), Error> {
        self.apply_env_from(std::env::vars())
    }

    pub fn apply_env_from<I, K, V>(&mut self, vars: I) -> Result<(), Error>
    where
        I: IntoIterator<Item = (K, V)>,
        K: AsRef<str>,
        V: AsRef<str>,
    {
        for (k, v) in vars {
            let Some(key) = k.as_ref().strip_prefix(ENV_PREFIX) else { continue };
            let v = v.as_ref();
            let bad = |what: &str| Error::Config(format!("{ENV_PREFIX}{key}: invalid {what} `{v}`"));
            match key {
                "PORT" => self.server.port = v.parse().map_err(|_| bad("port"))?,
                "HOST" => self.server.host = v.to_string(),
                "DATA_DIR" => self.data_dir = Some(PathBuf::from(v)),
                "ALPHA" => self.alpha = v.parse().map_err(|_| bad("number"))?,
                "BETA" => self.egc.beta = v.parse().map_err(|_| bad("number"))?,
                "IDLE_MODE" => self.mstn.idle_mode = v.parse().map_err(|_| bad("idle mode"))?,
                "SEED" => self.seed = v.parse().map_err(|_| bad("seed"))?,
                "ADMIN_TOKEN" => self.server.admin_token = Some(v.to_string()),
                _ => {}
            }
        }
        self.validate()
    }

    pub fn validate(&self) -> Result<(), Error> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::Config(format!("alpha {} must lie in (0, 1]", self.alpha)));
        }
        if !self.egc.beta.is_finite() || self.egc.beta == 0.0 {
            // a zero dummy would put every beta row on an axis
            return Err(Error::Config(format!("beta {} must be finite and non-zero", self.egc.beta)));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mstn::{IdleMode, MentalState};

    #[test]
    fn defaults() {
        let c = EngineConfig::default();
        assert_eq!(c.egc.beta, 0.5);
        assert_eq!(c.alpha, 0.5);
        assert_eq!(c.mstn.initial_state, MentalState::Quiet);
        assert!(c.mstn.learn);
        assert_eq!(EngineConfig::from_toml("").unwrap(), c);
    }

    #[test]
    fn parses_documented_example() {
        let text = r#"
seed = 7
alpha = 0.25
metric = "cosine"

[server]
port = 9000
admin-token = "s3cret"

[egc]
beta = 0.4
intensity = "euclidean"

[mstn]
idle-mode = "stochastic"
tie-break = "highest-group"
learn = false
group-targets = ["happy", "happy", "sad", "sad", "sad", "disgust", "angry", "fear", "surprise"]
"#;
        let c = EngineConfig::from_toml(text).unwrap();
        assert_eq!(c.seed, 7);
        assert_eq!(c.metric, DistanceMetric::Cosine);
        assert_eq!(c.server.port, 9000);
        assert_eq!(c.server.admin_token.as_deref(), Some("s3cret"));
        assert_eq!(c.egc.beta, 0.4);
        assert_eq!(c.mstn.idle_mode, IdleMode::Stochastic);
        assert!(!c.mstn.learn);
    }

    #[test]
    fn env_overrides() {
        let mut c = EngineConfig::default();
        c.apply_env_from([
            ("CONCIERGE_PORT", "7070"),
            ("CONCIERGE_BETA", "0.3"),
            ("CONCIERGE_IDLE_MODE", "stochastic"),
            ("CONCIERGE_SEED", "99"),
            ("CONCIERGE_DATA_DIR", "/tmp/x"),
            ("UNRELATED", "1"),
        ])
        .unwrap();
        assert_eq!(c.server.port, 7070);
        assert_eq!(c.egc.beta, 0.3);
        assert_eq!(c.mstn.idle_mode, IdleMode::Stochastic);
        assert_eq!(c.seed, 99);
        assert_eq!(c.data_dir, Some(PathBuf::from("/tmp/x")));
        assert!(c.apply_env_from([("CONCIERGE_ALPHA", "0")]).is_err());
        assert!(c.apply_env_from([("CONCIERGE_PORT", "http")]).is_err());
    }
}
