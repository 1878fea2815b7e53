//! Per-user client configuration.

use std::path::{Path, PathBuf};
use std::time::Duration;

use aa_core::model::{DEFAULT_SLOT_SECS, DEFAULT_TOLERANCE_SECS};
use aa_core::session::check_grid;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("bad config {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("bad value for {key}: {value:?}")]
    BadValue { key: String, value: String },
    #[error("{0}")]
    Invalid(String),
}

mod human {
    use super::*;

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&humantime::format_duration(*d).to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        let text = String::deserialize(d)?;
        humantime::parse_duration(&text).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClientConfig {
    pub server_url: String,
    pub nick: String,
    #[serde(with = "human")]
    pub slot: Duration,
    #[serde(with = "human")]
    pub tolerance: Duration,
    pub spool: PathBuf,
}

fn data_dir() -> PathBuf {
    dirs::data_local_dir()
        .unwrap_or_else(std::env::temp_dir)
        .join("aa")
}

impl Default for ClientConfig {
    fn default() -> Self {
        ClientConfig {
            server_url: "http://127.0.0.1:8080".into(),
            nick: std::env::var("USER").unwrap_or_default().to_lowercase(),
            slot: Duration::from_secs(DEFAULT_SLOT_SECS as u64),
            tolerance: Duration::from_secs(DEFAULT_TOLERANCE_SECS as u64),
            spool: data_dir().join("spool.jsonl"),
        }
    }
}

/// `<config dir>/aa/config.toml`.
pub fn default_path() -> Option<PathBuf> {
    dirs::config_dir().map(|d| d.join("aa").join("config.toml"))
}

/// Reads a TOML file into `T`; a missing file yields `T::default()`.
pub fn load_toml<T: Default + for<'de> Deserialize<'de>>(path: &Path) -> Result<T, ConfigError> {
    match std::fs::read_to_string(path) {
        Ok(text) => toml::from_str(&text).map_err(|e| ConfigError::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        }),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(T::default()),
        Err(source) => Err(ConfigError::Read {
            path: path.to_path_buf(),
            source,
        }),
    }
}

/// Command-line overrides, applied last.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub server: Option<String>,
    pub nick: Option<String>,
    pub slot: Option<Duration>,
    pub tolerance: Option<Duration>,
    pub spool: Option<PathBuf>,
}

impl ClientConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, ConfigError> {
        match path.map(Path::to_path_buf).or_else(default_path) {
            Some(p) => load_toml(&p),
            None => Ok(ClientConfig::default()),
        }
    }

    pub fn apply_env<I: IntoIterator<Item = (String, String)>>(&mut self, vars: I) {
        for (k, v) in vars {
            match k.as_str() {
                "AA_SERVER" => self.server_url = v,
                "AA_NICK" => self.nick = v,
                _ => {}
            }
        }
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(s) = &o.server {
            self.server_url = s.clone();
        }
        if let Some(n) = &o.nick {
            self.nick = n.clone();
        }
        if let Some(s) = o.slot {
            self.slot = s;
        }
        if let Some(t) = o.tolerance {
            self.tolerance = t;
        }
        if let Some(p) = &o.spool {
            self.spool = p.clone();
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        url::Url::parse(&self.server_url).map_err(|_| ConfigError::BadValue {
            key: "server_url".into(),
            value: self.server_url.clone(),
        })?;
        if self.nick.trim().is_empty() {
            return Err(ConfigError::Invalid(
                "no nick configured; use --nick or AA_NICK".into(),
            ));
        }
        if self.slot.subsec_nanos() != 0 || self.tolerance.subsec_nanos() != 0 {
            return Err(ConfigError::Invalid(
                "slot and tolerance must be whole seconds".into(),
            ));
        }
        check_grid(self.slot.as_secs() as i64, self.tolerance.as_secs() as i64)
            .map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    /// File, then environment, then flags.
    pub fn resolve(path: Option<&Path>, overrides: &Overrides) -> Result<Self, ConfigError> {
        let mut config = ClientConfig::load(path)?;
        config.apply_env(std::env::vars());
        config.apply(overrides);
        config.validate()?;
        Ok(config)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_durations() {
        let c: ClientConfig = toml::from_str(
            "server_url = \"http://aa.example:9000\"\nnick = \"bob\"\nslot = \"10m\"\ntolerance = \"2m 30s\"\n",
        )
        .unwrap();
        assert_eq!(c.slot, Duration::from_secs(600));
        assert_eq!(c.tolerance, Duration::from_secs(150));
        c.validate().unwrap();
        let back: ClientConfig = toml::from_str(&toml::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn precedence() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("config.toml");
        std::fs::write(&path, "nick = \"file\"\nserver_url = \"http://file:1\"\n").unwrap();
        let mut c = ClientConfig::load(Some(&path)).unwrap();
        c.apply_env([("AA_NICK".to_string(), "env".to_string())]);
        assert_eq!(
            (c.nick.as_str(), c.server_url.as_str()),
            ("env", "http://file:1")
        );
        c.apply(&Overrides {
            nick: Some("flag".into()),
            ..Default::default()
        });
        assert_eq!(c.nick, "flag");
        let missing = ClientConfig::load(Some(&dir.path().join("none.toml"))).unwrap();
        assert_eq!(missing.slot, Duration::from_secs(900));
    }

    #[test]
    fn grid_checked() {
        let c = ClientConfig {
            nick: "bob".into(),
            slot: Duration::from_secs(600),
            tolerance: Duration::from_secs(300),
            ..ClientConfig::default()
        };
        assert!(c.validate().is_err());
        let c = ClientConfig {
            nick: "".into(),
            ..ClientConfig::default()
        };
        assert!(c.validate().is_err());
    }
}
