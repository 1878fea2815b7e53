//! Suite configuration: one TOML file shared by every binary, with
//! `AA_*` environment overrides.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{DEFAULT_SLOT_SECS, DEFAULT_TOLERANCE_SECS};
use crate::parser::ParserConfig;
use crate::rdf::vocab::DEFAULT_NAMESPACE;
use crate::session::{check_grid, DEFAULT_GAP_SECS};
use crate::store::StoreConfig;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("bad config {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("bad value for {key}: {value:?}")]
    BadValue { key: String, value: String },
    #[error("slot/tolerance grid invalid: {0}")]
    Grid(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct SuiteConfig {
    pub bind: String,
    pub port: u16,
    pub journal: PathBuf,
    pub slot_secs: i64,
    pub tolerance_secs: i64,
    pub gap_secs: i64,
    pub report_n: usize,
    pub namespace: String,
    pub parser: ParserConfig,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            bind: "127.0.0.1".into(),
            port: 8080,
            journal: PathBuf::from("aa-journal.jsonl"),
            slot_secs: DEFAULT_SLOT_SECS,
            tolerance_secs: DEFAULT_TOLERANCE_SECS,
            gap_secs: DEFAULT_GAP_SECS,
            report_n: 20,
            namespace: DEFAULT_NAMESPACE.into(),
            parser: ParserConfig::default(),
        }
    }
}

fn word_set(value: &str) -> BTreeSet<String> {
    value
        .split(',')
        .map(|w| w.trim().trim_start_matches(['#', '+']).to_lowercase())
        .filter(|w| !w.is_empty())
        .collect()
}

impl SuiteConfig {
    pub fn from_toml(text: &str, path: &Path) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    /// Reads `path`; a missing file yields the defaults.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        match std::fs::read_to_string(path) {
            Ok(text) => Self::from_toml(&text, path),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(Self::default()),
            Err(source) => Err(ConfigError::Read {
                path: path.to_path_buf(),
                source,
            }),
        }
    }

    /// Applies `AA_*` overrides from the given variables.
    pub fn apply_env<I, K, V>(&mut self, vars: I) -> Result<(), ConfigError>
    where
        I: IntoIterator<Item = (K, V)>,
        K: AsRef<str>,
        V: AsRef<str>,
    {
        for (key, value) in vars {
            let (key, value) = (key.as_ref(), value.as_ref());
            let bad = || ConfigError::BadValue {
                key: key.to_string(),
                value: value.to_string(),
            };
            match key {
                "AA_BIND" => self.bind = value.to_string(),
                "AA_PORT" => self.port = value.parse().map_err(|_| bad())?,
                "AA_JOURNAL" => self.journal = PathBuf::from(value),
                "AA_SLOT_SECS" => self.slot_secs = value.parse().map_err(|_| bad())?,
                "AA_TOLERANCE_SECS" => self.tolerance_secs = value.parse().map_err(|_| bad())?,
                "AA_GAP_SECS" => self.gap_secs = value.parse().map_err(|_| bad())?,
                "AA_REPORT_N" => self.report_n = value.parse().map_err(|_| bad())?,
                "AA_NAMESPACE" => self.namespace = value.to_string(),
                "AA_UBIQUITOUS" => self.parser.ubiquitous = word_set(value),
                "AA_WORD_LEXICON" => self.parser.word_lexicon = word_set(value),
                _ => {}
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        check_grid(self.slot_secs, self.tolerance_secs)
            .map_err(|e| ConfigError::Grid(e.to_string()))?;
        if self.gap_secs <= 0 {
            return Err(ConfigError::BadValue {
                key: "gap_secs".into(),
                value: self.gap_secs.to_string(),
            });
        }
        Ok(())
    }

    /// Loads the file, applies the process environment and validates.
    pub fn resolve(path: Option<&Path>) -> Result<Self, ConfigError> {
        let mut config = match path {
            Some(p) => Self::load(p)?,
            None => Self::default(),
        };
        config.apply_env(std::env::vars())?;
        config.validate()?;
        Ok(config)
    }

    pub fn store_config(&self) -> StoreConfig {
        StoreConfig {
            slot_secs: self.slot_secs,
            tolerance_secs: self.tolerance_secs,
            gap_secs: self.gap_secs,
            report_n: self.report_n,
            parser: self.parser.clone(),
        }
    }
}
