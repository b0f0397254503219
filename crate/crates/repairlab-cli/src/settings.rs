//! Config-file loading and flag resolution.
//!
//! Every long flag (except `--config` itself and `--help`/`--version`)
//! has a config-file equivalent: the flag name with dashes replaced by
//! underscores, in one flat JSON object. Effective values resolve as
//! flag > config file > environment (only `--root`) > built-in default.

use std::path::{Path, PathBuf};

use crate::CliError;

pub const DEFAULT_TOOL_DIR: &str = "tools";
pub const DEFAULT_BENCHMARK_DIR: &str = "benchmarks";
pub const DEFAULT_ROOT: &str = "results";
pub const RESULTS_ROOT_ENV: &str = "REPAIR_RESULTS_ROOT";

/// Config keys the loader accepts; anything else is a hard error so
/// typos never silently change an experiment.
pub const KNOWN_CONFIG_KEYS: &[&str] = &[
    "alpha",
    "benchmark",
    "benchmark_dir",
    "benchmarks",
    "budget",
    "bugs",
    "catalog",
    "command_length_limit",
    "filter",
    "format",
    "grace",
    "id",
    "json",
    "keep_workspace",
    "out",
    "parallelism",
    "patch_limit",
    "reference",
    "resume",
    "root",
    "seed",
    "setup_allowance",
    "tool_dir",
    "tools",
];

/// A parsed `--config` file: one flat JSON object.
#[derive(Debug, Default)]
pub struct ConfigFile {
    map: serde_json::Map<String, serde_json::Value>,
}

impl ConfigFile {
    pub fn load(path: Option<&Path>) -> Result<ConfigFile, CliError> {
        let Some(path) = path else {
            return Ok(ConfigFile::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("cannot read config file {path:?}: {e}")))?;
        let value: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| CliError::Input(format!("config file {path:?} is not valid JSON: {e}")))?;
        let serde_json::Value::Object(map) = value else {
            return Err(CliError::Input(format!(
                "config file {path:?} must hold one JSON object"
            )));
        };
        for key in map.keys() {
            if !KNOWN_CONFIG_KEYS.contains(&key.as_str()) {
                return Err(CliError::Input(format!(
                    "config file {path:?} has unknown key {key:?}"
                )));
            }
        }
        Ok(ConfigFile { map })
    }

    fn typed<T>(
        &self,
        key: &str,
        kind: &str,
        read: impl Fn(&serde_json::Value) -> Option<T>,
    ) -> Result<Option<T>, CliError> {
        match self.map.get(key) {
            None => Ok(None),
            Some(value) => read(value).map(Some).ok_or_else(|| {
                CliError::Input(format!("config key {key:?} must be {kind}, got {value}"))
            }),
        }
    }

    pub fn string(&self, key: &str) -> Result<Option<String>, CliError> {
        self.typed(key, "a string", |v| v.as_str().map(str::to_string))
    }

    pub fn path(&self, key: &str) -> Result<Option<PathBuf>, CliError> {
        Ok(self.string(key)?.map(PathBuf::from))
    }

    pub fn f64(&self, key: &str) -> Result<Option<f64>, CliError> {
        self.typed(key, "a number", |v| v.as_f64())
    }

    pub fn u64(&self, key: &str) -> Result<Option<u64>, CliError> {
        self.typed(key, "an unsigned integer", |v| v.as_u64())
    }

    pub fn u32(&self, key: &str) -> Result<Option<u32>, CliError> {
        self.typed(key, "an unsigned integer", |v| {
            v.as_u64().and_then(|n| u32::try_from(n).ok())
        })
    }

    pub fn usize(&self, key: &str) -> Result<Option<usize>, CliError> {
        self.typed(key, "an unsigned integer", |v| {
            v.as_u64().and_then(|n| usize::try_from(n).ok())
        })
    }

    pub fn bool(&self, key: &str) -> Result<Option<bool>, CliError> {
        self.typed(key, "a boolean", |v| v.as_bool())
    }

    /// A list value: a JSON array of strings, or one comma-separated
    /// string (the same shapes the flags accept).
    pub fn list(&self, key: &str) -> Result<Option<Vec<String>>, CliError> {
        self.typed(key, "an array of strings", |v| match v {
            serde_json::Value::Array(items) => items
                .iter()
                .map(|i| i.as_str().map(str::to_string))
                .collect(),
            serde_json::Value::String(s) => {
                Some(s.split(',').map(|p| p.trim().to_string()).collect())
            }
            _ => None,
        })
    }
}

/// flag > config > default.
pub fn resolve<T>(flag: Option<T>, config: Option<T>, default: T) -> T {
    flag.or(config).unwrap_or(default)
}

/// The results root resolves flag > config > `REPAIR_RESULTS_ROOT` >
/// built-in default.
pub fn resolve_root(flag: Option<PathBuf>, config: Option<PathBuf>) -> PathBuf {
    flag.or(config)
        .or_else(|| std::env::var_os(RESULTS_ROOT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_ROOT))
}
