//! Resolution of configurable values: command-line flags take precedence
//! over environment variables, which take precedence over an optional flat
//! `key=value` config file, which takes precedence over built-in defaults.

use crate::CliError;
use std::collections::HashMap;
use std::path::Path;

pub const ENV_SEED: &str = "EQMHT_SEED";
pub const ENV_WORKERS: &str = "EQMHT_WORKERS";

/// Parsed `key=value` config file; empty when no file was given.
pub struct ConfigFile {
    values: HashMap<String, String>,
}

impl ConfigFile {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let mut values = HashMap::new();
        if let Some(path) = path {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            for (lineno, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let Some((key, value)) = line.split_once('=') else {
                    return Err(CliError::Usage(format!(
                        "{}:{}: expected key=value, got {line:?}",
                        path.display(),
                        lineno + 1
                    )));
                };
                values.insert(key.trim().to_string(), value.trim().to_string());
            }
        }
        Ok(Self { values })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(|s| s.as_str())
    }

    fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, CliError> {
        match self.get(key) {
            None => Ok(None),
            Some(raw) => raw.parse().map(Some).map_err(|_| {
                CliError::Usage(format!("config key {key}: cannot parse {raw:?}"))
            }),
        }
    }
}

fn env_parse<T: std::str::FromStr>(name: &str) -> Result<Option<T>, CliError> {
    match std::env::var(name) {
        Err(_) => Ok(None),
        Ok(raw) => raw
            .parse()
            .map(Some)
            .map_err(|_| CliError::Usage(format!("env var {name}: cannot parse {raw:?}"))),
    }
}

/// Seed resolution: flag > EQMHT_SEED > config file > default 1729.
pub fn resolve_seed(flag: Option<u64>, config: &ConfigFile) -> Result<u64, CliError> {
    if let Some(v) = flag {
        return Ok(v);
    }
    if let Some(v) = env_parse::<u64>(ENV_SEED)? {
        return Ok(v);
    }
    Ok(config.parse::<u64>("seed")?.unwrap_or(1729))
}

/// Worker resolution: flag > EQMHT_WORKERS > config file > available cores.
pub fn resolve_workers(flag: Option<usize>, config: &ConfigFile) -> Result<usize, CliError> {
    let resolved = if let Some(v) = flag {
        v
    } else if let Some(v) = env_parse::<usize>(ENV_WORKERS)? {
        v
    } else if let Some(v) = config.parse::<usize>("workers")? {
        v
    } else {
        std::thread::available_parallelism()
            .map(|n| n.get())
            .unwrap_or(1)
    };
    if resolved == 0 {
        return Err(CliError::Usage("workers must be >= 1".into()));
    }
    Ok(resolved)
}
