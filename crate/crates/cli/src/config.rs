//! Run configuration: `key = value` config files merged with command-line
//! flags. Flags win over the file; the `DEKOMPOST_SEED` environment
//! variable overrides the built-in default seed when neither a flag nor a
//! config entry sets one. Unknown config keys produce a warning, never an
//! error.

use std::collections::HashMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use crate::commands::CliError;

pub const DEFAULT_SEED: u64 = 13;
pub const SEED_ENV: &str = "DEKOMPOST_SEED";

pub struct RunConfig {
    values: HashMap<String, String>,
    resolved: Vec<(String, String)>,
}

impl RunConfig {
    /// Parse the optional config file, warning about keys the current
    /// command does not consume.
    pub fn load(path: Option<&Path>, known_keys: &[&str]) -> Result<RunConfig, CliError> {
        let mut values = HashMap::new();
        if let Some(path) = path {
            let text = std::fs::read_to_string(path).map_err(|e| {
                CliError::Data(format!("cannot read config {}: {e}", path.display()))
            })?;
            for (i, raw) in text.lines().enumerate() {
                let line = raw.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let Some((k, v)) = line.split_once('=') else {
                    return Err(CliError::Data(format!(
                        "config line {}: expected key = value",
                        i + 1
                    )));
                };
                let key = k.trim().to_string();
                if !known_keys.contains(&key.as_str()) {
                    eprintln!("warning: unknown config key: {key}");
                }
                values.insert(key, v.trim().to_string());
            }
        }
        Ok(RunConfig {
            values,
            resolved: Vec::new(),
        })
    }

    fn file_value<T: FromStr>(&self, key: &str) -> Result<Option<T>, CliError> {
        match self.values.get(key) {
            None => Ok(None),
            Some(raw) => raw.parse().map(Some).map_err(|_| {
                CliError::Data(format!("config key {key}: cannot parse value {raw:?}"))
            }),
        }
    }

    /// Flag wins, then the config file, then the default.
    pub fn resolve<T: FromStr + Display>(
        &mut self,
        key: &str,
        flag: Option<T>,
        default: T,
    ) -> Result<T, CliError> {
        let value = match flag {
            Some(v) => v,
            None => self.file_value(key)?.unwrap_or(default),
        };
        self.resolved.push((key.to_string(), value.to_string()));
        Ok(value)
    }

    /// Flag wins, then the config file; may stay unset.
    pub fn resolve_opt<T: FromStr + Display>(
        &mut self,
        key: &str,
        flag: Option<T>,
    ) -> Result<Option<T>, CliError> {
        let value = match flag {
            Some(v) => Some(v),
            None => self.file_value(key)?,
        };
        if let Some(v) = &value {
            self.resolved.push((key.to_string(), v.to_string()));
        }
        Ok(value)
    }

    /// Seed precedence: flag, config file, `DEKOMPOST_SEED`, built-in 13.
    pub fn resolve_seed(&mut self, flag: Option<u64>) -> Result<u64, CliError> {
        let env_seed = match std::env::var(SEED_ENV) {
            Ok(raw) => Some(raw.parse::<u64>().map_err(|_| {
                CliError::Data(format!("{SEED_ENV}: cannot parse seed {raw:?}"))
            })?),
            Err(_) => None,
        };
        let value = match flag {
            Some(v) => v,
            None => match self.file_value("seed")? {
                Some(v) => v,
                None => env_seed.unwrap_or(DEFAULT_SEED),
            },
        };
        self.resolved.push(("seed".to_string(), value.to_string()));
        Ok(value)
    }

    /// One machine-readable line with every resolved setting.
    pub fn print(&self, command: &str) {
        let mut parts: Vec<String> = self
            .resolved
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect();
        parts.sort();
        println!("CONFIG cmd={command} {}", parts.join(" "));
    }
}

/// `RESULT key=value ...` line, machine-parseable.
pub fn print_result(pairs: &[(&str, String)]) {
    let body: Vec<String> = pairs.iter().map(|(k, v)| format!("{k}={v}")).collect();
    println!("RESULT {}", body.join(" "));
}
