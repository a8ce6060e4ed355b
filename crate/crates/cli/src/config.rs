//! `key = value` configuration files and flag-over-file resolution.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Debug;
use std::path::Path;
use std::str::FromStr;

use log::warn;

use crate::error::{CliError, CliResult};

/// Parses `key = value` lines. `#` starts a comment; keys are normalized to
/// lower case with `-` replaced by `_`.
pub fn parse_config(text: &str) -> CliResult<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::Input(format!(
                "config line {}: expected `key = value`, got `{raw}`",
                n + 1
            )));
        };
        let key = normalize(key);
        let value = value.trim().trim_matches('"').to_string();
        if key.is_empty() || value.is_empty() {
            return Err(CliError::Input(format!(
                "config line {}: empty key or value",
                n + 1
            )));
        }
        if out.insert(key.clone(), value).is_some() {
            return Err(CliError::Input(format!(
                "config line {}: duplicate key `{key}`",
                n + 1
            )));
        }
    }
    Ok(out)
}

fn normalize(key: &str) -> String {
    key.trim().to_ascii_lowercase().replace('-', "_")
}

/// Merges command-line flags with an optional config file. Every file key
/// must be consumed by the running subcommand.
#[derive(Debug, Default)]
pub struct Settings {
    file: BTreeMap<String, String>,
    used: BTreeSet<String>,
}

impl Settings {
    pub fn new(file: BTreeMap<String, String>) -> Self {
        Settings {
            file,
            used: BTreeSet::new(),
        }
    }

    pub fn load(path: Option<&Path>) -> CliResult<Self> {
        let Some(path) = path else {
            return Ok(Settings::default());
        };
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::Input(format!("cannot read config {}: {e}", path.display()))
        })?;
        Ok(Settings::new(parse_config(&text)?))
    }

    /// The flag when given (with a notice if the file disagrees), else the
    /// file value, else `None`.
    pub fn get<T>(&mut self, key: &str, flag: Option<T>) -> CliResult<Option<T>>
    where
        T: FromStr + PartialEq + Debug,
    {
        self.used.insert(key.to_string());
        let from_file = match self.file.get(key) {
            Some(v) => Some(v.parse::<T>().map_err(|_| {
                CliError::Input(format!("config key `{key}`: cannot parse `{v}`"))
            })?),
            None => None,
        };
        match (flag, from_file) {
            (Some(f), Some(v)) => {
                if f != v {
                    warn!("--{} {f:?} overrides config value {v:?}", key.replace('_', "-"));
                }
                Ok(Some(f))
            }
            (Some(f), None) => Ok(Some(f)),
            (None, v) => Ok(v),
        }
    }

    /// Boolean switch: present on the command line, or `true` in the file.
    pub fn switch(&mut self, key: &str, flag: bool) -> CliResult<bool> {
        Ok(self.get(key, flag.then_some(true))?.unwrap_or(false))
    }

    pub fn or<T>(&mut self, key: &str, flag: Option<T>, default: T) -> CliResult<T>
    where
        T: FromStr + PartialEq + Debug,
    {
        Ok(self.get(key, flag)?.unwrap_or(default))
    }

    /// Rejects file keys that nothing asked for.
    pub fn finish(&self) -> CliResult<()> {
        let unknown: Vec<&str> = self
            .file
            .keys()
            .filter(|k| !self.used.contains(*k))
            .map(String::as_str)
            .collect();
        if unknown.is_empty() {
            Ok(())
        } else {
            Err(CliError::Input(format!(
                "unknown config key(s): {}",
                unknown.join(", ")
            )))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_normalizes_keys() {
        let m = parse_config("# header\nmu = -5\n  Lock-Beta=true # trailing\n\n").unwrap();
        assert_eq!(m["mu"], "-5");
        assert_eq!(m["lock_beta"], "true");
    }

    #[test]
    fn rejects_malformed_lines() {
        assert!(parse_config("mu -5").is_err());
        assert!(parse_config("mu =").is_err());
        assert!(parse_config("mu = 1\nmu = 2").is_err());
    }

    #[test]
    fn flag_wins_over_file() {
        let mut s = Settings::new(parse_config("mu = -5\ndelta = 1.3").unwrap());
        assert_eq!(s.get::<f64>("mu", Some(2.0)).unwrap(), Some(2.0));
        assert_eq!(s.get::<f64>("delta", None).unwrap(), Some(1.3));
        assert_eq!(s.get::<f64>("alpha", None).unwrap(), None);
        s.finish().unwrap();
    }

    #[test]
    fn unknown_and_unparsable_keys_rejected() {
        let mut s = Settings::new(parse_config("mu = -5\nfoo = 1").unwrap());
        s.get::<f64>("mu", None).unwrap();
        assert!(s.finish().is_err());
        let mut s = Settings::new(parse_config("mu = abc").unwrap());
        assert!(s.get::<f64>("mu", None).is_err());
    }
}
