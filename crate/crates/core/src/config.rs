//! Flat key-value configuration text.
//!
//! One `key = value` pair per line; lines whose first non-blank character
//! is `#` are comments. Readers consume keys one by one and then call
//! [`ConfigMap::finish`], so unknown or misspelled keys fail loudly
//! instead of silently using defaults.

use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{origin}:{line}: expected `key = value`, found {found:?}")]
    Syntax { origin: String, line: usize, found: String },
    #[error("{origin}: duplicate key {key:?}")]
    Duplicate { origin: String, key: String },
    #[error("{origin}: unknown keys: {keys}")]
    Unknown { origin: String, keys: String },
    #[error("{origin}: key {key:?}: cannot parse {value:?} as {expected}")]
    BadValue { origin: String, key: String, value: String, expected: &'static str },
    #[error("{origin}: missing required key {key:?}")]
    Missing { origin: String, key: String },
    #[error("{origin}: keys {a:?} and {b:?} are mutually exclusive")]
    Exclusive { origin: String, a: String, b: String },
}

/// Parsed key-value pairs with consumption tracking.
#[derive(Clone, Debug)]
pub struct ConfigMap {
    origin: String,
    entries: Vec<(String, String, bool)>,
}

impl ConfigMap {
    pub fn parse(text: &str, origin: &str) -> Result<Self, ConfigError> {
        let mut entries: Vec<(String, String, bool)> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError::Syntax {
                    origin: origin.into(),
                    line: idx + 1,
                    found: raw.into(),
                });
            };
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() || value.is_empty() {
                return Err(ConfigError::Syntax {
                    origin: origin.into(),
                    line: idx + 1,
                    found: raw.into(),
                });
            }
            if entries.iter().any(|(k, _, _)| k == key) {
                return Err(ConfigError::Duplicate { origin: origin.into(), key: key.into() });
            }
            entries.push((key.into(), value.into(), false));
        }
        Ok(Self { origin: origin.into(), entries })
    }

    pub fn origin(&self) -> &str {
        &self.origin
    }

    /// Whether the key is present (consumed or not).
    pub fn contains(&self, key: &str) -> bool {
        self.entries.iter().any(|(k, _, _)| k == key)
    }

    /// Removes the key from the unknown set and returns its raw value.
    pub fn take(&mut self, key: &str) -> Option<String> {
        self.entries.iter_mut().find(|(k, _, _)| k == key).map(|entry| {
            entry.2 = true;
            entry.1.clone()
        })
    }

    /// Takes a value and parses it, labeling failures with the key.
    pub fn take_parsed<T: FromStr>(
        &mut self,
        key: &str,
        expected: &'static str,
    ) -> Result<Option<T>, ConfigError> {
        match self.take(key) {
            None => Ok(None),
            Some(value) => value.parse::<T>().map(Some).map_err(|_| ConfigError::BadValue {
                origin: self.origin.clone(),
                key: key.into(),
                value,
                expected,
            }),
        }
    }

    /// Takes a whitespace-separated list value.
    pub fn take_list<T: FromStr>(
        &mut self,
        key: &str,
        expected: &'static str,
    ) -> Result<Option<Vec<T>>, ConfigError> {
        match self.take(key) {
            None => Ok(None),
            Some(value) => value
                .split_whitespace()
                .map(|item| {
                    item.parse::<T>().map_err(|_| ConfigError::BadValue {
                        origin: self.origin.clone(),
                        key: key.into(),
                        value: value.clone(),
                        expected,
                    })
                })
                .collect::<Result<Vec<T>, _>>()
                .map(Some),
        }
    }

    /// Replaces the key's value, or appends the pair if absent. Lets a
    /// caller overlay higher-precedence settings (command-line flags, say)
    /// on top of parsed text before handing the map to a reader.
    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        let value = value.into();
        match self.entries.iter_mut().find(|(k, _, _)| k == key) {
            Some(entry) => {
                entry.1 = value;
                entry.2 = false;
            }
            None => self.entries.push((key.into(), value, false)),
        }
    }

    pub fn missing(&self, key: &str) -> ConfigError {
        ConfigError::Missing { origin: self.origin.clone(), key: key.into() }
    }

    pub fn exclusive(&self, a: &str, b: &str) -> ConfigError {
        ConfigError::Exclusive { origin: self.origin.clone(), a: a.into(), b: b.into() }
    }

    /// Rejects any key never consumed by the reader.
    pub fn finish(self) -> Result<(), ConfigError> {
        let leftover: Vec<&str> = self
            .entries
            .iter()
            .filter(|(_, _, consumed)| !consumed)
            .map(|(k, _, _)| k.as_str())
            .collect();
        if leftover.is_empty() {
            Ok(())
        } else {
            Err(ConfigError::Unknown { origin: self.origin, keys: leftover.join(", ") })
        }
    }
}

/// Renders pairs in the given order as `key = value` lines.
pub fn serialize(pairs: &[(&str, String)]) -> String {
    let mut out = String::new();
    for (key, value) in pairs {
        out.push_str(key);
        out.push_str(" = ");
        out.push_str(value);
        out.push('\n');
    }
    out
}

/// FNV-1a 64-bit hash.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// Order-independent hash of a key-value set: pairs are sorted by key and
/// hashed as `key=value\n`, so formatting and ordering do not matter.
pub fn hash_pairs(pairs: &[(&str, String)]) -> u64 {
    let mut sorted: Vec<&(&str, String)> = pairs.iter().collect();
    sorted.sort_by_key(|(k, _)| *k);
    let mut canon = String::new();
    for (key, value) in sorted {
        canon.push_str(key);
        canon.push('=');
        canon.push_str(value);
        canon.push('\n');
    }
    fnv1a64(canon.as_bytes())
}
