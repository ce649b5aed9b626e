//! Plain-text `key = value` configuration with line-anchored errors.
//!
//! Blank lines and `#` comments are ignored. Values set later through
//! [`KvConfig::set`] (command-line overrides) carry line 0.

use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KvEntry {
    pub key: String,
    pub value: String,
    pub line: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KvConfig {
    entries: Vec<KvEntry>,
}

fn config_err(line: usize, message: impl Into<String>) -> Error {
    Error::Config {
        line,
        message: message.into(),
    }
}

impl KvConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = KvConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let Some((k, v)) = body.split_once('=') else {
                return Err(config_err(line, format!("expected key = value, got '{body}'")));
            };
            let key = k.trim();
            if key.is_empty() || key.contains(char::is_whitespace) {
                return Err(config_err(line, format!("invalid key '{key}'")));
            }
            if let Some(prev) = cfg.entry(key) {
                return Err(config_err(line, format!("duplicate key '{key}' (first set on line {})", prev.line)));
            }
            cfg.entries.push(KvEntry {
                key: key.to_string(),
                value: v.trim().to_string(),
                line,
            });
        }
        Ok(cfg)
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[KvEntry] {
        &self.entries
    }

    pub fn entry(&self, key: &str) -> Option<&KvEntry> {
        self.entries.iter().find(|e| e.key == key)
    }

    /// Sets or replaces a value.
    pub fn set(&mut self, key: &str, value: &str) {
        match self.entries.iter_mut().find(|e| e.key == key) {
            Some(e) => {
                e.value = value.to_string();
                e.line = 0;
            }
            None => self.entries.push(KvEntry {
                key: key.to_string(),
                value: value.to_string(),
                line: 0,
            }),
        }
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.entry(key) {
            None => Ok(None),
            Some(e) => e
                .value
                .parse::<T>()
                .map(Some)
                .map_err(|err| config_err(e.line, format!("bad value for '{key}': '{}' ({err})", e.value))),
        }
    }

    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        Ok(self.get(key)?.unwrap_or(default))
    }

    /// Comma-separated list.
    pub fn get_list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>>
    where
        T::Err: std::fmt::Display,
    {
        let Some(e) = self.entry(key) else {
            return Ok(None);
        };
        e.value
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<T>()
                    .map_err(|err| config_err(e.line, format!("bad list item for '{key}': '{}' ({err})", s.trim())))
            })
            .collect::<Result<Vec<T>>>()
            .map(Some)
    }

    /// Rejects keys outside `known`.
    pub fn check_known(&self, known: &[&str]) -> Result<()> {
        match self.entries.iter().find(|e| !known.contains(&e.key.as_str())) {
            Some(e) => Err(config_err(e.line, format!("unknown key '{}'", e.key))),
            None => Ok(()),
        }
    }

    /// Error anchored at the line of `key` (line 0 when absent).
    pub fn error_at(&self, key: &str, message: impl Into<String>) -> Error {
        config_err(self.entry(key).map_or(0, |e| e.line), message)
    }

    /// Entries whose key is in `keys`, with their lines kept.
    pub fn subset(&self, keys: &[&str]) -> KvConfig {
        KvConfig {
            entries: self.entries.iter().filter(|e| keys.contains(&e.key.as_str())).cloned().collect(),
        }
    }

    /// Canonical text, keys sorted.
    pub fn to_canonical(&self) -> String {
        let mut e: Vec<&KvEntry> = self.entries.iter().collect();
        e.sort_by(|a, b| a.key.cmp(&b.key));
        e.iter().map(|e| format!("{} = {}\n", e.key, e.value)).collect()
    }
}
