//! Flat `key=value` report files.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Ordered key/value pairs with unique keys.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct KeyValues {
    entries: Vec<(String, String)>,
}

impl KeyValues {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends `key=value`; keys must be non-empty and free of `=`, `#` and whitespace.
    pub fn push(&mut self, key: &str, value: impl ToString) {
        debug_assert!(valid_key(key), "bad report key {key:?}");
        self.entries.push((key.to_string(), value.to_string()));
    }

    /// Appends a dB figure with two decimals.
    pub fn push_db(&mut self, key: &str, db: f64) {
        self.push(key, format!("{db:.2}"));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn to_text(&self) -> String {
        self.entries.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }

    pub fn to_map(&self) -> BTreeMap<String, String> {
        self.entries.iter().cloned().collect()
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut out = KeyValues::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let t = raw.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            let (k, v) = t.split_once('=').ok_or(Error::Report {
                line,
                reason: "expected key=value".into(),
            })?;
            let k = k.trim();
            if !valid_key(k) {
                return Err(Error::Report {
                    line,
                    reason: format!("invalid key `{k}`"),
                });
            }
            if out.get(k).is_some() {
                return Err(Error::Report {
                    line,
                    reason: format!("duplicate key `{k}`"),
                });
            }
            out.entries.push((k.to_string(), v.trim().to_string()));
        }
        Ok(out)
    }
}

fn valid_key(k: &str) -> bool {
    !k.is_empty() && !k.chars().any(|c| c == '=' || c == '#' || c.is_whitespace())
}
