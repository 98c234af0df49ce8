//! Flat `key = value` text configuration.
//!
//! Blank lines and lines starting with `#` are ignored. Trailing `# ...`
//! comments are stripped. Keys are case-sensitive; a repeated key is an error.

use std::fmt::Display;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KvEntry {
    pub key: String,
    pub value: String,
    pub line: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KvFile {
    pub path: String,
    pub entries: Vec<KvEntry>,
}

impl KvFile {
    pub fn parse(text: &str, path: &str) -> Result<Self> {
        let mut entries: Vec<KvEntry> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = match raw.find('#') {
                Some(p) => &raw[..p],
                None => raw,
            }
            .trim();
            if content.is_empty() {
                continue;
            }
            let Some((k, v)) = content.split_once('=') else {
                return Err(Error::Parse {
                    path: path.to_string(),
                    line,
                    msg: format!("expected `key = value`, got `{content}`"),
                });
            };
            let key = k.trim();
            if key.is_empty() {
                return Err(Error::Parse {
                    path: path.to_string(),
                    line,
                    msg: "empty key".into(),
                });
            }
            if let Some(prev) = entries.iter().find(|e| e.key == key) {
                return Err(Error::Parse {
                    path: path.to_string(),
                    line,
                    msg: format!("duplicate key `{key}` (first set on line {})", prev.line),
                });
            }
            entries.push(KvEntry {
                key: key.to_string(),
                value: v.trim().to_string(),
                line,
            });
        }
        Ok(Self {
            path: path.to_string(),
            entries,
        })
    }

    pub fn get(&self, key: &str) -> Option<&KvEntry> {
        self.entries.iter().find(|e| e.key == key)
    }

    /// Parses `key` if present.
    pub fn parse_opt<T>(&self, key: &str) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: Display,
    {
        match self.get(key) {
            None => Ok(None),
            Some(e) => e.value.parse::<T>().map(Some).map_err(|err| Error::Parse {
                path: self.path.clone(),
                line: e.line,
                msg: format!("bad value `{}` for `{key}`: {err}", e.value),
            }),
        }
    }

    pub fn error_at(&self, key: &str, msg: impl Into<String>) -> Error {
        Error::Parse {
            path: self.path.clone(),
            line: self.get(key).map_or(0, |e| e.line),
            msg: msg.into(),
        }
    }

    /// Fails on the first key not in `allowed`.
    pub fn reject_unknown(&self, allowed: &[&str]) -> Result<()> {
        match self.entries.iter().find(|e| !allowed.contains(&e.key.as_str())) {
            None => Ok(()),
            Some(e) => Err(Error::Parse {
                path: self.path.clone(),
                line: e.line,
                msg: format!("unknown key `{}`", e.key),
            }),
        }
    }

    /// Entries whose key starts with `prefix`, with the prefix removed.
    pub fn with_prefix(&self, prefix: &str) -> KvFile {
        KvFile {
            path: self.path.clone(),
            entries: self
                .entries
                .iter()
                .filter_map(|e| {
                    e.key.strip_prefix(prefix).map(|k| KvEntry {
                        key: k.to_string(),
                        value: e.value.clone(),
                        line: e.line,
                    })
                })
                .collect(),
        }
    }
}
