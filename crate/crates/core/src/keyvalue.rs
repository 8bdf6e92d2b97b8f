//! Flat `key = value` text files with `#` comments.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Parsed entries; every lookup marks the key as used so leftovers can be
/// reported as unknown.
#[derive(Clone, Debug, Default)]
pub struct KeyValues {
    entries: BTreeMap<String, (String, usize)>,
    used: std::cell::RefCell<std::collections::BTreeSet<String>>,
}

impl KeyValues {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::format(n + 1, format!("expected `key = value`, got `{line}`")))?;
            let key = k.trim().to_string();
            if key.is_empty() {
                return Err(Error::format(n + 1, "empty key"));
            }
            if entries.insert(key.clone(), (v.trim().to_string(), n + 1)).is_some() {
                return Err(Error::format(n + 1, format!("duplicate key `{key}`")));
            }
        }
        Ok(Self { entries, used: Default::default() })
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        let v = self.entries.get(key).map(|(v, _)| v.as_str());
        if v.is_some() {
            self.used.borrow_mut().insert(key.to_string());
        }
        v
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: Display,
    {
        self.raw(key)
            .map(|v| v.parse::<T>().map_err(|e| Error::config(key, format!("cannot parse `{v}`: {e}"))))
            .transpose()
    }

    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T>
    where
        T::Err: Display,
    {
        Ok(self.get(key)?.unwrap_or(default))
    }

    /// Comma-separated list.
    pub fn list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>>
    where
        T::Err: Display,
    {
        self.raw(key)
            .map(|v| {
                v.split(',')
                    .map(|item| {
                        item.trim()
                            .parse::<T>()
                            .map_err(|e| Error::config(key, format!("cannot parse `{}`: {e}", item.trim())))
                    })
                    .collect()
            })
            .transpose()
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    /// First key never looked up, if any.
    pub fn first_unused(&self) -> Option<String> {
        let used = self.used.borrow();
        self.entries.keys().find(|k| !used.contains(*k)).cloned()
    }

    pub fn reject_unknown(&self) -> Result<()> {
        match self.first_unused() {
            Some(k) => Err(Error::config(k, "unknown key")),
            None => Ok(()),
        }
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }
}
