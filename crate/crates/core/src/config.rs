//! Flat `key = value` configuration files.
//!
//! One entry per line; blank lines and lines starting with `#` are ignored.
//! Keys may not repeat.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Config {
    entries: BTreeMap<String, (String, usize)>,
}

impl Config {
    pub fn parse<R: BufRead>(reader: R) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, line) in reader.lines().enumerate() {
            let line_no = i + 1;
            let line = line.map_err(|e| Error::parse("config", line_no, e.to_string()))?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::parse("config", line_no, "expected key = value"))?;
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() || key.contains(char::is_whitespace) {
                return Err(Error::parse("config", line_no, format!("invalid key {key:?}")));
            }
            if value.is_empty() {
                return Err(Error::parse("config", line_no, format!("key {key:?} has no value")));
            }
            if let Some((_, first)) = entries.insert(key.to_owned(), (value.to_owned(), line_no)) {
                return Err(Error::parse(
                    "config",
                    line_no,
                    format!("key {key:?} already set on line {first}"),
                ));
            }
        }
        Ok(Config { entries })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Config::parse(BufReader::new(file))
    }

    pub fn get_str(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|(v, _)| v.as_str())
    }

    /// Typed lookup; `Ok(None)` when the key is absent.
    pub fn get<T>(&self, key: &str) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: Display,
    {
        match self.entries.get(key) {
            None => Ok(None),
            Some((value, line)) => value
                .parse()
                .map(Some)
                .map_err(|e| Error::parse("config", *line, format!("{key}: {e}"))),
        }
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}
