//! Flag / config-file merging. Flags win over the config file, which wins
//! over built-in defaults.

use std::fmt::Display;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use simthresh::config::Config;

pub struct Settings {
    config: Config,
    source: Option<PathBuf>,
}

impl Settings {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            None => Ok(Settings {
                config: Config::default(),
                source: None,
            }),
            Some(p) => {
                let config = Config::load(p).with_context(|| format!("reading config {}", p.display()))?;
                Ok(Settings {
                    config,
                    source: Some(p.to_owned()),
                })
            }
        }
    }

    fn context(&self) -> String {
        self.source
            .as_ref()
            .map_or_else(|| "config".to_owned(), |p| p.display().to_string())
    }

    /// The flag if given, else the config value for `key`.
    pub fn optional<T>(&self, flag: Option<T>, key: &str) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        self.config.get(key).map_err(|e| anyhow!("{}: {e}", self.context()))
    }

    pub fn or_default<T>(&self, flag: Option<T>, key: &str, default: T) -> Result<T>
    where
        T: FromStr,
        T::Err: Display,
    {
        Ok(self.optional(flag, key)?.unwrap_or(default))
    }

    pub fn required<T>(&self, flag: Option<T>, key: &str) -> Result<T>
    where
        T: FromStr,
        T::Err: Display,
    {
        self.optional(flag, key)?
            .ok_or_else(|| anyhow!("missing --{} (or `{key}` in the config file)", key.replace('_', "-")))
    }

    /// Boolean switch: set by the flag, or by `key = true` in the config.
    pub fn switch(&self, flag: bool, key: &str) -> Result<bool> {
        Ok(flag || self.optional::<bool>(None, key)?.unwrap_or(false))
    }

    /// Repeated flag, else a comma-separated config value.
    pub fn list(&self, flag: Vec<PathBuf>, key: &str) -> Result<Vec<PathBuf>> {
        if !flag.is_empty() {
            return Ok(flag);
        }
        Ok(self
            .config
            .get_str(key)
            .map(|v| {
                v.split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(PathBuf::from)
                    .collect()
            })
            .unwrap_or_default())
    }

    pub fn warn_unused(&self, known: &[&str]) {
        for key in self.config.keys() {
            if !known.contains(&key) {
                log::info!("{}: key {key:?} is not used by this command", self.context());
            }
        }
    }
}

/// Probe-term file: one term per line; blank lines and `#` lines skipped.
pub fn read_terms(path: &Path) -> Result<Vec<String>> {
    let file = File::open(path).with_context(|| format!("opening probe terms {}", path.display()))?;
    let mut terms = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.with_context(|| format!("{}: line {}", path.display(), i + 1))?;
        let term = line.trim();
        if term.is_empty() || term.starts_with('#') {
            continue;
        }
        terms.push(term.to_owned());
    }
    if terms.is_empty() {
        bail!("{}: no probe terms", path.display());
    }
    Ok(terms)
}

pub fn open_input(path: &Path) -> Result<BufReader<File>> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    Ok(BufReader::new(file))
}

/// A buffered file, or stdout when `path` is absent or `-`.
pub fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    match path {
        Some(p) if p != Path::new("-") => {
            let file = File::create(p).with_context(|| format!("creating {}", p.display()))?;
            Ok(Box::new(BufWriter::new(file)))
        }
        _ => Ok(Box::new(BufWriter::new(io::stdout().lock()))),
    }
}
