//! Tokenization, stopword removal and stemming.

mod porter;
mod stopwords;

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use porter::stem;
pub use stopwords::{default_stopwords, read_stopwords, DEFAULT_STOPWORDS};

use crate::error::{Error, Result};

/// Digit-only tokens longer than this are dropped.
pub const MAX_NUMBER_DIGITS: usize = 16;

/// Splits on non-alphanumeric characters and lowercases.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .filter(|t| !(t.len() > MAX_NUMBER_DIGITS && t.bytes().all(|b| b.is_ascii_digit())))
        .map(str::to_lowercase)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pipeline {
    stopwords: BTreeSet<String>,
    stem_enabled: bool,
}

impl Default for Pipeline {
    fn default() -> Self {
        Pipeline::new(default_stopwords(), true)
    }
}

impl Pipeline {
    pub fn new(stopwords: BTreeSet<String>, stem_enabled: bool) -> Self {
        Pipeline {
            stopwords,
            stem_enabled,
        }
    }

    pub fn from_stopword_reader<R: BufRead>(reader: R, stem_enabled: bool) -> Result<Self> {
        Ok(Pipeline::new(read_stopwords(reader)?, stem_enabled))
    }

    pub fn from_stopword_file(path: impl AsRef<Path>, stem_enabled: bool) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Pipeline::from_stopword_reader(BufReader::new(file), stem_enabled)
    }

    pub fn stopwords(&self) -> &BTreeSet<String> {
        &self.stopwords
    }

    pub fn stem_enabled(&self) -> bool {
        self.stem_enabled
    }

    pub fn is_stopword(&self, token: &str) -> bool {
        self.stopwords.contains(token)
    }

    /// Tokenize, drop stopwords, then stem.
    pub fn process(&self, text: &str) -> Vec<String> {
        tokenize(text)
            .into_iter()
            .filter(|t| !self.is_stopword(t))
            .map(|t| if self.stem_enabled { stem(&t) } else { t })
            .collect()
    }
}
