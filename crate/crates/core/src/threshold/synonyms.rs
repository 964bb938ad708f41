//! Synonym counts from a synset lexicon.
//!
//! File format: one synset per line, lemmas separated by spaces; multiword
//! lemmas join their words with underscores.

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use super::SynonymTarget;
use crate::error::{Error, Result};
use crate::stats;

const WHAT: &str = "synsets";

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SynsetFile {
    pub synsets: Vec<Vec<String>>,
}

impl SynsetFile {
    pub fn parse<R: BufRead>(reader: R) -> Result<Self> {
        let mut synsets = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::parse(WHAT, i + 1, e.to_string()))?;
            let lemmas: Vec<String> = line.split_whitespace().map(str::to_owned).collect();
            if !lemmas.is_empty() {
                synsets.push(lemmas);
            }
        }
        if synsets.is_empty() {
            return Err(Error::parse(WHAT, 0, "file contains no synsets"));
        }
        Ok(SynsetFile { synsets })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        SynsetFile::parse(BufReader::new(file))
    }
}

fn is_multiword(lemma: &str) -> bool {
    lemma.contains('_') || lemma.contains(' ')
}

/// Mean and population std of per-lemma synonym counts.
///
/// A lemma's synonyms are the distinct single-word lemmas sharing a synset
/// with it, itself excluded. Lemmas compare case-insensitively.
pub fn synonym_statistics(synsets: &SynsetFile) -> Result<SynonymTarget> {
    let mut ids: HashMap<String, usize> = HashMap::new();
    let mut synonyms: Vec<HashSet<usize>> = Vec::new();
    let mut members = Vec::new();
    for synset in &synsets.synsets {
        members.clear();
        for lemma in synset {
            let lemma = lemma.trim().to_lowercase();
            if lemma.is_empty() || is_multiword(&lemma) {
                continue;
            }
            let next = ids.len();
            let id = *ids.entry(lemma).or_insert(next);
            if id == synonyms.len() {
                synonyms.push(HashSet::new());
            }
            members.push(id);
        }
        for &a in &members {
            synonyms[a].extend(members.iter().copied().filter(|&b| b != a));
        }
    }
    if synonyms.is_empty() {
        return Err(Error::parse(WHAT, 0, "no single-word lemmas"));
    }
    let counts: Vec<f64> = synonyms.iter().map(|s| s.len() as f64).collect();
    Ok(SynonymTarget {
        mean_synonyms: stats::mean(&counts),
        std_synonyms: stats::population_std(&counts),
        term_count: counts.len(),
        source_label: "synsets".into(),
    })
}
