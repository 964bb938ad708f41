//! Translation language model: each query term may be generated by related
//! document terms, weighted by embedding similarity.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{dirichlet, rank, Index, LmConfig, ScoredDoc};
use crate::embedding::EmbeddingModel;
use crate::error::{Error, Result};

/// How expansion terms are chosen for a query term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ExpansionPolicy {
    None,
    /// Every vocabulary term with similarity at least the threshold.
    Threshold(f64),
    /// The `k` most similar terms.
    Knn(usize),
}

impl ExpansionPolicy {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ExpansionPolicy::Threshold(t) if t.is_nan() => {
                Err(Error::InvalidArgument("expansion threshold is NaN".into()))
            }
            ExpansionPolicy::Knn(0) => Err(Error::InvalidArgument("knn expansion needs k >= 1".into())),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for ExpansionPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExpansionPolicy::None => f.write_str("none"),
            ExpansionPolicy::Threshold(t) => write!(f, "threshold:{t}"),
            ExpansionPolicy::Knn(k) => write!(f, "knn:{k}"),
        }
    }
}

impl FromStr for ExpansionPolicy {
    type Err = Error;

    /// `none`, `threshold:<value>` or `knn:<k>`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("unknown expansion policy {s:?}"));
        let policy = match s.split_once(':') {
            None if s == "none" => ExpansionPolicy::None,
            Some(("threshold", v)) => ExpansionPolicy::Threshold(v.parse().map_err(|_| bad())?),
            Some(("knn", v)) => ExpansionPolicy::Knn(v.parse().map_err(|_| bad())?),
            _ => return Err(bad()),
        };
        policy.validate()?;
        Ok(policy)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranslationEntry {
    pub term: String,
    pub similarity: f64,
    pub probability: f64,
}

/// Per query term, its expansion set with `P_T(t_q | t_d)`. The self entry
/// comes first.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TranslationTable {
    entries: BTreeMap<String, Vec<TranslationEntry>>,
}

impl TranslationTable {
    /// Every term translates only to itself.
    pub fn self_only(query_terms: &[String]) -> Self {
        let mut table = TranslationTable::default();
        for t in query_terms {
            table.insert(t, Vec::new());
        }
        table
    }

    /// Adds `term` with the given neighbors; the self entry (similarity 1)
    /// is prepended and non-positive similarities are skipped.
    pub fn insert(&mut self, term: &str, neighbors: Vec<(String, f64)>) {
        let mut set = vec![(term.to_owned(), 1.0)];
        set.extend(neighbors.into_iter().filter(|(t, s)| *s > 0.0 && t != term));
        let total: f64 = set.iter().map(|(_, s)| s).sum();
        let entries = set
            .into_iter()
            .map(|(t, s)| TranslationEntry {
                term: t,
                similarity: s,
                probability: s / total,
            })
            .collect();
        self.entries.insert(term.to_owned(), entries);
    }

    pub fn get(&self, term: &str) -> Option<&[TranslationEntry]> {
        self.entries.get(term).map(Vec::as_slice)
    }

    pub fn terms(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Expansion sets for `query_terms` under `policy`. Terms unknown to the
/// embedding translate only to themselves.
pub fn build_translation_table(
    query_terms: &[String],
    policy: &ExpansionPolicy,
    embedding: &EmbeddingModel,
) -> Result<TranslationTable> {
    policy.validate()?;
    let mut table = TranslationTable::default();
    for t in query_terms {
        if table.get(t).is_some() {
            continue;
        }
        let neighbors = match (*policy, embedding.contains(t)) {
            (ExpansionPolicy::None, _) | (_, false) => Vec::new(),
            (ExpansionPolicy::Threshold(theta), true) => embedding.neighbors_above(t, theta)?,
            (ExpansionPolicy::Knn(k), true) => embedding.knn(t, k)?,
        };
        table.insert(t, neighbors.into_iter().map(|n| (n.token, n.similarity)).collect());
    }
    Ok(table)
}

/// Translation-model query likelihood:
/// `sum_q ln(sum_{t in set(q)} P_T(q | t) P(t | d))`, Dirichlet-smoothed.
///
/// Candidates are documents containing a term of some expansion set. A query
/// term is dropped with a warning when no term of its set occurs in the
/// collection.
pub fn tlm_score(
    index: &Index,
    config: &LmConfig,
    table: &TranslationTable,
    query_terms: &[String],
) -> Result<Vec<ScoredDoc>> {
    config.validate()?;
    if index.doc_count() == 0 {
        return Err(Error::EmptyIndex);
    }
    let mut kept: Vec<&[TranslationEntry]> = Vec::new();
    for t in query_terms {
        let set = table.get(t).ok_or_else(|| Error::MissingTranslation(t.clone()))?;
        if set.iter().all(|e| index.collection_count(&e.term) == 0) {
            log::warn!("query term {t:?} and its expansions do not occur in the collection; dropped");
        } else {
            kept.push(set);
        }
    }
    if kept.is_empty() {
        return Err(Error::EmptyQuery);
    }
    let mut tf_maps: HashMap<&str, HashMap<u32, u32>> = HashMap::new();
    for set in &kept {
        for e in set.iter() {
            tf_maps
                .entry(e.term.as_str())
                .or_insert_with(|| index.doc_term_frequencies(&e.term));
        }
    }
    let mut candidates: Vec<u32> = tf_maps.values().flat_map(|m| m.keys().copied()).collect();
    candidates.sort_unstable();
    candidates.dedup();

    let scores = candidates
        .into_iter()
        .map(|doc| {
            let len = index.doc_length(doc);
            let mut score = 0.0;
            for set in &kept {
                let mut inner = 0.0;
                for e in set.iter() {
                    let tf = tf_maps[e.term.as_str()].get(&doc).copied().unwrap_or(0);
                    let cf = index.collection_count(&e.term);
                    inner += e.probability * dirichlet(tf, cf, len, index.total_tokens, config.mu);
                }
                score += inner.ln();
            }
            (doc, score)
        })
        .collect();
    Ok(rank(index, scores))
}
