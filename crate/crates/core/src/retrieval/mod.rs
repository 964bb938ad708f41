//! Query-likelihood retrieval with Dirichlet smoothing and translation-model
//! query expansion.

mod corpus;
mod topics;
mod translation;

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use corpus::{Document, JsonlDocuments, TrecDocuments};
pub use topics::{read_topics, write_run, Topic, MAX_RUN_DEPTH};
pub use translation::{build_translation_table, tlm_score, ExpansionPolicy, TranslationEntry, TranslationTable};

use crate::error::{Error, Result};
use crate::textproc::Pipeline;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Posting {
    pub doc: u32,
    pub tf: u32,
}

/// Inverted index over preprocessed documents.
///
/// Documents are numbered in ascending `doc_id` order, so postings sorted by
/// document number are also sorted by id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Index {
    pipeline: Pipeline,
    doc_ids: Vec<String>,
    doc_lengths: Vec<u64>,
    postings: BTreeMap<String, Vec<Posting>>,
    collection_term_counts: BTreeMap<String, u64>,
    total_tokens: u64,
}

/// Builds an index from a document stream.
pub fn build_index<I>(documents: I, pipeline: &Pipeline) -> Result<Index>
where
    I: IntoIterator<Item = Result<Document>>,
{
    let mut docs: Vec<(String, u64, HashMap<String, u32>)> = Vec::new();
    let mut seen = HashSet::new();
    for doc in documents {
        let doc = doc?;
        if !seen.insert(doc.id.clone()) {
            return Err(Error::DuplicateDocId(doc.id));
        }
        let terms = pipeline.process(&doc.text);
        let mut tf: HashMap<String, u32> = HashMap::new();
        for t in &terms {
            *tf.entry(t.clone()).or_default() += 1;
        }
        docs.push((doc.id, terms.len() as u64, tf));
    }
    if docs.len() > u32::MAX as usize {
        return Err(Error::InvalidArgument("too many documents".into()));
    }
    docs.sort_by(|a, b| a.0.cmp(&b.0));

    let mut postings: BTreeMap<String, Vec<Posting>> = BTreeMap::new();
    let mut collection_term_counts: BTreeMap<String, u64> = BTreeMap::new();
    let mut doc_ids = Vec::with_capacity(docs.len());
    let mut doc_lengths = Vec::with_capacity(docs.len());
    let mut total_tokens = 0;
    for (n, (id, len, tf)) in docs.into_iter().enumerate() {
        for (term, count) in tf {
            *collection_term_counts.entry(term.clone()).or_default() += u64::from(count);
            postings.entry(term).or_default().push(Posting {
                doc: n as u32,
                tf: count,
            });
        }
        doc_ids.push(id);
        doc_lengths.push(len);
        total_tokens += len;
    }
    Ok(Index {
        pipeline: pipeline.clone(),
        doc_ids,
        doc_lengths,
        postings,
        collection_term_counts,
        total_tokens,
    })
}

impl Index {
    pub fn pipeline(&self) -> &Pipeline {
        &self.pipeline
    }

    pub fn doc_count(&self) -> usize {
        self.doc_ids.len()
    }

    pub fn doc_ids(&self) -> &[String] {
        &self.doc_ids
    }

    pub fn doc_length(&self, doc: u32) -> u64 {
        self.doc_lengths[doc as usize]
    }

    pub fn total_tokens(&self) -> u64 {
        self.total_tokens
    }

    pub fn vocabulary_size(&self) -> usize {
        self.postings.len()
    }

    pub fn postings(&self, term: &str) -> &[Posting] {
        self.postings.get(term).map_or(&[], Vec::as_slice)
    }

    pub fn collection_count(&self, term: &str) -> u64 {
        self.collection_term_counts.get(term).copied().unwrap_or(0)
    }

    pub fn term_frequency(&self, term: &str, doc_id: &str) -> u32 {
        let Ok(doc) = self.doc_ids.binary_search_by(|d| d.as_str().cmp(doc_id)) else {
            return 0;
        };
        let list = self.postings(term);
        list.binary_search_by_key(&(doc as u32), |p| p.doc)
            .map_or(0, |i| list[i].tf)
    }

    /// Checks the index statistics for internal consistency.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Serialization(format!("inconsistent index: {m}")));
        if self.doc_ids.len() != self.doc_lengths.len() {
            return bad("document ids and lengths differ in count".into());
        }
        if self.doc_ids.windows(2).any(|w| w[0] >= w[1]) {
            return bad("document ids are not strictly ascending".into());
        }
        if self.postings.len() != self.collection_term_counts.len() {
            return bad("postings and collection counts cover different terms".into());
        }
        let mut per_doc = vec![0u64; self.doc_ids.len()];
        let mut total: u64 = 0;
        for (term, list) in &self.postings {
            if list.is_empty() || list.windows(2).any(|w| w[0].doc >= w[1].doc) {
                return bad(format!("postings of {term:?} are empty or unsorted"));
            }
            let mut cf: u64 = 0;
            for p in list {
                if p.tf == 0 || p.doc as usize >= per_doc.len() {
                    return bad(format!("bad posting for {term:?}"));
                }
                per_doc[p.doc as usize] += u64::from(p.tf);
                cf += u64::from(p.tf);
            }
            if self.collection_term_counts.get(term) != Some(&cf) {
                return bad(format!("collection count of {term:?} does not match its postings"));
            }
            total = total
                .checked_add(cf)
                .ok_or_else(|| Error::Serialization("token count overflow".into()))?;
        }
        if total != self.total_tokens || per_doc != self.doc_lengths {
            return bad("token totals do not match the postings".into());
        }
        Ok(())
    }

    pub fn read_json<R: Read>(reader: R) -> Result<Self> {
        let index: Index = serde_json::from_reader(reader)?;
        index.validate()?;
        Ok(index)
    }

    pub fn write_json<W: Write>(&self, writer: W) -> Result<()> {
        serde_json::to_writer(writer, self)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Index::read_json(BufReader::new(file))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        self.write_json(&mut w)?;
        w.flush().map_err(|e| Error::io(path, e))
    }

    fn doc_term_frequencies(&self, term: &str) -> HashMap<u32, u32> {
        self.postings(term).iter().map(|p| (p.doc, p.tf)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LmConfig {
    pub mu: f64,
}

impl Default for LmConfig {
    fn default() -> Self {
        LmConfig { mu: 1000.0 }
    }
}

impl LmConfig {
    pub fn new(mu: f64) -> Result<Self> {
        let config = LmConfig { mu };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu > 0.0 && self.mu.is_finite()) {
            return Err(Error::InvalidArgument(format!("mu must be positive, got {}", self.mu)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoredDoc {
    pub doc_id: String,
    pub score: f64,
}

/// Dirichlet-smoothed `P(t | d)`.
pub(crate) fn dirichlet(tf: u32, cf: u64, doc_len: u64, total_tokens: u64, mu: f64) -> f64 {
    (f64::from(tf) + mu * (cf as f64 / total_tokens as f64)) / (doc_len as f64 + mu)
}

pub(crate) fn rank(index: &Index, scores: Vec<(u32, f64)>) -> Vec<ScoredDoc> {
    let mut ranked: Vec<ScoredDoc> = scores
        .into_iter()
        .map(|(doc, score)| ScoredDoc {
            doc_id: index.doc_ids[doc as usize].clone(),
            score,
        })
        .collect();
    ranked.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.doc_id.cmp(&b.doc_id)));
    ranked
}

/// Log query likelihood of every document containing at least one query
/// term, ranked by score then `doc_id`. Terms absent from the collection are
/// dropped with a warning.
pub fn lm_score(index: &Index, config: &LmConfig, query_terms: &[String]) -> Result<Vec<ScoredDoc>> {
    config.validate()?;
    if index.doc_count() == 0 {
        return Err(Error::EmptyIndex);
    }
    let mut kept = Vec::new();
    for t in query_terms {
        if index.collection_count(t) == 0 {
            log::warn!("query term {t:?} does not occur in the collection; dropped");
        } else {
            kept.push(t.as_str());
        }
    }
    if kept.is_empty() {
        return Err(Error::EmptyQuery);
    }
    let mut tf_maps: HashMap<&str, HashMap<u32, u32>> = HashMap::new();
    for t in &kept {
        tf_maps.entry(*t).or_insert_with(|| index.doc_term_frequencies(t));
    }
    let mut candidates: Vec<u32> = tf_maps.values().flat_map(|m| m.keys().copied()).collect();
    candidates.sort_unstable();
    candidates.dedup();

    let scores = candidates
        .into_iter()
        .map(|doc| {
            let len = index.doc_length(doc);
            let mut score = 0.0;
            for t in &kept {
                let tf = tf_maps[t].get(&doc).copied().unwrap_or(0);
                score += dirichlet(tf, index.collection_count(t), len, index.total_tokens, config.mu).ln();
            }
            (doc, score)
        })
        .collect();
    Ok(rank(index, scores))
}
