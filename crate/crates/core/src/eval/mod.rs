//! Qrels, condensed lists, AP / NDCG and paired significance tests.

mod ttest;

use std::collections::{BTreeMap, HashSet};
use std::io::BufRead;

pub use ttest::{paired_ttest, SignificanceResult, SIGNIFICANCE_LEVEL};

use crate::error::{Error, Result};

/// Default NDCG cutoff.
pub const DEFAULT_CUTOFF: usize = 20;

/// Relevance grades per topic and document.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Qrels {
    judgments: BTreeMap<String, BTreeMap<String, u32>>,
}

impl Qrels {
    /// Parses `topic_id iteration doc_id grade` lines.
    pub fn parse<R: BufRead>(reader: R) -> Result<Self> {
        let mut qrels = Qrels::default();
        for (i, line) in reader.lines().enumerate() {
            let line_no = i + 1;
            let line = line.map_err(|e| Error::parse("qrels", line_no, e.to_string()))?;
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.is_empty() {
                continue;
            }
            let [topic, _, doc, grade] = fields[..] else {
                return Err(Error::parse(
                    "qrels",
                    line_no,
                    format!("expected 4 fields, found {}", fields.len()),
                ));
            };
            let grade: i64 = grade
                .parse()
                .map_err(|_| Error::parse("qrels", line_no, format!("grade {grade:?} is not an integer")))?;
            let grade = u32::try_from(grade)
                .map_err(|_| Error::parse("qrels", line_no, format!("grade {grade} is out of range")))?;
            qrels
                .insert(topic, doc, grade)
                .map_err(|e| Error::parse("qrels", line_no, e.to_string()))?;
        }
        Ok(qrels)
    }

    pub fn insert(&mut self, topic: &str, doc: &str, grade: u32) -> Result<()> {
        let docs = self.judgments.entry(topic.to_owned()).or_default();
        if docs.insert(doc.to_owned(), grade).is_some() {
            return Err(Error::InvalidArgument(format!(
                "duplicate judgment for ({topic}, {doc})"
            )));
        }
        Ok(())
    }

    pub fn topics(&self) -> impl Iterator<Item = &str> {
        self.judgments.keys().map(String::as_str)
    }

    pub fn topic(&self, topic: &str) -> Option<&BTreeMap<String, u32>> {
        self.judgments.get(topic)
    }

    pub fn grade(&self, topic: &str, doc: &str) -> Option<u32> {
        self.judgments.get(topic)?.get(doc).copied()
    }

    pub fn len(&self) -> usize {
        self.judgments.values().map(BTreeMap::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankedDoc {
    pub doc_id: String,
    pub rank: u32,
    pub score: f64,
}

/// Ranked lists per topic, ordered by rank.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Run {
    topics: BTreeMap<String, Vec<RankedDoc>>,
}

impl Run {
    /// Parses `topic Q0 doc rank score tag` lines; each topic's list is
    /// ordered by the rank field.
    pub fn parse<R: BufRead>(reader: R) -> Result<Self> {
        let mut topics: BTreeMap<String, Vec<RankedDoc>> = BTreeMap::new();
        for (i, line) in reader.lines().enumerate() {
            let line_no = i + 1;
            let line = line.map_err(|e| Error::parse("run", line_no, e.to_string()))?;
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.is_empty() {
                continue;
            }
            let [topic, _, doc, rank, score, _] = fields[..] else {
                return Err(Error::parse(
                    "run",
                    line_no,
                    format!("expected 6 fields, found {}", fields.len()),
                ));
            };
            let rank: u32 = rank
                .parse()
                .map_err(|_| Error::parse("run", line_no, format!("rank {rank:?} is not a positive integer")))?;
            let score: f64 = score
                .parse()
                .map_err(|_| Error::parse("run", line_no, format!("score {score:?} is not a number")))?;
            if score.is_nan() {
                return Err(Error::parse("run", line_no, "score is NaN"));
            }
            topics.entry(topic.to_owned()).or_default().push(RankedDoc {
                doc_id: doc.to_owned(),
                rank,
                score,
            });
        }
        for (topic, docs) in &mut topics {
            docs.sort_by_key(|d| d.rank);
            if docs.windows(2).any(|w| w[0].rank == w[1].rank) {
                return Err(Error::parse("run", 0, format!("topic {topic} repeats a rank")));
            }
            let mut seen = HashSet::new();
            if let Some(d) = docs.iter().find(|d| !seen.insert(d.doc_id.as_str())) {
                return Err(Error::parse(
                    "run",
                    0,
                    format!("topic {topic} lists {} twice", d.doc_id),
                ));
            }
        }
        Ok(Run { topics })
    }

    /// A run from lists already in rank order; ranks are assigned from 1.
    pub fn from_lists<I, D>(lists: I) -> Self
    where
        I: IntoIterator<Item = (String, Vec<D>)>,
        D: Into<String>,
    {
        let topics = lists
            .into_iter()
            .map(|(topic, docs)| {
                let n = docs.len();
                let ranked = docs
                    .into_iter()
                    .enumerate()
                    .map(|(i, d)| RankedDoc {
                        doc_id: d.into(),
                        rank: i as u32 + 1,
                        score: (n - i) as f64,
                    })
                    .collect();
                (topic, ranked)
            })
            .collect();
        Run { topics }
    }

    pub fn topics(&self) -> impl Iterator<Item = &str> {
        self.topics.keys().map(String::as_str)
    }

    pub fn ranking(&self, topic: &str) -> Option<&[RankedDoc]> {
        self.topics.get(topic).map(Vec::as_slice)
    }

    pub fn doc_ids(&self, topic: &str) -> Vec<&str> {
        self.ranking(topic)
            .map(|r| r.iter().map(|d| d.doc_id.as_str()).collect())
            .unwrap_or_default()
    }
}

/// Drops unjudged documents and re-ranks from 1, keeping the relative order.
pub fn condense(run: &Run, qrels: &Qrels) -> Run {
    let topics = run
        .topics
        .iter()
        .map(|(topic, docs)| {
            let judged = qrels.topic(topic);
            let kept = docs
                .iter()
                .filter(|d| judged.is_some_and(|j| j.contains_key(&d.doc_id)))
                .enumerate()
                .map(|(i, d)| RankedDoc {
                    doc_id: d.doc_id.clone(),
                    rank: i as u32 + 1,
                    score: d.score,
                })
                .collect();
            (topic.clone(), kept)
        })
        .collect();
    Run { topics }
}

/// AP with relevance `grade >= 1`; `R` counts relevant judged documents.
pub fn average_precision(ranking: &[&str], judgments: &BTreeMap<String, u32>) -> f64 {
    let relevant = judgments.values().filter(|&&g| g >= 1).count();
    if relevant == 0 {
        return 0.0;
    }
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (i, doc) in ranking.iter().enumerate() {
        if judgments.get(*doc).is_some_and(|&g| g >= 1) {
            hits += 1;
            sum += hits as f64 / (i + 1) as f64;
        }
    }
    sum / relevant as f64
}

/// NDCG with gain = grade and discount `1 / log2(rank + 1)`.
pub fn ndcg_at(ranking: &[&str], judgments: &BTreeMap<String, u32>, cutoff: usize) -> f64 {
    let discount = |i: usize| ((i + 2) as f64).log2();
    let dcg: f64 = ranking
        .iter()
        .take(cutoff)
        .enumerate()
        .map(|(i, d)| f64::from(judgments.get(*d).copied().unwrap_or(0)) / discount(i))
        .sum();
    let mut ideal: Vec<u32> = judgments.values().copied().filter(|&g| g > 0).collect();
    ideal.sort_unstable_by(|a, b| b.cmp(a));
    let idcg: f64 = ideal
        .iter()
        .take(cutoff)
        .enumerate()
        .map(|(i, &g)| f64::from(g) / discount(i))
        .sum();
    if idcg == 0.0 {
        0.0
    } else {
        dcg / idcg
    }
}

/// Per-topic values of one metric.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunScores {
    pub per_topic: BTreeMap<String, f64>,
}

impl RunScores {
    pub fn mean(&self) -> f64 {
        if self.per_topic.is_empty() {
            return 0.0;
        }
        self.per_topic.values().sum::<f64>() / self.per_topic.len() as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub ap: RunScores,
    pub ndcg: RunScores,
    pub cutoff: usize,
}

/// AP and NDCG@`cutoff` for every qrels topic; topics missing from the run
/// score 0. With `condensed`, unjudged documents are removed first.
pub fn evaluate(run: &Run, qrels: &Qrels, condensed: bool, cutoff: usize) -> Result<Evaluation> {
    if cutoff == 0 {
        return Err(Error::InvalidArgument("NDCG cutoff must be at least 1".into()));
    }
    let condensed_run;
    let run = if condensed {
        condensed_run = condense(run, qrels);
        &condensed_run
    } else {
        run
    };
    let mut ap = RunScores::default();
    let mut ndcg = RunScores::default();
    for (topic, judgments) in &qrels.judgments {
        let ranking = run.doc_ids(topic);
        ap.per_topic
            .insert(topic.clone(), average_precision(&ranking, judgments));
        ndcg.per_topic
            .insert(topic.clone(), ndcg_at(&ranking, judgments, cutoff));
    }
    Ok(Evaluation { ap, ndcg, cutoff })
}
