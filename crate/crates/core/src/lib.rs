//! Similarity thresholds for word embeddings.
//!
//! The crate measures how much independently trained embedding replicas
//! disagree about term similarity, turns per-pair replica disagreement into a
//! continuous expected-neighbor curve, and solves that curve against a
//! lexicon-derived synonym count to obtain a similarity threshold. A
//! query-likelihood retrieval engine with translation-model expansion and a
//! condensed-list evaluation harness test the thresholds on ranked retrieval.
//!
//! Module map:
//!
//! - [`embedding`]: word2vec loading, cosine similarity, exact neighbor scans.
//! - [`uncertainty`]: binned replica disagreement and similarity histograms.
//! - [`neighbor`]: per-pair normal fits and expected-neighbor curves.
//! - [`threshold`]: synonym statistics and threshold root finding.
//! - [`textproc`]: tokenizer, stopwords and the Porter stemmer.
//! - [`retrieval`]: inverted index, Dirichlet LM and translation LM scoring.
//! - [`eval`]: qrels, condensed lists, MAP, NDCG and paired t-tests.
//! - [`report`]: CSV records for every emitted table.
//! - [`config`]: flat key-value configuration files.

pub mod config;
pub mod embedding;
pub mod error;
pub mod eval;
pub mod neighbor;
pub mod report;
pub mod retrieval;
pub mod stats;
pub mod textproc;
pub mod threshold;
pub mod uncertainty;

pub use embedding::{EmbeddingModel, ModelEnsemble, Neighbor, VectorFormat};
pub use error::{Error, Result};
