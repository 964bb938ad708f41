//! Immutable embedding replicas and exact similarity scans.
//!
//! Vectors are unit-normalized once at load time, so every similarity below
//! is a plain dot product accumulated in `f64`.

mod word2vec;

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

pub use word2vec::{read_word2vec, write_word2vec};

/// On-disk vector format.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VectorFormat {
    Word2VecText,
    Word2VecBinary,
}

impl FromStr for VectorFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "text" | "word2vec_text" => Ok(VectorFormat::Word2VecText),
            "binary" | "bin" | "word2vec_binary" => Ok(VectorFormat::Word2VecBinary),
            other => Err(Error::InvalidArgument(format!(
                "unknown vector format {other:?} (expected text or binary)"
            ))),
        }
    }
}

impl fmt::Display for VectorFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VectorFormat::Word2VecText => f.write_str("text"),
            VectorFormat::Word2VecBinary => f.write_str("binary"),
        }
    }
}

/// A vocabulary token and its similarity to some query token.
#[derive(Debug, Clone, PartialEq)]
pub struct Neighbor {
    pub token: String,
    pub similarity: f64,
}

// Vectors already this close to unit length are left untouched, which makes
// normalization idempotent bit for bit across save/load cycles.
const UNIT_NORM_SLACK: f64 = 4.0 * f32::EPSILON as f64;

/// One trained replica: vocabulary plus unit-length vectors.
#[derive(Debug, Clone)]
pub struct EmbeddingModel {
    model_id: String,
    dimensionality: usize,
    vocabulary: Vec<String>,
    lookup: HashMap<String, usize>,
    vectors: Vec<f32>,
}

impl EmbeddingModel {
    /// Builds a model from raw rows, normalizing every vector.
    pub fn from_rows<I>(model_id: impl Into<String>, dimensionality: usize, rows: I) -> Result<Self>
    where
        I: IntoIterator<Item = (String, Vec<f32>)>,
    {
        let mut builder = ModelBuilder::new(model_id.into(), dimensionality)?;
        for (i, (token, vector)) in rows.into_iter().enumerate() {
            builder.push(token, &vector, i + 1)?;
        }
        builder.finish()
    }

    /// Loads a word2vec file. The model id is the file stem.
    pub fn load(path: impl AsRef<Path>, format: VectorFormat) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let model_id = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        read_word2vec(BufReader::new(file), format, model_id)
    }

    pub fn save(&self, path: impl AsRef<Path>, format: VectorFormat) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        write_word2vec(self, &mut w, format).map_err(|e| Error::io(path, e))?;
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn model_id(&self) -> &str {
        &self.model_id
    }

    pub fn dimensionality(&self) -> usize {
        self.dimensionality
    }

    pub fn len(&self) -> usize {
        self.vocabulary.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vocabulary.is_empty()
    }

    pub fn vocabulary(&self) -> &[String] {
        &self.vocabulary
    }

    pub fn contains(&self, token: &str) -> bool {
        self.lookup.contains_key(token)
    }

    pub fn index_of(&self, token: &str) -> Option<usize> {
        self.lookup.get(token).copied()
    }

    fn require(&self, token: &str) -> Result<usize> {
        self.index_of(token).ok_or_else(|| Error::UnknownToken {
            token: token.to_owned(),
            model: self.model_id.clone(),
        })
    }

    pub fn token(&self, index: usize) -> &str {
        &self.vocabulary[index]
    }

    pub fn vector_at(&self, index: usize) -> &[f32] {
        let d = self.dimensionality;
        &self.vectors[index * d..(index + 1) * d]
    }

    pub fn vector(&self, token: &str) -> Option<&[f32]> {
        self.index_of(token).map(|i| self.vector_at(i))
    }

    /// Cosine between two rows, clamped to [-1, 1].
    pub fn cosine_at(&self, a: usize, b: usize) -> f64 {
        dot(self.vector_at(a), self.vector_at(b)).clamp(-1.0, 1.0)
    }

    pub fn cosine(&self, t1: &str, t2: &str) -> Result<f64> {
        let a = self.require(t1)?;
        let b = self.require(t2)?;
        Ok(self.cosine_at(a, b))
    }

    /// Similarities of row `index` to every row, in vocabulary order (self included).
    pub fn similarities_from(&self, index: usize) -> Vec<f64> {
        let query = self.vector_at(index);
        self.vectors
            .chunks_exact(self.dimensionality)
            .map(|v| dot(query, v).clamp(-1.0, 1.0))
            .collect()
    }

    /// All other tokens with similarity >= `threshold`, most similar first.
    pub fn neighbors_above(&self, token: &str, threshold: f64) -> Result<Vec<Neighbor>> {
        if threshold.is_nan() {
            return Err(Error::InvalidArgument("threshold is NaN".into()));
        }
        let i = self.require(token)?;
        let sims = self.similarities_from(i);
        let mut hits: Vec<(usize, f64)> = sims
            .into_iter()
            .enumerate()
            .filter(|&(j, s)| j != i && s >= threshold)
            .collect();
        self.sort_hits(&mut hits);
        Ok(self.to_neighbors(hits))
    }

    /// The `k` most similar other tokens. Fewer only when the vocabulary is smaller than `k + 1`.
    pub fn knn(&self, token: &str, k: usize) -> Result<Vec<Neighbor>> {
        if k == 0 {
            return Err(Error::InvalidArgument("k must be at least 1".into()));
        }
        let i = self.require(token)?;
        let sims = self.similarities_from(i);
        let mut hits: Vec<(usize, f64)> = sims.into_iter().enumerate().filter(|&(j, _)| j != i).collect();
        if hits.len() > k {
            hits.select_nth_unstable_by(k - 1, |a, b| self.hit_order(a, b));
            hits.truncate(k);
        }
        self.sort_hits(&mut hits);
        Ok(self.to_neighbors(hits))
    }

    fn hit_order(&self, a: &(usize, f64), b: &(usize, f64)) -> Ordering {
        b.1.total_cmp(&a.1)
            .then_with(|| self.vocabulary[a.0].cmp(&self.vocabulary[b.0]))
    }

    fn sort_hits(&self, hits: &mut [(usize, f64)]) {
        hits.sort_unstable_by(|a, b| self.hit_order(a, b));
    }

    fn to_neighbors(&self, hits: Vec<(usize, f64)>) -> Vec<Neighbor> {
        hits.into_iter()
            .map(|(j, similarity)| Neighbor {
                token: self.vocabulary[j].clone(),
                similarity,
            })
            .collect()
    }
}

pub(crate) fn dot(a: &[f32], b: &[f32]) -> f64 {
    a.iter().zip(b).map(|(&x, &y)| x as f64 * y as f64).sum()
}

/// Incremental construction with validation; used by the file readers.
pub(crate) struct ModelBuilder {
    model_id: String,
    dimensionality: usize,
    vocabulary: Vec<String>,
    lookup: HashMap<String, usize>,
    vectors: Vec<f32>,
}

impl ModelBuilder {
    pub(crate) fn new(model_id: String, dimensionality: usize) -> Result<Self> {
        if dimensionality == 0 {
            return Err(Error::InvalidArgument("dimensionality must be positive".into()));
        }
        Ok(ModelBuilder {
            model_id,
            dimensionality,
            vocabulary: Vec::new(),
            lookup: HashMap::new(),
            vectors: Vec::new(),
        })
    }

    pub(crate) fn len(&self) -> usize {
        self.vocabulary.len()
    }

    /// `line` is the record position used in error messages.
    pub(crate) fn push(&mut self, token: String, vector: &[f32], line: usize) -> Result<()> {
        const WHAT: &str = "embedding";
        if vector.len() != self.dimensionality {
            return Err(Error::parse(
                WHAT,
                line,
                format!(
                    "token {token:?} has {} components, expected {}",
                    vector.len(),
                    self.dimensionality
                ),
            ));
        }
        if token.is_empty() {
            return Err(Error::parse(WHAT, line, "empty token"));
        }
        if vector.iter().any(|x| !x.is_finite()) {
            return Err(Error::parse(
                WHAT,
                line,
                format!("token {token:?} has a non-finite component"),
            ));
        }
        let norm = dot(vector, vector).sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::parse(
                WHAT,
                line,
                format!("token {token:?} has a zero-norm vector"),
            ));
        }
        if self.lookup.contains_key(&token) {
            return Err(Error::parse(WHAT, line, format!("duplicate token {token:?}")));
        }
        if (norm - 1.0).abs() <= UNIT_NORM_SLACK {
            self.vectors.extend_from_slice(vector);
        } else {
            self.vectors.extend(vector.iter().map(|&x| (x as f64 / norm) as f32));
        }
        self.lookup.insert(token.clone(), self.vocabulary.len());
        self.vocabulary.push(token);
        Ok(())
    }

    pub(crate) fn finish(self) -> Result<EmbeddingModel> {
        if self.vocabulary.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "model {:?} has no tokens",
                self.model_id
            )));
        }
        Ok(EmbeddingModel {
            model_id: self.model_id,
            dimensionality: self.dimensionality,
            vocabulary: self.vocabulary,
            lookup: self.lookup,
            vectors: self.vectors,
        })
    }
}

/// R >= 2 replicas of the same architecture, addressed through their shared vocabulary.
#[derive(Debug, Clone)]
pub struct ModelEnsemble {
    replicas: Vec<EmbeddingModel>,
    shared: Vec<String>,
    shared_lookup: HashMap<String, usize>,
    // rows[r][i] = row of shared token i inside replica r
    rows: Vec<Vec<usize>>,
}

impl ModelEnsemble {
    /// The shared vocabulary keeps the first replica's token order.
    pub fn new(replicas: Vec<EmbeddingModel>) -> Result<Self> {
        if replicas.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "an ensemble needs at least 2 replicas, got {}",
                replicas.len()
            )));
        }
        let d = replicas[0].dimensionality();
        if let Some(bad) = replicas.iter().find(|m| m.dimensionality() != d) {
            return Err(Error::InvalidArgument(format!(
                "replica {:?} has dimensionality {}, expected {d}",
                bad.model_id(),
                bad.dimensionality()
            )));
        }
        let shared: Vec<String> = replicas[0]
            .vocabulary()
            .iter()
            .filter(|t| replicas[1..].iter().all(|m| m.contains(t)))
            .cloned()
            .collect();
        if shared.is_empty() {
            return Err(Error::InvalidArgument("replicas share no vocabulary".into()));
        }
        let rows = replicas
            .iter()
            .map(|m| shared.iter().map(|t| m.index_of(t).expect("shared token")).collect())
            .collect();
        let shared_lookup = shared.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        Ok(ModelEnsemble {
            replicas,
            shared,
            shared_lookup,
            rows,
        })
    }

    pub fn replicas(&self) -> &[EmbeddingModel] {
        &self.replicas
    }

    pub fn replica_count(&self) -> usize {
        self.replicas.len()
    }

    pub fn dimensionality(&self) -> usize {
        self.replicas[0].dimensionality()
    }

    pub fn shared_vocabulary(&self) -> &[String] {
        &self.shared
    }

    pub fn shared_index(&self, token: &str) -> Option<usize> {
        self.shared_lookup.get(token).copied()
    }

    /// Resolves a token, naming the first replica that lacks it on failure.
    pub fn require(&self, token: &str) -> Result<usize> {
        if let Some(i) = self.shared_index(token) {
            return Ok(i);
        }
        let model = self
            .replicas
            .iter()
            .find(|m| !m.contains(token))
            .map(|m| m.model_id().to_owned())
            .unwrap_or_default();
        Err(Error::UnknownToken {
            token: token.to_owned(),
            model,
        })
    }

    /// Similarities of shared token `i` to every shared token within replica `r`.
    pub fn similarities_in(&self, r: usize, i: usize) -> Vec<f64> {
        let model = &self.replicas[r];
        let rows = &self.rows[r];
        let query = model.vector_at(rows[i]);
        rows.iter()
            .map(|&row| dot(query, model.vector_at(row)).clamp(-1.0, 1.0))
            .collect()
    }

    pub fn cosine_in(&self, r: usize, i: usize, j: usize) -> f64 {
        let rows = &self.rows[r];
        self.replicas[r].cosine_at(rows[i], rows[j])
    }
}
