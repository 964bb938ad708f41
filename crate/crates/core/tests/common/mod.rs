#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use simthresh::retrieval::{build_index, Document, Index, LmConfig};
use simthresh::textproc::Pipeline;
use simthresh::EmbeddingModel;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn token(i: usize) -> String {
    format!("w{i:05}")
}

pub fn gaussian_rows(rng: &mut impl Rng, vocab: usize, dim: usize) -> Vec<Vec<f64>> {
    (0..vocab)
        .map(|_| (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect())
        .collect()
}

pub fn unit(v: &[f64]) -> Vec<f64> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter().map(|x| x / n).collect()
}

pub fn model_from(id: &str, rows: &[Vec<f64>]) -> EmbeddingModel {
    let dim = rows[0].len();
    EmbeddingModel::from_rows(
        id,
        dim,
        rows.iter()
            .enumerate()
            .map(|(i, r)| (token(i), r.iter().map(|&x| x as f32).collect())),
    )
    .unwrap()
}

pub fn random_model(id: &str, vocab: usize, dim: usize, seed: u64) -> EmbeddingModel {
    model_from(id, &gaussian_rows(&mut rng(seed), vocab, dim))
}

/// `unit(unit(base) + sigma * noise)` for every row.
pub fn perturb(rng: &mut impl Rng, base: &[Vec<f64>], sigma: f64) -> Vec<Vec<f64>> {
    base.iter()
        .map(|row| {
            let u = unit(row);
            let noisy: Vec<f64> = u
                .iter()
                .map(|x| x + sigma * rng.sample::<f64, _>(StandardNormal))
                .collect();
            unit(&noisy)
        })
        .collect()
}

/// Survival of the standard normal from Abramowitz & Stegun 7.1.26.
pub fn sf_as(z: f64) -> f64 {
    let x = z.abs() / std::f64::consts::SQRT_2;
    let t = 1.0 / (1.0 + 0.3275911 * x);
    let poly = t * (0.254829592 + t * (-0.284496736 + t * (1.421413741 + t * (-1.453152027 + t * 1.061405429))));
    let erfc = poly * (-x * x).exp();
    if z >= 0.0 {
        0.5 * erfc
    } else {
        1.0 - 0.5 * erfc
    }
}

pub fn standard_normal(rng: &mut impl Rng) -> f64 {
    StandardNormal.sample(rng)
}

pub fn raw_pipeline() -> Pipeline {
    Pipeline::new(Default::default(), false)
}

/// Random corpus over a `vocab`-word alphabet; ids are `d00`, `d01`, ...
pub fn random_corpus(rng: &mut impl Rng, docs: usize, vocab: usize, max_len: usize) -> Vec<Document> {
    (0..docs)
        .map(|d| {
            let len = rng.random_range(1..=max_len);
            let words: Vec<String> = (0..len).map(|_| format!("t{}", rng.random_range(0..vocab))).collect();
            Document {
                id: format!("d{d:02}"),
                text: words.join(" "),
            }
        })
        .collect()
}

pub fn index_of(docs: &[Document]) -> Index {
    build_index(docs.iter().cloned().map(Ok), &raw_pipeline()).unwrap()
}

/// Query likelihood of every document, in linear space, straight from the
/// raw text with no index. `expansions[q]` lists `(term, weight)` with
/// weights summing to 1; terms absent from it translate only to themselves.
/// Query terms whose expansion set never occurs are skipped; documents
/// sharing no term with any expansion set are left out.
pub fn dense_scores(
    docs: &[Document],
    config: &LmConfig,
    query: &[String],
    expansions: &BTreeMap<String, Vec<(String, f64)>>,
) -> BTreeMap<String, f64> {
    let tokenized: Vec<(String, Vec<String>)> = docs
        .iter()
        .map(|d| (d.id.clone(), d.text.split_whitespace().map(str::to_owned).collect()))
        .collect();
    let total: usize = tokenized.iter().map(|(_, t)| t.len()).sum();
    let cf = |term: &str| -> usize {
        tokenized
            .iter()
            .map(|(_, t)| t.iter().filter(|x| *x == term).count())
            .sum()
    };
    let set_of = |q: &String| expansions.get(q).cloned().unwrap_or_else(|| vec![(q.clone(), 1.0)]);
    let active: Vec<Vec<(String, f64)>> = query
        .iter()
        .map(set_of)
        .filter(|set| set.iter().any(|(t, _)| cf(t) > 0))
        .collect();
    let mut out = BTreeMap::new();
    for (id, terms) in &tokenized {
        let touches = active.iter().any(|set| set.iter().any(|(t, _)| terms.contains(t)));
        if !touches {
            continue;
        }
        let len = terms.len() as f64;
        let mut likelihood = 1.0;
        for set in &active {
            let mut p = 0.0;
            for (t, w) in set {
                let tf = terms.iter().filter(|x| *x == t).count() as f64;
                p += w * (tf + config.mu * cf(t) as f64 / total as f64) / (len + config.mu);
            }
            likelihood *= p;
        }
        out.insert(id.clone(), likelihood);
    }
    out
}
