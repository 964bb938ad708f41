//! Replica-to-replica disagreement of similarity values.
//!
//! For every probe term `x` and every other shared term `y`, the pair lands in
//! the bin holding `sim_ref(x, y)` and contributes `|sim_ref(x, y) - sim_other(x, y)|`.
//! The mean contribution per bin is the uncertainty at that similarity.

use rayon::prelude::*;

use crate::embedding::EmbeddingModel;
use crate::error::{Error, Result};

/// Uniform binning of a similarity domain. Bins are half-open `[low, high)`
/// except the last, which is closed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistogramConfig {
    pub domain_low: f64,
    pub domain_high: f64,
    pub bin_count: usize,
}

impl Default for HistogramConfig {
    fn default() -> Self {
        HistogramConfig {
            domain_low: -0.2,
            domain_high: 1.0,
            bin_count: 500,
        }
    }
}

impl HistogramConfig {
    pub fn new(domain_low: f64, domain_high: f64, bin_count: usize) -> Result<Self> {
        let config = HistogramConfig {
            domain_low,
            domain_high,
            bin_count,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.domain_low.is_finite() && self.domain_high.is_finite()) || self.domain_low >= self.domain_high {
            return Err(Error::InvalidArgument(format!(
                "histogram domain ({}, {}) is empty",
                self.domain_low, self.domain_high
            )));
        }
        if self.bin_count == 0 {
            return Err(Error::InvalidArgument("bin count must be positive".into()));
        }
        Ok(())
    }

    pub fn bin_width(&self) -> f64 {
        (self.domain_high - self.domain_low) / self.bin_count as f64
    }

    /// Bin holding `s`, or `None` outside the domain.
    pub fn bin_of(&self, s: f64) -> Option<usize> {
        if !(self.domain_low..=self.domain_high).contains(&s) {
            return None;
        }
        let i = ((s - self.domain_low) / self.bin_width()).floor() as usize;
        Some(i.min(self.bin_count - 1))
    }

    pub fn bin_bounds(&self, i: usize) -> (f64, f64) {
        let w = self.bin_width();
        let low = self.domain_low + i as f64 * w;
        let high = if i + 1 == self.bin_count {
            self.domain_high
        } else {
            self.domain_low + (i + 1) as f64 * w
        };
        (low, high)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UncertaintyBin {
    pub bin_low: f64,
    pub bin_high: f64,
    pub pair_count: u64,
    pub abs_diff_sum: f64,
    /// `None` when the bin is empty.
    pub mean_abs_diff: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UncertaintyCurve {
    pub config: HistogramConfig,
    pub bins: Vec<UncertaintyBin>,
    /// Pairs whose reference similarity fell outside the domain.
    pub out_of_domain: u64,
}

impl UncertaintyCurve {
    pub fn binned_pairs(&self) -> u64 {
        self.bins.iter().map(|b| b.pair_count).sum()
    }

    pub fn total_pairs(&self) -> u64 {
        self.binned_pairs() + self.out_of_domain
    }

    /// Mean absolute disagreement over every binned pair.
    pub fn grand_mean(&self) -> Option<f64> {
        let n = self.binned_pairs();
        (n > 0).then(|| self.bins.iter().map(|b| b.abs_diff_sum).sum::<f64>() / n as f64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityHistogram {
    pub config: HistogramConfig,
    pub counts: Vec<u64>,
    pub out_of_domain: u64,
}

impl SimilarityHistogram {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum::<u64>() + self.out_of_domain
    }
}

#[derive(Clone)]
struct Tally {
    counts: Vec<u64>,
    sums: Vec<f64>,
    out_of_domain: u64,
}

impl Tally {
    fn new(bins: usize) -> Self {
        Tally {
            counts: vec![0; bins],
            sums: vec![0.0; bins],
            out_of_domain: 0,
        }
    }

    fn merge(mut self, other: &Tally) -> Self {
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        for (a, b) in self.sums.iter_mut().zip(&other.sums) {
            *a += b;
        }
        self.out_of_domain += other.out_of_domain;
        self
    }
}

/// Resolves probes to row indices, sorted so results do not depend on probe order.
fn probe_rows<S: AsRef<str>>(model: &EmbeddingModel, probes: &[S]) -> Result<Vec<usize>> {
    if probes.is_empty() {
        return Err(Error::InvalidArgument("probe term list is empty".into()));
    }
    let mut rows = probes
        .iter()
        .map(|p| {
            model.index_of(p.as_ref()).ok_or_else(|| Error::UnknownToken {
                token: p.as_ref().to_owned(),
                model: model.model_id().to_owned(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    rows.sort_unstable();
    Ok(rows)
}

/// Binned mean absolute similarity disagreement between two replicas.
///
/// Pairs are drawn from the vocabulary shared by both models; the pair `(x, x)` is skipped.
pub fn uncertainty_curve<S: AsRef<str>>(
    reference: &EmbeddingModel,
    other: &EmbeddingModel,
    probe_terms: &[S],
    config: &HistogramConfig,
) -> Result<UncertaintyCurve> {
    config.validate()?;
    if reference.dimensionality() != other.dimensionality() {
        return Err(Error::InvalidArgument(format!(
            "models {:?} and {:?} differ in dimensionality",
            reference.model_id(),
            other.model_id()
        )));
    }
    for p in probe_terms {
        if !other.contains(p.as_ref()) {
            return Err(Error::UnknownToken {
                token: p.as_ref().to_owned(),
                model: other.model_id().to_owned(),
            });
        }
    }
    let probes = probe_rows(reference, probe_terms)?;

    // (row in reference, row in other) for every shared token, in reference order
    let shared: Vec<(usize, usize)> = reference
        .vocabulary()
        .iter()
        .enumerate()
        .filter_map(|(i, t)| other.index_of(t).map(|j| (i, j)))
        .collect();
    if shared.is_empty() {
        return Err(Error::InvalidArgument("models share no vocabulary".into()));
    }

    let partials: Vec<Tally> = probes
        .par_iter()
        .map(|&x| {
            let x_other = other.index_of(reference.token(x)).expect("probe checked");
            let qr = reference.vector_at(x);
            let qo = other.vector_at(x_other);
            let mut tally = Tally::new(config.bin_count);
            for &(yr, yo) in &shared {
                if yr == x {
                    continue;
                }
                let s_ref = crate::embedding::dot(qr, reference.vector_at(yr)).clamp(-1.0, 1.0);
                let s_other = crate::embedding::dot(qo, other.vector_at(yo)).clamp(-1.0, 1.0);
                match config.bin_of(s_ref) {
                    Some(b) => {
                        tally.counts[b] += 1;
                        tally.sums[b] += (s_ref - s_other).abs();
                    }
                    None => tally.out_of_domain += 1,
                }
            }
            tally
        })
        .collect();
    let total = partials
        .iter()
        .fold(Tally::new(config.bin_count), |acc, t| acc.merge(t));

    let bins = (0..config.bin_count)
        .map(|i| {
            let (bin_low, bin_high) = config.bin_bounds(i);
            let pair_count = total.counts[i];
            let abs_diff_sum = total.sums[i];
            UncertaintyBin {
                bin_low,
                bin_high,
                pair_count,
                abs_diff_sum,
                mean_abs_diff: (pair_count > 0).then(|| abs_diff_sum / pair_count as f64),
            }
        })
        .collect();
    Ok(UncertaintyCurve {
        config: *config,
        bins,
        out_of_domain: total.out_of_domain,
    })
}

/// Histogram of similarities from each probe term to every other vocabulary term.
pub fn similarity_histogram<S: AsRef<str>>(
    model: &EmbeddingModel,
    probe_terms: &[S],
    config: &HistogramConfig,
) -> Result<SimilarityHistogram> {
    config.validate()?;
    let probes = probe_rows(model, probe_terms)?;
    let partials: Vec<Tally> = probes
        .par_iter()
        .map(|&x| {
            let mut tally = Tally::new(config.bin_count);
            for (y, s) in model.similarities_from(x).into_iter().enumerate() {
                if y == x {
                    continue;
                }
                match config.bin_of(s) {
                    Some(b) => tally.counts[b] += 1,
                    None => tally.out_of_domain += 1,
                }
            }
            tally
        })
        .collect();
    let total = partials
        .iter()
        .fold(Tally::new(config.bin_count), |acc, t| acc.merge(t));
    Ok(SimilarityHistogram {
        config: *config,
        counts: total.counts,
        out_of_domain: total.out_of_domain,
    })
}
