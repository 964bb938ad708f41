//! Continuous expected-neighbor curves.
//!
//! Each pair `(t, u)` gets a normal distribution fitted to its similarities
//! across the replicas. The expected number of neighbors of `t` above `s` is
//! the sum of the pair survival functions,
//! `E_t(s) = sum_u (1 - Phi((s - mean_tu) / std_tu))`.
//! Curves for several probe terms are averaged into an aggregated curve with
//! a normal-approximation confidence band on the mean.

use std::cmp::Ordering;

use rayon::prelude::*;

use crate::embedding::ModelEnsemble;
use crate::error::{Error, Result};
use crate::stats::{self, normal_sf};

/// Lower bound applied to fitted standard deviations.
pub const STD_FLOOR: f64 = 1e-6;

/// Default band confidence.
pub const DEFAULT_CONFIDENCE: f64 = 0.95;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalComponent {
    pub mean: f64,
    pub std: f64,
}

impl NormalComponent {
    /// Probability that a draw exceeds `s`.
    pub fn survival(&self, s: f64) -> f64 {
        normal_sf((s - self.mean) / self.std)
    }
}

/// Normal fit of one pair's similarity across replicas.
#[derive(Debug, Clone, PartialEq)]
pub struct PairSimilarityDistribution {
    pub term: String,
    pub other: String,
    pub mean: f64,
    /// Sample standard deviation (`R - 1` denominator), floored at [`STD_FLOOR`].
    pub std: f64,
    pub sample_count: usize,
}

pub fn fit_pair(ensemble: &ModelEnsemble, t: &str, u: &str) -> Result<PairSimilarityDistribution> {
    if t == u {
        return Err(Error::InvalidArgument(format!(
            "cannot fit the self pair ({t:?}, {u:?})"
        )));
    }
    let i = ensemble.require(t)?;
    let j = ensemble.require(u)?;
    let sims: Vec<f64> = (0..ensemble.replica_count())
        .map(|r| ensemble.cosine_in(r, i, j))
        .collect();
    Ok(PairSimilarityDistribution {
        term: t.to_owned(),
        other: u.to_owned(),
        mean: stats::mean(&sims),
        std: stats::sample_std(&sims).max(STD_FLOOR),
        sample_count: sims.len(),
    })
}

/// Strictly increasing similarity values at which curves are evaluated.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityGrid {
    points: Vec<f64>,
}

impl Default for SimilarityGrid {
    /// 2401 points over [-0.2, 1.0], step 5e-4.
    fn default() -> Self {
        SimilarityGrid::uniform(-0.2, 1.0, 2401).expect("valid default grid")
    }
}

impl SimilarityGrid {
    pub fn uniform(low: f64, high: f64, points: usize) -> Result<Self> {
        if points < 2 || !low.is_finite() || !high.is_finite() || low >= high {
            return Err(Error::InvalidArgument(format!(
                "grid needs at least 2 points over a nonempty range, got {points} over [{low}, {high}]"
            )));
        }
        let step = (high - low) / (points - 1) as f64;
        let mut v: Vec<f64> = (0..points).map(|i| low + i as f64 * step).collect();
        v[points - 1] = high;
        Ok(SimilarityGrid { points: v })
    }

    pub fn from_points(points: Vec<f64>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidArgument("grid needs at least 2 points".into()));
        }
        if points.iter().any(|p| !p.is_finite()) || points.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument(
                "grid must be finite and strictly increasing".into(),
            ));
        }
        Ok(SimilarityGrid { points })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum CurveSource {
    PerTerm(String),
    Aggregated(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Band {
    pub low: Vec<f64>,
    pub high: Vec<f64>,
}

/// Expected-neighbor counts on a grid. Aggregated curves carry a confidence band.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborCurve {
    grid: Vec<f64>,
    expected: Vec<f64>,
    band: Option<Band>,
    source: CurveSource,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandPoint {
    pub expected: f64,
    pub low: f64,
    pub high: f64,
}

impl NeighborCurve {
    /// Assembles a curve from precomputed values. The grid must be strictly
    /// increasing and the expected values non-negative and non-increasing; a
    /// band, when given, must enclose the expected values.
    pub fn new(grid: Vec<f64>, expected: Vec<f64>, band: Option<Band>, source: CurveSource) -> Result<Self> {
        SimilarityGrid::from_points(grid.clone())?;
        if expected.len() != grid.len() {
            return Err(Error::InvalidArgument("expected values do not match the grid".into()));
        }
        if expected.iter().any(|e| !e.is_finite() || *e < 0.0) {
            return Err(Error::InvalidArgument(
                "expected values must be finite and non-negative".into(),
            ));
        }
        if let Some(index) = expected.windows(2).position(|w| w[1] > w[0]) {
            return Err(Error::NonMonotone { index: index + 1 });
        }
        if let Some(b) = &band {
            if b.low.len() != grid.len() || b.high.len() != grid.len() {
                return Err(Error::InvalidArgument("band does not match the grid".into()));
            }
            let ok = (0..grid.len()).all(|i| b.low[i] <= expected[i] && expected[i] <= b.high[i]);
            if !ok {
                return Err(Error::InvalidArgument(
                    "band does not enclose the expected values".into(),
                ));
            }
        }
        Ok(NeighborCurve {
            grid,
            expected,
            band,
            source,
        })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn expected(&self) -> &[f64] {
        &self.expected
    }

    pub fn band(&self) -> Option<&Band> {
        self.band.as_ref()
    }

    pub fn source(&self) -> &CurveSource {
        &self.source
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// Values at grid index `i`; without a band, low and high equal the expected value.
    pub fn point(&self, i: usize) -> BandPoint {
        let expected = self.expected[i];
        match &self.band {
            Some(b) => BandPoint {
                expected,
                low: b.low[i],
                high: b.high[i],
            },
            None => BandPoint {
                expected,
                low: expected,
                high: expected,
            },
        }
    }

    /// Piecewise-linear interpolation; clamps outside the grid.
    pub fn interpolate(&self, s: f64) -> BandPoint {
        let n = self.grid.len();
        if s <= self.grid[0] {
            return self.point(0);
        }
        if s >= self.grid[n - 1] {
            return self.point(n - 1);
        }
        let hi = self.grid.partition_point(|&g| g <= s);
        let lo = hi - 1;
        let w = (s - self.grid[lo]) / (self.grid[hi] - self.grid[lo]);
        let (a, b) = (self.point(lo), self.point(hi));
        let lerp = |x: f64, y: f64| x + w * (y - x);
        BandPoint {
            expected: lerp(a.expected, b.expected),
            low: lerp(a.low, b.low),
            high: lerp(a.high, b.high),
        }
    }
}

/// All fitted pair distributions of one term: the mixture behind `E_t`.
#[derive(Debug, Clone, PartialEq)]
pub struct TermMixture {
    term: String,
    components: Vec<NormalComponent>,
    // shared-vocabulary index of each component's partner, when fitted from an ensemble
    partners: Vec<usize>,
    sample_count: usize,
}

impl TermMixture {
    /// Fits every pair `(t, u)`, `u != t`, over the shared vocabulary.
    ///
    /// Replicas are scanned one at a time with running mean/variance
    /// accumulators, so only `O(|V|)` similarities are held at once.
    pub fn fit(ensemble: &ModelEnsemble, t: &str) -> Result<Self> {
        let i = ensemble.require(t)?;
        let n = ensemble.shared_vocabulary().len();
        let mut mean = vec![0.0f64; n];
        let mut m2 = vec![0.0f64; n];
        for r in 0..ensemble.replica_count() {
            let k = (r + 1) as f64;
            for (j, s) in ensemble.similarities_in(r, i).into_iter().enumerate() {
                let delta = s - mean[j];
                mean[j] += delta / k;
                m2[j] += delta * (s - mean[j]);
            }
        }
        let df = (ensemble.replica_count() - 1) as f64;
        let partners: Vec<usize> = (0..n).filter(|&j| j != i).collect();
        let components = partners
            .iter()
            .map(|&j| NormalComponent {
                mean: mean[j],
                std: (m2[j].max(0.0) / df).sqrt().max(STD_FLOOR),
            })
            .collect();
        Ok(TermMixture {
            term: t.to_owned(),
            components,
            partners,
            sample_count: ensemble.replica_count(),
        })
    }

    /// A mixture from explicit components (synthetic curves, tests). Stds are floored.
    pub fn from_components(term: impl Into<String>, components: Vec<NormalComponent>) -> Result<Self> {
        if components
            .iter()
            .any(|c| !c.mean.is_finite() || !c.std.is_finite() || c.std < 0.0)
        {
            return Err(Error::InvalidArgument(
                "components need finite means and non-negative stds".into(),
            ));
        }
        let components = components
            .into_iter()
            .map(|c| NormalComponent {
                mean: c.mean,
                std: c.std.max(STD_FLOOR),
            })
            .collect();
        Ok(TermMixture {
            term: term.into(),
            components,
            partners: Vec::new(),
            sample_count: 0,
        })
    }

    pub fn term(&self) -> &str {
        &self.term
    }

    pub fn components(&self) -> &[NormalComponent] {
        &self.components
    }

    /// `E_t(s)`.
    pub fn expected_at(&self, s: f64) -> f64 {
        self.components.iter().map(|c| c.survival(s)).sum()
    }

    pub fn curve(&self, grid: &SimilarityGrid) -> NeighborCurve {
        let mut expected: Vec<f64> = grid.points().par_iter().map(|&s| self.expected_at(s)).collect();
        // survival sums are monotone up to round-off; pin that down exactly
        for i in 1..expected.len() {
            if expected[i] > expected[i - 1] {
                expected[i] = expected[i - 1];
            }
        }
        NeighborCurve {
            grid: grid.points().to_vec(),
            expected,
            band: None,
            source: CurveSource::PerTerm(self.term.clone()),
        }
    }

    /// Pair distributions with partner tokens; empty for synthetic mixtures.
    pub fn pair_distributions(&self, ensemble: &ModelEnsemble) -> Vec<PairSimilarityDistribution> {
        let vocab = ensemble.shared_vocabulary();
        self.partners
            .iter()
            .zip(&self.components)
            .map(|(&j, c)| PairSimilarityDistribution {
                term: self.term.clone(),
                other: vocab[j].clone(),
                mean: c.mean,
                std: c.std,
                sample_count: self.sample_count,
            })
            .collect()
    }

    fn canonical_cmp(&self, other: &TermMixture) -> Ordering {
        self.term.cmp(&other.term).then_with(|| {
            let key = |m: &TermMixture| -> Vec<(u64, u64)> {
                m.components
                    .iter()
                    .map(|c| (c.mean.to_bits(), c.std.to_bits()))
                    .collect()
            };
            key(self).cmp(&key(other))
        })
    }
}

/// Fits the mixtures of several terms in parallel, in input order.
pub fn fit_terms<S: AsRef<str> + Sync>(ensemble: &ModelEnsemble, terms: &[S]) -> Result<Vec<TermMixture>> {
    terms
        .par_iter()
        .map(|t| TermMixture::fit(ensemble, t.as_ref()))
        .collect()
}

/// Per-term expected-neighbor curve of `t`.
pub fn expected_neighbors(ensemble: &ModelEnsemble, t: &str, grid: &SimilarityGrid) -> Result<NeighborCurve> {
    Ok(TermMixture::fit(ensemble, t)?.curve(grid))
}

// Mean and confidence band of one grid column. `values` must already be in canonical order.
fn band_stats(values: &[f64], z: f64) -> BandPoint {
    let n = values.len();
    let first = values[0];
    if values.iter().all(|&v| v == first) {
        return BandPoint {
            expected: first,
            low: first,
            high: first,
        };
    }
    let mean = stats::mean(values);
    let half = z * stats::sample_std(values) / (n as f64).sqrt();
    BandPoint {
        expected: mean,
        low: (mean - half).max(0.0),
        high: mean + half,
    }
}

fn check_confidence(confidence: f64) -> Result<f64> {
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "confidence {confidence} is not in (0, 1)"
        )));
    }
    Ok(stats::z_for_confidence(confidence))
}

fn curve_cmp(a: &NeighborCurve, b: &NeighborCurve) -> Ordering {
    a.source.cmp(&b.source).then_with(|| {
        a.expected
            .iter()
            .zip(&b.expected)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal)
    })
}

/// Pointwise mean of per-term curves with a `confidence` band of
/// `mean +/- z * std / sqrt(n)`; the lower edge is floored at zero.
///
/// Curves are summed in a canonical order, so the result does not depend on
/// the order they are passed in.
pub fn aggregate_curves(curves: &[NeighborCurve], confidence: f64) -> Result<NeighborCurve> {
    let z = check_confidence(confidence)?;
    if curves.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "aggregation needs at least 2 curves, got {}",
            curves.len()
        )));
    }
    let grid = &curves[0].grid;
    if curves.iter().any(|c| &c.grid != grid) {
        return Err(Error::InvalidArgument("curves are on different grids".into()));
    }
    let mut ordered: Vec<&NeighborCurve> = curves.iter().collect();
    ordered.sort_by(|a, b| curve_cmp(a, b));

    let points: Vec<BandPoint> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let column: Vec<f64> = ordered.iter().map(|c| c.expected[i]).collect();
            band_stats(&column, z)
        })
        .collect();
    Ok(NeighborCurve {
        grid: grid.clone(),
        expected: points.iter().map(|p| p.expected).collect(),
        band: Some(Band {
            low: points.iter().map(|p| p.low).collect(),
            high: points.iter().map(|p| p.high).collect(),
        }),
        source: CurveSource::Aggregated(curves.len()),
    })
}

/// The aggregated curve in closed form: evaluable at any similarity, which
/// lets the threshold solver refine crossings below the grid resolution.
#[derive(Debug, Clone)]
pub struct AggregateMixture {
    terms: Vec<TermMixture>,
    confidence: f64,
    z: f64,
}

impl AggregateMixture {
    pub fn new(mut terms: Vec<TermMixture>, confidence: f64) -> Result<Self> {
        let z = check_confidence(confidence)?;
        if terms.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "aggregation needs at least 2 terms, got {}",
                terms.len()
            )));
        }
        terms.sort_by(|a, b| a.canonical_cmp(b));
        Ok(AggregateMixture { terms, confidence, z })
    }

    pub fn terms(&self) -> &[TermMixture] {
        &self.terms
    }

    pub fn confidence(&self) -> f64 {
        self.confidence
    }

    pub fn point(&self, s: f64) -> BandPoint {
        let column: Vec<f64> = self.terms.iter().map(|t| t.expected_at(s)).collect();
        band_stats(&column, self.z)
    }

    /// Per-term curves on `grid`, aggregated.
    pub fn curve(&self, grid: &SimilarityGrid) -> NeighborCurve {
        let curves: Vec<NeighborCurve> = self.terms.iter().map(|t| t.curve(grid)).collect();
        aggregate_curves(&curves, self.confidence).expect("validated on construction")
    }
}
