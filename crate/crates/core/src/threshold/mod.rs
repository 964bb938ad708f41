//! Similarity thresholds from expected-neighbor curves.
//!
//! The main threshold is where the aggregated curve equals the synonym
//! target. The band edges give the bounds: the lower band edge falls below
//! the target first, the upper edge last.

mod synonyms;

pub use synonyms::{synonym_statistics, SynsetFile};

use crate::error::{Error, Result};
use crate::neighbor::{AggregateMixture, BandPoint, NeighborCurve};

/// Width in `s` below which bisection on a closed-form curve stops.
pub const BISECTION_TOLERANCE: f64 = 1e-10;

/// Average synonym count used as the crossing target.
#[derive(Debug, Clone, PartialEq)]
pub struct SynonymTarget {
    pub mean_synonyms: f64,
    pub std_synonyms: f64,
    pub term_count: usize,
    pub source_label: String,
}

impl SynonymTarget {
    pub fn new(
        mean_synonyms: f64,
        std_synonyms: f64,
        term_count: usize,
        source_label: impl Into<String>,
    ) -> Result<Self> {
        let target = SynonymTarget {
            mean_synonyms,
            std_synonyms,
            term_count,
            source_label: source_label.into(),
        };
        target.validate()?;
        Ok(target)
    }

    /// A bare numeric target.
    pub fn from_mean(mean_synonyms: f64) -> Result<Self> {
        SynonymTarget::new(mean_synonyms, 0.0, 0, "given")
    }

    /// WordNet figures: 1.6 synonyms on average (std 3.1) over 147306 terms.
    pub fn wordnet_reference() -> Self {
        SynonymTarget {
            mean_synonyms: 1.6,
            std_synonyms: 3.1,
            term_count: 147_306,
            source_label: "wordnet".into(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mean_synonyms > 0.0 && self.mean_synonyms.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "synonym target must be positive, got {}",
                self.mean_synonyms
            )));
        }
        if self.std_synonyms.is_nan() || self.std_synonyms < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "synonym std must be non-negative, got {}",
                self.std_synonyms
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdResult {
    pub dimensionality: Option<usize>,
    pub main: f64,
    pub lower: f64,
    pub upper: f64,
    pub target: SynonymTarget,
}

impl ThresholdResult {
    pub fn with_dimensionality(mut self, dimensionality: usize) -> Self {
        self.dimensionality = Some(dimensionality);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Series {
    Expected,
    Low,
    High,
}

impl Series {
    fn name(self) -> &'static str {
        match self {
            Series::Expected => "expected",
            Series::Low => "band_low",
            Series::High => "band_high",
        }
    }

    fn pick(self, p: BandPoint) -> f64 {
        match self {
            Series::Expected => p.expected,
            Series::Low => p.low,
            Series::High => p.high,
        }
    }
}

// Grid interval [i, i + 1] holding the last crossing: the largest i with
// f(i) >= target, which must not be the final grid point.
fn bracket(curve: &NeighborCurve, series: Series, target: f64) -> Result<usize> {
    let values: Vec<f64> = (0..curve.len()).map(|i| series.pick(curve.point(i))).collect();
    let unreachable = || {
        let (min, max) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
        Error::UnreachableTarget {
            series: series.name(),
            target,
            min,
            max,
        }
    };
    match values.iter().rposition(|&v| v >= target) {
        Some(i) if i + 1 < values.len() => Ok(i),
        _ => Err(unreachable()),
    }
}

fn interpolate_crossing(curve: &NeighborCurve, series: Series, target: f64) -> Result<f64> {
    let i = bracket(curve, series, target)?;
    let (g0, g1) = (curve.grid()[i], curve.grid()[i + 1]);
    let f0 = series.pick(curve.point(i));
    let f1 = series.pick(curve.point(i + 1));
    let w = (f0 - target) / (f0 - f1);
    Ok(g0 + w * (g1 - g0))
}

fn bisect_crossing(curve: &NeighborCurve, mixture: &AggregateMixture, series: Series, target: f64) -> Result<f64> {
    let i = bracket(curve, series, target)?;
    let (mut lo, mut hi) = (curve.grid()[i], curve.grid()[i + 1]);
    while hi - lo > BISECTION_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if series.pick(mixture.point(mid)) >= target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn check_monotone(curve: &NeighborCurve) -> Result<()> {
    match curve.expected().windows(2).position(|w| w[1] > w[0]) {
        Some(index) => Err(Error::NonMonotone { index: index + 1 }),
        None => Ok(()),
    }
}

fn solve_with<F>(curve: &NeighborCurve, target: &SynonymTarget, crossing: F) -> Result<ThresholdResult>
where
    F: Fn(Series, f64) -> Result<f64>,
{
    target.validate()?;
    check_monotone(curve)?;
    let y = target.mean_synonyms;
    let main = crossing(Series::Expected, y)?;
    let (lower, upper) = if curve.band().is_some() {
        (crossing(Series::Low, y)?, crossing(Series::High, y)?)
    } else {
        (main, main)
    };
    Ok(ThresholdResult {
        dimensionality: None,
        main,
        lower,
        upper,
        target: target.clone(),
    })
}

/// Reads the crossings off the curve by linear interpolation between grid points.
pub fn solve_threshold(curve: &NeighborCurve, target: &SynonymTarget) -> Result<ThresholdResult> {
    solve_with(curve, target, |series, y| interpolate_crossing(curve, series, y))
}

/// Brackets each crossing on the grid, then bisects on the closed-form
/// `mixture` that `curve` was sampled from.
pub fn solve_threshold_refined(
    curve: &NeighborCurve,
    mixture: &AggregateMixture,
    target: &SynonymTarget,
) -> Result<ThresholdResult> {
    solve_with(curve, target, |series, y| bisect_crossing(curve, mixture, series, y))
}
