//! CSV records for every emitted table.
//!
//! Files always carry a header row, even when empty, and read back through
//! [`read_csv`].

use std::io::{Read, Write};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::embedding::Neighbor;
use crate::error::Result;
use crate::eval::{Evaluation, SignificanceResult};
use crate::neighbor::{NeighborCurve, PairSimilarityDistribution};
use crate::threshold::{SynonymTarget, ThresholdResult};
use crate::uncertainty::{SimilarityHistogram, UncertaintyCurve};

/// A CSV row type with a fixed header.
pub trait Record: Serialize + DeserializeOwned {
    const HEADER: &'static [&'static str];
}

pub fn write_csv<W: Write, T: Record>(writer: W, rows: &[T]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    w.write_record(T::HEADER)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read, T: Record>(reader: R) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_reader(reader);
    let header: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
    if header != T::HEADER {
        return Err(crate::Error::parse(
            "csv",
            1,
            format!("expected header {:?}, found {header:?}", T::HEADER),
        ));
    }
    r.deserialize().map(|row| row.map_err(Into::into)).collect()
}

macro_rules! record {
    ($name:ident { $($field:ident : $ty:ty),+ $(,)? }) => {
        #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
        pub struct $name {
            $(pub $field: $ty),+
        }

        impl Record for $name {
            const HEADER: &'static [&'static str] = &[$(stringify!($field)),+];
        }
    };
}

record!(HistogramRow {
    bin_low: f64,
    bin_high: f64,
    count: u64
});
record!(UncertaintyRow { bin_low: f64, bin_high: f64, pair_count: u64, mean_abs_diff: Option<f64> });
record!(CurveRow { grid_s: f64, expected: f64, band_low: Option<f64>, band_high: Option<f64> });
record!(ThresholdRow { dimensionality: Option<usize>, lower: f64, main: f64, upper: f64 });
record!(SynonymStatsRow {
    mean_synonyms: f64,
    std_synonyms: f64,
    term_count: usize,
    source_label: String
});
record!(NeighborRow {
    term: String,
    neighbor: String,
    similarity: f64
});
record!(PairRow {
    term: String,
    other: String,
    mean: f64,
    std: f64,
    sample_count: usize
});
record!(MetricRow {
    topic: String,
    ap: f64,
    ndcg: f64
});
record!(ComparisonRow {
    metric: String,
    mean_a: f64,
    mean_b: f64,
    t_statistic: f64,
    p_value: f64,
    significant: bool,
    n_topics: usize,
});

/// Topic label of the mean row in metric reports.
pub const MEAN_ROW: &str = "all";

pub fn histogram_rows(h: &SimilarityHistogram) -> Vec<HistogramRow> {
    h.counts
        .iter()
        .enumerate()
        .map(|(i, &count)| {
            let (bin_low, bin_high) = h.config.bin_bounds(i);
            HistogramRow {
                bin_low,
                bin_high,
                count,
            }
        })
        .collect()
}

pub fn uncertainty_rows(c: &UncertaintyCurve) -> Vec<UncertaintyRow> {
    c.bins
        .iter()
        .map(|b| UncertaintyRow {
            bin_low: b.bin_low,
            bin_high: b.bin_high,
            pair_count: b.pair_count,
            mean_abs_diff: b.mean_abs_diff,
        })
        .collect()
}

pub fn curve_rows(c: &NeighborCurve) -> Vec<CurveRow> {
    (0..c.len())
        .map(|i| CurveRow {
            grid_s: c.grid()[i],
            expected: c.expected()[i],
            band_low: c.band().map(|b| b.low[i]),
            band_high: c.band().map(|b| b.high[i]),
        })
        .collect()
}

pub fn threshold_row(r: &ThresholdResult) -> ThresholdRow {
    ThresholdRow {
        dimensionality: r.dimensionality,
        lower: r.lower,
        main: r.main,
        upper: r.upper,
    }
}

pub fn synonym_stats_row(t: &SynonymTarget) -> SynonymStatsRow {
    SynonymStatsRow {
        mean_synonyms: t.mean_synonyms,
        std_synonyms: t.std_synonyms,
        term_count: t.term_count,
        source_label: t.source_label.clone(),
    }
}

pub fn neighbor_rows(term: &str, neighbors: &[Neighbor]) -> Vec<NeighborRow> {
    neighbors
        .iter()
        .map(|n| NeighborRow {
            term: term.to_owned(),
            neighbor: n.token.clone(),
            similarity: n.similarity,
        })
        .collect()
}

pub fn pair_rows(pairs: &[PairSimilarityDistribution]) -> Vec<PairRow> {
    pairs
        .iter()
        .map(|p| PairRow {
            term: p.term.clone(),
            other: p.other.clone(),
            mean: p.mean,
            std: p.std,
            sample_count: p.sample_count,
        })
        .collect()
}

/// One row per topic plus a final mean row.
pub fn metric_rows(e: &Evaluation) -> Vec<MetricRow> {
    let mut rows: Vec<MetricRow> =
        e.ap.per_topic
            .iter()
            .map(|(topic, &ap)| MetricRow {
                topic: topic.clone(),
                ap,
                ndcg: e.ndcg.per_topic.get(topic).copied().unwrap_or(0.0),
            })
            .collect();
    rows.push(MetricRow {
        topic: MEAN_ROW.into(),
        ap: e.ap.mean(),
        ndcg: e.ndcg.mean(),
    });
    rows
}

pub fn comparison_row(metric: &str, mean_a: f64, mean_b: f64, s: &SignificanceResult) -> ComparisonRow {
    ComparisonRow {
        metric: metric.to_owned(),
        mean_a,
        mean_b,
        t_statistic: s.t_statistic,
        p_value: s.p_value,
        significant: s.significant,
        n_topics: s.n_topics,
    }
}
