use super::RunScores;
use crate::error::{Error, Result};
use crate::stats;

pub const SIGNIFICANCE_LEVEL: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignificanceResult {
    pub t_statistic: f64,
    pub p_value: f64,
    pub significant: bool,
    pub n_topics: usize,
}

/// Two-sided paired t-test on per-topic differences `a - b`.
///
/// All-zero differences give `t = 0, p = 1`. Constant nonzero differences
/// give an infinite `t` and `p = 0`.
pub fn paired_ttest(a: &RunScores, b: &RunScores) -> Result<SignificanceResult> {
    if a.per_topic.len() != b.per_topic.len() || a.per_topic.keys().ne(b.per_topic.keys()) {
        let only_a: Vec<&str> = a
            .per_topic
            .keys()
            .filter(|k| !b.per_topic.contains_key(*k))
            .map(String::as_str)
            .collect();
        let only_b: Vec<&str> = b
            .per_topic
            .keys()
            .filter(|k| !a.per_topic.contains_key(*k))
            .map(String::as_str)
            .collect();
        return Err(Error::TopicMismatch(format!(
            "only in first: {only_a:?}, only in second: {only_b:?}"
        )));
    }
    let n = a.per_topic.len();
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "paired t-test needs at least 2 topics, got {n}"
        )));
    }
    let diffs: Vec<f64> = a
        .per_topic
        .values()
        .zip(b.per_topic.values())
        .map(|(x, y)| x - y)
        .collect();
    if diffs.iter().all(|&d| d == 0.0) {
        return Ok(SignificanceResult {
            t_statistic: 0.0,
            p_value: 1.0,
            significant: false,
            n_topics: n,
        });
    }
    let mean = stats::mean(&diffs);
    let sd = stats::sample_std(&diffs);
    let (t, p) = if sd == 0.0 {
        log::warn!("per-topic differences are constant ({mean}); reporting p = 0");
        (mean.signum() * f64::INFINITY, 0.0)
    } else {
        let t = mean / (sd / (n as f64).sqrt());
        (t, stats::student_t_two_sided_p(t, (n - 1) as f64))
    };
    Ok(SignificanceResult {
        t_statistic: t,
        p_value: p,
        significant: p < SIGNIFICANCE_LEVEL,
        n_topics: n,
    })
}
