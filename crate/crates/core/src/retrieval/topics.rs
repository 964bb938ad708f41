//! Topic files and TREC run output.

use std::collections::HashSet;
use std::io::{BufRead, Write};

use super::ScoredDoc;
use crate::error::{Error, Result};

/// Documents written per topic.
pub const MAX_RUN_DEPTH: usize = 1000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Topic {
    pub id: String,
    pub text: String,
}

/// Reads `topic_id<TAB>query text` lines. Blank lines are skipped.
pub fn read_topics<R: BufRead>(reader: R) -> Result<Vec<Topic>> {
    let mut topics = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::parse("topics", line_no, e.to_string()))?;
        let line = line.trim_end_matches(['\r', '\n']);
        if line.trim().is_empty() {
            continue;
        }
        let (id, text) = line
            .split_once('\t')
            .ok_or_else(|| Error::parse("topics", line_no, "expected topic_id<TAB>query"))?;
        let id = id.trim();
        if id.is_empty() || id.contains(char::is_whitespace) {
            return Err(Error::parse("topics", line_no, format!("invalid topic id {id:?}")));
        }
        if !seen.insert(id.to_owned()) {
            return Err(Error::parse("topics", line_no, format!("duplicate topic {id:?}")));
        }
        topics.push(Topic {
            id: id.to_owned(),
            text: text.to_owned(),
        });
    }
    Ok(topics)
}

/// Writes up to `depth` ranked documents as `topic Q0 doc rank score tag`.
pub fn write_run<W: Write>(w: &mut W, topic_id: &str, ranked: &[ScoredDoc], run_tag: &str, depth: usize) -> Result<()> {
    if run_tag.is_empty() || run_tag.contains(char::is_whitespace) {
        return Err(Error::InvalidArgument(format!("invalid run tag {run_tag:?}")));
    }
    for (i, d) in ranked.iter().take(depth).enumerate() {
        writeln!(w, "{topic_id} Q0 {} {} {} {run_tag}", d.doc_id, i + 1, d.score)?;
    }
    Ok(())
}
