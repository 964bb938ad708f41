//! Corpus readers: JSON lines and TREC tagged text.

use std::io::BufRead;

use serde::Deserialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
pub struct Document {
    pub id: String,
    pub text: String,
}

/// Documents from `{"id": ..., "text": ...}` lines. Blank lines are skipped.
pub struct JsonlDocuments<R> {
    lines: std::io::Lines<R>,
    line_no: usize,
}

impl<R: BufRead> JsonlDocuments<R> {
    pub fn new(reader: R) -> Self {
        JsonlDocuments {
            lines: reader.lines(),
            line_no: 0,
        }
    }
}

impl<R: BufRead> Iterator for JsonlDocuments<R> {
    type Item = Result<Document>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let line = self.lines.next()?;
            self.line_no += 1;
            let line_no = self.line_no;
            let line = match line {
                Ok(l) => l,
                Err(e) => return Some(Err(Error::parse("corpus", line_no, e.to_string()))),
            };
            if line.trim().is_empty() {
                continue;
            }
            return Some(
                serde_json::from_str::<Document>(&line).map_err(|e| Error::parse("corpus", line_no, e.to_string())),
            );
        }
    }
}

/// Documents from `<DOC><DOCNO>id</DOCNO><TEXT>...</TEXT></DOC>` blocks.
/// All `TEXT` sections of a document are joined; other tags are ignored.
pub struct TrecDocuments<R> {
    reader: R,
    line_no: usize,
    block: Option<(usize, String)>,
    failed: bool,
}

impl<R: BufRead> TrecDocuments<R> {
    pub fn new(reader: R) -> Self {
        TrecDocuments {
            reader,
            line_no: 0,
            block: None,
            failed: false,
        }
    }

    fn fail(&mut self, line: usize, message: impl Into<String>) -> Option<Result<Document>> {
        self.failed = true;
        Some(Err(Error::parse("corpus", line, message)))
    }
}

fn between<'a>(text: &'a str, open: &str, close: &str) -> std::result::Result<Vec<&'a str>, String> {
    let mut out = Vec::new();
    let mut rest = text;
    while let Some(start) = rest.find(open) {
        let after = &rest[start + open.len()..];
        let end = after.find(close).ok_or_else(|| format!("{open} without {close}"))?;
        out.push(&after[..end]);
        rest = &after[end + close.len()..];
    }
    Ok(out)
}

fn parse_block(block: &str) -> std::result::Result<Document, String> {
    let ids = between(block, "<DOCNO>", "</DOCNO>")?;
    let id = match ids.as_slice() {
        [id] => id.trim(),
        [] => return Err("document without <DOCNO>".into()),
        _ => return Err("document with several <DOCNO> tags".into()),
    };
    if id.is_empty() {
        return Err("empty <DOCNO>".into());
    }
    let text = between(block, "<TEXT>", "</TEXT>")?.join("\n");
    Ok(Document {
        id: id.to_owned(),
        text,
    })
}

impl<R: BufRead> Iterator for TrecDocuments<R> {
    type Item = Result<Document>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }
        let mut line = String::new();
        loop {
            line.clear();
            match self.reader.read_line(&mut line) {
                Ok(0) => {
                    return match self.block.take() {
                        Some((start, _)) => self.fail(start, "<DOC> not closed before end of input"),
                        None => None,
                    };
                }
                Ok(_) => self.line_no += 1,
                Err(e) => {
                    let n = self.line_no + 1;
                    return self.fail(n, e.to_string());
                }
            }
            let mut rest = line.as_str();
            if self.block.is_none() {
                match rest.find("<DOC>") {
                    Some(p) => {
                        self.block = Some((self.line_no, String::new()));
                        rest = &rest[p + "<DOC>".len()..];
                    }
                    None => continue,
                }
            }
            let (start, buf) = self.block.as_mut().expect("inside a block");
            match rest.find("</DOC>") {
                Some(p) => {
                    buf.push_str(&rest[..p]);
                    let trailing = &rest[p + "</DOC>".len()..];
                    if trailing.contains("<DOC>") {
                        let n = self.line_no;
                        return self.fail(n, "several documents on one line");
                    }
                    let start = *start;
                    let (_, block) = self.block.take().expect("inside a block");
                    if block.contains("<DOC>") {
                        return self.fail(start, "nested <DOC>");
                    }
                    return Some(match parse_block(&block) {
                        Ok(doc) => Ok(doc),
                        Err(message) => {
                            self.failed = true;
                            Err(Error::parse("corpus", start, message))
                        }
                    });
                }
                None => buf.push_str(rest),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jsonl() {
        let docs: Vec<_> =
            JsonlDocuments::new("{\"id\":\"d1\",\"text\":\"a b\"}\n\n{\"id\":\"d2\",\"text\":\"\"}\n".as_bytes())
                .collect::<Result<_>>()
                .unwrap();
        assert_eq!(docs.len(), 2);
        assert_eq!(docs[1].id, "d2");
        let err = JsonlDocuments::new("{\"id\":1}\n".as_bytes())
            .next()
            .unwrap()
            .unwrap_err();
        assert!(err.to_string().contains("line 1"));
    }

    #[test]
    fn trec() {
        let text = "<DOC>\n<DOCNO> FT-1 </DOCNO>\n<HEAD>x</HEAD>\n<TEXT>\nfirst part\n</TEXT>\n<TEXT>second</TEXT>\n</DOC>\n<DOC><DOCNO>FT-2</DOCNO></DOC>\n";
        let docs: Vec<_> = TrecDocuments::new(text.as_bytes()).collect::<Result<_>>().unwrap();
        assert_eq!(docs[0].id, "FT-1");
        assert!(docs[0].text.contains("first part") && docs[0].text.contains("second"));
        assert!(!docs[0].text.contains('x'));
        assert_eq!(docs[1].text, "");
    }

    #[test]
    fn trec_errors() {
        for bad in [
            "<DOC>\n<TEXT>x</TEXT>\n</DOC>\n",
            "<DOC>\n<DOCNO>a</DOCNO>\n",
            "<DOC><DOCNO>a</DOCNO><TEXT>x</DOC>\n",
        ] {
            let r: Result<Vec<_>> = TrecDocuments::new(bad.as_bytes()).collect();
            assert!(r.is_err(), "{bad:?}");
        }
    }
}
