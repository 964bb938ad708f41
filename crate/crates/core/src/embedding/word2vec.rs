//! word2vec text and binary formats.
//!
//! Both start with a text header `"<count> <dim>\n"`. Text records are
//! `"<token> <f1> ... <fdim>"` lines; binary records are the token bytes, one
//! space, `dim` little-endian `f32` values and an optional newline.

use std::io::{self, BufRead, Read, Write};

use super::{EmbeddingModel, ModelBuilder, VectorFormat};
use crate::error::{Error, Result};

const WHAT: &str = "word2vec";

/// Parses a model from `reader`.
pub fn read_word2vec<R: BufRead>(
    mut reader: R,
    format: VectorFormat,
    model_id: impl Into<String>,
) -> Result<EmbeddingModel> {
    let mut header = Vec::new();
    reader.read_until(b'\n', &mut header)?;
    let (count, dim) = parse_header(&header)?;
    let mut builder = ModelBuilder::new(model_id.into(), dim)
        .map_err(|_| Error::parse(WHAT, 1, "dimensionality must be positive"))?;
    match format {
        VectorFormat::Word2VecText => read_text_records(reader, count, &mut builder)?,
        VectorFormat::Word2VecBinary => read_binary_records(reader, count, &mut builder)?,
    }
    if builder.len() != count {
        return Err(Error::parse(
            WHAT,
            0,
            format!("header declares {count} tokens but {} records were read", builder.len()),
        ));
    }
    builder.finish().map_err(|e| Error::parse(WHAT, 1, e.to_string()))
}

fn parse_header(line: &[u8]) -> Result<(usize, usize)> {
    let text = std::str::from_utf8(line).map_err(|_| Error::parse(WHAT, 1, "header is not UTF-8"))?;
    let mut fields = text.split_whitespace();
    let mut next = |name: &str| -> Result<usize> {
        let field = fields
            .next()
            .ok_or_else(|| Error::parse(WHAT, 1, format!("header is missing the {name}")))?;
        field
            .parse::<usize>()
            .map_err(|_| Error::parse(WHAT, 1, format!("header {name} {field:?} is not a count")))
    };
    let count = next("vocabulary size")?;
    let dim = next("dimensionality")?;
    if fields.next().is_some() {
        return Err(Error::parse(WHAT, 1, "header has more than two fields"));
    }
    if dim == 0 {
        return Err(Error::parse(WHAT, 1, "dimensionality must be positive"));
    }
    Ok((count, dim))
}

fn read_text_records<R: BufRead>(reader: R, count: usize, builder: &mut ModelBuilder) -> Result<()> {
    let dim = builder.dimensionality;
    let mut vector = Vec::with_capacity(dim.min(4096));
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 2;
        let line = line.map_err(|e| Error::parse(WHAT, line_no, e.to_string()))?;
        let mut fields = line.split_whitespace();
        let Some(token) = fields.next() else {
            continue;
        };
        if builder.len() == count {
            return Err(Error::parse(
                WHAT,
                line_no,
                format!("more records than the {count} declared in the header"),
            ));
        }
        vector.clear();
        for field in fields {
            let x: f32 = field
                .parse()
                .map_err(|_| Error::parse(WHAT, line_no, format!("{field:?} is not a number")))?;
            vector.push(x);
        }
        builder.push(token.to_owned(), &vector, line_no)?;
    }
    Ok(())
}

fn read_binary_records<R: BufRead>(mut reader: R, count: usize, builder: &mut ModelBuilder) -> Result<()> {
    let dim = builder.dimensionality;
    let mut token = Vec::new();
    let mut raw = Vec::new();
    let mut vector = Vec::with_capacity(dim.min(4096));
    while builder.len() < count {
        let record = builder.len() + 1;
        skip_newlines(&mut reader)?;
        token.clear();
        reader.read_until(b' ', &mut token)?;
        if token.last() != Some(&b' ') {
            // clean EOF before the declared count: reported by the caller as a count mismatch
            if token.is_empty() {
                return Ok(());
            }
            return Err(Error::parse(WHAT, record, "truncated record"));
        }
        token.pop();
        raw.clear();
        let wanted = dim as u64 * 4;
        let got = (&mut reader).take(wanted).read_to_end(&mut raw)?;
        if got as u64 != wanted {
            return Err(Error::parse(WHAT, record, "truncated vector"));
        }
        vector.clear();
        vector.extend(
            raw.chunks_exact(4)
                .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]])),
        );
        builder.push(String::from_utf8_lossy(&token).into_owned(), &vector, record)?;
    }
    skip_newlines(&mut reader)?;
    if !reader.fill_buf()?.is_empty() {
        return Err(Error::parse(
            WHAT,
            count + 1,
            format!("more records than the {count} declared in the header"),
        ));
    }
    Ok(())
}

fn skip_newlines<R: BufRead>(reader: &mut R) -> io::Result<()> {
    loop {
        let buf = reader.fill_buf()?;
        if buf.is_empty() {
            return Ok(());
        }
        let n = buf.iter().take_while(|&&b| b == b'\n' || b == b'\r').count();
        let done = n < buf.len();
        reader.consume(n);
        if done {
            return Ok(());
        }
    }
}

/// Serializes the (normalized) vectors of `model`.
pub fn write_word2vec<W: Write>(model: &EmbeddingModel, w: &mut W, format: VectorFormat) -> io::Result<()> {
    writeln!(w, "{} {}", model.len(), model.dimensionality())?;
    for (i, token) in model.vocabulary().iter().enumerate() {
        let v = model.vector_at(i);
        match format {
            VectorFormat::Word2VecText => {
                w.write_all(token.as_bytes())?;
                for x in v {
                    write!(w, " {x}")?;
                }
                w.write_all(b"\n")?;
            }
            VectorFormat::Word2VecBinary => {
                w.write_all(token.as_bytes())?;
                w.write_all(b" ")?;
                for x in v {
                    w.write_all(&x.to_le_bytes())?;
                }
                w.write_all(b"\n")?;
            }
        }
    }
    Ok(())
}
