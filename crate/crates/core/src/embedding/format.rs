use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::EmbeddingSet;
use crate::error::{Error, Result};

/// On-disk embedding layouts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum EmbeddingFormat {
    /// `"<count> <dim>\n"` header, then per word the token, a space and
    /// `dim` little-endian f32 values.
    Word2vecBinary,
    /// `"<count> <dim>"` header line, then `token v1 ... vd` per line.
    Word2vecText,
    /// `token v1 ... vd` per line, no header.
    GloveText,
}

impl EmbeddingFormat {
    pub fn name(self) -> &'static str {
        match self {
            EmbeddingFormat::Word2vecBinary => "word2vec-binary",
            EmbeddingFormat::Word2vecText => "word2vec-text",
            EmbeddingFormat::GloveText => "glove-text",
        }
    }
}

impl FromStr for EmbeddingFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "word2vec-binary" => Ok(EmbeddingFormat::Word2vecBinary),
            "word2vec-text" => Ok(EmbeddingFormat::Word2vecText),
            "glove-text" => Ok(EmbeddingFormat::GloveText),
            other => Err(Error::invalid(format!("unknown embedding format {other}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct LoadOptions {
    /// Stop after this many unique words.
    pub limit: Option<usize>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LoadStats {
    pub duplicates_dropped: usize,
}

/// How text writers render components.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TextPrecision {
    /// Shortest representation that parses back to the identical f64.
    #[default]
    RoundTrip,
    Decimals(usize),
}

pub fn load_embeddings(path: impl AsRef<Path>, format: EmbeddingFormat) -> Result<EmbeddingSet> {
    load_embeddings_with(path, format, LoadOptions::default()).map(|(e, _)| e)
}

pub fn load_embeddings_with(
    path: impl AsRef<Path>,
    format: EmbeddingFormat,
    options: LoadOptions,
) -> Result<(EmbeddingSet, LoadStats)> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let (emb, stats) = read_embeddings(BufReader::new(file), format, options)?;
    if stats.duplicates_dropped > 0 {
        log::warn!(
            "{}: dropped {} duplicate words (kept first occurrence)",
            path.display(),
            stats.duplicates_dropped
        );
    }
    Ok((emb, stats))
}

pub fn read_embeddings<R: BufRead>(
    reader: R,
    format: EmbeddingFormat,
    options: LoadOptions,
) -> Result<(EmbeddingSet, LoadStats)> {
    let mut acc = Accumulator::new(options.limit);
    match format {
        EmbeddingFormat::Word2vecBinary => read_binary(reader, &mut acc)?,
        EmbeddingFormat::Word2vecText => read_text(reader, true, &mut acc)?,
        EmbeddingFormat::GloveText => read_text(reader, false, &mut acc)?,
    }
    acc.finish()
}

struct Accumulator {
    words: Vec<String>,
    seen: std::collections::HashSet<String>,
    data: Vec<f64>,
    dim: Option<usize>,
    limit: Option<usize>,
    stats: LoadStats,
}

impl Accumulator {
    fn new(limit: Option<usize>) -> Self {
        Self {
            words: Vec::new(),
            seen: Default::default(),
            data: Vec::new(),
            dim: None,
            limit,
            stats: LoadStats::default(),
        }
    }

    fn full(&self) -> bool {
        self.limit.is_some_and(|l| self.words.len() >= l)
    }

    fn push(&mut self, word: String, values: &[f64]) -> Result<()> {
        let dim = *self.dim.get_or_insert(values.len());
        if values.len() != dim {
            return Err(Error::DimensionMismatch {
                word,
                expected: dim,
                found: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(word));
        }
        if values.iter().all(|&v| v == 0.0) {
            return Err(Error::ZeroVector(word));
        }
        if self.seen.contains(&word) {
            self.stats.duplicates_dropped += 1;
            return Ok(());
        }
        self.seen.insert(word.clone());
        self.words.push(word);
        self.data.extend_from_slice(values);
        Ok(())
    }

    fn finish(self) -> Result<(EmbeddingSet, LoadStats)> {
        let dim = self.dim.unwrap_or(0);
        let emb = EmbeddingSet::from_flat(self.words, dim, self.data)?;
        Ok((emb, self.stats))
    }
}

fn parse_header(line: &str) -> Result<(usize, usize)> {
    let mut parts = line.split_whitespace();
    let bad = || Error::Parse {
        line: 1,
        message: format!("malformed header {line:?}, expected \"<count> <dim>\""),
    };
    let count = parts.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
    let dim: usize = parts.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
    if parts.next().is_some() || dim == 0 {
        return Err(bad());
    }
    Ok((count, dim))
}

fn read_binary<R: BufRead>(mut reader: R, acc: &mut Accumulator) -> Result<()> {
    let mut header = String::new();
    reader.read_line(&mut header).map_err(|e| Error::Parse {
        line: 1,
        message: e.to_string(),
    })?;
    let (count, dim) = parse_header(&header)?;
    acc.dim = Some(dim);
    let mut token = Vec::new();
    let mut raw = vec![0u8; 4 * dim];
    let mut values = vec![0.0f64; dim];
    for record in 0..count {
        if acc.full() {
            break;
        }
        // Record numbering mirrors text line numbers: header is line 1.
        let line = record + 2;
        let eof = |what: &str| Error::Parse {
            line,
            message: format!("unexpected end of file while reading {what}"),
        };
        token.clear();
        loop {
            let mut byte = [0u8; 1];
            match reader.read(&mut byte) {
                Ok(0) => return Err(eof("token")),
                Ok(_) => {}
                Err(e) => {
                    return Err(Error::Parse {
                        line,
                        message: e.to_string(),
                    })
                }
            }
            match byte[0] {
                b' ' if !token.is_empty() => break,
                b'\n' | b' ' if token.is_empty() => continue,
                b => token.push(b),
            }
        }
        reader.read_exact(&mut raw).map_err(|_| eof("vector"))?;
        for (v, chunk) in values.iter_mut().zip(raw.chunks_exact(4)) {
            *v = f64::from(f32::from_le_bytes(chunk.try_into().unwrap()));
        }
        let word = String::from_utf8_lossy(&token).into_owned();
        acc.push(word, &values)?;
    }
    Ok(())
}

fn read_text<R: BufRead>(reader: R, has_header: bool, acc: &mut Accumulator) -> Result<()> {
    let mut expected_count = None;
    let mut rows = 0usize;
    let mut values = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        if has_header && i == 0 {
            let (count, dim) = parse_header(&line)?;
            expected_count = Some(count);
            acc.dim = Some(dim);
            continue;
        }
        let line = line.trim_end();
        if line.is_empty() {
            continue;
        }
        if acc.full() {
            break;
        }
        let mut fields = line.split(' ');
        let word = fields.next().unwrap_or_default().to_string();
        values.clear();
        for field in fields {
            let v: f64 = field.parse().map_err(|_| Error::Parse {
                line: line_no,
                message: format!("invalid number {field:?} for word {word}"),
            })?;
            values.push(v);
        }
        acc.push(word, &values)?;
        rows += 1;
    }
    if let Some(count) = expected_count {
        if rows != count && !acc.full() {
            return Err(Error::Parse {
                line: 1,
                message: format!("header declares {count} words but file has {rows}"),
            });
        }
    }
    Ok(())
}

/// Writes `emb` to `path` through a temporary file in the same directory.
pub fn write_embeddings(
    path: impl AsRef<Path>,
    emb: &EmbeddingSet,
    format: EmbeddingFormat,
    precision: TextPrecision,
) -> Result<()> {
    let path = path.as_ref();
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    {
        let mut w = BufWriter::new(tmp.as_file());
        write_embeddings_to(&mut w, emb, format, precision).map_err(|e| Error::io(path, e))?;
        w.flush().map_err(|e| Error::io(path, e))?;
    }
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

pub fn write_embeddings_to<W: Write>(
    w: &mut W,
    emb: &EmbeddingSet,
    format: EmbeddingFormat,
    precision: TextPrecision,
) -> std::io::Result<()> {
    if format != EmbeddingFormat::GloveText {
        writeln!(w, "{} {}", emb.len(), emb.dim())?;
    }
    for (word, row) in emb.words().iter().zip(emb.rows()) {
        w.write_all(word.as_bytes())?;
        match format {
            EmbeddingFormat::Word2vecBinary => {
                w.write_all(b" ")?;
                for &v in row {
                    w.write_all(&(v as f32).to_le_bytes())?;
                }
                w.write_all(b"\n")?;
            }
            _ => {
                for &v in row {
                    match precision {
                        TextPrecision::RoundTrip => write!(w, " {v}")?,
                        TextPrecision::Decimals(d) => write!(w, " {v:.d$}")?,
                    }
                }
                w.write_all(b"\n")?;
            }
        }
    }
    Ok(())
}
