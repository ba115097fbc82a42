use std::collections::HashMap;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

/// Word vectors as stored on disk (not normalized).
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    dim: usize,
    words: Vec<String>,
    index: HashMap<String, usize>,
    data: Vec<f32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmbeddingFormat {
    /// `vocab dim` header, then `word v1 .. vdim` per line.
    Text,
    /// `vocab dim\n` header, then per entry the word, one space and `dim`
    /// little-endian f32 values.
    Binary,
}

impl EmbeddingTable {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            words: Vec::new(),
            index: HashMap::new(),
            data: Vec::new(),
        }
    }

    pub fn insert(&mut self, word: impl Into<String>, vector: &[f32]) -> Result<()> {
        let word = word.into();
        if vector.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: vector.len(),
            });
        }
        if vector.iter().any(|v| v.is_nan()) {
            return Err(Error::Validation(format!("NaN component in vector for {word:?}")));
        }
        if self.index.contains_key(&word) {
            return Err(Error::Validation(format!("duplicate word {word:?}")));
        }
        self.index.insert(word.clone(), self.words.len());
        self.words.push(word);
        self.data.extend_from_slice(vector);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn get(&self, word: &str) -> Option<&[f32]> {
        self.index
            .get(word)
            .map(|&i| &self.data[i * self.dim..(i + 1) * self.dim])
    }

    /// Entries in file order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, &[f32])> {
        self.words
            .iter()
            .enumerate()
            .map(|(i, w)| (w.as_str(), &self.data[i * self.dim..(i + 1) * self.dim]))
    }
}

fn emb_err(offset: usize, message: impl Into<String>) -> Error {
    Error::Embedding {
        offset: offset as u64,
        message: message.into(),
    }
}

fn parse_header(bytes: &[u8]) -> Result<(usize, usize, usize)> {
    let end = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| emb_err(bytes.len(), "missing header line"))?;
    let header = std::str::from_utf8(&bytes[..end]).map_err(|_| emb_err(0, "header is not ASCII"))?;
    let mut parts = header.split_whitespace();
    let mut num = |name: &str| -> Result<usize> {
        parts
            .next()
            .and_then(|p| p.parse().ok())
            .ok_or_else(|| emb_err(0, format!("header lacks {name}")))
    };
    let vocab = num("vocabulary size")?;
    let dim = num("dimension")?;
    if dim == 0 {
        return Err(emb_err(0, "dimension must be positive"));
    }
    Ok((vocab, dim, end + 1))
}

fn looks_like_text(body: &[u8], dim: usize) -> bool {
    let end = body.iter().position(|&b| b == b'\n').unwrap_or(body.len());
    match std::str::from_utf8(&body[..end]) {
        Ok(line) => {
            let toks: Vec<&str> = line.split_whitespace().collect();
            toks.len() == dim + 1 && toks[1..].iter().all(|t| t.parse::<f32>().is_ok())
        }
        Err(_) => false,
    }
}

/// Load a table, detecting the encoding from the first entry.
pub fn load_embeddings(path: impl AsRef<Path>) -> Result<EmbeddingTable> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let (_, dim, start) = parse_header(&bytes)?;
    let format = if looks_like_text(&bytes[start..], dim) {
        EmbeddingFormat::Text
    } else {
        EmbeddingFormat::Binary
    };
    parse_embeddings(&bytes, format)
}

pub fn load_embeddings_as(path: impl AsRef<Path>, format: EmbeddingFormat) -> Result<EmbeddingTable> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_embeddings(&bytes, format)
}

fn parse_embeddings(bytes: &[u8], format: EmbeddingFormat) -> Result<EmbeddingTable> {
    let (vocab, dim, start) = parse_header(bytes)?;
    let mut table = EmbeddingTable::new(dim);
    match format {
        EmbeddingFormat::Text => parse_text(bytes, start, vocab, &mut table)?,
        EmbeddingFormat::Binary => parse_binary(bytes, start, vocab, &mut table)?,
    }
    Ok(table)
}

fn parse_text(bytes: &[u8], mut pos: usize, vocab: usize, table: &mut EmbeddingTable) -> Result<()> {
    let dim = table.dim();
    let mut vec = Vec::with_capacity(dim);
    while table.len() < vocab {
        if pos >= bytes.len() {
            return Err(emb_err(
                pos,
                format!("truncated: header declares {vocab} words, found {}", table.len()),
            ));
        }
        let end = bytes[pos..]
            .iter()
            .position(|&b| b == b'\n')
            .map_or(bytes.len(), |i| pos + i);
        let line = std::str::from_utf8(&bytes[pos..end]).map_err(|_| emb_err(pos, "invalid UTF-8"))?;
        if !line.trim().is_empty() {
            let mut toks = line.split_whitespace();
            let word = toks.next().unwrap_or_default();
            vec.clear();
            for t in toks {
                vec.push(
                    t.parse::<f32>()
                        .map_err(|_| emb_err(pos, format!("bad number {t:?}")))?,
                );
            }
            if vec.len() != dim {
                return Err(emb_err(
                    pos,
                    format!("dimension mismatch: expected {dim} values, got {}", vec.len()),
                ));
            }
            table.insert(word, &vec).map_err(|e| emb_err(pos, e.to_string()))?;
        }
        pos = end + 1;
    }
    Ok(())
}

fn parse_binary(bytes: &[u8], mut pos: usize, vocab: usize, table: &mut EmbeddingTable) -> Result<()> {
    let dim = table.dim();
    let mut vec = vec![0f32; dim];
    while table.len() < vocab {
        // Some writers put a newline after each vector.
        while pos < bytes.len() && bytes[pos] == b'\n' {
            pos += 1;
        }
        let truncated = |at: usize| {
            emb_err(
                at,
                format!("truncated: header declares {vocab} words, found {}", table.len()),
            )
        };
        let space = bytes[pos.min(bytes.len())..]
            .iter()
            .position(|&b| b == b' ')
            .map(|i| pos + i)
            .ok_or_else(|| truncated(bytes.len()))?;
        let word = std::str::from_utf8(&bytes[pos..space]).map_err(|_| emb_err(pos, "invalid UTF-8 word"))?;
        let vstart = space + 1;
        let vend = vstart + 4 * dim;
        if vend > bytes.len() {
            return Err(truncated(bytes.len()));
        }
        for (slot, chunk) in vec.iter_mut().zip(bytes[vstart..vend].chunks_exact(4)) {
            *slot = f32::from_le_bytes([chunk[0], chunk[1], chunk[2], chunk[3]]);
        }
        table.insert(word, &vec).map_err(|e| emb_err(pos, e.to_string()))?;
        pos = vend;
    }
    Ok(())
}

pub fn write_embeddings_text(path: impl AsRef<Path>, table: &EmbeddingTable) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::new();
    out.push_str(&format!("{} {}\n", table.len(), table.dim()));
    for (w, v) in table.iter() {
        out.push_str(w);
        for x in v {
            out.push(' ');
            out.push_str(&x.to_string());
        }
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub fn write_embeddings_binary(path: impl AsRef<Path>, table: &EmbeddingTable) -> Result<()> {
    let path = path.as_ref();
    let mut out = Vec::new();
    writeln!(out, "{} {}", table.len(), table.dim()).expect("write to Vec");
    for (w, v) in table.iter() {
        out.extend_from_slice(w.as_bytes());
        out.push(b' ');
        for x in v {
            out.extend_from_slice(&x.to_le_bytes());
        }
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}
