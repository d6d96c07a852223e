//! Plain-text vector files: a `V dim` header, then `token v1 .. vdim` per
//! line. Idiom keys go to a companion file next to it, one per line.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use super::EmbeddingStore;
use crate::error::{Error, Result};

const SIGNIFICANT_DIGITS: usize = 6;

/// The idiom-key companion of a vector file.
pub fn idioms_path(vectors: &Path) -> PathBuf {
    vectors.with_extension("idioms")
}

/// Formats like C's `%g` with six significant digits.
pub(crate) fn format_g(x: f32) -> String {
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= SIGNIFICANT_DIGITS as i32 {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (SIGNIFICANT_DIGITS as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn write_vectors(path: &Path, store: &EmbeddingStore) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    write_vectors_to(&mut out, store)?;
    out.flush()?;
    let mut idioms = BufWriter::new(File::create(idioms_path(path))?);
    for key in store.idiom_keys() {
        writeln!(idioms, "{key}")?;
    }
    idioms.flush()?;
    Ok(())
}

pub(crate) fn write_vectors_to<W: Write>(out: &mut W, store: &EmbeddingStore) -> Result<()> {
    writeln!(out, "{} {}", store.vocab_len(), store.dim())?;
    for (token, row) in store.vocab().iter().zip(store.raw_vectors().chunks(store.dim())) {
        out.write_all(token.as_bytes())?;
        for &x in row {
            write!(out, " {}", format_g(x))?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Reads a vector file and its companion idiom list (which may be absent).
pub fn read_vectors(path: &Path) -> Result<EmbeddingStore> {
    let reader = BufReader::new(File::open(path)?);
    let companion = idioms_path(path);
    let idioms: BTreeSet<String> = if companion.exists() {
        BufReader::new(File::open(&companion)?)
            .lines()
            .filter(|l| l.as_ref().map_or(true, |l| !l.trim().is_empty()))
            .map(|l| l.map(|l| l.trim().to_string()))
            .collect::<std::io::Result<_>>()?
    } else {
        BTreeSet::new()
    };
    read_vectors_from(reader, &idioms)
}

pub(crate) fn read_vectors_from<R: BufRead>(source: R, idioms: &BTreeSet<String>) -> Result<EmbeddingStore> {
    let mut lines = source.lines();
    let header = lines.next().ok_or_else(|| Error::parse(1, "missing header"))??;
    let mut parts = header.split_whitespace();
    let (rows, dim) = match (parts.next(), parts.next(), parts.next()) {
        (Some(r), Some(d), None) => (
            r.parse::<usize>().map_err(|_| Error::parse(1, "bad row count"))?,
            d.parse::<usize>().map_err(|_| Error::parse(1, "bad dimension"))?,
        ),
        _ => return Err(Error::parse(1, "header must be `rows dim`")),
    };
    let mut vocab = Vec::with_capacity(rows);
    let mut vectors = Vec::with_capacity(rows * dim);
    for (i, line) in lines.enumerate() {
        let line_no = i + 2;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split(' ');
        let token = fields.next().filter(|t| !t.is_empty()).ok_or_else(|| Error::parse(line_no, "missing token"))?;
        let before = vectors.len();
        for f in fields {
            vectors.push(f.parse::<f32>().map_err(|_| Error::parse(line_no, format!("bad value {f:?}")))?);
        }
        if vectors.len() - before != dim {
            return Err(Error::parse(line_no, format!("expected {dim} values, found {}", vectors.len() - before)));
        }
        vocab.push(token.to_string());
    }
    if vocab.len() != rows {
        return Err(Error::Domain(format!("header declares {rows} rows, file has {}", vocab.len())));
    }
    EmbeddingStore::new(vocab, dim, vectors, idioms)
}
