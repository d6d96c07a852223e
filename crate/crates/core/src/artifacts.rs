//! TSV artifacts written by the identification stage.
//!
//! * `idiom2sent.tsv`: `key<TAB>[tok, tok, [IDIOM], ...]`
//! * `idiom2lemma2pos.tsv`: `key<TAB>[[lemma, POS], ..., [[IDIOM], X], ...]`
//! * `idiom2bows.tsv`: `key<TAB>{verb}<TAB>{noun}<TAB>{adj}<TAB>{adv}` with
//!   maps written as `{lemma: count, ...}` in key order.
//!
//! Tokens never contain whitespace, so `", "` separates list items
//! unambiguously. Readers expand `[IDIOM]` back to the row's key.

use std::io::{BufRead, Write};

use crate::corpus::Pos;
use crate::error::{Error, Result};
use crate::matcher::{BagOfWords, Category, IdiomOccurrence, LemmaCounts};

pub const IDIOM_PLACEHOLDER: &str = "[IDIOM]";

pub const IDIOM2SENT: &str = "idiom2sent.tsv";
pub const IDIOM2LEMMA2POS: &str = "idiom2lemma2pos.tsv";
pub const IDIOM2BOWS: &str = "idiom2bows.tsv";

pub fn write_idiom2sent<'a, W, I>(mut out: W, occurrences: I) -> Result<()>
where
    W: Write,
    I: IntoIterator<Item = &'a IdiomOccurrence>,
{
    for occ in occurrences {
        let items: Vec<&str> = occ
            .tokens
            .tokens
            .iter()
            .enumerate()
            .map(|(i, t)| if i == occ.position { IDIOM_PLACEHOLDER } else { t.text.as_str() })
            .collect();
        writeln!(out, "{}\t[{}]", occ.idiom_key, items.join(", "))?;
    }
    Ok(())
}

pub fn write_idiom2lemma2pos<'a, W, I>(mut out: W, occurrences: I) -> Result<()>
where
    W: Write,
    I: IntoIterator<Item = &'a IdiomOccurrence>,
{
    for occ in occurrences {
        let items: Vec<String> = occ
            .tokens
            .tokens
            .iter()
            .enumerate()
            .map(|(i, t)| {
                if i == occ.position {
                    format!("[{IDIOM_PLACEHOLDER}, X]")
                } else {
                    format!("[{}, {}]", t.lemma, t.pos)
                }
            })
            .collect();
        writeln!(out, "{}\t[{}]", occ.idiom_key, items.join(", "))?;
    }
    Ok(())
}

fn write_counts(out: &mut impl Write, counts: &LemmaCounts) -> Result<()> {
    let items: Vec<String> = counts.iter().map(|(l, n)| format!("{l}: {n}")).collect();
    write!(out, "{{{}}}", items.join(", "))?;
    Ok(())
}

pub fn write_bows<'a, W, I>(mut out: W, bows: I) -> Result<()>
where
    W: Write,
    I: IntoIterator<Item = &'a BagOfWords>,
{
    for bag in bows {
        write!(out, "{}", bag.idiom_key)?;
        for c in Category::ALL {
            out.write_all(b"\t")?;
            write_counts(&mut out, bag.get(c))?;
        }
        writeln!(out)?;
    }
    Ok(())
}

fn split_row(line: &str, line_no: usize) -> Result<(&str, &str)> {
    line.split_once('\t')
        .filter(|(k, _)| !k.is_empty())
        .ok_or_else(|| Error::parse(line_no, "expected key<TAB>value"))
}

fn list_items(body: &str, line_no: usize) -> Result<Vec<&str>> {
    let inner = body
        .strip_prefix('[')
        .and_then(|b| b.strip_suffix(']'))
        .ok_or_else(|| Error::parse(line_no, "expected a [...] list"))?;
    if inner.is_empty() {
        return Ok(Vec::new());
    }
    Ok(inner.split(", ").collect())
}

fn rows<R: BufRead>(source: R) -> impl Iterator<Item = Result<(usize, String)>> {
    source
        .lines()
        .enumerate()
        .map(|(i, l)| l.map(|l| (i + 1, l)).map_err(Error::from))
        .filter(|r| r.as_ref().map_or(true, |(_, l)| !l.trim().is_empty()))
}

/// A row of `idiom2sent.tsv` with the placeholder expanded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SentRow {
    pub idiom_key: String,
    pub tokens: Vec<String>,
    pub position: usize,
}

pub fn read_idiom2sent<R: BufRead>(source: R) -> Result<Vec<SentRow>> {
    let mut out = Vec::new();
    for row in rows(source) {
        let (line_no, line) = row?;
        let (key, body) = split_row(&line, line_no)?;
        let items = list_items(body, line_no)?;
        let position = placeholder_position(items.iter().copied(), line_no)?;
        let tokens = items
            .into_iter()
            .map(|t| if t == IDIOM_PLACEHOLDER { key.to_string() } else { t.to_string() })
            .collect();
        out.push(SentRow {
            idiom_key: key.to_string(),
            tokens,
            position,
        });
    }
    Ok(out)
}

fn placeholder_position<'a>(mut items: impl Iterator<Item = &'a str>, line_no: usize) -> Result<usize> {
    items
        .position(|t| t == IDIOM_PLACEHOLDER)
        .ok_or_else(|| Error::parse(line_no, "row has no [IDIOM] token"))
}

/// A row of `idiom2lemma2pos.tsv` with the placeholder expanded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LemmaPosRow {
    pub idiom_key: String,
    pub pairs: Vec<(String, Pos)>,
    pub position: usize,
}

impl LemmaPosRow {
    pub fn lemmas(&self) -> impl Iterator<Item = &str> {
        self.pairs.iter().map(|(l, _)| l.as_str())
    }
}

pub fn read_idiom2lemma2pos<R: BufRead>(source: R) -> Result<Vec<LemmaPosRow>> {
    let mut out = Vec::new();
    for row in rows(source) {
        let (line_no, line) = row?;
        let (key, body) = split_row(&line, line_no)?;
        let items = list_items(body, line_no)?;
        if items.len() % 2 != 0 {
            return Err(Error::parse(line_no, "malformed [lemma, POS] pair list"));
        }
        let mut pairs = Vec::with_capacity(items.len() / 2);
        for pair in items.chunks(2) {
            let lemma = pair[0]
                .strip_prefix('[')
                .ok_or_else(|| Error::parse(line_no, "pair must start with ["))?;
            let tag = pair[1]
                .strip_suffix(']')
                .ok_or_else(|| Error::parse(line_no, "pair must end with ]"))?;
            let pos: Pos = tag.parse().map_err(|_| Error::parse(line_no, format!("bad tag {tag:?}")))?;
            pairs.push((lemma.to_string(), pos));
        }
        let position = placeholder_position(pairs.iter().map(|(l, _)| l.as_str()), line_no)?;
        pairs[position].0 = key.to_string();
        out.push(LemmaPosRow {
            idiom_key: key.to_string(),
            pairs,
            position,
        });
    }
    Ok(out)
}

fn parse_counts(field: &str, line_no: usize) -> Result<LemmaCounts> {
    let inner = field
        .strip_prefix('{')
        .and_then(|f| f.strip_suffix('}'))
        .ok_or_else(|| Error::parse(line_no, "expected a {...} map"))?;
    let mut counts = LemmaCounts::new();
    if inner.is_empty() {
        return Ok(counts);
    }
    for item in inner.split(", ") {
        let (lemma, n) = item
            .rsplit_once(": ")
            .ok_or_else(|| Error::parse(line_no, format!("bad map item {item:?}")))?;
        let n: u64 = n
            .parse()
            .map_err(|_| Error::parse(line_no, format!("bad count in {item:?}")))?;
        if n == 0 {
            return Err(Error::parse(line_no, format!("zero count for {lemma:?}")));
        }
        counts.insert(lemma.to_string(), n);
    }
    Ok(counts)
}

pub fn read_bows<R: BufRead>(source: R) -> Result<Vec<BagOfWords>> {
    let mut out = Vec::new();
    for row in rows(source) {
        let (line_no, line) = row?;
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 5 || fields[0].is_empty() {
            return Err(Error::parse(line_no, "expected key and four maps"));
        }
        let mut bag = BagOfWords::new(fields[0]);
        for (c, field) in Category::ALL.into_iter().zip(&fields[1..]) {
            *bag.get_mut(c) = parse_counts(field, line_no)?;
        }
        out.push(bag);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{AnnotatedSentence, AnnotatedToken};
    use crate::matcher::idiom_token;

    fn occurrence() -> IdiomOccurrence {
        let tokens = vec![
            AnnotatedToken::new("She", "she", Pos::Pron),
            AnnotatedToken::new("'s", "be", Pos::Verb),
            AnnotatedToken::new(",", ",", Pos::Punct),
            AnnotatedToken::new("cool", "cool", Pos::Adj),
            idiom_token("down-to-earth"),
        ];
        IdiomOccurrence {
            idiom_key: "down-to-earth".into(),
            tokens: AnnotatedSentence::new(tokens),
            position: 4,
        }
    }

    #[test]
    fn idiom2sent_shape() {
        let mut buf = Vec::new();
        write_idiom2sent(&mut buf, [&occurrence()]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "down-to-earth\t[She, 's, ,, cool, [IDIOM]]\n");
        let rows = read_idiom2sent(text.as_bytes()).unwrap();
        assert_eq!(rows[0].tokens, ["She", "'s", ",", "cool", "down-to-earth"]);
        assert_eq!(rows[0].position, 4);
    }

    #[test]
    fn idiom2lemma2pos_shape() {
        let mut buf = Vec::new();
        write_idiom2lemma2pos(&mut buf, [&occurrence()]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "down-to-earth\t[[she, PRON], [be, VERB], [,, PUNCT], [cool, ADJ], [[IDIOM], X]]\n"
        );
        let rows = read_idiom2lemma2pos(text.as_bytes()).unwrap();
        assert_eq!(rows[0].pairs[2], (",".to_string(), Pos::Punct));
        assert_eq!(rows[0].pairs[4], ("down-to-earth".to_string(), Pos::X));
    }

    #[test]
    fn bows_shape() {
        let mut bag = BagOfWords::new("left_and_right");
        bag.verb.insert("happen".into(), 2);
        bag.verb.insert("comment".into(), 3);
        bag.noun.insert("doctor".into(), 2);
        bag.adj.insert("bizarre".into(), 3);
        let mut buf = Vec::new();
        write_bows(&mut buf, [&bag]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "left_and_right\t{comment: 3, happen: 2}\t{doctor: 2}\t{bizarre: 3}\t{}\n"
        );
        assert_eq!(read_bows(text.as_bytes()).unwrap(), vec![bag]);
    }

    #[test]
    fn readers_report_line_numbers() {
        let err = read_bows("a\t{}\t{}\t{}\t{}\nb\t{x: 0}\t{}\t{}\t{}\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        let err = read_idiom2lemma2pos("k\t[[a, NOUN]]\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }
}
