//! The annotated-corpus contract shared by every stage: sentences of
//! `(text, lemma, coarse POS)` tokens, read from and written to a
//! TAB-separated, blank-line delimited format.

mod annotate;
mod wordlists;

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use annotate::{fallback_annotate, lemmatize, tokenize, Annotator};
pub use wordlists::{is_stopword, is_verb_lemma};

/// Coarse part-of-speech tags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Pos {
    Noun,
    Verb,
    Adj,
    Adv,
    Pron,
    Det,
    Adp,
    Intj,
    Num,
    Punct,
    X,
}

impl Pos {
    pub const ALL: [Pos; 11] = [
        Pos::Noun,
        Pos::Verb,
        Pos::Adj,
        Pos::Adv,
        Pos::Pron,
        Pos::Det,
        Pos::Adp,
        Pos::Intj,
        Pos::Num,
        Pos::Punct,
        Pos::X,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Pos::Noun => "NOUN",
            Pos::Verb => "VERB",
            Pos::Adj => "ADJ",
            Pos::Adv => "ADV",
            Pos::Pron => "PRON",
            Pos::Det => "DET",
            Pos::Adp => "ADP",
            Pos::Intj => "INTJ",
            Pos::Num => "NUM",
            Pos::Punct => "PUNCT",
            Pos::X => "X",
        }
    }

    /// Maps a coarse tag, or a fine-grained tag through the bundled mapping
    /// table. Returns `None` for tags neither table knows.
    pub fn lookup(tag: &str) -> Option<Pos> {
        tag.parse()
            .ok()
            .or_else(|| wordlists::map_fine_tag(tag))
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Pos {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Pos::ALL
            .iter()
            .copied()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| Error::Domain(format!("not a coarse tag: {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AnnotatedToken {
    pub text: String,
    pub lemma: String,
    pub pos: Pos,
}

impl AnnotatedToken {
    pub fn new(text: impl Into<String>, lemma: impl Into<String>, pos: Pos) -> Self {
        AnnotatedToken {
            text: text.into(),
            lemma: lemma.into(),
            pos,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotatedSentence {
    pub tokens: Vec<AnnotatedToken>,
    pub doc_id: String,
    pub sent_index: usize,
}

impl AnnotatedSentence {
    pub fn new(tokens: Vec<AnnotatedToken>) -> Self {
        AnnotatedSentence {
            tokens,
            doc_id: DEFAULT_DOC_ID.to_string(),
            sent_index: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn lemmas(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().map(|t| t.lemma.as_str())
    }
}

/// Document id used for sentences that appear before any `# doc:` header.
pub const DEFAULT_DOC_ID: &str = "default";

const DOC_HEADER: &str = "# doc:";

/// Streaming reader over the annotated format.
///
/// Each non-blank line is `text<TAB>lemma<TAB>pos`; a blank line ends a
/// sentence. `# doc: <id>` starts a new document and resets the sentence
/// index. Other lines beginning with `#` and containing no TAB are comments.
pub struct AnnotatedReader<R> {
    lines: std::io::Lines<R>,
    line_no: usize,
    doc_id: String,
    next_index: usize,
    unknown_tags: usize,
    done: bool,
}

impl<R: BufRead> AnnotatedReader<R> {
    pub fn new(reader: R) -> Self {
        AnnotatedReader {
            lines: reader.lines(),
            line_no: 0,
            doc_id: DEFAULT_DOC_ID.to_string(),
            next_index: 0,
            unknown_tags: 0,
            done: false,
        }
    }

    /// Number of tokens whose tag was not recognised and was read as `X`.
    pub fn unknown_tags(&self) -> usize {
        self.unknown_tags
    }

    fn parse_token(&mut self, line: &str) -> Result<AnnotatedToken> {
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(Error::parse(
                self.line_no,
                format!("expected 3 TAB-separated fields, found {}", fields.len()),
            ));
        }
        let (text, lemma, tag) = (fields[0], fields[1], fields[2].trim());
        if text.is_empty() || lemma.is_empty() {
            return Err(Error::parse(self.line_no, "empty text or lemma"));
        }
        if text.contains(char::is_whitespace) || lemma.contains(char::is_whitespace) {
            return Err(Error::parse(self.line_no, "token contains whitespace"));
        }
        let pos = match Pos::lookup(tag) {
            Some(pos) => pos,
            None => {
                self.unknown_tags += 1;
                log::warn!("line {}: unknown tag {tag:?} read as X", self.line_no);
                Pos::X
            }
        };
        Ok(AnnotatedToken::new(text, lemma.to_lowercase(), pos))
    }

    fn finish_sentence(&mut self, tokens: Vec<AnnotatedToken>) -> AnnotatedSentence {
        let sentence = AnnotatedSentence {
            tokens,
            doc_id: self.doc_id.clone(),
            sent_index: self.next_index,
        };
        self.next_index += 1;
        sentence
    }
}

impl<R: BufRead> Iterator for AnnotatedReader<R> {
    type Item = Result<AnnotatedSentence>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let mut tokens = Vec::new();
        loop {
            let line = match self.lines.next() {
                Some(Ok(line)) => line,
                Some(Err(e)) => {
                    self.done = true;
                    return Some(Err(e.into()));
                }
                None => {
                    self.done = true;
                    if tokens.is_empty() {
                        return None;
                    }
                    return Some(Ok(self.finish_sentence(tokens)));
                }
            };
            self.line_no += 1;
            let line = line.trim_end_matches('\r');

            if line.trim().is_empty() {
                if !tokens.is_empty() {
                    return Some(Ok(self.finish_sentence(tokens)));
                }
                continue;
            }
            if line.starts_with('#') && !line.contains('\t') {
                if let Some(id) = line.strip_prefix(DOC_HEADER) {
                    if !tokens.is_empty() {
                        self.done = true;
                        return Some(Err(Error::parse(
                            self.line_no,
                            "document header inside a sentence",
                        )));
                    }
                    self.doc_id = id.trim().to_string();
                    self.next_index = 0;
                }
                continue;
            }
            match self.parse_token(line) {
                Ok(token) => tokens.push(token),
                Err(e) => {
                    self.done = true;
                    return Some(Err(e));
                }
            }
        }
    }
}

/// Reads a whole annotated stream. An empty stream yields no sentences.
pub fn read_annotated<R: BufRead>(reader: R) -> Result<Vec<AnnotatedSentence>> {
    AnnotatedReader::new(reader).collect()
}

/// Writes sentences in the annotated format, emitting a `# doc:` header
/// whenever the document id changes.
pub fn write_annotated<'a, W, I>(mut out: W, sentences: I) -> Result<()>
where
    W: Write,
    I: IntoIterator<Item = &'a AnnotatedSentence>,
{
    let mut current_doc: Option<&str> = None;
    for sentence in sentences {
        if current_doc != Some(sentence.doc_id.as_str()) {
            writeln!(out, "{DOC_HEADER} {}", sentence.doc_id)?;
            current_doc = Some(sentence.doc_id.as_str());
        }
        for token in &sentence.tokens {
            writeln!(out, "{}\t{}\t{}", token.text, token.lemma, token.pos)?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Summary produced by validating an annotated file.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct CorpusSummary {
    pub sentences: usize,
    pub tokens: usize,
    pub documents: usize,
    pub unknown_tags: usize,
}

/// Reads the whole stream, checking the format and that `(doc_id,
/// sent_index)` pairs are unique.
pub fn validate<R: BufRead>(reader: R) -> Result<CorpusSummary> {
    let mut reader = AnnotatedReader::new(reader);
    let mut summary = CorpusSummary::default();
    let mut seen = std::collections::HashSet::new();
    let mut docs = std::collections::HashSet::new();
    for sentence in reader.by_ref() {
        let sentence = sentence?;
        if !seen.insert((sentence.doc_id.clone(), sentence.sent_index)) {
            return Err(Error::Domain(format!(
                "duplicate sentence id ({}, {})",
                sentence.doc_id, sentence.sent_index
            )));
        }
        docs.insert(sentence.doc_id.clone());
        summary.sentences += 1;
        summary.tokens += sentence.tokens.len();
    }
    summary.documents = docs.len();
    summary.unknown_tags = reader.unknown_tags();
    Ok(summary)
}
