//! A small rule-based annotator for raw text and query phrases.
//!
//! Lemmas come from the bundled exception table, then from suffix rules,
//! then from the lowercase token itself. Tags come from the bundled word
//! lexicon, with punctuation and numbers recognised by character class.

use super::wordlists::{lemma_exception, lexicon_tag};
use super::{AnnotatedSentence, AnnotatedToken, Pos};

const CLITICS: [&str; 6] = ["'s", "'re", "'ve", "'ll", "'d", "'m"];

// Stems whose final double consonant belongs to the word.
const KEEP_DOUBLE: [&str; 8] = ["add", "err", "egg", "ebb", "inn", "butt", "purr", "odd"];

fn is_vowel(c: char) -> bool {
    matches!(c, 'a' | 'e' | 'i' | 'o' | 'u' | 'y')
}

fn has_vowel(s: &str) -> bool {
    s.chars().any(is_vowel)
}

fn undouble(stem: &str) -> String {
    let chars: Vec<char> = stem.chars().collect();
    if let [.., a, b] = chars[..] {
        if a == b && !is_vowel(a) && !matches!(a, 'l' | 's' | 'f' | 'z') && !KEEP_DOUBLE.contains(&stem) {
            return chars[..chars.len() - 1].iter().collect();
        }
    }
    stem.to_string()
}

/// Restores a silent final `e` dropped before `-ed`/`-ing` ("griev" ->
/// "grieve", "plac" -> "place", "troubl" -> "trouble").
fn restore_e(stem: &str) -> String {
    let chars: Vec<char> = stem.chars().collect();
    let needs_e = match chars[..] {
        [.., a, b] if a == b => false,
        [.., 'c', 'k'] => false,
        [.., 'v' | 'c' | 'u' | 'z'] => true,
        [.., a, 's'] => is_vowel(a),
        [.., 'd', 'g'] => true,
        [.., a, 'a', 't'] => !is_vowel(a) && chars.len() >= 5,
        [.., a, 'l'] => matches!(a, 'b' | 'p' | 't' | 'd' | 'g' | 'k' | 'z'),
        _ => false,
    };
    if needs_e {
        format!("{stem}e")
    } else {
        stem.to_string()
    }
}

fn strip_inflection(stem: &str) -> String {
    let undoubled = undouble(stem);
    if undoubled != stem {
        undoubled
    } else {
        restore_e(stem)
    }
}

fn suffix_lemma(word: &str) -> String {
    let n = word.chars().count();
    if n <= 3 || !word.is_ascii() {
        return word.to_string();
    }
    if let Some(stem) = word.strip_suffix("ies") {
        if n > 4 {
            return format!("{stem}y");
        }
    }
    if let Some(stem) = word.strip_suffix("ied") {
        if n > 4 {
            return format!("{stem}y");
        }
    }
    if let Some(stem) = word.strip_suffix("ing") {
        if stem.len() >= 3 && has_vowel(stem) {
            return strip_inflection(stem);
        }
        return word.to_string();
    }
    if let Some(stem) = word.strip_suffix("ed") {
        if !word.ends_with("eed") && stem.len() >= 3 && has_vowel(stem) {
            return strip_inflection(stem);
        }
        return word.to_string();
    }
    if ["sses", "xes", "ches", "shes", "zzes"].iter().any(|s| word.ends_with(s)) {
        return word[..word.len() - 2].to_string();
    }
    if let Some(stem) = word.strip_suffix('s') {
        if !["ss", "us", "is"].iter().any(|s| word.ends_with(s)) {
            return stem.to_string();
        }
    }
    word.to_string()
}

/// Lemmatizes one token: exception table, then suffix rules, else the
/// lowercase token.
pub fn lemmatize(token: &str) -> String {
    let lower = normalize_quotes(&token.to_lowercase());
    if let Some(lemma) = lemma_exception(&lower) {
        return lemma.to_string();
    }
    if lower.starts_with('\'') || !lower.chars().all(|c| c.is_alphabetic() || c == '\'') {
        return lower;
    }
    suffix_lemma(&lower)
}

fn normalize_quotes(s: &str) -> String {
    s.replace(['\u{2019}', '\u{2018}'], "'")
}

fn is_punct(token: &str) -> bool {
    token.chars().all(|c| !c.is_alphanumeric())
}

fn is_number(token: &str) -> bool {
    token.chars().any(|c| c.is_ascii_digit())
        && token.chars().all(|c| c.is_ascii_digit() || matches!(c, '.' | ',' | '%'))
}

fn tag(text: &str, lemma: &str) -> Pos {
    if is_punct(text) {
        return Pos::Punct;
    }
    if is_number(text) {
        return Pos::Num;
    }
    let lower = text.to_lowercase();
    lexicon_tag(&lower)
        .or_else(|| lexicon_tag(lemma))
        .unwrap_or(Pos::X)
}

fn split_clitic(word: &str, out: &mut Vec<String>) {
    let lower = word.to_lowercase();
    if lower.len() > 3 && lower.ends_with("n't") {
        let cut = word.len() - 3;
        out.push(word[..cut].to_string());
        out.push(word[cut..].to_string());
        return;
    }
    for clitic in CLITICS {
        if lower.len() > clitic.len() && lower.ends_with(clitic) {
            let cut = word.len() - clitic.len();
            out.push(word[..cut].to_string());
            out.push(word[cut..].to_string());
            return;
        }
    }
    out.push(word.to_string());
}

fn split_chunk(chunk: &str, out: &mut Vec<String>) {
    let chars: Vec<char> = chunk.chars().collect();
    let mut start = 0;
    let mut end = chars.len();

    while start < end && !chars[start].is_alphanumeric() {
        let rest: String = chars[start..end].iter().collect();
        if CLITICS.contains(&rest.to_lowercase().as_str()) || rest.eq_ignore_ascii_case("n't") {
            break;
        }
        out.push(chars[start].to_string());
        start += 1;
    }
    let mut trailing = Vec::new();
    while end > start && !chars[end - 1].is_alphanumeric() {
        trailing.push(chars[end - 1].to_string());
        end -= 1;
    }

    let middle: String = chars[start..end].iter().collect();
    let mut first = true;
    for part in middle.split('-') {
        if !first {
            out.push("-".to_string());
        }
        first = false;
        if !part.is_empty() {
            split_clitic(part, out);
        }
    }
    out.extend(trailing.into_iter().rev());
}

/// Splits raw text into tokens: whitespace, leading/trailing punctuation,
/// hyphens and clitics (`'s`, `n't`, ...) each become separate tokens.
pub fn tokenize(raw: &str) -> Vec<String> {
    let raw = normalize_quotes(raw);
    let mut out = Vec::new();
    for chunk in raw.split_whitespace() {
        split_chunk(chunk, &mut out);
    }
    out
}

fn annotate_token(text: String) -> AnnotatedToken {
    let lemma = lemmatize(&text);
    let pos = tag(&text, &lemma);
    AnnotatedToken { text, lemma, pos }
}

/// Annotates a raw string as a single sentence. Empty input yields an empty
/// sentence.
pub fn fallback_annotate(raw: &str) -> AnnotatedSentence {
    AnnotatedSentence::new(tokenize(raw).into_iter().map(annotate_token).collect())
}

/// Annotates raw documents, splitting sentences at line breaks and at
/// sentence-final punctuation.
#[derive(Debug, Default, Clone, Copy)]
pub struct Annotator;

impl Annotator {
    pub fn annotate_document(&self, raw: &str, doc_id: &str) -> Vec<AnnotatedSentence> {
        let mut sentences = Vec::new();
        for line in raw.lines() {
            let mut current = Vec::new();
            for text in tokenize(line) {
                let token = annotate_token(text);
                let is_end = matches!(token.text.as_str(), "." | "!" | "?");
                current.push(token);
                if is_end {
                    sentences.push(std::mem::take(&mut current));
                }
            }
            if !current.is_empty() {
                sentences.push(current);
            }
        }
        sentences
            .into_iter()
            .enumerate()
            .map(|(sent_index, tokens)| AnnotatedSentence {
                tokens,
                doc_id: doc_id.to_string(),
                sent_index,
            })
            .collect()
    }
}
