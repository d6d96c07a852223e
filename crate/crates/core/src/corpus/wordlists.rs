//! Bundled word lists backing the fallback annotator.

use std::collections::{HashMap, HashSet};
use std::sync::OnceLock;

use super::Pos;

const LEMMA_EXCEPTIONS: &str = include_str!("../../data/lemma_exceptions.tsv");
const POS_LEXICON: &str = include_str!("../../data/pos_lexicon.tsv");
const VERBS: &str = include_str!("../../data/verbs.txt");
const STOPWORDS: &str = include_str!("../../data/stopwords.txt");
const TAG_MAP: &str = include_str!("../../data/tagmap.tsv");

fn data_lines(src: &'static str) -> impl Iterator<Item = &'static str> {
    src.lines()
        .map(str::trim_end)
        .filter(|l| !l.is_empty() && !l.starts_with("# "))
}

fn pairs(src: &'static str) -> impl Iterator<Item = (&'static str, &'static str)> {
    data_lines(src).filter_map(|l| l.split_once('\t'))
}

fn words(src: &'static str) -> HashSet<&'static str> {
    data_lines(src).flat_map(str::split_whitespace).collect()
}

pub(crate) fn lemma_exception(word: &str) -> Option<&'static str> {
    static TABLE: OnceLock<HashMap<&'static str, &'static str>> = OnceLock::new();
    TABLE
        .get_or_init(|| pairs(LEMMA_EXCEPTIONS).collect())
        .get(word)
        .copied()
}

pub(crate) fn lexicon_tag(word: &str) -> Option<Pos> {
    static TABLE: OnceLock<HashMap<&'static str, Pos>> = OnceLock::new();
    let table = TABLE.get_or_init(|| {
        pairs(POS_LEXICON)
            .map(|(w, t)| (w, t.parse().expect("bundled lexicon uses coarse tags")))
            .collect()
    });
    table
        .get(word)
        .copied()
        .or_else(|| is_verb_lemma(word).then_some(Pos::Verb))
}

pub(crate) fn map_fine_tag(tag: &str) -> Option<Pos> {
    static TABLE: OnceLock<HashMap<&'static str, Pos>> = OnceLock::new();
    TABLE
        .get_or_init(|| {
            pairs(TAG_MAP)
                .map(|(f, t)| (f, t.parse().expect("bundled tag map uses coarse tags")))
                .collect()
        })
        .get(tag)
        .copied()
}

/// Whether `lemma` is in the bundled verb list.
pub fn is_verb_lemma(lemma: &str) -> bool {
    static SET: OnceLock<HashSet<&'static str>> = OnceLock::new();
    SET.get_or_init(|| words(VERBS)).contains(lemma)
}

/// Whether `word` (lowercase) is in the bundled stopword list.
pub fn is_stopword(word: &str) -> bool {
    static SET: OnceLock<HashSet<&'static str>> = OnceLock::new();
    SET.get_or_init(|| words(STOPWORDS)).contains(word)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tables_load() {
        assert_eq!(lemma_exception("was"), Some("be"));
        assert_eq!(lexicon_tag("her"), Some(Pos::Pron));
        assert_eq!(lexicon_tag("grasp"), Some(Pos::Verb));
        assert_eq!(map_fine_tag("PRP$"), Some(Pos::Pron));
        assert!(is_stopword("the"));
        assert!(!is_stopword("dilemma"));
    }

    #[test]
    fn exception_table_is_lowercase() {
        for (form, lemma) in pairs(LEMMA_EXCEPTIONS) {
            assert_eq!(form, form.to_lowercase());
            assert_eq!(lemma, lemma.to_lowercase());
        }
    }
}
