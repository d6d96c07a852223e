//! Idiom vocabulary loading and compilation of base forms into matching
//! rules.
//!
//! A rule is a disjunction of predicate sequences. Baseline rules cover
//! optional hyphens, inflection (by matching lemmas) and listed alternative
//! forms. Extended rules add a slop budget, turn pronoun slots into
//! wildcards, and add a reordered (passive-order) sequence for verb-initial
//! idioms.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{is_verb_lemma, lemmatize, tokenize, Pos};
use crate::error::{Error, Result};

pub const DEFAULT_MIN_WORDS: usize = 3;
pub const DEFAULT_MAX_FILL: usize = 3;

/// Normalizes an idiom base form into its key: lowercase, whitespace runs
/// replaced by `_`, hyphens kept.
pub fn normalize_key(base_form: &str) -> String {
    base_form
        .replace(['\u{2019}', '\u{2018}'], "'")
        .to_lowercase()
        .split_whitespace()
        .collect::<Vec<_>>()
        .join("_")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdiomEntry {
    pub base_form: String,
    pub key: String,
    pub alternatives: Vec<String>,
    pub word_count: usize,
    pub hyphenated: bool,
}

impl IdiomEntry {
    pub fn new(base_form: &str, alternatives: Vec<String>) -> Self {
        let base_form = base_form.trim().to_string();
        IdiomEntry {
            key: normalize_key(&base_form),
            word_count: base_form.split_whitespace().count(),
            hyphenated: base_form.contains('-'),
            base_form,
            alternatives,
        }
    }

    fn passes_filter(&self, min_words: usize) -> bool {
        self.word_count >= min_words || self.hyphenated
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IdiomLexicon {
    entries: Vec<IdiomEntry>,
}

impl IdiomLexicon {
    /// Builds a lexicon from entries, applying the length filter and
    /// collapsing duplicate keys. Entries come out sorted by key.
    pub fn from_entries<I>(entries: I, min_words: usize) -> Result<Self>
    where
        I: IntoIterator<Item = IdiomEntry>,
    {
        if min_words == 0 {
            return Err(Error::Lexicon("min_words must be at least 1".into()));
        }
        let mut by_key: BTreeMap<String, IdiomEntry> = BTreeMap::new();
        for entry in entries {
            if !entry.passes_filter(min_words) {
                continue;
            }
            match by_key.get_mut(&entry.key) {
                None => {
                    by_key.insert(entry.key.clone(), entry);
                }
                Some(existing) => merge_duplicate(existing, entry)?,
            }
        }
        Ok(IdiomLexicon {
            entries: by_key.into_values().collect(),
        })
    }

    pub fn entries(&self) -> &[IdiomEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, key: &str) -> Option<&IdiomEntry> {
        self.entries
            .binary_search_by(|e| e.key.as_str().cmp(key))
            .ok()
            .map(|i| &self.entries[i])
    }

    pub fn compile(&self, mode: CompileMode, config: &RuleConfig) -> Result<RuleSet> {
        let rules = self
            .entries
            .iter()
            .map(|e| compile_rule_with(e, mode, config))
            .collect::<Result<Vec<_>>>()?;
        Ok(RuleSet { mode, rules })
    }
}

fn merge_duplicate(existing: &mut IdiomEntry, entry: IdiomEntry) -> Result<()> {
    let mut a = existing.alternatives.clone();
    let mut b = entry.alternatives.clone();
    a.sort();
    b.sort();
    if !a.is_empty() && !b.is_empty() && a != b {
        return Err(Error::Lexicon(format!(
            "duplicate key {:?} with conflicting alternatives",
            existing.key
        )));
    }
    for alt in entry.alternatives {
        if !existing.alternatives.contains(&alt) {
            existing.alternatives.push(alt);
        }
    }
    Ok(())
}

/// Loads a lexicon from a TAB-separated table: base form in column 1,
/// optional alternatives in the following columns, `#` comment lines.
pub fn load_lexicon<R: BufRead>(source: R, min_words: usize) -> Result<IdiomLexicon> {
    let mut rows = Vec::new();
    for (i, line) in source.lines().enumerate() {
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let mut cols = line.split('\t').map(str::trim);
        let base = cols.next().unwrap_or_default();
        if base.is_empty() {
            return Err(Error::parse(i + 1, "empty base form"));
        }
        let alternatives = cols.filter(|c| !c.is_empty()).map(String::from).collect();
        rows.push(IdiomEntry::new(base, alternatives));
    }
    if rows.is_empty() {
        return Err(Error::Lexicon("lexicon source is empty".into()));
    }
    IdiomLexicon::from_entries(rows, min_words)
}

pub fn write_lexicon<W: Write>(mut out: W, lexicon: &IdiomLexicon) -> Result<()> {
    for entry in lexicon.entries() {
        write!(out, "{}", entry.base_form)?;
        for alt in &entry.alternatives {
            write!(out, "\t{alt}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}

const POSSESSIVE_SLOTS: [&str; 3] = ["one's", "someone's", "somebody's"];
const PERSONAL_SLOTS: [&str; 2] = ["someone", "somebody"];

const POSSESSIVE_PRONOUNS: [&str; 10] = [
    "my", "your", "his", "her", "its", "our", "their", "one's", "someone's", "whose",
];
const PERSONAL_PRONOUNS: [&str; 22] = [
    "i", "me", "you", "he", "him", "she", "her", "it", "we", "us", "they", "them", "one",
    "someone", "somebody", "myself", "yourself", "himself", "herself", "itself", "ourselves",
    "themselves",
];

/// Fine pronoun tag for possessive slots (`one's`, `someone's`).
pub const POSSESSIVE_TAG: &str = "PRP$";
/// Fine pronoun tag for personal slots (`someone`).
pub const PERSONAL_TAG: &str = "PRP";

/// One element of a matching sequence.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "UPPERCASE")]
pub enum TokenPredicate {
    /// Lowercase surface text.
    Text { value: String },
    /// Lemma; also accepts a token whose lowercase text equals the value.
    Lemma { value: String },
    /// A coarse tag, or one of the pronoun refinements `PRP` / `PRP$`.
    Pos { value: String },
    /// Between 1 and `max_fill` arbitrary tokens.
    Wildcard { max_fill: usize },
}

impl TokenPredicate {
    pub fn text(value: &str) -> Self {
        TokenPredicate::Text {
            value: value.to_lowercase(),
        }
    }

    pub fn lemma(value: &str) -> Self {
        TokenPredicate::Lemma {
            value: value.to_lowercase(),
        }
    }

    pub fn pos(value: &str) -> Self {
        TokenPredicate::Pos {
            value: value.to_string(),
        }
    }

    pub fn is_wildcard(&self) -> bool {
        matches!(self, TokenPredicate::Wildcard { .. })
    }

    /// Tests a single token. Wildcards accept any token; their span length
    /// is the matcher's concern.
    pub fn accepts(&self, lower_text: &str, lemma: &str, pos: Pos) -> bool {
        match self {
            TokenPredicate::Text { value } => value == lower_text,
            TokenPredicate::Lemma { value } => value == lemma || value == lower_text,
            TokenPredicate::Pos { value } => match value.as_str() {
                POSSESSIVE_TAG | "$PRP" => {
                    matches!(pos, Pos::Pron | Pos::Det) && POSSESSIVE_PRONOUNS.contains(&lower_text)
                }
                PERSONAL_TAG => pos == Pos::Pron && PERSONAL_PRONOUNS.contains(&lower_text),
                other => Pos::lookup(other) == Some(pos),
            },
            TokenPredicate::Wildcard { .. } => true,
        }
    }
}

impl fmt::Display for TokenPredicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TokenPredicate::Text { value } => write!(f, "[TEXT:{value}]"),
            TokenPredicate::Lemma { value } => write!(f, "[LEMMA:{value}]"),
            TokenPredicate::Pos { value } => write!(f, "[POS:{value}]"),
            TokenPredicate::Wildcard { max_fill } => write!(f, "[*{max_fill}]"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sequence {
    pub predicates: Vec<TokenPredicate>,
    #[serde(default)]
    pub reordered: bool,
}

impl Sequence {
    fn new(predicates: Vec<TokenPredicate>) -> Self {
        Sequence {
            predicates,
            reordered: false,
        }
    }
}

impl fmt::Display for Sequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, p) in self.predicates.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{p}")?;
        }
        f.write_str("]")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchRule {
    pub idiom_key: String,
    pub sequences: Vec<Sequence>,
    /// Maximum total number of intervening tokens per sequence.
    pub slop: usize,
    /// Whether any sequence is a reordered variant.
    pub reordered: bool,
}

impl fmt::Display for MatchRule {
    /// Renders the rule in the `,`-for-or, `;`-for-and notation.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let seqs: Vec<String> = self.sequences.iter().map(|s| s.to_string()).collect();
        if seqs.len() == 1 {
            write!(f, "{}", seqs[0])
        } else {
            write!(f, "[{}]", seqs.join(", "))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CompileMode {
    Baseline,
    Extended,
}

impl FromStr for CompileMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "baseline" => Ok(CompileMode::Baseline),
            "extended" => Ok(CompileMode::Extended),
            other => Err(Error::Domain(format!("unknown compile mode {other:?}"))),
        }
    }
}

/// Tunables for extended-mode compilation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleConfig {
    /// Fixed slop budget; `None` means `word_count + 1`.
    pub slop: Option<usize>,
    pub max_fill: usize,
}

impl Default for RuleConfig {
    fn default() -> Self {
        RuleConfig {
            slop: None,
            max_fill: DEFAULT_MAX_FILL,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Slot {
    Possessive,
    Personal,
}

enum Piece {
    Slot(Slot),
    Tokens(Vec<String>),
}

fn pieces(form: &str) -> Vec<Piece> {
    form.split_whitespace()
        .map(|word| {
            let lower = word.to_lowercase().replace('\u{2019}', "'");
            if POSSESSIVE_SLOTS.contains(&lower.as_str()) {
                Piece::Slot(Slot::Possessive)
            } else if PERSONAL_SLOTS.contains(&lower.as_str()) {
                Piece::Slot(Slot::Personal)
            } else {
                Piece::Tokens(tokenize(word))
            }
        })
        .collect()
}

fn slot_predicate(slot: Slot, mode: CompileMode, config: &RuleConfig) -> TokenPredicate {
    match (mode, slot) {
        (CompileMode::Extended, _) => TokenPredicate::Wildcard {
            max_fill: config.max_fill,
        },
        (CompileMode::Baseline, Slot::Possessive) => TokenPredicate::pos(POSSESSIVE_TAG),
        (CompileMode::Baseline, Slot::Personal) => TokenPredicate::pos(PERSONAL_TAG),
    }
}

/// Sequences for one form (base form or an alternative).
fn form_sequences(form: &str, mode: CompileMode, config: &RuleConfig) -> Vec<Sequence> {
    let pieces = pieces(form);
    if form.contains('-') {
        let with_hyphens: Vec<TokenPredicate> = pieces
            .iter()
            .flat_map(|piece| match piece {
                Piece::Slot(slot) => vec![slot_predicate(*slot, mode, config)],
                Piece::Tokens(tokens) => tokens.iter().map(|t| TokenPredicate::text(t)).collect(),
            })
            .collect();
        let without: Vec<TokenPredicate> = with_hyphens
            .iter()
            .filter(|p| !matches!(p, TokenPredicate::Text { value } if value == "-"))
            .cloned()
            .collect();
        vec![Sequence::new(without), Sequence::new(with_hyphens)]
    } else {
        let predicates = pieces
            .iter()
            .flat_map(|piece| match piece {
                Piece::Slot(slot) => vec![slot_predicate(*slot, mode, config)],
                Piece::Tokens(tokens) => tokens
                    .iter()
                    .map(|t| TokenPredicate::lemma(&lemmatize(t)))
                    .collect(),
            })
            .collect();
        vec![Sequence::new(predicates)]
    }
}

fn is_anchor(p: &TokenPredicate) -> bool {
    matches!(p, TokenPredicate::Text { .. } | TokenPredicate::Lemma { .. })
}

/// Moves a leading verb lemma to the end: `call * bluff` becomes
/// `* bluff call`.
fn reordered(seq: &Sequence) -> Option<Sequence> {
    let first = seq.predicates.first()?;
    let TokenPredicate::Lemma { value } = first else {
        return None;
    };
    if !is_verb_lemma(value) || seq.predicates.len() < 2 {
        return None;
    }
    let mut predicates: Vec<TokenPredicate> = seq.predicates[1..].to_vec();
    if !predicates.iter().any(is_anchor) {
        return None;
    }
    predicates.push(first.clone());
    Some(Sequence {
        predicates,
        reordered: true,
    })
}

/// Compiles an entry with the default extended-mode tunables.
pub fn compile_rule(entry: &IdiomEntry, mode: CompileMode) -> Result<MatchRule> {
    compile_rule_with(entry, mode, &RuleConfig::default())
}

pub fn compile_rule_with(
    entry: &IdiomEntry,
    mode: CompileMode,
    config: &RuleConfig,
) -> Result<MatchRule> {
    let mut sequences: Vec<Sequence> = Vec::new();
    let forms = std::iter::once(entry.base_form.as_str()).chain(entry.alternatives.iter().map(String::as_str));
    for (i, form) in forms.enumerate() {
        let seqs = form_sequences(form, mode, config);
        let usable = seqs.iter().all(|s| s.predicates.iter().any(is_anchor));
        if !usable {
            if i == 0 {
                return Err(Error::Compile {
                    key: entry.key.clone(),
                    reason: "base form has no usable tokens".into(),
                });
            }
            log::warn!("{}: skipping unusable alternative {form:?}", entry.key);
            continue;
        }
        for seq in seqs {
            if !sequences.contains(&seq) {
                sequences.push(seq);
            }
        }
    }

    let (slop, has_reordered) = match mode {
        CompileMode::Baseline => (0, false),
        CompileMode::Extended => {
            let variants: Vec<Sequence> = sequences.iter().filter_map(reordered).collect();
            let any = !variants.is_empty();
            for seq in variants {
                if !sequences.contains(&seq) {
                    sequences.push(seq);
                }
            }
            (config.slop.unwrap_or(entry.word_count + 1), any)
        }
    };

    Ok(MatchRule {
        idiom_key: entry.key.clone(),
        sequences,
        slop,
        reordered: has_reordered,
    })
}

/// A compiled lexicon, serialized as JSON by the `lexicon compile` command.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleSet {
    pub mode: CompileMode,
    pub rules: Vec<MatchRule>,
}

impl RuleSet {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let set: RuleSet = serde_json::from_str(s)?;
        for rule in &set.rules {
            if rule.sequences.is_empty() || rule.sequences.iter().any(|s| s.predicates.is_empty()) {
                return Err(Error::Compile {
                    key: rule.idiom_key.clone(),
                    reason: "empty sequence".into(),
                });
            }
            if set.mode == CompileMode::Baseline
                && (rule.slop > 0 || rule.reordered || rule.sequences.iter().flat_map(|s| &s.predicates).any(TokenPredicate::is_wildcard))
            {
                return Err(Error::Compile {
                    key: rule.idiom_key.clone(),
                    reason: "baseline rule uses extended features".into(),
                });
            }
        }
        Ok(set)
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(base: &str, alts: &[&str]) -> IdiomEntry {
        IdiomEntry::new(base, alts.iter().map(|s| s.to_string()).collect())
    }

    fn lemmas(values: &[&str]) -> Vec<TokenPredicate> {
        values.iter().map(|v| TokenPredicate::lemma(v)).collect()
    }

    #[test]
    fn keys() {
        assert_eq!(normalize_key("out of touch"), "out_of_touch");
        assert_eq!(normalize_key("lose one's mind"), "lose_one's_mind");
        assert_eq!(normalize_key("catch-22"), "catch-22");
        assert_eq!(normalize_key("Lose  One\u{2019}s Mind"), "lose_one's_mind");
    }

    #[test]
    fn length_filter() {
        let src = "catch-22\nI do\nbeat around the bush\nadd up\n";
        let lex = load_lexicon(src.as_bytes(), 3).unwrap();
        let keys: Vec<_> = lex.entries().iter().map(|e| e.key.as_str()).collect();
        assert_eq!(keys, ["beat_around_the_bush", "catch-22"]);
    }

    #[test]
    fn empty_source_is_an_error() {
        assert!(matches!(load_lexicon("# only a comment\n".as_bytes(), 3), Err(Error::Lexicon(_))));
        assert!(matches!(load_lexicon("x\n".as_bytes(), 0), Err(Error::Lexicon(_))));
    }

    #[test]
    fn duplicates_merge_or_conflict() {
        let src = "add fuel to the fire\nadd fuel to the fire\tadd fuel to the flame\n";
        let lex = load_lexicon(src.as_bytes(), 3).unwrap();
        assert_eq!(lex.len(), 1);
        assert_eq!(lex.entries()[0].alternatives, ["add fuel to the flame"]);

        let src = "add fuel to the fire\ta b c\nAdd fuel to the fire\td e f\n";
        match load_lexicon(src.as_bytes(), 3) {
            Err(Error::Lexicon(msg)) => assert!(msg.contains("add_fuel_to_the_fire")),
            other => panic!("expected conflict, got {other:?}"),
        }
    }

    #[test]
    fn hyphen_rule() {
        let rule = compile_rule(&entry("down-to-earth", &[]), CompileMode::Baseline).unwrap();
        let t = |v: &str| TokenPredicate::text(v);
        assert_eq!(
            rule.sequences,
            [
                Sequence::new(vec![t("down"), t("to"), t("earth")]),
                Sequence::new(vec![t("down"), t("-"), t("to"), t("-"), t("earth")]),
            ]
        );
        assert_eq!(rule.to_string(), "[[[TEXT:down]; [TEXT:to]; [TEXT:earth]], [[TEXT:down]; [TEXT:-]; [TEXT:to]; [TEXT:-]; [TEXT:earth]]]");
    }

    #[test]
    fn alternatives_rule() {
        let rule = compile_rule(&entry("add insult to injury", &["heap insult on injury"]), CompileMode::Baseline).unwrap();
        assert_eq!(
            rule.sequences,
            [
                Sequence::new(lemmas(&["add", "insult", "to", "injury"])),
                Sequence::new(lemmas(&["heap", "insult", "on", "injury"])),
            ]
        );
    }

    #[test]
    fn possessive_slot_rule() {
        let rule = compile_rule(&entry("find one's feet", &[]), CompileMode::Baseline).unwrap();
        assert_eq!(
            rule.sequences,
            [Sequence::new(vec![
                TokenPredicate::lemma("find"),
                TokenPredicate::pos("PRP$"),
                TokenPredicate::lemma("feet"),
            ])]
        );
        assert_eq!(rule.slop, 0);
        assert!(!rule.reordered);
    }

    #[test]
    fn extended_rule_has_wildcard_slop_and_reordering() {
        let rule = compile_rule(&entry("call someone's bluff", &[]), CompileMode::Extended).unwrap();
        let w = TokenPredicate::Wildcard { max_fill: 3 };
        assert_eq!(rule.slop, 4);
        assert!(rule.reordered);
        assert_eq!(
            rule.sequences,
            [
                Sequence::new(vec![TokenPredicate::lemma("call"), w.clone(), TokenPredicate::lemma("bluff")]),
                Sequence {
                    predicates: vec![w, TokenPredicate::lemma("bluff"), TokenPredicate::lemma("call")],
                    reordered: true
                },
            ]
        );
    }

    #[test]
    fn slot_only_form_does_not_compile() {
        assert!(matches!(
            compile_rule(&entry("someone's", &[]), CompileMode::Baseline),
            Err(Error::Compile { .. })
        ));
    }

    #[test]
    fn config_overrides() {
        let config = RuleConfig { slop: Some(2), max_fill: 5 };
        let rule = compile_rule_with(&entry("call someone's bluff", &[]), CompileMode::Extended, &config).unwrap();
        assert_eq!(rule.slop, 2);
        assert_eq!(rule.sequences[0].predicates[1], TokenPredicate::Wildcard { max_fill: 5 });
    }

    #[test]
    fn ruleset_json_round_trip() {
        let lex = load_lexicon("call someone's bluff\ndown-to-earth\n".as_bytes(), 3).unwrap();
        let set = lex.compile(CompileMode::Extended, &RuleConfig::default()).unwrap();
        let json = set.to_json().unwrap();
        assert!(json.contains("\"kind\": \"WILDCARD\""));
        assert!(json.contains("\"max_fill\": 3"));
        assert_eq!(RuleSet::from_json(&json).unwrap(), set);
    }

    #[test]
    fn baseline_json_rejects_extended_features() {
        let lex = load_lexicon("call someone's bluff\n".as_bytes(), 3).unwrap();
        let mut set = lex.compile(CompileMode::Extended, &RuleConfig::default()).unwrap();
        set.mode = CompileMode::Baseline;
        assert!(RuleSet::from_json(&set.to_json().unwrap()).is_err());
    }
}
