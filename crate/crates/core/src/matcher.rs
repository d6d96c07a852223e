//! Scans annotated sentences with compiled rules, merges each identified
//! idiom into a single token and gathers the context bags of words around
//! it.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{is_stopword, AnnotatedSentence, AnnotatedToken, Pos};
use crate::error::{Error, Result};
use crate::lexicon::{MatchRule, RuleSet, TokenPredicate};

pub const DEFAULT_WINDOW: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IdiomMatch {
    pub idiom_key: String,
    /// Inclusive token index.
    pub start: usize,
    /// Exclusive token index.
    pub end: usize,
    /// Which disjunct of the rule matched.
    pub sequence_index: usize,
    pub reordered: bool,
}

impl IdiomMatch {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end == self.start
    }

    fn overlaps(&self, other: &IdiomMatch) -> bool {
        self.start < other.end && other.start < self.end
    }
}

type SeqRef = (usize, usize);

/// Rules plus an index from anchor values (text or lemma of the first
/// predicate) to the sequences that can start there.
pub struct Matcher {
    rules: RuleSet,
    by_anchor: HashMap<String, Vec<SeqRef>>,
    unanchored: Vec<SeqRef>,
}

impl Matcher {
    pub fn new(rules: RuleSet) -> Self {
        let mut by_anchor: HashMap<String, Vec<SeqRef>> = HashMap::new();
        let mut unanchored = Vec::new();
        for (r, rule) in rules.rules.iter().enumerate() {
            for (s, seq) in rule.sequences.iter().enumerate() {
                match seq.predicates.first() {
                    Some(TokenPredicate::Text { value } | TokenPredicate::Lemma { value }) => {
                        by_anchor.entry(value.clone()).or_default().push((r, s));
                    }
                    _ => unanchored.push((r, s)),
                }
            }
        }
        Matcher {
            rules,
            by_anchor,
            unanchored,
        }
    }

    pub fn rules(&self) -> &RuleSet {
        &self.rules
    }

    /// Every rule's shortest match at every start position, before overlap
    /// resolution. At most one candidate per (rule, start).
    pub fn candidates(&self, sentence: &AnnotatedSentence) -> Vec<IdiomMatch> {
        let view = SentenceView::new(sentence);
        let mut out = Vec::new();
        let mut refs: Vec<SeqRef> = Vec::new();
        for start in 0..view.len() {
            refs.clear();
            for key in [view.lower[start].as_str(), view.lemma(start)] {
                if let Some(found) = self.by_anchor.get(key) {
                    refs.extend_from_slice(found);
                }
            }
            refs.extend_from_slice(&self.unanchored);
            refs.sort_unstable();
            refs.dedup();

            let mut best: Option<(usize, IdiomMatch)> = None;
            for &(r, s) in &refs {
                if best.as_ref().is_some_and(|(br, _)| *br != r) {
                    out.extend(best.take().map(|(_, m)| m));
                }
                let rule = &self.rules.rules[r];
                let Some(end) = match_sequence(&view, &rule.sequences[s].predicates, rule.slop, start) else {
                    continue;
                };
                if best.as_ref().is_none_or(|(_, b)| end < b.end) {
                    let m = IdiomMatch {
                        idiom_key: rule.idiom_key.clone(),
                        start,
                        end,
                        sequence_index: s,
                        reordered: rule.sequences[s].reordered,
                    };
                    best = Some((r, m));
                }
            }
            out.extend(best.map(|(_, m)| m));
        }
        out
    }

    /// Non-overlapping matches sorted by start. Overlaps resolve to the
    /// longer span, then the earlier start, then the smaller key.
    pub fn find_matches(&self, sentence: &AnnotatedSentence) -> Vec<IdiomMatch> {
        let mut candidates = self.candidates(sentence);
        candidates.sort_by(|a, b| {
            b.len()
                .cmp(&a.len())
                .then(a.start.cmp(&b.start))
                .then_with(|| a.idiom_key.cmp(&b.idiom_key))
        });
        let mut chosen: Vec<IdiomMatch> = Vec::new();
        for c in candidates {
            if !chosen.iter().any(|m| m.overlaps(&c)) {
                chosen.push(c);
            }
        }
        chosen.sort_by_key(|m| m.start);
        chosen
    }

    /// Matches of a single rule at a single start, used to compare rule sets.
    pub fn rule_matches_at(rule: &MatchRule, sentence: &AnnotatedSentence, start: usize) -> Option<usize> {
        let view = SentenceView::new(sentence);
        rule.sequences
            .iter()
            .filter_map(|seq| match_sequence(&view, &seq.predicates, rule.slop, start))
            .min()
    }
}

/// Convenience wrapper over [`Matcher::find_matches`].
pub fn find_matches(sentence: &AnnotatedSentence, matcher: &Matcher) -> Vec<IdiomMatch> {
    matcher.find_matches(sentence)
}

struct SentenceView<'a> {
    tokens: &'a [AnnotatedToken],
    lower: Vec<String>,
}

impl<'a> SentenceView<'a> {
    fn new(sentence: &'a AnnotatedSentence) -> Self {
        SentenceView {
            tokens: &sentence.tokens,
            lower: sentence.tokens.iter().map(|t| t.text.to_lowercase()).collect(),
        }
    }

    fn len(&self) -> usize {
        self.tokens.len()
    }

    fn lemma(&self, i: usize) -> &str {
        &self.tokens[i].lemma
    }

    fn accepts(&self, p: &TokenPredicate, i: usize) -> bool {
        p.accepts(&self.lower[i], &self.tokens[i].lemma, self.tokens[i].pos)
    }
}

/// Shortest end of a match of `predicates` whose first predicate sits at
/// `start`, allowing at most `slop` intervening tokens in total between
/// consecutive predicates.
///
/// Runs forward over predicates keeping, for every reachable position, the
/// least slop spent to get there.
fn match_sequence(view: &SentenceView<'_>, predicates: &[TokenPredicate], slop: usize, start: usize) -> Option<usize> {
    let n = view.len();
    if start >= n {
        return None;
    }
    let mut states: Vec<Option<usize>> = vec![None; n + 1];
    states[start] = Some(0);
    for (i, pred) in predicates.iter().enumerate() {
        let mut next: Vec<Option<usize>> = vec![None; n + 1];
        let mut any = false;
        for (p, used) in states.iter().enumerate() {
            let Some(used) = *used else { continue };
            let max_gap = if i == 0 { 0 } else { slop - used };
            for gap in 0..=max_gap {
                let q = p + gap;
                if q >= n {
                    break;
                }
                let spent = used + gap;
                let mut relax = |pos: usize| {
                    if next[pos].is_none_or(|s| spent < s) {
                        next[pos] = Some(spent);
                    }
                };
                match pred {
                    TokenPredicate::Wildcard { max_fill } => {
                        for fill in 1..=*max_fill {
                            if q + fill > n {
                                break;
                            }
                            relax(q + fill);
                            any = true;
                        }
                    }
                    _ => {
                        if view.accepts(pred, q) {
                            relax(q + 1);
                            any = true;
                        }
                    }
                }
            }
        }
        if !any {
            return None;
        }
        states = next;
    }
    states.iter().position(Option::is_some)
}

/// A sentence with its idiom spans merged, pointing at one of them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdiomOccurrence {
    pub idiom_key: String,
    pub tokens: AnnotatedSentence,
    /// Index of this occurrence's idiom token in `tokens`.
    pub position: usize,
}

pub fn idiom_token(key: &str) -> AnnotatedToken {
    AnnotatedToken::new(key, key, Pos::X)
}

/// Replaces matched spans of one sentence with idiom tokens. Spans are given
/// in the original sentence's indices and may be merged in any order.
pub struct Merger {
    original: AnnotatedSentence,
    spans: Vec<(usize, usize, String)>,
}

impl Merger {
    pub fn new(sentence: AnnotatedSentence) -> Self {
        Merger {
            original: sentence,
            spans: Vec::new(),
        }
    }

    pub fn merge(&mut self, m: &IdiomMatch) -> Result<()> {
        let err = |reason: &str| Error::Merge {
            start: m.start,
            end: m.end,
            reason: reason.to_string(),
        };
        if m.start >= m.end || m.end > self.original.len() {
            return Err(err("span outside the sentence"));
        }
        if self.spans.iter().any(|&(s, e, _)| m.start < e && s < m.end) {
            return Err(err("overlaps an already merged span"));
        }
        self.spans.push((m.start, m.end, m.idiom_key.clone()));
        Ok(())
    }

    /// The merged sentence, and each merged idiom's key with its position in
    /// it, in merge order.
    pub fn finish(self) -> (AnnotatedSentence, Vec<(String, usize)>) {
        let mut order: Vec<usize> = (0..self.spans.len()).collect();
        order.sort_by_key(|&i| self.spans[i].0);

        let mut tokens = Vec::with_capacity(self.original.len());
        let mut positions = vec![0; self.spans.len()];
        let mut cursor = 0;
        let mut original_tokens = self.original.tokens.into_iter();
        for i in order {
            let (start, end, ref key) = self.spans[i];
            tokens.extend(original_tokens.by_ref().take(start - cursor));
            original_tokens.by_ref().take(end - start).for_each(drop);
            positions[i] = tokens.len();
            tokens.push(idiom_token(key));
            cursor = end;
        }
        tokens.extend(original_tokens);

        let merged = AnnotatedSentence {
            tokens,
            doc_id: self.original.doc_id,
            sent_index: self.original.sent_index,
        };
        let keyed = self.spans.into_iter().map(|(_, _, k)| k).zip(positions).collect();
        (merged, keyed)
    }
}

pub fn merge_idiom(sentence: &AnnotatedSentence, m: &IdiomMatch) -> Result<IdiomOccurrence> {
    let mut merger = Merger::new(sentence.clone());
    merger.merge(m)?;
    let (tokens, keyed) = merger.finish();
    Ok(IdiomOccurrence {
        idiom_key: m.idiom_key.clone(),
        tokens,
        position: keyed[0].1,
    })
}

/// One occurrence per match; every occurrence carries the sentence with all
/// matches merged.
pub fn merge_all(sentence: &AnnotatedSentence, matches: &[IdiomMatch]) -> Result<Vec<IdiomOccurrence>> {
    let mut merger = Merger::new(sentence.clone());
    for m in matches {
        merger.merge(m)?;
    }
    let (tokens, keyed) = merger.finish();
    Ok(keyed
        .into_iter()
        .map(|(idiom_key, position)| IdiomOccurrence {
            idiom_key,
            tokens: tokens.clone(),
            position,
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    Verb,
    Noun,
    Adj,
    Adv,
}

impl Category {
    pub const ALL: [Category; 4] = [Category::Verb, Category::Noun, Category::Adj, Category::Adv];

    pub fn of(pos: Pos) -> Option<Category> {
        match pos {
            Pos::Verb => Some(Category::Verb),
            Pos::Noun => Some(Category::Noun),
            Pos::Adj => Some(Category::Adj),
            Pos::Adv => Some(Category::Adv),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Category::Verb => "verb",
            Category::Noun => "noun",
            Category::Adj => "adj",
            Category::Adv => "adv",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Category {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Category::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::Domain(format!("unknown category {s:?}")))
    }
}

pub type LemmaCounts = BTreeMap<String, u64>;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BagOfWords {
    pub idiom_key: String,
    pub verb: LemmaCounts,
    pub noun: LemmaCounts,
    pub adj: LemmaCounts,
    pub adv: LemmaCounts,
}

impl BagOfWords {
    pub fn new(idiom_key: impl Into<String>) -> Self {
        BagOfWords {
            idiom_key: idiom_key.into(),
            ..Default::default()
        }
    }

    pub fn get(&self, category: Category) -> &LemmaCounts {
        match category {
            Category::Verb => &self.verb,
            Category::Noun => &self.noun,
            Category::Adj => &self.adj,
            Category::Adv => &self.adv,
        }
    }

    pub fn get_mut(&mut self, category: Category) -> &mut LemmaCounts {
        match category {
            Category::Verb => &mut self.verb,
            Category::Noun => &mut self.noun,
            Category::Adj => &mut self.adj,
            Category::Adv => &mut self.adv,
        }
    }

    pub fn total(&self) -> u64 {
        Category::ALL.iter().flat_map(|&c| self.get(c).values()).sum()
    }
}

/// Counts verb/noun/adjective/adverb lemmas within `window` positions of
/// each occurrence's idiom token, aggregated per idiom key. Bags come out
/// sorted by key.
pub fn build_bows<'a, I>(occurrences: I, window: usize) -> Vec<BagOfWords>
where
    I: IntoIterator<Item = &'a IdiomOccurrence>,
{
    let mut bags: BTreeMap<String, BagOfWords> = BTreeMap::new();
    for occ in occurrences {
        let bag = bags
            .entry(occ.idiom_key.clone())
            .or_insert_with(|| BagOfWords::new(occ.idiom_key.clone()));
        let tokens = &occ.tokens.tokens;
        let lo = occ.position.saturating_sub(window);
        let hi = (occ.position + window).min(tokens.len().saturating_sub(1));
        for (i, token) in tokens.iter().enumerate().take(hi + 1).skip(lo) {
            if i == occ.position {
                continue;
            }
            if let Some(cat) = Category::of(token.pos) {
                *bag.get_mut(cat).entry(token.lemma.clone()).or_insert(0) += 1;
            }
        }
    }
    bags.into_values().collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IdentifyOptions {
    pub window: usize,
    pub strip_stopwords: bool,
}

impl Default for IdentifyOptions {
    fn default() -> Self {
        IdentifyOptions {
            window: DEFAULT_WINDOW,
            strip_stopwords: false,
        }
    }
}

/// Result of scanning a corpus: occurrences sorted by idiom key (corpus
/// order within a key) and their bags of words.
#[derive(Debug, Clone, Default)]
pub struct Identified {
    pub occurrences: Vec<IdiomOccurrence>,
    pub bows: Vec<BagOfWords>,
}

fn strip_stopwords(occ: IdiomOccurrence) -> IdiomOccurrence {
    let mut position = occ.position;
    let mut tokens = Vec::with_capacity(occ.tokens.len());
    for (i, t) in occ.tokens.tokens.into_iter().enumerate() {
        if i != occ.position && is_stopword(&t.text.to_lowercase()) {
            if i < occ.position {
                position -= 1;
            }
            continue;
        }
        tokens.push(t);
    }
    IdiomOccurrence {
        idiom_key: occ.idiom_key,
        tokens: AnnotatedSentence { tokens, ..occ.tokens },
        position,
    }
}

/// Matches every sentence (in parallel), merges idioms and builds bags.
/// Output is independent of thread scheduling.
pub fn identify(sentences: &[AnnotatedSentence], matcher: &Matcher, options: IdentifyOptions) -> Result<Identified> {
    if options.window == 0 {
        return Err(Error::Domain("window must be at least 1".into()));
    }
    let per_sentence: Vec<Vec<IdiomOccurrence>> = sentences
        .par_iter()
        .map(|s| merge_all(s, &matcher.find_matches(s)))
        .collect::<Result<_>>()?;
    let mut occurrences: Vec<IdiomOccurrence> = per_sentence.into_iter().flatten().collect();
    if options.strip_stopwords {
        occurrences = occurrences.into_iter().map(strip_stopwords).collect();
    }
    occurrences.sort_by(|a, b| a.idiom_key.cmp(&b.idiom_key));
    let bows = build_bows(&occurrences, options.window);
    Ok(Identified { occurrences, bows })
}
