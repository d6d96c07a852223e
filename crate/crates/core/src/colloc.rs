//! Collocation models over idiom bags of words: raw term frequency, TF-IDF
//! with idiom bags as documents, and pointwise mutual information with
//! per-category probability estimates.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcher::{BagOfWords, Category};

/// `log2 p(x,y) - (log2 p(x) + log2 p(y))`.
pub fn pmi(p_xy: f64, p_x: f64, p_y: f64) -> Result<f64> {
    for (name, p) in [("p_xy", p_xy), ("p_x", p_x), ("p_y", p_y)] {
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::Domain(format!("{name} = {p} is not a probability in (0, 1]")));
        }
    }
    Ok(p_xy.log2() - (p_x.log2() + p_y.log2()))
}

/// `(1 + log10 tf) * log10(n / df)`.
pub fn tfidf_weight(tf: u64, df: u64, n: u64) -> Result<f64> {
    if tf == 0 {
        return Err(Error::Domain("tf must be at least 1".into()));
    }
    if df == 0 || df > n {
        return Err(Error::Domain(format!("document frequency {df} outside 1..={n}")));
    }
    Ok((1.0 + (tf as f64).log10()) * (n as f64 / df as f64).log10())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Tf,
    Tfidf,
    Pmi,
}

impl Model {
    pub const ALL: [Model; 3] = [Model::Tf, Model::Tfidf, Model::Pmi];

    pub fn as_str(self) -> &'static str {
        match self {
            Model::Tf => "tf",
            Model::Tfidf => "tfidf",
            Model::Pmi => "pmi",
        }
    }

    /// Conventional output file name for this model's table.
    pub fn file_name(self) -> String {
        format!("idiom2colls_{}.tsv", self.as_str())
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Model::ALL
            .into_iter()
            .find(|m| m.as_str() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::Domain(format!("unknown collocation model {s:?}")))
    }
}

/// Per-category co-occurrence counts gathered in one pass over the bags.
#[derive(Debug, Clone, Default)]
pub struct CooccurrenceStats {
    idiom_totals: HashMap<String, u64>,
    lemma_totals: HashMap<String, u64>,
    grand_total: u64,
}

impl CooccurrenceStats {
    pub fn from_bows<'a>(bows: impl IntoIterator<Item = &'a BagOfWords>, category: Category) -> Self {
        let mut stats = CooccurrenceStats::default();
        for bag in bows {
            let counts = bag.get(category);
            let total: u64 = counts.values().sum();
            if total == 0 {
                continue;
            }
            *stats.idiom_totals.entry(bag.idiom_key.clone()).or_insert(0) += total;
            for (lemma, &n) in counts {
                *stats.lemma_totals.entry(lemma.clone()).or_insert(0) += n;
            }
            stats.grand_total += total;
        }
        stats
    }

    pub fn idiom_total(&self, idiom: &str) -> u64 {
        self.idiom_totals.get(idiom).copied().unwrap_or(0)
    }

    pub fn lemma_total(&self, lemma: &str) -> u64 {
        self.lemma_totals.get(lemma).copied().unwrap_or(0)
    }

    pub fn grand_total(&self) -> u64 {
        self.grand_total
    }

    /// PMI from counts, evaluated as `log2(pair * grand / (idiom * lemma))`
    /// so that equal ratios give bit-identical scores.
    fn pmi(&self, idiom: &str, lemma: &str, pair_count: u64) -> Result<f64> {
        let (x, y) = (self.idiom_total(idiom), self.lemma_total(lemma));
        if pair_count == 0 || pair_count > x.min(y) || x.max(y) > self.grand_total {
            return Err(Error::Domain(format!("inconsistent counts for ({idiom}, {lemma})")));
        }
        let num = pair_count as u128 * self.grand_total as u128;
        let den = x as u128 * y as u128;
        Ok((num as f64 / den as f64).log2())
    }
}

/// Document statistics with each non-empty idiom bag of a category as one
/// document.
#[derive(Debug, Clone, Default)]
pub struct TermDocStats {
    df: HashMap<String, u64>,
    n_docs: u64,
}

impl TermDocStats {
    pub fn from_bows<'a>(bows: impl IntoIterator<Item = &'a BagOfWords>, category: Category) -> Self {
        let mut stats = TermDocStats::default();
        for bag in bows {
            let counts = bag.get(category);
            if counts.is_empty() {
                continue;
            }
            stats.n_docs += 1;
            for lemma in counts.keys() {
                *stats.df.entry(lemma.clone()).or_insert(0) += 1;
            }
        }
        stats
    }

    pub fn df(&self, lemma: &str) -> u64 {
        self.df.get(lemma).copied().unwrap_or(0)
    }

    pub fn n_docs(&self) -> u64 {
        self.n_docs
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollocationScore {
    pub idiom_key: String,
    pub category: Category,
    pub lemma: String,
    pub model: Model,
    pub score: f64,
    pub raw_count: u64,
}

/// Score descending, then raw count descending, then lemma ascending.
pub fn rank_order(a: &CollocationScore, b: &CollocationScore) -> std::cmp::Ordering {
    b.score
        .total_cmp(&a.score)
        .then(b.raw_count.cmp(&a.raw_count))
        .then_with(|| a.lemma.cmp(&b.lemma))
}

/// Ranked scores, grouped by idiom key (ascending) and category.
#[derive(Debug, Clone, PartialEq)]
pub struct CollocationTable {
    pub model: Model,
    scores: Vec<CollocationScore>,
    index: BTreeMap<(String, Category), (usize, usize)>,
}

impl CollocationTable {
    fn from_grouped(model: Model, scores: Vec<CollocationScore>) -> Self {
        let mut index = BTreeMap::new();
        let mut start = 0;
        for i in 1..=scores.len() {
            let boundary = i == scores.len()
                || scores[i].idiom_key != scores[start].idiom_key
                || scores[i].category != scores[start].category;
            if boundary {
                let s = &scores[start];
                index.insert((s.idiom_key.clone(), s.category), (start, i));
                start = i;
            }
        }
        CollocationTable { model, scores, index }
    }

    pub fn scores(&self) -> &[CollocationScore] {
        &self.scores
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    /// The full ranked list for one idiom and category.
    pub fn ranked(&self, idiom_key: &str, category: Category) -> &[CollocationScore] {
        self.index
            .get(&(idiom_key.to_string(), category))
            .map_or(&[], |&(s, e)| &self.scores[s..e])
    }

    pub fn top_k(&self, idiom_key: &str, category: Category, k: usize) -> Vec<(String, f64)> {
        self.ranked(idiom_key, category)
            .iter()
            .take(k)
            .map(|s| (s.lemma.clone(), s.score))
            .collect()
    }

    pub fn write_tsv<W: Write>(&self, mut out: W) -> Result<()> {
        for s in &self.scores {
            writeln!(
                out,
                "{}\t{}\t{}\t{:.6}\t{}",
                s.idiom_key, s.category, s.lemma, s.score, s.raw_count
            )?;
        }
        Ok(())
    }

    /// Reads a table back; rows are kept in file order.
    pub fn read_tsv<R: BufRead>(source: R, model: Model) -> Result<Self> {
        let mut scores = Vec::new();
        for (i, line) in source.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split('\t').collect();
            if f.len() != 5 {
                return Err(Error::parse(i + 1, "expected 5 TAB-separated fields"));
            }
            let bad = |what: &str| Error::parse(i + 1, format!("bad {what}"));
            scores.push(CollocationScore {
                idiom_key: f[0].to_string(),
                category: f[1].parse().map_err(|_| bad("category"))?,
                lemma: f[2].to_string(),
                model,
                score: f[3].parse().map_err(|_| bad("score"))?,
                raw_count: f[4].parse().map_err(|_| bad("raw count"))?,
            });
        }
        scores.sort_by(|a, b| a.idiom_key.cmp(&b.idiom_key).then(a.category.cmp(&b.category)));
        Ok(CollocationTable::from_grouped(model, scores))
    }
}

/// Free-function form of [`CollocationTable::top_k`]; unknown idioms give an
/// empty list.
pub fn top_k(table: &CollocationTable, idiom_key: &str, category: Category, k: usize) -> Vec<(String, f64)> {
    table.top_k(idiom_key, category, k)
}

/// Scores every (idiom, category, lemma) pair with `model`, drops pairs
/// seen fewer than `min_pair_count` times, and ranks each idiom's lists.
pub fn fit(model: Model, bows: &[BagOfWords], min_pair_count: u64) -> Result<CollocationTable> {
    let mut bows: Vec<&BagOfWords> = bows.iter().collect();
    bows.sort_by(|a, b| a.idiom_key.cmp(&b.idiom_key));

    let mut scores = Vec::new();
    for category in Category::ALL {
        let cooc = CooccurrenceStats::from_bows(bows.iter().copied(), category);
        let docs = TermDocStats::from_bows(bows.iter().copied(), category);
        for bag in &bows {
            for (lemma, &count) in bag.get(category) {
                if count < min_pair_count {
                    continue;
                }
                let score = match model {
                    Model::Tf => count as f64,
                    Model::Tfidf => tfidf_weight(count, docs.df(lemma), docs.n_docs())?,
                    Model::Pmi => cooc.pmi(&bag.idiom_key, lemma, count)?,
                };
                scores.push(CollocationScore {
                    idiom_key: bag.idiom_key.clone(),
                    category,
                    lemma: lemma.clone(),
                    model,
                    score,
                    raw_count: count,
                });
            }
        }
    }
    scores.sort_by(|a, b| {
        a.idiom_key
            .cmp(&b.idiom_key)
            .then(a.category.cmp(&b.category))
            .then_with(|| rank_order(a, b))
    });
    Ok(CollocationTable::from_grouped(model, scores))
}
