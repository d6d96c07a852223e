//! The query pipeline (refine, average, search, attach collocations) and the
//! median-rank evaluation harness.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::colloc::{CollocationTable, Model};
use crate::corpus::{fallback_annotate, is_stopword, Pos};
use crate::embed::EmbeddingStore;
use crate::error::{Error, Result};
use crate::matcher::Category;

pub const NO_KNOWN_TOKENS: &str = "no known tokens";
pub const COLLOCATIONS_PER_CATEGORY: usize = 5;

/// Lowercased lemmas of `phrase` with numbers and punctuation removed.
pub fn refine(phrase: &str, strip_stopwords: bool) -> Vec<String> {
    fallback_annotate(phrase)
        .tokens
        .into_iter()
        .filter(|t| !matches!(t.pos, Pos::Punct | Pos::Num))
        .map(|t| t.lemma.to_lowercase())
        .filter(|l| !(strip_stopwords && is_stopword(l)))
        .collect()
}

/// Mean of the vectors of the lemmas the store knows, or `None` if it knows
/// none of them.
pub fn phrase_vector<S: AsRef<str>>(store: &EmbeddingStore, lemmas: &[S]) -> Option<Vec<f64>> {
    let mut sum = vec![0.0f64; store.dim()];
    let mut n = 0usize;
    for lemma in lemmas {
        if let Some(row) = store.get(lemma.as_ref()) {
            for (s, &x) in sum.iter_mut().zip(row) {
                *s += x as f64;
            }
            n += 1;
        }
    }
    if n == 0 {
        return None;
    }
    sum.iter_mut().for_each(|s| *s /= n as f64);
    Some(sum)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Collocate {
    pub lemma: String,
    pub score: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Collocations {
    pub verb: Vec<Collocate>,
    pub noun: Vec<Collocate>,
    pub adj: Vec<Collocate>,
    pub adv: Vec<Collocate>,
}

impl Collocations {
    pub fn from_table(table: &CollocationTable, idiom_key: &str, k: usize) -> Self {
        let get = |c| {
            table
                .top_k(idiom_key, c, k)
                .into_iter()
                .map(|(lemma, score)| Collocate { lemma, score })
                .collect()
        };
        Collocations {
            verb: get(Category::Verb),
            noun: get(Category::Noun),
            adj: get(Category::Adj),
            adv: get(Category::Adv),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdiomResult {
    pub idiom: String,
    pub similarity: f64,
    pub collocations: Collocations,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdiomifyResponse {
    pub query: String,
    pub refined_tokens: Vec<String>,
    pub results: Vec<IdiomResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

/// An embedding store plus collocation tables, queried together.
#[derive(Debug, Clone)]
pub struct Idiomify {
    store: EmbeddingStore,
    tables: HashMap<Model, CollocationTable>,
    default_model: Model,
    strip_stopwords: bool,
}

impl Idiomify {
    pub fn new(store: EmbeddingStore, default_model: Model) -> Self {
        Idiomify {
            store,
            tables: HashMap::new(),
            default_model,
            strip_stopwords: false,
        }
    }

    pub fn with_table(mut self, table: CollocationTable) -> Self {
        self.tables.insert(table.model, table);
        self
    }

    pub fn strip_stopwords(mut self, yes: bool) -> Self {
        self.strip_stopwords = yes;
        self
    }

    pub fn store(&self) -> &EmbeddingStore {
        &self.store
    }

    pub fn default_model(&self) -> Model {
        self.default_model
    }

    pub fn has_model(&self, model: Model) -> bool {
        self.tables.contains_key(&model)
    }

    /// Up to `k` idioms nearest to `phrase`, each with top collocations from
    /// `model` (or the default). A model without a loaded table yields empty
    /// collocation lists.
    pub fn idiomify(&self, phrase: &str, k: usize, model: Option<Model>) -> Result<IdiomifyResponse> {
        if k == 0 {
            return Err(Error::Domain("k must be at least 1".into()));
        }
        let refined = refine(phrase, self.strip_stopwords);
        let Some(query) = phrase_vector(&self.store, &refined) else {
            return Ok(IdiomifyResponse {
                query: phrase.to_string(),
                refined_tokens: refined,
                results: Vec::new(),
                reason: Some(NO_KNOWN_TOKENS.to_string()),
            });
        };
        let table = self.tables.get(&model.unwrap_or(self.default_model));
        let results = crate::embed::nearest_idioms(&self.store, &query, k)?
            .into_iter()
            .map(|(idiom, similarity)| IdiomResult {
                collocations: table
                    .map(|t| Collocations::from_table(t, &idiom, COLLOCATIONS_PER_CATEGORY))
                    .unwrap_or_default(),
                idiom,
                similarity,
            })
            .collect();
        Ok(IdiomifyResponse {
            query: phrase.to_string(),
            refined_tokens: refined,
            results,
            reason: None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalItem {
    pub idiom_key: String,
    pub definition: String,
}

/// Reads `idiom_key<TAB>definition` lines; `#` lines are comments.
pub fn read_testset<R: BufRead>(source: R) -> Result<Vec<EvalItem>> {
    let mut items = Vec::new();
    for (i, line) in source.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, definition) = line
            .split_once('\t')
            .filter(|(k, d)| !k.is_empty() && !d.trim().is_empty())
            .ok_or_else(|| Error::parse(i + 1, "expected idiom_key<TAB>definition"))?;
        items.push(EvalItem {
            idiom_key: key.to_string(),
            definition: definition.trim().to_string(),
        });
    }
    Ok(items)
}

/// 0-based position of the item's idiom among all idioms ranked for its
/// definition; `idiom_count` when the definition has no known tokens.
pub fn rank_of(store: &EmbeddingStore, item: &EvalItem, strip_stopwords: bool) -> Result<usize> {
    if !store.is_idiom(&item.idiom_key) {
        return Err(Error::UnknownIdiom(item.idiom_key.clone()));
    }
    let lemmas = refine(&item.definition, strip_stopwords);
    let Some(query) = phrase_vector(store, &lemmas) else {
        return Ok(store.idiom_count());
    };
    let ranked = store.rank_idioms(&query)?;
    Ok(ranked
        .iter()
        .position(|(k, _)| *k == item.idiom_key)
        .expect("idiom present in ranking"))
}

pub fn median_rank(ranks: &[usize]) -> Result<f64> {
    if ranks.is_empty() {
        return Err(Error::Domain("median of an empty list".into()));
    }
    let mut sorted = ranks.to_vec();
    sorted.sort_unstable();
    let n = sorted.len();
    Ok(if n % 2 == 1 {
        sorted[n / 2] as f64
    } else {
        (sorted[n / 2 - 1] as f64 + sorted[n / 2] as f64) / 2.0
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub ranks: Vec<(String, usize)>,
    pub median_rank: f64,
    pub mean_rank: f64,
    pub variance_population: f64,
    /// `None` for a single item.
    pub variance_sample: Option<f64>,
}

impl EvalReport {
    pub fn from_ranks(ranks: Vec<(String, usize)>) -> Result<Self> {
        let values: Vec<usize> = ranks.iter().map(|(_, r)| *r).collect();
        let median_rank = median_rank(&values)?;
        let n = values.len() as f64;
        let mean_rank = values.iter().map(|&r| r as f64).sum::<f64>() / n;
        let ss: f64 = values.iter().map(|&r| (r as f64 - mean_rank).powi(2)).sum();
        Ok(EvalReport {
            ranks,
            median_rank,
            mean_rank,
            variance_population: ss / n,
            variance_sample: (values.len() > 1).then(|| ss / (n - 1.0)),
        })
    }

    /// Per-item `key<TAB>rank` rows followed by `# name<TAB>value` summary
    /// lines.
    pub fn write_tsv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "idiom_key\trank")?;
        for (key, rank) in &self.ranks {
            writeln!(out, "{key}\t{rank}")?;
        }
        writeln!(out, "# items\t{}", self.ranks.len())?;
        writeln!(out, "# median_rank\t{}", self.median_rank)?;
        writeln!(out, "# mean_rank\t{:.4}", self.mean_rank)?;
        writeln!(out, "# variance_population\t{:.4}", self.variance_population)?;
        match self.variance_sample {
            Some(v) => writeln!(out, "# variance_sample\t{v:.4}")?,
            None => writeln!(out, "# variance_sample\tNA")?,
        }
        Ok(())
    }
}

/// Ranks every item in parallel. Item order is preserved in the report.
pub fn evaluate(store: &EmbeddingStore, items: &[EvalItem], strip_stopwords: bool) -> Result<EvalReport> {
    let ranks = items
        .par_iter()
        .map(|item| rank_of(store, item, strip_stopwords).map(|r| (item.idiom_key.clone(), r)))
        .collect::<Result<Vec<_>>>()?;
    EvalReport::from_ranks(ranks)
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;

    use super::*;

    fn store() -> EmbeddingStore {
        let vocab = ["wait", "anxiously", "kick_the_bucket", "with_bated_breath", "die"];
        let rows: [[f32; 2]; 5] = [[1.0, 0.0], [0.0, 1.0], [-1.0, 0.2], [0.7, 0.7], [-1.0, 0.0]];
        let idioms: BTreeSet<String> = ["kick_the_bucket", "with_bated_breath"].iter().map(|s| s.to_string()).collect();
        EmbeddingStore::new(
            vocab.iter().map(|s| s.to_string()).collect(),
            2,
            rows.iter().flatten().copied().collect(),
            &idioms,
        )
        .unwrap()
    }

    #[test]
    fn refine_examples() {
        assert_eq!(refine("wait, excitedly, anxiously!", false), ["wait", "excitedly", "anxiously"]);
        assert!(refine("123 !!!", false).is_empty());
        assert_eq!(refine("waiting", false), ["wait"]);
        assert_eq!(refine("Wait for the bus", true), ["wait", "bus"]);
        assert_eq!(refine("Wait for the bus", false), ["wait", "for", "the", "bus"]);
    }

    #[test]
    fn phrase_vector_examples() {
        let s = store();
        assert_eq!(phrase_vector(&s, &["wait"]).unwrap(), [1.0, 0.0]);
        assert_eq!(phrase_vector(&s, &["wait", "anxiously", "zzz"]).unwrap(), [0.5, 0.5]);
        assert!(phrase_vector(&s, &["zzz"]).is_none());
        assert!(phrase_vector::<&str>(&s, &[]).is_none());
    }

    #[test]
    fn idiomify_ranks_and_reports_unknown() {
        let engine = Idiomify::new(store(), Model::Pmi);
        let got = engine.idiomify("waiting anxiously", 5, None).unwrap();
        assert_eq!(got.refined_tokens, ["wait", "anxiously"]);
        assert_eq!(got.results[0].idiom, "with_bated_breath");
        assert_eq!(got.results.len(), 2);
        assert!(got.reason.is_none());
        assert!(got.results[0].collocations.verb.is_empty());

        let none = engine.idiomify("zzzqqq", 5, None).unwrap();
        assert!(none.results.is_empty());
        assert_eq!(none.reason.as_deref(), Some(NO_KNOWN_TOKENS));
        let json = serde_json::to_value(&none).unwrap();
        assert_eq!(json["reason"], "no known tokens");
    }

    #[test]
    fn rank_of_contract() {
        let s = store();
        let item = |k: &str, d: &str| EvalItem {
            idiom_key: k.into(),
            definition: d.into(),
        };
        assert_eq!(rank_of(&s, &item("kick_the_bucket", "die"), false).unwrap(), 0);
        assert_eq!(rank_of(&s, &item("with_bated_breath", "die"), false).unwrap(), 1);
        assert_eq!(rank_of(&s, &item("kick_the_bucket", "zzz"), false).unwrap(), 2);
        assert!(matches!(rank_of(&s, &item("wait", "die"), false), Err(Error::UnknownIdiom(_))));
    }

    #[test]
    fn medians() {
        assert_eq!(median_rank(&[0]).unwrap(), 0.0);
        assert_eq!(median_rank(&[0, 1, 2, 3]).unwrap(), 1.5);
        assert_eq!(median_rank(&[5, 1, 3]).unwrap(), 3.0);
        assert_eq!(median_rank(&[0, 0, 0, 0]).unwrap(), 0.0);
        assert!(median_rank(&[]).is_err());
    }

    #[test]
    fn report_variances() {
        let r = EvalReport::from_ranks(vec![("a".into(), 1), ("b".into(), 3)]).unwrap();
        assert_eq!(r.median_rank, 2.0);
        assert_eq!(r.variance_population, 1.0);
        assert_eq!(r.variance_sample, Some(2.0));
        let mut buf = Vec::new();
        r.write_tsv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("idiom_key\trank\na\t1\nb\t3\n# items\t2\n# median_rank\t2\n"));
    }

    #[test]
    fn testset_parsing() {
        let items = read_testset("# c\nkick_the_bucket\tto die\n\n".as_bytes()).unwrap();
        assert_eq!(items.len(), 1);
        assert_eq!(items[0].definition, "to die");
        assert!(read_testset("nodefinition\n".as_bytes()).is_err());
    }
}
