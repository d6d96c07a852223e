//! Skip-gram embeddings over idiom-merged lemma sequences, and exact cosine
//! search restricted to idiom keys.

mod io;
mod train;

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::artifacts::LemmaPosRow;
use crate::corpus::Pos;
use crate::error::{Error, Result};

pub use io::{idioms_path, read_vectors, write_vectors};
pub use train::{train, train_with_progress, TrainingMode};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingConfig {
    pub vector_size: usize,
    pub max_epochs: usize,
    pub window: usize,
    pub min_count: u64,
    pub learning_rate: f32,
    pub negative_samples: usize,
    pub seed: u64,
    pub plateau_rel_tol: f64,
    pub plateau_patience: usize,
    /// Frequency subsampling threshold (`None` keeps every token).
    pub subsample: Option<f64>,
    pub mode: TrainingMode,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        TrainingConfig {
            vector_size: 200,
            max_epochs: 80,
            window: 8,
            min_count: 1,
            learning_rate: 0.025,
            negative_samples: 5,
            seed: 1,
            plateau_rel_tol: 1e-3,
            plateau_patience: 3,
            subsample: None,
            mode: TrainingMode::Deterministic,
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Training(m.to_string()));
        if self.vector_size == 0 {
            return bad("vector_size must be at least 1");
        }
        if self.window == 0 {
            return bad("window must be at least 1");
        }
        if self.learning_rate.is_nan() || self.learning_rate <= 0.0 {
            return bad("learning_rate must be positive");
        }
        if self.negative_samples == 0 {
            return bad("negative_samples must be at least 1");
        }
        if self.max_epochs == 0 {
            return bad("max_epochs must be at least 1");
        }
        if self.plateau_patience == 0 {
            return bad("plateau_patience must be at least 1");
        }
        Ok(())
    }
}

/// Training sentences from `idiom2lemma2pos` rows: lemmas in order, with
/// punctuation and numbers dropped so the vocabulary matches refined queries.
pub fn training_corpus(rows: &[LemmaPosRow]) -> Vec<Vec<String>> {
    rows.iter()
        .map(|row| {
            row.pairs
                .iter()
                .filter(|(_, pos)| !matches!(pos, Pos::Punct | Pos::Num))
                .map(|(lemma, _)| lemma.clone())
                .collect()
        })
        .collect()
}

/// Per-epoch summed negative-sampling loss.
pub type LossTrace = Vec<f64>;

/// True iff each of the last `patience` relative decreases
/// `(L[i-1] - L[i]) / L[i-1]` is below `rel_tol`.
pub fn should_stop(trace: &[f64], rel_tol: f64, patience: usize) -> bool {
    if patience == 0 || trace.len() < patience + 1 {
        return false;
    }
    trace[trace.len() - patience - 1..]
        .windows(2)
        .all(|w| {
            let drop = if w[0] == 0.0 { 0.0 } else { (w[0] - w[1]) / w[0] };
            drop < rel_tol
        })
}

pub fn cosine(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::Dimension {
            expected: u.len(),
            actual: v.len(),
        });
    }
    let (nu, nv) = (norm(u), norm(v));
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::Domain("cosine of a zero vector".into()));
    }
    Ok((dot(u, v) / (nu * nv)).clamp(-1.0, 1.0))
}

fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

fn norm(u: &[f64]) -> f64 {
    dot(u, u).sqrt()
}

/// Token vectors (input embeddings only) with the subset of idiom keys.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingStore {
    vocab: Vec<String>,
    index: HashMap<String, usize>,
    dim: usize,
    vectors: Vec<f32>,
    norms: Vec<f64>,
    idioms: Vec<usize>,
}

impl EmbeddingStore {
    /// Builds a store from rows. `vectors` is row-major, `vocab.len() * dim`
    /// long; every idiom key must be in the vocabulary.
    pub fn new(vocab: Vec<String>, dim: usize, vectors: Vec<f32>, idiom_keys: &BTreeSet<String>) -> Result<Self> {
        if dim == 0 || vectors.len() != vocab.len() * dim {
            return Err(Error::Dimension {
                expected: vocab.len() * dim,
                actual: vectors.len(),
            });
        }
        let mut index = HashMap::with_capacity(vocab.len());
        for (i, token) in vocab.iter().enumerate() {
            if index.insert(token.clone(), i).is_some() {
                return Err(Error::Domain(format!("duplicate token {token:?}")));
            }
        }
        let mut idioms = Vec::with_capacity(idiom_keys.len());
        for key in idiom_keys {
            match index.get(key) {
                Some(&i) => idioms.push(i),
                None => return Err(Error::UnknownIdiom(key.clone())),
            }
        }
        let norms = vectors
            .chunks(dim)
            .map(|row| row.iter().map(|&x| x as f64 * x as f64).sum::<f64>().sqrt())
            .collect();
        Ok(EmbeddingStore {
            vocab,
            index,
            dim,
            vectors,
            norms,
            idioms,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vocab(&self) -> &[String] {
        &self.vocab
    }

    pub fn vocab_len(&self) -> usize {
        self.vocab.len()
    }

    pub fn idiom_count(&self) -> usize {
        self.idioms.len()
    }

    /// Idiom keys in ascending order.
    pub fn idiom_keys(&self) -> impl Iterator<Item = &str> {
        self.idioms.iter().map(|&i| self.vocab[i].as_str())
    }

    pub fn contains(&self, token: &str) -> bool {
        self.index.contains_key(token)
    }

    pub fn is_idiom(&self, token: &str) -> bool {
        self.index
            .get(token)
            .is_some_and(|i| self.idioms.binary_search_by(|j| self.vocab[*j].cmp(&self.vocab[*i])).is_ok())
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.vectors[i * self.dim..(i + 1) * self.dim]
    }

    pub fn get(&self, token: &str) -> Option<&[f32]> {
        self.index.get(token).map(|&i| self.row(i))
    }

    /// A token's vector widened to f64, the precision queries run in.
    pub fn vector_of(&self, token: &str) -> Option<Vec<f64>> {
        self.get(token).map(|row| row.iter().map(|&x| x as f64).collect())
    }

    pub(crate) fn raw_vectors(&self) -> &[f32] {
        &self.vectors
    }

    /// Every idiom ranked by cosine to `query`: descending similarity, ties
    /// by key. Zero rows score 0.
    pub fn rank_idioms(&self, query: &[f64]) -> Result<Vec<(String, f64)>> {
        if self.idioms.is_empty() {
            return Err(Error::NoIdioms);
        }
        if query.len() != self.dim {
            return Err(Error::Dimension {
                expected: self.dim,
                actual: query.len(),
            });
        }
        let qn = norm(query);
        if qn == 0.0 {
            return Err(Error::Domain("query is a zero vector".into()));
        }
        let mut scored: Vec<(String, f64)> = self
            .idioms
            .iter()
            .map(|&i| {
                let sim = if self.norms[i] == 0.0 {
                    0.0
                } else {
                    let d: f64 = self.row(i).iter().zip(query).map(|(&a, b)| a as f64 * b).sum();
                    (d / (self.norms[i] * qn)).clamp(-1.0, 1.0)
                };
                (self.vocab[i].clone(), sim)
            })
            .collect();
        scored.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        Ok(scored)
    }
}

/// The `k` idioms nearest to `query` by exact cosine scan.
pub fn nearest_idioms(store: &EmbeddingStore, query: &[f64], k: usize) -> Result<Vec<(String, f64)>> {
    if k == 0 {
        return Err(Error::Domain("k must be at least 1".into()));
    }
    let mut ranked = store.rank_idioms(query)?;
    ranked.truncate(k);
    Ok(ranked)
}
