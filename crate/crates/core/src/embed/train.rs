use std::cell::UnsafeCell;
use std::collections::{BTreeSet, HashMap};
use std::sync::atomic::{AtomicU64, Ordering};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{should_stop, EmbeddingStore, LossTrace, TrainingConfig};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrainingMode {
    /// Single-threaded and seeded; bit-reproducible.
    Deterministic,
    /// Lock-free updates from several threads; not reproducible.
    Parallel,
}

const NOISE_POWER: f64 = 0.75;
const MIN_LR_FRACTION: f32 = 1e-4;

struct Vocab {
    tokens: Vec<String>,
    counts: Vec<u64>,
}

fn build_vocab<S: AsRef<str>>(corpus: &[Vec<S>], min_count: u64) -> Vocab {
    let mut counts: HashMap<&str, u64> = HashMap::new();
    for sentence in corpus {
        for token in sentence {
            *counts.entry(token.as_ref()).or_insert(0) += 1;
        }
    }
    let mut kept: Vec<(&str, u64)> = counts.into_iter().filter(|&(_, n)| n >= min_count).collect();
    kept.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
    Vocab {
        tokens: kept.iter().map(|(t, _)| t.to_string()).collect(),
        counts: kept.iter().map(|&(_, n)| n).collect(),
    }
}

/// Cumulative unigram^0.75 distribution sampled by binary search.
struct NoiseTable {
    cumulative: Vec<f64>,
}

impl NoiseTable {
    fn new(counts: &[u64]) -> Self {
        let mut acc = 0.0;
        let cumulative = counts
            .iter()
            .map(|&n| {
                acc += (n as f64).powf(NOISE_POWER);
                acc
            })
            .collect();
        NoiseTable { cumulative }
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> usize {
        let total = *self.cumulative.last().expect("non-empty vocabulary");
        let x = rng.gen::<f64>() * total;
        self.cumulative
            .partition_point(|&c| c <= x)
            .min(self.cumulative.len() - 1)
    }
}

fn sigmoid(x: f32) -> f32 {
    1.0 / (1.0 + (-x).exp())
}

/// `-ln(sigmoid(x))`, computed without overflow.
fn neg_log_sigmoid(x: f32) -> f64 {
    let x = x as f64;
    if x > 0.0 {
        (-x).exp().ln_1p()
    } else {
        -x + x.exp().ln_1p()
    }
}

/// Row-major weights shared between training threads. Concurrent writers may
/// overwrite each other's updates to the same row; readers may observe torn
/// rows. Both are tolerated by the parallel training mode.
struct SharedWeights {
    cells: Box<[UnsafeCell<f32>]>,
    dim: usize,
}

// SAFETY: all access goes through raw element reads and writes of `f32`;
// lost or interleaved updates are part of the parallel mode's contract and
// no references to the data outlive a single operation.
unsafe impl Sync for SharedWeights {}

impl SharedWeights {
    fn new(values: Vec<f32>, dim: usize) -> Self {
        SharedWeights {
            cells: values.into_iter().map(UnsafeCell::new).collect(),
            dim,
        }
    }

    #[inline]
    fn get(&self, row: usize, j: usize) -> f32 {
        // SAFETY: index is in bounds; see the `Sync` impl for aliasing.
        unsafe { *self.cells[row * self.dim + j].get() }
    }

    #[inline]
    fn add(&self, row: usize, j: usize, delta: f32) {
        // SAFETY: index is in bounds; see the `Sync` impl for aliasing.
        unsafe { *self.cells[row * self.dim + j].get() += delta }
    }

    fn into_vec(self) -> Vec<f32> {
        self.cells.into_vec().into_iter().map(UnsafeCell::into_inner).collect()
    }
}

struct Trainer<'a> {
    input: &'a SharedWeights,
    output: &'a SharedWeights,
    noise: &'a NoiseTable,
    dim: usize,
    window: usize,
    negatives: usize,
}

impl Trainer<'_> {
    /// One positive pair plus its negatives. Returns the pair's loss.
    fn update_pair<R: Rng>(&self, center: usize, context: usize, lr: f32, rng: &mut R, grad: &mut [f32]) -> f64 {
        grad.iter_mut().for_each(|g| *g = 0.0);
        let mut loss = 0.0;
        for n in 0..=self.negatives {
            let (target, label) = if n == 0 {
                (context, 1.0)
            } else {
                let t = self.noise.sample(rng);
                if t == context {
                    continue;
                }
                (t, 0.0)
            };
            let mut f = 0.0f32;
            for j in 0..self.dim {
                f += self.input.get(center, j) * self.output.get(target, j);
            }
            loss += if label == 1.0 { neg_log_sigmoid(f) } else { neg_log_sigmoid(-f) };
            let g = (label - sigmoid(f)) * lr;
            for (j, gj) in grad.iter_mut().enumerate() {
                *gj += g * self.output.get(target, j);
                self.output.add(target, j, g * self.input.get(center, j));
            }
        }
        for (j, gj) in grad.iter().enumerate() {
            self.input.add(center, j, *gj);
        }
        loss
    }

    fn train_sentence<R: Rng>(&self, sentence: &[usize], lr: f32, rng: &mut R, grad: &mut [f32]) -> f64 {
        let mut loss = 0.0;
        for (pos, &center) in sentence.iter().enumerate() {
            let reduced = rng.gen_range(0..self.window);
            let span = self.window - reduced;
            let lo = pos.saturating_sub(span);
            let hi = (pos + span).min(sentence.len() - 1);
            for (cpos, &context) in sentence.iter().enumerate().take(hi + 1).skip(lo) {
                if cpos != pos {
                    loss += self.update_pair(center, context, lr, rng, grad);
                }
            }
        }
        loss
    }
}

fn subsample<R: Rng>(sentence: &[usize], keep_prob: &[f64], rng: &mut R) -> Vec<usize> {
    sentence
        .iter()
        .copied()
        .filter(|&t| keep_prob[t] >= 1.0 || rng.gen::<f64>() < keep_prob[t])
        .collect()
}

/// Trains skip-gram with negative sampling. Stops at `max_epochs` or when
/// the loss trace plateaus.
pub fn train<S: AsRef<str>>(
    corpus: &[Vec<S>],
    idiom_keys: &BTreeSet<String>,
    config: &TrainingConfig,
) -> Result<(EmbeddingStore, LossTrace)> {
    train_with_progress(corpus, idiom_keys, config, |_, _| {})
}

/// [`train`], calling `on_epoch(epoch, loss)` after every epoch.
pub fn train_with_progress<S: AsRef<str>, F: FnMut(usize, f64)>(
    corpus: &[Vec<S>],
    idiom_keys: &BTreeSet<String>,
    config: &TrainingConfig,
    mut on_epoch: F,
) -> Result<(EmbeddingStore, LossTrace)> {
    config.validate()?;
    let vocab = build_vocab(corpus, config.min_count);
    if vocab.tokens.is_empty() {
        return Err(Error::Training("empty vocabulary after min_count filtering".into()));
    }
    let index: HashMap<&str, usize> = vocab.tokens.iter().enumerate().map(|(i, t)| (t.as_str(), i)).collect();
    let encoded: Vec<Vec<usize>> = corpus
        .iter()
        .map(|s| s.iter().filter_map(|t| index.get(t.as_ref()).copied()).collect::<Vec<_>>())
        .filter(|s| s.len() > 1)
        .collect();
    let total_words: u64 = encoded.iter().map(|s| s.len() as u64).sum();

    let dim = config.vector_size;
    let v = vocab.tokens.len();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let init: Vec<f32> = (0..v * dim).map(|_| (rng.gen::<f32>() - 0.5) / dim as f32).collect();
    let input = SharedWeights::new(init, dim);
    let output = SharedWeights::new(vec![0.0; v * dim], dim);
    let noise = NoiseTable::new(&vocab.counts);

    let keep_prob: Vec<f64> = match config.subsample {
        Some(t) if t > 0.0 => {
            let total: u64 = vocab.counts.iter().sum();
            vocab
                .counts
                .iter()
                .map(|&n| {
                    let f = n as f64 / total as f64;
                    ((f / t).sqrt() + 1.0) * t / f
                })
                .collect()
        }
        _ => vec![1.0; v],
    };

    let trainer = Trainer {
        input: &input,
        output: &output,
        noise: &noise,
        dim,
        window: config.window,
        negatives: config.negative_samples,
    };
    let planned = (total_words * config.max_epochs as u64).max(1) as f64;
    let lr0 = config.learning_rate;
    let lr_at = |done: u64| {
        let frac = 1.0 - done as f64 / planned;
        (lr0 * frac as f32).max(lr0 * MIN_LR_FRACTION)
    };

    let mut trace: LossTrace = Vec::new();
    for epoch in 0..config.max_epochs {
        let base = total_words * epoch as u64;
        let loss = match config.mode {
            TrainingMode::Deterministic => {
                let mut grad = vec![0.0f32; dim];
                let mut done = base;
                let mut loss = 0.0;
                for sentence in &encoded {
                    let lr = lr_at(done);
                    let kept;
                    let sentence = if config.subsample.is_some() {
                        kept = subsample(sentence, &keep_prob, &mut rng);
                        &kept
                    } else {
                        sentence
                    };
                    if sentence.len() > 1 {
                        loss += trainer.train_sentence(sentence, lr, &mut rng, &mut grad);
                    }
                    done += sentence.len() as u64;
                }
                loss
            }
            TrainingMode::Parallel => {
                let progress = AtomicU64::new(base);
                let shards = rayon::current_num_threads().max(1) * 4;
                let chunk = encoded.len().div_ceil(shards).max(1);
                encoded
                    .par_chunks(chunk)
                    .enumerate()
                    .map(|(shard, sentences)| {
                        let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ ((epoch as u64) << 32) ^ shard as u64);
                        let mut grad = vec![0.0f32; dim];
                        let mut loss = 0.0;
                        for sentence in sentences {
                            let lr = lr_at(progress.fetch_add(sentence.len() as u64, Ordering::Relaxed));
                            let kept = subsample(sentence, &keep_prob, &mut rng);
                            if kept.len() > 1 {
                                loss += trainer.train_sentence(&kept, lr, &mut rng, &mut grad);
                            }
                        }
                        loss
                    })
                    .sum()
            }
        };
        trace.push(loss);
        on_epoch(epoch, loss);
        if should_stop(&trace, config.plateau_rel_tol, config.plateau_patience) {
            break;
        }
    }

    let present: BTreeSet<String> = idiom_keys.iter().filter(|k| index.contains_key(k.as_str())).cloned().collect();
    let store = EmbeddingStore::new(vocab.tokens, dim, input.into_vec(), &present)?;
    Ok((store, trace))
}
