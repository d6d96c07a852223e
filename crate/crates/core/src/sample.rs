//! A deterministic synthetic corpus with planted idioms, used for demos,
//! end-to-end runs and embedding tests.
//!
//! Each planted idiom co-occurs with four context words that appear nowhere
//! else. The rest of every sentence is drawn from a Zipf-weighted vocabulary
//! of invented filler words plus a handful of function words.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::distributions::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::corpus::{fallback_annotate, write_annotated, AnnotatedSentence, AnnotatedToken, Pos};
use crate::error::Result;
use crate::idiomify::EvalItem;
use crate::lexicon::IdiomEntry;

pub const LEXICON_FILE: &str = "lexicon.tsv";
pub const CORPUS_FILE: &str = "corpus.tsv";
pub const TESTSET_FILE: &str = "testset.tsv";

/// A planted idiom: base form, surface variants and four context words with
/// their tags.
pub struct Planted {
    pub base_form: &'static str,
    pub surfaces: &'static [&'static str],
    pub context: [(&'static str, Pos); 4],
}

use Pos::{Adj as A, Adv as R, Noun as N, Verb as V};

pub const PLANTED: [Planted; 20] = [
    Planted {
        base_form: "with bated breath",
        surfaces: &["with bated breath"],
        context: [("wait", V), ("anxiously", R), ("excitedly", R), ("hopefully", R)],
    },
    Planted {
        base_form: "catch-22",
        surfaces: &["catch-22", "catch 22"],
        context: [("dilemma", N), ("difficult", A), ("trap", N), ("impossible", A)],
    },
    Planted {
        base_form: "beat around the bush",
        surfaces: &["beat around the bush", "beating around the bush"],
        context: [("evade", V), ("vague", A), ("question", N), ("indirectly", R)],
    },
    Planted {
        base_form: "spill the beans",
        surfaces: &["spill the beans", "spilled the beans"],
        context: [("secret", N), ("reveal", V), ("confess", V), ("accidentally", R)],
    },
    Planted {
        base_form: "break the ice",
        surfaces: &["break the ice", "breaks the ice"],
        context: [("stranger", N), ("awkward", A), ("introduce", V), ("party", N)],
    },
    Planted {
        base_form: "piece of cake",
        surfaces: &["piece of cake"],
        context: [("simple", A), ("effortless", A), ("exam", N), ("easily", R)],
    },
    Planted {
        base_form: "under the weather",
        surfaces: &["under the weather"],
        context: [("sick", A), ("fever", N), ("flu", N), ("unwell", A)],
    },
    Planted {
        base_form: "hit the sack",
        surfaces: &["hit the sack", "hits the sack"],
        context: [("sleep", V), ("pillow", N), ("yawn", V), ("midnight", N)],
    },
    Planted {
        base_form: "bite the bullet",
        surfaces: &["bite the bullet"],
        context: [("endure", V), ("pain", N), ("brave", A), ("reluctantly", R)],
    },
    Planted {
        base_form: "cost an arm and a leg",
        surfaces: &["cost an arm and a leg", "costs an arm and a leg"],
        context: [("expensive", A), ("price", N), ("pay", V), ("luxury", N)],
    },
    Planted {
        base_form: "let the cat out of the bag",
        surfaces: &["let the cat out of the bag"],
        context: [("surprise", N), ("blurt", V), ("gossip", N), ("careless", A)],
    },
    Planted {
        base_form: "once in a blue moon",
        surfaces: &["once in a blue moon"],
        context: [("rarely", R), ("seldom", R), ("occasion", N), ("unusual", A)],
    },
    Planted {
        base_form: "the last straw",
        surfaces: &["the last straw"],
        context: [("patience", N), ("furious", A), ("quit", V), ("finally", R)],
    },
    Planted {
        base_form: "down-to-earth",
        surfaces: &["down-to-earth", "down to earth"],
        context: [("humble", A), ("practical", A), ("modest", A), ("friendly", A)],
    },
    Planted {
        base_form: "add insult to injury",
        surfaces: &["add insult to injury", "added insult to injury"],
        context: [("worse", A), ("humiliate", V), ("mock", V), ("cruel", A)],
    },
    Planted {
        base_form: "apples and oranges",
        surfaces: &["apples and oranges"],
        context: [("compare", V), ("different", A), ("contrast", N), ("apart", R)],
    },
    Planted {
        base_form: "in a nutshell",
        surfaces: &["in a nutshell"],
        context: [("summary", N), ("brief", A), ("concise", A), ("basically", R)],
    },
    Planted {
        base_form: "double-edged sword",
        surfaces: &["double-edged sword", "double edged sword"],
        context: [("advantage", N), ("risk", N), ("benefit", N), ("ironically", R)],
    },
    Planted {
        base_form: "life-or-death",
        surfaces: &["life-or-death", "life or death"],
        context: [("urgent", A), ("emergency", N), ("survive", V), ("critical", A)],
    },
    Planted {
        base_form: "grasp at straws",
        surfaces: &["grasp at straws", "grasping at straws"],
        context: [("desperate", A), ("hopeless", A), ("guess", V), ("clue", N)],
    },
];

/// Idioms from the matcher examples, with their alternatives, and a few
/// short idioms that the length filter drops.
const EXTRA_LEXICON: [(&str, &[&str]); 12] = [
    ("balls-out", &[]),
    ("teach someone a lesson", &[]),
    ("ahead of one's time", &[]),
    (
        "add fuel to the fire",
        &[
            "add fuel to the flame",
            "pour gasoline on the fire",
            "throw gasoline on the fire",
            "throw gas on the fire",
        ],
    ),
    ("open the floodgates", &[]),
    ("keep someone at arm's length", &[]),
    ("at arm's length", &[]),
    ("call someone's bluff", &[]),
    ("find one's feet", &[]),
    ("rocket science", &[]),
    ("hit home", &[]),
    ("go bananas", &[]),
];

/// Example sentences for the matcher, annotated with the fallback pipeline.
pub const MATCHER_SENTENCES: [&str; 14] = [
    "in terms of rhyme, meter, and balls-out swagger.",
    "in terms of rhyme, meter, and balls out swagger.",
    "they were teaching me a lesson for daring to complain.",
    "Jo is a playwright who has always been ahead of her time",
    "others in the media have added fuel to the fire by blaming farmers",
    "others in the media have added fuel to the flame by blaming farmers",
    "others in the media have poured gasoline on the fire by blaming farmers",
    "others in the media have threw gasoline on the fire by blaming farmers",
    "others in the media have threw gas on the fire by blaming farmers",
    "He grasped at straws",
    "He grasped desperately at the floating straw.",
    "And with him gone, they opened the floodgates.",
    "And with him gone, the floodgates were opened.",
    "They preferred to persist in keeping both Germans and Russians at arm's length.",
];

const FUNCTION_WORDS: [(&str, Pos); 12] = [
    ("the", Pos::Det),
    ("a", Pos::Det),
    ("this", Pos::Det),
    ("of", Pos::Adp),
    ("to", Pos::Adp),
    ("in", Pos::Adp),
    ("with", Pos::Adp),
    ("and", Pos::X),
    ("it", Pos::Pron),
    ("they", Pos::Pron),
    ("she", Pos::Pron),
    ("we", Pos::Pron),
];

const SYLLABLES: [&str; 14] = ["ba", "ko", "mi", "tu", "re", "lo", "fa", "ni", "zu", "pe", "da", "vi", "go", "sha"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SampleConfig {
    pub seed: u64,
    pub filler_words: usize,
    pub sentences_per_idiom: usize,
    pub filler_sentences: usize,
    pub min_len: usize,
    pub max_len: usize,
    /// Largest distance between the idiom and a planted context word.
    pub context_distance: usize,
}

impl Default for SampleConfig {
    fn default() -> Self {
        SampleConfig {
            seed: 7,
            filler_words: 1000,
            sentences_per_idiom: 300,
            filler_sentences: 400,
            min_len: 10,
            max_len: 18,
            context_distance: 4,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Sample {
    /// Raw lexicon rows, including entries the length filter will drop.
    pub lexicon: Vec<IdiomEntry>,
    pub corpus: Vec<AnnotatedSentence>,
    pub testset: Vec<EvalItem>,
}

impl Sample {
    pub fn token_count(&self) -> usize {
        self.corpus.iter().map(|s| s.len()).sum()
    }

    /// Writes `lexicon.tsv`, `corpus.tsv` and `testset.tsv` into `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let mut out = BufWriter::new(File::create(dir.join(LEXICON_FILE))?);
        writeln!(out, "# base form<TAB>alternative forms")?;
        for entry in &self.lexicon {
            write!(out, "{}", entry.base_form)?;
            for alt in &entry.alternatives {
                write!(out, "\t{alt}")?;
            }
            writeln!(out)?;
        }
        out.flush()?;

        let mut out = BufWriter::new(File::create(dir.join(CORPUS_FILE))?);
        write_annotated(&mut out, &self.corpus)?;
        out.flush()?;

        let mut out = BufWriter::new(File::create(dir.join(TESTSET_FILE))?);
        for item in &self.testset {
            writeln!(out, "{}\t{}", item.idiom_key, item.definition)?;
        }
        out.flush()?;
        Ok(())
    }
}

fn filler_vocabulary(rng: &mut ChaCha8Rng, n: usize) -> Vec<AnnotatedToken> {
    let mut words: Vec<String> = Vec::new();
    for a in SYLLABLES {
        for b in SYLLABLES {
            words.push(format!("{a}{b}"));
            for c in SYLLABLES {
                words.push(format!("{a}{b}{c}"));
            }
        }
    }
    words.shuffle(rng);
    words.truncate(n);
    words
        .into_iter()
        .enumerate()
        .map(|(i, w)| {
            let pos = match i % 10 {
                0..=4 => Pos::Noun,
                5..=7 => Pos::Verb,
                8 => Pos::Adj,
                _ => Pos::Adv,
            };
            AnnotatedToken::new(w.clone(), w, pos)
        })
        .collect()
}

struct Filler {
    words: Vec<AnnotatedToken>,
    zipf: WeightedIndex<f64>,
}

impl Filler {
    fn token(&self, rng: &mut ChaCha8Rng) -> AnnotatedToken {
        if rng.gen_bool(0.25) {
            let (w, pos) = FUNCTION_WORDS[rng.gen_range(0..FUNCTION_WORDS.len())];
            AnnotatedToken::new(w, w, pos)
        } else {
            self.words[self.zipf.sample(rng)].clone()
        }
    }

    fn sentence(&self, rng: &mut ChaCha8Rng, len: usize) -> Vec<AnnotatedToken> {
        (0..len).map(|_| self.token(rng)).collect()
    }
}

fn planted_sentence(
    rng: &mut ChaCha8Rng,
    filler: &Filler,
    planted: &Planted,
    config: &SampleConfig,
) -> Vec<AnnotatedToken> {
    let len = rng.gen_range(config.min_len..=config.max_len);
    let mut slots: Vec<Option<AnnotatedToken>> = vec![None; len];
    let at = rng.gen_range(0..len);
    let n_context = rng.gen_range(2..=3);
    let mut chosen: Vec<&(&str, Pos)> = planted.context.iter().collect();
    chosen.shuffle(rng);
    let lo = at.saturating_sub(config.context_distance);
    let hi = (at + config.context_distance).min(len - 1);
    let mut free: Vec<usize> = (lo..=hi).filter(|&i| i != at).collect();
    free.shuffle(rng);
    for (&&(word, pos), i) in chosen.iter().take(n_context).zip(free) {
        slots[i] = Some(AnnotatedToken::new(word, word, pos));
    }
    let surface = planted.surfaces[rng.gen_range(0..planted.surfaces.len())];
    let mut tokens = Vec::with_capacity(len + 6);
    for (i, slot) in slots.into_iter().enumerate() {
        if i == at {
            tokens.extend(fallback_annotate(surface).tokens);
        } else {
            tokens.push(slot.unwrap_or_else(|| filler.token(rng)));
        }
    }
    tokens
}

/// Builds the sample deterministically from `config.seed`.
pub fn generate(config: &SampleConfig) -> Sample {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let words = filler_vocabulary(&mut rng, config.filler_words);
    let zipf = WeightedIndex::new((1..=words.len()).map(|r| 1.0 / r as f64)).expect("positive weights");
    let filler = Filler { words, zipf };

    let mut bodies: Vec<Vec<AnnotatedToken>> = Vec::new();
    for planted in &PLANTED {
        for _ in 0..config.sentences_per_idiom {
            bodies.push(planted_sentence(&mut rng, &filler, planted, config));
        }
    }
    for _ in 0..config.filler_sentences {
        let len = rng.gen_range(config.min_len..=config.max_len);
        bodies.push(filler.sentence(&mut rng, len));
    }
    bodies.shuffle(&mut rng);
    bodies.extend(MATCHER_SENTENCES.iter().map(|s| fallback_annotate(s).tokens));

    let corpus = bodies
        .into_iter()
        .enumerate()
        .map(|(i, tokens)| AnnotatedSentence {
            tokens,
            doc_id: format!("doc-{:03}", i / 100),
            sent_index: i % 100,
        })
        .collect();

    let mut lexicon: Vec<IdiomEntry> = PLANTED.iter().map(|p| IdiomEntry::new(p.base_form, Vec::new())).collect();
    lexicon.extend(
        EXTRA_LEXICON
            .iter()
            .map(|(base, alts)| IdiomEntry::new(base, alts.iter().map(|a| a.to_string()).collect())),
    );

    let testset = PLANTED
        .iter()
        .map(|p| EvalItem {
            idiom_key: crate::lexicon::normalize_key(p.base_form),
            definition: p.context.iter().map(|(w, _)| *w).collect::<Vec<_>>().join(", "),
        })
        .collect();

    Sample {
        lexicon,
        corpus,
        testset,
    }
}
