//! End-to-end acceptance suite. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpStream;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use idiomatch_core::artifacts::read_idiom2lemma2pos;
use idiomatch_core::colloc::{fit, pmi, tfidf_weight, Model};
use idiomatch_core::corpus::fallback_annotate;
use idiomatch_core::embed::{nearest_idioms, train, training_corpus, EmbeddingStore, TrainingConfig};
use idiomatch_core::idiomify::{evaluate, median_rank, read_testset, EvalItem, Idiomify};
use idiomatch_core::lexicon::{load_lexicon, CompileMode, RuleConfig, DEFAULT_MIN_WORDS};
use idiomatch_core::matcher::{BagOfWords, Category, Matcher};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const MATCHER_BUDGET: Duration = Duration::from_secs(1);
const PIPELINE_BUDGET: Duration = Duration::from_secs(120);
const EMBEDDING_BUDGET: Duration = Duration::from_secs(120);
const FORMULA_TOL: f64 = 1e-9;
const INDEPENDENCE_TOL: f64 = 1e-12;
const SELF_TOL: f64 = 1e-6;
const BRUTE_TIE_TOL: f64 = 1e-9;
const BRUTE_SEEDS: u64 = 100;
const MIN_PLANTED_HITS: usize = 16;
const TOP_N: usize = 10;
const SAMPLE_MAX_BYTES: u64 = 5 * 1024 * 1024;

type Outcome = Result<String, String>;

fn sample_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/sample")
}

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(elapsed: Duration, budget: Duration) -> Result<(), String> {
    check(elapsed < budget, format!("took {elapsed:.2?}, budget {budget:?}"))
}

fn matcher(mode: CompileMode) -> Matcher {
    let file = File::open(sample_dir().join("lexicon.tsv")).unwrap();
    let lexicon = load_lexicon(BufReader::new(file), DEFAULT_MIN_WORDS).unwrap();
    Matcher::new(lexicon.compile(mode, &RuleConfig::default()).unwrap())
}

fn keys(m: &Matcher, raw: &str) -> Vec<String> {
    m.find_matches(&fallback_annotate(raw)).into_iter().map(|m| m.idiom_key).collect()
}

fn matcher_positive() -> Outcome {
    let started = Instant::now();
    let m = matcher(CompileMode::Baseline);
    let cases = [
        ("in terms of rhyme, meter, and balls-out swagger.", "balls-out"),
        ("in terms of rhyme, meter, and balls out swagger.", "balls-out"),
        ("they were teaching me a lesson for daring to complain.", "teach_someone_a_lesson"),
        ("Jo is a playwright who has always been ahead of her time", "ahead_of_one's_time"),
        ("others in the media have added fuel to the fire by blaming farmers", "add_fuel_to_the_fire"),
        ("others in the media have added fuel to the flame by blaming farmers", "add_fuel_to_the_fire"),
        ("others in the media have poured gasoline on the fire by blaming farmers", "add_fuel_to_the_fire"),
        ("others in the media have threw gasoline on the fire by blaming farmers", "add_fuel_to_the_fire"),
        ("others in the media have threw gas on the fire by blaming farmers", "add_fuel_to_the_fire"),
    ];
    for (sentence, key) in cases {
        let got = keys(&m, sentence);
        check(got == [key], format!("{sentence:?}: expected [{key}], got {got:?}"))?;
    }
    let elapsed = started.elapsed();
    within(elapsed, MATCHER_BUDGET)?;
    Ok(format!("9/9 sentences in {elapsed:.2?}"))
}

fn matcher_extended() -> Outcome {
    let started = Instant::now();
    let base = matcher(CompileMode::Baseline);
    let ext = matcher(CompileMode::Extended);
    let cases: [(&str, &[&str], &str); 3] = [
        ("He grasped desperately at the floating straw.", &[], "grasp_at_straws"),
        ("And with him gone, the floodgates were opened.", &[], "open_the_floodgates"),
        (
            "They preferred to persist in keeping both Germans and Russians at arm's length.",
            &["at_arm's_length"],
            "keep_someone_at_arm's_length",
        ),
    ];
    for (sentence, baseline, extended) in cases {
        let b = keys(&base, sentence);
        check(b == baseline, format!("baseline {sentence:?}: expected {baseline:?}, got {b:?}"))?;
        let e = keys(&ext, sentence);
        check(e == [extended], format!("extended {sentence:?}: expected [{extended}], got {e:?}"))?;
    }
    let elapsed = started.elapsed();
    within(elapsed, MATCHER_BUDGET)?;
    Ok(format!("3/3 cases fail in baseline and succeed in extended, {elapsed:.2?}"))
}

fn formula_oracles() -> Outcome {
    for (args, want) in [((0.125, 0.25, 0.25), 1.0), ((0.0625, 0.5, 0.25), -1.0), ((0.25, 0.5, 0.5), 0.0)] {
        let got = pmi(args.0, args.1, args.2).map_err(|e| e.to_string())?;
        check((got - want).abs() < FORMULA_TOL, format!("pmi{args:?} = {got}, want {want}"))?;
    }
    for ((tf, df, n), want) in [((10, 1, 10), 2.0), ((100, 10, 1000), 6.0)] {
        let got = tfidf_weight(tf, df, n).map_err(|e| e.to_string())?;
        check((got - want).abs() < FORMULA_TOL, format!("tfidf({tf},{df},{n}) = {got}, want {want}"))?;
    }
    let grid = [0.5, 0.25, 0.1, 0.3, 0.7, 0.9, 0.01, 1.0 / 3.0];
    let mut worst: f64 = 0.0;
    for &x in &grid {
        for &y in &grid {
            let got = pmi(x * y, x, y).map_err(|e| e.to_string())?;
            worst = worst.max(got.abs());
        }
    }
    check(worst < INDEPENDENCE_TOL, format!("independence PMI reached {worst:e}"))?;
    for n in [1, 2, 7, 1000] {
        for tf in [1, 5, 99] {
            let got = tfidf_weight(tf, n, n).map_err(|e| e.to_string())?;
            check(got == 0.0, format!("tfidf({tf},{n},{n}) = {got}, want exactly 0"))?;
        }
    }
    Ok(format!("hand values within {FORMULA_TOL:e}, independence max |pmi| {worst:e}, df=N gives 0"))
}

fn discrimination() -> Outcome {
    const UNIQUE: &str = "zeal";
    const UBIQUITOUS: &str = "deal";
    let mut bows: Vec<BagOfWords> = (0..10).map(|i| BagOfWords::new(format!("idiom_{i:02}"))).collect();
    bows[0].noun.insert(UNIQUE.into(), 10);
    for bag in &mut bows {
        bag.noun.insert(UBIQUITOUS.into(), 10);
    }
    let mut report = Vec::new();
    for model in Model::ALL {
        let table = fit(model, &bows, 1).map_err(|e| e.to_string())?;
        let ranked = table.ranked("idiom_00", Category::Noun);
        let score = |lemma: &str| ranked.iter().find(|s| s.lemma == lemma).map(|s| s.score).unwrap();
        let (a, b) = (score(UNIQUE), score(UBIQUITOUS));
        match model {
            Model::Tf => check(a <= b, format!("tf ranks A strictly first ({a} > {b})"))?,
            _ => check(
                ranked[0].lemma == UNIQUE && a > b,
                format!("{model} top is {} (A {a}, B {b})", ranked[0].lemma),
            )?,
        }
        report.push(format!("{model} A={a:.3} B={b:.3}"));
    }
    Ok(report.join(", "))
}

fn random_bows(seed: u64) -> (Vec<BagOfWords>, u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_idioms = rng.gen_range(1..=20);
    let n_lemmas = rng.gen_range(1..=50);
    let bows = (0..n_idioms)
        .map(|i| {
            let mut bag = BagOfWords::new(format!("idiom_{i:02}"));
            for c in Category::ALL {
                for _ in 0..rng.gen_range(0..8) {
                    let lemma = format!("l{:02}", rng.gen_range(0..n_lemmas));
                    *bag.get_mut(c).entry(lemma).or_insert(0) += rng.gen_range(1..=4);
                }
            }
            bag
        })
        .collect();
    (bows, rng.gen_range(1..=2))
}

/// Scores straight from the formulas, then insertion-sorts with the
/// documented tie-break.
fn brute_force(bows: &[BagOfWords], key: &str, c: Category, model: Model, min: u64) -> Vec<(String, f64, u64)> {
    let grand: u64 = bows.iter().flat_map(|b| b.get(c).values()).sum();
    let docs: Vec<&BTreeMap<String, u64>> = bows.iter().map(|b| b.get(c)).filter(|m| !m.is_empty()).collect();
    let bag = bows.iter().find(|b| b.idiom_key == key).unwrap().get(c);
    let idiom_total: u64 = bag.values().sum();
    let mut scored: Vec<(String, f64, u64)> = bag
        .iter()
        .filter(|(_, &n)| n >= min)
        .map(|(lemma, &n)| {
            let score = match model {
                Model::Tf => n as f64,
                Model::Tfidf => {
                    let df = docs.iter().filter(|d| d.contains_key(lemma)).count() as f64;
                    (1.0 + (n as f64).log10()) * (docs.len() as f64 / df).log10()
                }
                Model::Pmi => {
                    let lemma_total: u64 = bows.iter().filter_map(|b| b.get(c).get(lemma)).sum();
                    let g = grand as f64;
                    (n as f64 / g).log2() - ((idiom_total as f64 / g).log2() + (lemma_total as f64 / g).log2())
                }
            };
            (lemma.clone(), score, n)
        })
        .collect();
    for i in 1..scored.len() {
        let mut j = i;
        while j > 0 && before(&scored[j], &scored[j - 1]) {
            scored.swap(j, j - 1);
            j -= 1;
        }
    }
    scored
}

fn before(a: &(String, f64, u64), b: &(String, f64, u64)) -> bool {
    if (a.1 - b.1).abs() > BRUTE_TIE_TOL {
        return a.1 > b.1;
    }
    (std::cmp::Reverse(a.2), &a.0) < (std::cmp::Reverse(b.2), &b.0)
}

fn brute_force_equivalence() -> Outcome {
    let mut lists = 0;
    for seed in 0..BRUTE_SEEDS {
        let (bows, min) = random_bows(seed);
        for model in Model::ALL {
            let table = fit(model, &bows, min).map_err(|e| e.to_string())?;
            for bag in &bows {
                for c in Category::ALL {
                    let want = brute_force(&bows, &bag.idiom_key, c, model, min);
                    let got = table.ranked(&bag.idiom_key, c);
                    let same = got.len() == want.len()
                        && got
                            .iter()
                            .zip(&want)
                            .all(|(g, w)| g.lemma == w.0 && g.raw_count == w.2 && (g.score - w.1).abs() < BRUTE_TIE_TOL);
                    check(same, format!("seed {seed}, {model}, {}/{c:?} differs", bag.idiom_key))?;
                    lists += 1;
                }
            }
        }
    }
    Ok(format!("{BRUTE_SEEDS} seeds, {lists} ranked lists identical"))
}

fn run_cli(args: &[&str]) -> Result<String, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_idiomatch"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("idiomatch {args:?} failed: {}", String::from_utf8_lossy(&out.stderr)));
    }
    Ok(String::from_utf8_lossy(&out.stdout).into_owned())
}

fn embedding() -> Outcome {
    let started = Instant::now();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let out = dir.path().to_str().unwrap();
    let sample = sample_dir();
    let rules = dir.path().join("rules.json");
    run_cli(&[
        "lexicon", "compile", "--input", sample.join("lexicon.tsv").to_str().unwrap(),
        "--mode", "baseline", "--out", rules.to_str().unwrap(),
    ])?;
    run_cli(&[
        "identify", "--rules", rules.to_str().unwrap(), "--corpus",
        sample.join("corpus.tsv").to_str().unwrap(), "--out-dir", out,
    ])?;
    let rows = read_idiom2lemma2pos(BufReader::new(File::open(dir.path().join("idiom2lemma2pos.tsv")).unwrap()))
        .map_err(|e| e.to_string())?;
    let corpus = training_corpus(&rows);
    let tokens: usize = corpus.iter().map(Vec::len).sum();
    let keys: BTreeSet<String> = rows.iter().map(|r| r.idiom_key.clone()).collect();
    let config = TrainingConfig {
        vector_size: 50,
        ..TrainingConfig::default()
    };
    let (store, trace) = train(&corpus, &keys, &config).map_err(|e| e.to_string())?;
    check(trace.len() >= 10, format!("only {} epochs recorded", trace.len()))?;
    let mean = |xs: &[f64]| xs.iter().sum::<f64>() / xs.len() as f64;
    let (early, late) = (mean(&trace[0..5]), mean(&trace[5..10]));
    check(late < early, format!("mean loss epochs 5-10 {late:.1} not below epochs 0-5 {early:.1}"))?;

    let testset = read_testset(BufReader::new(File::open(sample.join("testset.tsv")).unwrap())).map_err(|e| e.to_string())?;
    check(testset.len() == 20, format!("{} planted idioms in the test set", testset.len()))?;
    let vocab = store.vocab_len();
    let engine = Idiomify::new(store, Model::Pmi);
    let hits = testset
        .iter()
        .filter(|item| {
            let r = engine.idiomify(&item.definition, TOP_N, None).unwrap();
            r.results.iter().any(|x| x.idiom == item.idiom_key)
        })
        .count();
    check(hits >= MIN_PLANTED_HITS, format!("{hits}/20 planted idioms in top {TOP_N}"))?;
    let elapsed = started.elapsed();
    within(elapsed, EMBEDDING_BUDGET)?;
    Ok(format!(
        "{tokens} training tokens, {vocab} vocab, {} epochs, loss {early:.0} -> {late:.0}, {hits}/20 in top {TOP_N}, {elapsed:.1?}",
        trace.len()
    ))
}

fn self_retrieval() -> Outcome {
    let vocab: Vec<String> = ["catch-22", "life-or-death", "double-edged_sword", "in_a_nutshell", "at_arm's_length", "dilemma", "urgent"]
        .map(String::from)
        .to_vec();
    let rows: [[f32; 4]; 7] = [
        [1.0, 0.1, 0.0, 0.2],
        [0.2, 1.0, 0.0, -0.3],
        [0.8, 0.5, 0.1, 0.0],
        [-0.4, 0.2, 0.9, 0.1],
        [0.0, -0.7, 0.3, 0.6],
        [0.9, 0.2, 0.0, 0.1],
        [0.1, 0.9, 0.2, 0.0],
    ];
    let idioms: BTreeSet<String> = vocab[..5].iter().cloned().collect();
    let store = EmbeddingStore::new(vocab, 4, rows.concat(), &idioms).map_err(|e| e.to_string())?;
    for key in &idioms {
        let q = store.vector_of(key).unwrap();
        let got = nearest_idioms(&store, &q, 3).map_err(|e| e.to_string())?;
        check(&got[0].0 == key, format!("{key}: nearest is {}", got[0].0))?;
        check((got[0].1 - 1.0).abs() < SELF_TOL, format!("{key}: self cosine {}", got[0].1))?;
    }
    Ok(format!("{} idioms retrieve themselves first at cosine 1 within {SELF_TOL:e}", idioms.len()))
}

fn median_harness() -> Outcome {
    let m = |xs: &[usize]| median_rank(xs).map_err(|e| e.to_string());
    check(m(&[0])? == 0.0, "[0]")?;
    check(m(&[0, 1, 2, 3])? == 1.5, "[0,1,2,3]")?;
    check(m(&[5, 1, 3])? == 3.0, "[5,1,3]")?;
    check(m(&[300, 276, 277, 10])? == 276.5, "[300,276,277,10]")?;

    let vocab: Vec<String> = ["hit_home", "go_bananas", "wait", "hope", "crazy", "wild"].map(String::from).to_vec();
    let rows: [[f32; 2]; 6] = [[1.0, 1.0], [1.0, -1.0], [1.0, 0.0], [0.0, 1.0], [2.0, 0.0], [0.0, -2.0]];
    let idioms: BTreeSet<String> = vocab[..2].iter().cloned().collect();
    let store = EmbeddingStore::new(vocab, 2, rows.concat(), &idioms).map_err(|e| e.to_string())?;
    let items = [
        EvalItem { idiom_key: "hit_home".into(), definition: "wait, hope".into() },
        EvalItem { idiom_key: "go_bananas".into(), definition: "crazy, wild".into() },
    ];
    let report = evaluate(&store, &items, false).map_err(|e| e.to_string())?;
    check(report.median_rank == 0.0, format!("all-zero fixture median {}", report.median_rank))?;
    Ok("[0]->0, [0,1,2,3]->1.5, even count -> 276.5, all-zero fixture -> 0".into())
}

/// identify, colloc (all models) and train on the bundled sample.
fn pipeline(out: &Path) -> Result<(), String> {
    let sample = sample_dir();
    let o = |name: &str| out.join(name).to_str().unwrap().to_string();
    run_cli(&["lexicon", "compile", "--input", sample.join("lexicon.tsv").to_str().unwrap(), "--mode", "extended", "--out", &o("rules.json")])?;
    run_cli(&["validate", "--input", sample.join("corpus.tsv").to_str().unwrap()])?;
    run_cli(&["identify", "--rules", &o("rules.json"), "--corpus", sample.join("corpus.tsv").to_str().unwrap(), "--out-dir", out.to_str().unwrap()])?;
    run_cli(&["colloc", "--bows", &o("idiom2bows.tsv"), "--model", "all", "--out-dir", out.to_str().unwrap()])?;
    run_cli(&["train", "--corpus", &o("idiom2lemma2pos.tsv"), "--out", &o("vectors.txt"), "--dim", "50", "--seed", "1"])?;
    Ok(())
}

const PIPELINE_FILES: [&str; 8] = [
    "idiom2sent.tsv",
    "idiom2lemma2pos.tsv",
    "idiom2bows.tsv",
    "idiom2colls_tf.tsv",
    "idiom2colls_tfidf.tsv",
    "idiom2colls_pmi.tsv",
    "vectors.txt",
    "vectors.idioms",
];

fn determinism(first: &Path) -> Outcome {
    let second = tempfile::tempdir().map_err(|e| e.to_string())?;
    pipeline(second.path())?;
    let mut bytes = 0;
    for name in PIPELINE_FILES {
        let a = std::fs::read(first.join(name)).map_err(|e| format!("{name}: {e}"))?;
        let b = std::fs::read(second.path().join(name)).map_err(|e| format!("{name}: {e}"))?;
        check(a == b, format!("{name} differs between runs"))?;
        bytes += a.len();
    }
    Ok(format!("{} files, {bytes} bytes identical across two runs", PIPELINE_FILES.len()))
}

fn http_get(addr: &str, path: &str) -> Result<String, String> {
    let mut stream = TcpStream::connect(addr).map_err(|e| e.to_string())?;
    stream.set_read_timeout(Some(Duration::from_secs(10))).map_err(|e| e.to_string())?;
    write!(stream, "GET {path} HTTP/1.1\r\nHost: {addr}\r\nConnection: close\r\n\r\n").map_err(|e| e.to_string())?;
    let mut text = String::new();
    stream.read_to_string(&mut text).map_err(|e| e.to_string())?;
    check(text.starts_with("HTTP/1.1 200"), format!("GET {path}: {}", text.lines().next().unwrap_or("")))?;
    let body = text.split_once("\r\n\r\n").map(|(_, b)| b).unwrap_or("");
    Ok(body.to_string())
}

fn end_to_end(out: &Path) -> Outcome {
    let sample = sample_dir();
    let size: u64 = ["lexicon.tsv", "corpus.tsv", "testset.tsv"]
        .iter()
        .map(|f| std::fs::metadata(sample.join(f)).map(|m| m.len()).unwrap_or(u64::MAX / 4))
        .sum();
    check(size < SAMPLE_MAX_BYTES, format!("sample is {size} bytes"))?;

    let started = Instant::now();
    pipeline(out)?;
    let o = |name: &str| out.join(name).to_str().unwrap().to_string();
    let eval = run_cli(&["eval", "--vectors", &o("vectors.txt"), "--testset", sample.join("testset.tsv").to_str().unwrap(), "--out", &o("eval.tsv")])?;
    let elapsed = started.elapsed();
    within(elapsed, PIPELINE_BUDGET)?;

    std::fs::write(
        out.join("serve.toml"),
        "bind = \"127.0.0.1:0\"\nvectors = \"vectors.txt\"\n\n[collocations]\ntf = \"idiom2colls_tf.tsv\"\ntfidf = \"idiom2colls_tfidf.tsv\"\npmi = \"idiom2colls_pmi.tsv\"\n",
    )
    .map_err(|e| e.to_string())?;
    let mut child = Command::new(env!("CARGO_BIN_EXE_idiomatch"))
        .args(["serve", "--config", &o("serve.toml")])
        .env("RUST_LOG", "warn")
        .stdout(Stdio::piped())
        .stderr(Stdio::inherit())
        .spawn()
        .map_err(|e| e.to_string())?;
    let result = (|| {
        let mut line = String::new();
        BufReader::new(child.stdout.take().unwrap()).read_line(&mut line).map_err(|e| e.to_string())?;
        let addr = line
            .trim()
            .strip_prefix("listening on http://")
            .ok_or_else(|| format!("unexpected serve output {line:?}"))?
            .to_string();
        let health: serde_json::Value =
            serde_json::from_str(&http_get(&addr, "/api/health")?).map_err(|e| e.to_string())?;
        let idioms = std::fs::read_to_string(out.join("vectors.idioms")).map_err(|e| e.to_string())?.lines().count();
        let header = std::fs::read_to_string(out.join("vectors.txt")).map_err(|e| e.to_string())?;
        let vocab: usize = header.split_whitespace().next().unwrap().parse().unwrap();
        check(health["status"] == "ok", format!("health {health}"))?;
        check(health["idioms"] == idioms, format!("health idioms {} vs {idioms} in artifacts", health["idioms"]))?;
        check(health["vocab"] == vocab, format!("health vocab {} vs {vocab} in artifacts", health["vocab"]))?;
        let answer: serde_json::Value = serde_json::from_str(&http_get(&addr, "/api/idiomify?phrase=dilemma%20trap&k=3")?)
            .map_err(|e| e.to_string())?;
        check(answer["results"].as_array().is_some_and(|r| r.len() == 3), format!("idiomify {answer}"))?;
        Ok::<_, String>((idioms, vocab))
    })();
    let _ = child.kill();
    let _ = child.wait();
    let (idioms, vocab) = result?;
    Ok(format!(
        "sample {size} bytes, pipeline {elapsed:.1?}, {}; health reports {idioms} idioms and {vocab} tokens",
        eval.trim()
    ))
}

fn run(name: &str, f: impl FnOnce() -> Outcome) -> bool {
    let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
        Err(p
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "panicked".into()))
    });
    match outcome {
        Ok(detail) => {
            println!("PASS  {name}: {detail}");
            true
        }
        Err(why) => {
            println!("FAIL  {name}: {why}");
            false
        }
    }
}

fn main() {
    let pipeline_dir = tempfile::tempdir().expect("temp dir");
    let results = [
        run("matcher positive suite", matcher_positive),
        run("matcher extended suite", matcher_extended),
        run("formula oracles", formula_oracles),
        run("collocation model discrimination", discrimination),
        run("brute-force equivalence", brute_force_equivalence),
        run("embedding descent and planted retrieval", embedding),
        run("self-retrieval", self_retrieval),
        run("median-rank harness", median_harness),
        run("end-to-end pipeline and service", || end_to_end(pipeline_dir.path())),
        run("determinism", || determinism(pipeline_dir.path())),
    ];
    let passed = results.iter().filter(|&&ok| ok).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}
