use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use idiomatch_core::artifacts::{
    read_bows, read_idiom2lemma2pos, write_bows, write_idiom2lemma2pos, write_idiom2sent, IDIOM2BOWS,
    IDIOM2LEMMA2POS, IDIOM2SENT,
};
use idiomatch_core::colloc::{fit, CollocationTable, Model};
use idiomatch_core::corpus::{read_annotated, validate, write_annotated, Annotator, DEFAULT_DOC_ID};
use idiomatch_core::embed::{
    nearest_idioms, read_vectors, train_with_progress, training_corpus, write_vectors, TrainingConfig, TrainingMode,
};
use idiomatch_core::idiomify::{evaluate, read_testset, Idiomify};
use idiomatch_core::lexicon::{load_lexicon, CompileMode, RuleConfig, RuleSet, DEFAULT_MAX_FILL, DEFAULT_MIN_WORDS};
use idiomatch_core::matcher::{identify, IdentifyOptions, Matcher, DEFAULT_WINDOW};
use idiomatch_core::sample::{generate, SampleConfig};
use idiomatch_service::ApiConfig;

#[derive(Parser)]
#[command(name = "idiomatch", version, about = "Idiom identification, collocations and reverse-dictionary search")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Idiom lexicon tools.
    #[command(subcommand)]
    Lexicon(LexiconCommand),
    /// Tokenize, tag and lemmatize raw text with the built-in annotator.
    Annotate(AnnotateArgs),
    /// Check an annotated corpus and print a summary.
    Validate(ValidateArgs),
    /// Find idioms in an annotated corpus and write the idiom2* tables.
    Identify(IdentifyArgs),
    /// Score collocations from idiom2bows.tsv.
    Colloc(CollocArgs),
    /// Train skip-gram embeddings on idiom2lemma2pos.tsv.
    Train(TrainArgs),
    /// Nearest idioms to an idiom.
    Neighbors(NeighborsArgs),
    /// Suggest idioms for a phrase.
    Idiomify(IdiomifyArgs),
    /// Median-rank evaluation over a definition test set.
    Eval(EvalArgs),
    /// Run the HTTP API.
    Serve(ServeArgs),
    /// Write the bundled synthetic sample (lexicon, corpus, test set).
    Sample(SampleArgs),
}

#[derive(Subcommand)]
enum LexiconCommand {
    /// Compile a lexicon TSV into JSON matching rules.
    Compile(CompileArgs),
}

#[derive(Args)]
struct CompileArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "baseline")]
    mode: String,
    #[arg(long, default_value_t = DEFAULT_MIN_WORDS)]
    min_words: usize,
    /// Slop budget for extended rules (default: word count + 1).
    #[arg(long)]
    slop: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_MAX_FILL)]
    max_fill: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct AnnotateArgs {
    /// Raw text; `-` reads stdin.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value = DEFAULT_DOC_ID)]
    doc_id: String,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long)]
    input: PathBuf,
}

#[derive(Args)]
struct IdentifyArgs {
    #[arg(long)]
    rules: PathBuf,
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long, default_value_t = DEFAULT_WINDOW)]
    window: usize,
    #[arg(long)]
    strip_stopwords: bool,
}

#[derive(Args)]
struct CollocArgs {
    #[arg(long)]
    bows: PathBuf,
    /// tf, tfidf, pmi or all.
    #[arg(long, default_value = "pmi")]
    model: String,
    #[arg(long, default_value_t = 1)]
    min_count: u64,
    /// Output file for a single model.
    #[arg(long, conflicts_with = "out_dir")]
    out: Option<PathBuf>,
    /// Output directory; files are named idiom2colls_<model>.tsv.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 80)]
    epochs: usize,
    #[arg(long, default_value_t = 200)]
    dim: usize,
    #[arg(long, default_value_t = 8)]
    window: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    min_count: u64,
    #[arg(long, default_value_t = 5)]
    negative: usize,
    #[arg(long, default_value_t = 0.025)]
    learning_rate: f32,
    /// Frequency subsampling threshold, e.g. 1e-3.
    #[arg(long)]
    subsample: Option<f64>,
    /// Multi-threaded lock-free training (not reproducible).
    #[arg(long)]
    parallel: bool,
    /// Write the per-epoch loss trace here.
    #[arg(long)]
    loss_out: Option<PathBuf>,
}

#[derive(Args)]
struct NeighborsArgs {
    #[arg(long)]
    vectors: PathBuf,
    #[arg(long)]
    idiom: String,
    #[arg(short, default_value_t = 5)]
    k: usize,
}

#[derive(Args)]
struct IdiomifyArgs {
    #[arg(long)]
    vectors: PathBuf,
    /// Collocation table for `--model`.
    #[arg(long)]
    colls: Option<PathBuf>,
    #[arg(long)]
    phrase: String,
    #[arg(short, default_value_t = 5)]
    k: usize,
    #[arg(long, default_value = "pmi")]
    model: String,
    #[arg(long)]
    strip_stopwords: bool,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    vectors: PathBuf,
    #[arg(long)]
    testset: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    strip_stopwords: bool,
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the configured bind address.
    #[arg(long)]
    bind: Option<String>,
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long, default_value_t = SampleConfig::default().seed)]
    seed: u64,
}

fn open(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(
        File::open(path).with_context(|| format!("cannot open {}", path.display()))?,
    ))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("cannot create {}", path.display()))?,
    ))
}

fn lexicon_compile(a: CompileArgs) -> Result<()> {
    let mode: CompileMode = a.mode.parse()?;
    let lexicon = load_lexicon(open(&a.input)?, a.min_words)?;
    let config = RuleConfig {
        slop: a.slop,
        max_fill: a.max_fill,
    };
    let rules = lexicon.compile(mode, &config)?;
    std::fs::write(&a.out, rules.to_json()?)?;
    log::info!("compiled {} {:?} rules to {}", rules.len(), mode, a.out.display());
    Ok(())
}

fn annotate(a: AnnotateArgs) -> Result<()> {
    let mut text = String::new();
    if a.input == Path::new("-") {
        io::stdin().read_to_string(&mut text)?;
    } else {
        open(&a.input)?.read_to_string(&mut text)?;
    }
    let sentences = Annotator.annotate_document(&text, &a.doc_id);
    let mut out = create(&a.out)?;
    write_annotated(&mut out, &sentences)?;
    out.flush()?;
    log::info!("annotated {} sentences", sentences.len());
    Ok(())
}

fn validate_cmd(a: ValidateArgs) -> Result<()> {
    let summary = validate(open(&a.input)?)?;
    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(())
}

fn identify_cmd(a: IdentifyArgs) -> Result<()> {
    let rules = RuleSet::from_json(&std::fs::read_to_string(&a.rules)?)?;
    let sentences = read_annotated(open(&a.corpus)?)?;
    let options = IdentifyOptions {
        window: a.window,
        strip_stopwords: a.strip_stopwords,
    };
    let found = identify(&sentences, &Matcher::new(rules), options)?;
    std::fs::create_dir_all(&a.out_dir)?;
    let mut out = create(&a.out_dir.join(IDIOM2SENT))?;
    write_idiom2sent(&mut out, &found.occurrences)?;
    out.flush()?;
    let mut out = create(&a.out_dir.join(IDIOM2LEMMA2POS))?;
    write_idiom2lemma2pos(&mut out, &found.occurrences)?;
    out.flush()?;
    let mut out = create(&a.out_dir.join(IDIOM2BOWS))?;
    write_bows(&mut out, &found.bows)?;
    out.flush()?;
    log::info!(
        "{} sentences, {} idiom occurrences of {} idioms",
        sentences.len(),
        found.occurrences.len(),
        found.bows.len()
    );
    Ok(())
}

fn colloc(a: CollocArgs) -> Result<()> {
    let bows = read_bows(open(&a.bows)?)?;
    let models: Vec<Model> = if a.model == "all" {
        Model::ALL.to_vec()
    } else {
        vec![a.model.parse()?]
    };
    for model in models {
        let path = match (&a.out, &a.out_dir) {
            (Some(out), None) if a.model != "all" => out.clone(),
            (None, Some(dir)) => {
                std::fs::create_dir_all(dir)?;
                dir.join(model.file_name())
            }
            _ => bail!("give --out for one model or --out-dir"),
        };
        let table = fit(model, &bows, a.min_count)?;
        let mut out = create(&path)?;
        table.write_tsv(&mut out)?;
        out.flush()?;
        log::info!("{model}: {} scored pairs -> {}", table.scores().len(), path.display());
    }
    Ok(())
}

fn train_cmd(a: TrainArgs) -> Result<()> {
    let rows = read_idiom2lemma2pos(open(&a.corpus)?)?;
    let corpus = training_corpus(&rows);
    let keys = rows.iter().map(|r| r.idiom_key.clone()).collect();
    let config = TrainingConfig {
        vector_size: a.dim,
        max_epochs: a.epochs,
        window: a.window,
        min_count: a.min_count,
        learning_rate: a.learning_rate,
        negative_samples: a.negative,
        seed: a.seed,
        subsample: a.subsample,
        mode: if a.parallel { TrainingMode::Parallel } else { TrainingMode::Deterministic },
        ..TrainingConfig::default()
    };
    let started = Instant::now();
    let (store, trace) = train_with_progress(&corpus, &keys, &config, |epoch, loss| {
        log::info!("epoch {epoch}: loss {loss:.3}");
    })?;
    write_vectors(&a.out, &store)?;
    if let Some(path) = &a.loss_out {
        let mut out = create(path)?;
        for (epoch, loss) in trace.iter().enumerate() {
            writeln!(out, "{epoch}\t{loss:.6}")?;
        }
        out.flush()?;
    }
    log::info!(
        "{} tokens ({} idioms), {} epochs in {:.1?}",
        store.vocab_len(),
        store.idiom_count(),
        trace.len(),
        started.elapsed()
    );
    Ok(())
}

fn neighbors(a: NeighborsArgs) -> Result<()> {
    let store = read_vectors(&a.vectors)?;
    if !store.is_idiom(&a.idiom) {
        bail!("unknown idiom {:?}", a.idiom);
    }
    let query = store.vector_of(&a.idiom).expect("idiom has a vector");
    for (idiom, sim) in nearest_idioms(&store, &query, a.k)? {
        println!("{idiom}\t{sim:.4}");
    }
    Ok(())
}

fn idiomify_cmd(a: IdiomifyArgs) -> Result<()> {
    let model: Model = a.model.parse()?;
    let mut engine = Idiomify::new(read_vectors(&a.vectors)?, model).strip_stopwords(a.strip_stopwords);
    if let Some(path) = &a.colls {
        engine = engine.with_table(CollocationTable::read_tsv(open(path)?, model)?);
    }
    let response = engine.idiomify(&a.phrase, a.k, None)?;
    println!("{}", serde_json::to_string_pretty(&response)?);
    Ok(())
}

fn eval(a: EvalArgs) -> Result<()> {
    let store = read_vectors(&a.vectors)?;
    let items = read_testset(open(&a.testset)?)?;
    let report = evaluate(&store, &items, a.strip_stopwords)?;
    let mut out = create(&a.out)?;
    report.write_tsv(&mut out)?;
    out.flush()?;
    println!(
        "items {}  median rank {}  variance (population) {:.4}",
        report.ranks.len(),
        report.median_rank,
        report.variance_population
    );
    Ok(())
}

fn serve(a: ServeArgs) -> Result<()> {
    let mut config = ApiConfig::from_file(&a.config)?;
    config.apply_env(std::env::vars())?;
    if let Some(bind) = a.bind {
        config.bind = bind;
    }
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(idiomatch_service::run(config, |addr| {
        println!("listening on http://{addr}");
        let _ = io::stdout().flush();
    }))?;
    Ok(())
}

fn sample(a: SampleArgs) -> Result<()> {
    let sample = generate(&SampleConfig {
        seed: a.seed,
        ..SampleConfig::default()
    });
    sample.write_to(&a.out_dir)?;
    log::info!(
        "{} sentences, {} tokens, {} test items -> {}",
        sample.corpus.len(),
        sample.token_count(),
        sample.testset.len(),
        a.out_dir.display()
    );
    Ok(())
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match Cli::parse().command {
        Command::Lexicon(LexiconCommand::Compile(a)) => lexicon_compile(a),
        Command::Annotate(a) => annotate(a),
        Command::Validate(a) => validate_cmd(a),
        Command::Identify(a) => identify_cmd(a),
        Command::Colloc(a) => colloc(a),
        Command::Train(a) => train_cmd(a),
        Command::Neighbors(a) => neighbors(a),
        Command::Idiomify(a) => idiomify_cmd(a),
        Command::Eval(a) => eval(a),
        Command::Serve(a) => serve(a),
        Command::Sample(a) => sample(a),
    }
}
