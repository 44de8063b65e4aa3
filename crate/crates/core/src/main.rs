use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cmlid::classify::{self, accuracy, ClassifierKind, ClassifierSpec, TrainedModel};
use cmlid::corpus::{
    build_labeled_corpus, default_stopwords, load_annotated_tsv, load_raw_tweets, load_stopwords, preprocess_tweet,
    LabelPolicy, LabeledWord,
};
use cmlid::eval::grid::{run_grid, GridConfig};
use cmlid::eval::report::{emit_curves_svg, emit_results_csv, write_text};
use cmlid::eval::split::{SplitKind, SplitPlan};
use cmlid::ngram::{build_vocabulary, featurize, NGramSpec, Vocabulary};
use cmlid::select::chi2::{chi_square_scores, select_top_k_with};
use cmlid::select::rfe::recursive_eliminate_cv_with;
use cmlid::select::{
    forward_select, parse_selection_text, recursive_eliminate, SelectionResult, SelectorConfig, SelectorMethod,
};
use cmlid::synth::{generate, SynthConfig};

type DataError = Box<dyn std::error::Error>;

#[derive(Parser)]
#[command(name = "cmlid", version, about = "Word-level Hindi-English language identification")]
#[command(arg_required_else_help = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Clean raw tweets into lowercase word tokens, one tweet per line.
    Preprocess(PreprocessArgs),
    /// Token, type and per-tag counts of an annotated corpus.
    Stats(StatsArgs),
    /// Run a feature selector and write the chosen n-grams.
    Select(SelectArgs),
    /// Train a classifier and write a model file.
    Train(TrainArgs),
    /// Accuracy of a model file on an annotated corpus.
    Evaluate(EvaluateArgs),
    /// Full selector x classifier x profile x k grid to CSV and SVG.
    Experiment(ExperimentArgs),
    /// Write the seeded synthetic corpus and its manifest.
    Synth(SynthArgs),
}

#[derive(Args)]
struct PreprocessArgs {
    #[arg(long)]
    input: PathBuf,
    /// Input is JSON lines with `id` and `text` fields.
    #[arg(long)]
    jsonl: bool,
    /// One stopword per line; the bundled English list by default.
    #[arg(long)]
    stopwords: Option<PathBuf>,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
struct CorpusArgs {
    /// Annotated `word<TAB>tag` file.
    #[arg(long)]
    corpus: PathBuf,
    /// How to resolve a word seen with several tags: majority or strict.
    #[arg(long, default_value = "majority")]
    policy: String,
}

#[derive(Args)]
struct StatsArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    /// Also write the report, with a header, to this file.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ProfileArgs {
    /// n-gram orders, e.g. `2`, `3` or `2+3`; `-padded` adds word boundaries.
    #[arg(long, default_value = "2")]
    profile: String,
    /// Drop n-grams seen in fewer words than this.
    #[arg(long, default_value_t = 1)]
    min_count: usize,
}

#[derive(Args)]
struct ClassifierArgs {
    /// nb, lr or tree.
    #[arg(long, default_value = "nb")]
    classifier: String,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, default_value_t = 1e-4)]
    l2: f64,
    #[arg(long, default_value_t = 0.1)]
    learning_rate: f64,
    #[arg(long, default_value_t = 500)]
    max_iter: usize,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long)]
    max_depth: Option<usize>,
    #[arg(long, default_value_t = 1)]
    min_leaf: usize,
}

impl ClassifierArgs {
    fn spec(&self, seed: u64) -> Result<ClassifierSpec, DataError> {
        let kind: ClassifierKind = self.classifier.parse()?;
        let mut spec = ClassifierSpec::new(kind);
        spec.nb_alpha = self.alpha;
        spec.lr_l2 = self.l2;
        spec.lr_lr = self.learning_rate;
        spec.lr_max_iter = self.max_iter;
        spec.lr_tol = self.tol;
        spec.tree_max_depth = self.max_depth;
        spec.tree_min_leaf = self.min_leaf;
        spec.seed = seed;
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Args)]
struct SelectArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    #[command(flatten)]
    profile: ProfileArgs,
    /// topk, forward or rfe.
    #[arg(long, default_value = "topk")]
    method: String,
    #[arg(long)]
    k: usize,
    /// Forward selection candidate pool: a number or `all`; 10k by default.
    #[arg(long)]
    pool: Option<String>,
    #[arg(long, default_value_t = 1)]
    rfe_step: usize,
    #[arg(long, default_value_t = 3)]
    folds: usize,
    /// Classifier scored by forward selection.
    #[arg(long, default_value = "nb")]
    wrapper: String,
    /// With rfe: choose k among these sizes by cross-validation.
    #[arg(long, value_delimiter = ',')]
    cv_k: Vec<usize>,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    #[command(flatten)]
    profile: ProfileArgs,
    #[command(flatten)]
    classifier: ClassifierArgs,
    /// Restrict features to a file written by `select`.
    #[arg(long)]
    selection: Option<PathBuf>,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    model: PathBuf,
    #[command(flatten)]
    corpus: CorpusArgs,
}

#[derive(Args)]
struct ExperimentArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    #[arg(long, value_delimiter = ',', default_value = "2,3")]
    profiles: Vec<String>,
    #[arg(long, value_delimiter = ',', default_value = "50,150,250,350,450,550")]
    k: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "topk,forward,rfe")]
    selectors: Vec<String>,
    #[arg(long, value_delimiter = ',', default_value = "nb,lr,tree")]
    classifiers: Vec<String>,
    #[arg(long, default_value_t = 0.8)]
    train_fraction: f64,
    #[arg(long, default_value_t = 1)]
    min_count: usize,
    /// Forward selection candidate pool; 10 times the largest k by default.
    #[arg(long)]
    forward_pool: Option<usize>,
    #[arg(long, default_value_t = 50)]
    rfe_step: usize,
    #[arg(long, default_value_t = 3)]
    folds: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Worker threads; 1 runs serially.
    #[arg(long)]
    threads: Option<usize>,
    /// Fill the wall_time_s column (makes the CSV run-dependent).
    #[arg(long)]
    record_timing: bool,
    #[arg(long)]
    csv: PathBuf,
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = cmlid::synth::DEFAULT_SEED)]
    seed: u64,
    #[arg(long, default_value_t = 1000)]
    english: usize,
    #[arg(long, default_value_t = 600)]
    hindi: usize,
    #[arg(long, default_value_t = 400)]
    named_entities: usize,
    #[arg(long)]
    output: PathBuf,
    #[arg(long)]
    manifest: Option<PathBuf>,
}

fn load_corpus(args: &CorpusArgs) -> Result<(Vec<LabeledWord>, cmlid::corpus::CorpusStats), DataError> {
    let policy = match args.policy.as_str() {
        "majority" => LabelPolicy::Majority,
        "strict" => LabelPolicy::Strict,
        other => return Err(format!("unknown label policy `{other}`").into()),
    };
    let words = load_annotated_tsv(&args.corpus)?;
    Ok(build_labeled_corpus(&words, policy)?)
}

fn write(path: &Path, text: &str) -> Result<(), DataError> {
    Ok(write_text(path, text)?)
}

fn preprocess(args: &PreprocessArgs) -> Result<(), DataError> {
    let stopwords = match &args.stopwords {
        Some(p) => load_stopwords(p)?,
        None => default_stopwords(),
    };
    let (tweets, skipped) = load_raw_tweets(&args.input, args.jsonl)?;
    let mut out = format!(
        "# preprocess input={} format={} stopwords={} tweets={} skipped={}\n",
        args.input.display(),
        if args.jsonl { "jsonl" } else { "lines" },
        args.stopwords.as_ref().map_or("default".to_string(), |p| p.display().to_string()),
        tweets.len(),
        skipped
    );
    for t in &tweets {
        let _ = writeln!(out, "{}\t{}", t.id, preprocess_tweet(t, &stopwords).join(" "));
    }
    write(&args.output, &out)
}

fn stats(args: &StatsArgs) -> Result<(), DataError> {
    let (_, stats) = load_corpus(&args.corpus)?;
    let report = stats.report();
    print!("{report}");
    if let Some(path) = &args.output {
        let header = format!(
            "# stats corpus={} policy={}\n",
            args.corpus.corpus.display(),
            args.corpus.policy
        );
        write(path, &(header + &report))?;
    }
    Ok(())
}

fn featurized(corpus: &CorpusArgs, profile: &ProfileArgs) -> Result<(Vocabulary, cmlid::FeatureMatrix), DataError> {
    let (words, _) = load_corpus(corpus)?;
    let spec: NGramSpec = profile.profile.parse()?;
    let vocab = build_vocabulary(&words, &spec, profile.min_count)?;
    let x = featurize(&words, &vocab);
    Ok((vocab, x))
}

fn select(args: &SelectArgs) -> Result<(), DataError> {
    let (vocab, x) = featurized(&args.corpus, &args.profile)?;
    let method: SelectorMethod = args.method.parse()?;
    let mut config = SelectorConfig::new(method, args.k);
    config.seed = args.seed;
    config.rfe_step = args.rfe_step;
    config.objective_folds = args.folds;
    if let Some(pool) = &args.pool {
        config.candidate_pool = if pool == "all" {
            None
        } else {
            Some(pool.parse().map_err(|_| format!("bad pool `{pool}`"))?)
        };
    }
    let wrapper = ClassifierSpec::new(args.wrapper.parse()?);
    let result: SelectionResult = match method {
        SelectorMethod::TopK => select_top_k_with(&chi_square_scores(&x)?, config)?,
        SelectorMethod::ForwardSelection => forward_select(&x, &wrapper, &config)?,
        SelectorMethod::RecursiveElimination if !args.cv_k.is_empty() => {
            let (best, result) = recursive_eliminate_cv_with(&x, &config, &ClassifierSpec::logistic_regression(), &args.cv_k)?;
            log::info!("cross-validated size: {best}");
            result
        }
        SelectorMethod::RecursiveElimination => recursive_eliminate(&x, &config)?,
    };
    let header = format!(
        "# select corpus={} profile={} min_count={} wrapper={} cv_k={:?}\n",
        args.corpus.corpus.display(),
        vocab.spec(),
        args.profile.min_count,
        wrapper.describe(),
        args.cv_k
    );
    write(&args.output, &(header + &result.to_text(Some(&vocab))))
}

fn train(args: &TrainArgs) -> Result<(), DataError> {
    let (vocab, x) = featurized(&args.corpus, &args.profile)?;
    let spec = args.classifier.spec(args.seed)?;
    let mut keep: Vec<usize> = (0..vocab.len()).collect();
    if let Some(path) = &args.selection {
        let text = fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        let mut ids = BTreeSet::new();
        for (_, gram, _) in parse_selection_text(&text)? {
            let id = vocab
                .id(&gram)
                .ok_or_else(|| format!("selected n-gram `{gram}` is not in this corpus's vocabulary"))?;
            ids.insert(id);
        }
        keep = ids.into_iter().collect();
    }
    let projected = x.project_columns(&keep)?;
    let model = classify::train(&projected, &spec)?;
    let mut out = format!(
        "# train corpus={} profile={} min_count={} classifier={} seed={} selection={}\n",
        args.corpus.corpus.display(),
        vocab.spec(),
        args.profile.min_count,
        spec.describe(),
        args.seed,
        args.selection.as_ref().map_or("none".to_string(), |p| p.display().to_string())
    );
    let _ = writeln!(out, "profile {}", vocab.spec());
    let _ = writeln!(out, "grams {}", keep.len());
    for &f in &keep {
        let _ = writeln!(out, "{}", vocab.gram(f).expect("kept id is in range"));
    }
    out.push_str(&model.to_text());
    write(&args.output, &out)
}

/// Split a model file into its vocabulary and the classifier text.
fn read_model(path: &Path) -> Result<(Vocabulary, TrainedModel), DataError> {
    let text = fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let bad = |what: &str| format!("{}: {what}", path.display());
    let profile: NGramSpec = lines
        .next()
        .and_then(|l| l.strip_prefix("profile "))
        .ok_or_else(|| bad("missing profile line"))?
        .parse()?;
    let n: usize = lines
        .next()
        .and_then(|l| l.strip_prefix("grams "))
        .and_then(|n| n.parse().ok())
        .ok_or_else(|| bad("missing grams line"))?;
    let grams: Vec<String> = lines.by_ref().take(n).map(str::to_string).collect();
    if grams.len() != n {
        return Err(bad("truncated gram list").into());
    }
    let vocab = Vocabulary::from_grams(profile, grams.iter().cloned());
    if vocab.grams() != grams.as_slice() {
        return Err(bad("gram list is not in vocabulary order").into());
    }
    let rest: String = lines.map(|l| format!("{l}\n")).collect();
    let model = TrainedModel::from_text(&rest)?;
    Ok((vocab, model))
}

fn evaluate(args: &EvaluateArgs) -> Result<(), DataError> {
    let (vocab, model) = read_model(&args.model)?;
    let (words, _) = load_corpus(&args.corpus)?;
    let x = featurize(&words, &vocab);
    let predicted = model.predict(&x)?;
    let acc = accuracy(&predicted, x.labels())?;
    println!("words={}", x.n_rows());
    println!("accuracy={acc}");
    Ok(())
}

fn experiment(args: &ExperimentArgs) -> Result<(), DataError> {
    let (words, _) = load_corpus(&args.corpus)?;
    let mut config = GridConfig::new();
    config.profiles = args.profiles.iter().map(|p| p.parse()).collect::<Result<_, _>>()?;
    config.k_values = args.k.clone();
    config.selectors = args.selectors.iter().map(|s| s.parse()).collect::<Result<_, _>>()?;
    config.classifiers = args
        .classifiers
        .iter()
        .map(|c| c.parse().map(ClassifierSpec::new))
        .collect::<Result<_, _>>()?;
    config.plan = SplitPlan {
        kind: SplitKind::Holdout {
            train_fraction: args.train_fraction,
        },
        stratified: true,
        seed: args.seed,
    };
    config.seed = args.seed;
    config.min_count = args.min_count;
    config.forward_pool = args.forward_pool;
    config.rfe_step = args.rfe_step;
    config.objective_folds = args.folds;
    config.threads = args.threads;
    config.record_timing = args.record_timing;
    let out = run_grid(&words, &config)?;
    let failed = out.records.iter().filter(|r| r.error.is_some()).count();
    if failed > 0 {
        log::warn!("{failed} of {} cells failed", out.records.len());
    }
    let preamble = vec![
        format!("experiment corpus={}", args.corpus.corpus.display()),
        format!("config {}", config.describe()),
    ];
    write(&args.csv, &emit_results_csv(&out.records, &preamble)?)?;
    if let Some(svg) = &args.svg {
        write(svg, &emit_curves_svg(&out.records, &preamble)?)?;
    }
    Ok(())
}

fn synth(args: &SynthArgs) -> Result<(), DataError> {
    let config = SynthConfig {
        seed: args.seed,
        english: args.english,
        hindi: args.hindi,
        named_entities: args.named_entities,
        ..SynthConfig::default()
    };
    let corpus = generate(&config);
    write(&args.output, &corpus.to_tsv())?;
    if let Some(path) = &args.manifest {
        write(path, &corpus.manifest.to_text())?;
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    let result = match &cli.command {
        Command::Preprocess(a) => preprocess(a),
        Command::Stats(a) => stats(a),
        Command::Select(a) => select(a),
        Command::Train(a) => train(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Experiment(a) => experiment(a),
        Command::Synth(a) => synth(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
