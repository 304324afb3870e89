//! `burstwatch`: simulate streams, detect lifecycles, featurize, train,
//! predict and evaluate, one artifact directory at a time.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use burstwatch::evaluation::{check_thresholds, staged_evaluation, Thresholds};
use burstwatch::ingest::Lexicons;
use burstwatch::lifecycle::EndOfStream;
use burstwatch::pipeline::{self, Dataset, RunConfig};
use burstwatch::storage::{ArtifactKind, Layout, Store};
use burstwatch::synth::{generate, GeneratedStream, StreamScenario};

#[global_allocator]
static GLOBAL: mimalloc::MiMalloc = mimalloc::MiMalloc;

#[derive(Debug, Parser)]
#[command(name = "burstwatch", version, about = "Hashtag burst prediction from tweet streams")]
struct Cli {
    #[command(flatten)]
    opts: Opts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Opts {
    /// Artifact root.
    #[arg(long, global = true, env = "BURSTWATCH_DATA_DIR", default_value = "burstwatch-data")]
    out: PathBuf,
    /// JSON run configuration; flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Trigger level: tweets per sliding window.
    #[arg(long, global = true)]
    delta: Option<u32>,
    #[arg(long, global = true)]
    window_minutes: Option<u32>,
    /// Prediction stages in minutes after the trigger, e.g. 5,15,30.
    #[arg(long, global = true, value_delimiter = ',')]
    stages: Option<Vec<u32>>,
    /// F-beta objective of the classifier; repeat or separate with commas.
    #[arg(long, global = true, value_delimiter = ',')]
    beta: Vec<f64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Base scenario for `simulate`; the default benchmark when unset.
    #[arg(long, global = true)]
    scenario: Option<PathBuf>,
    #[arg(long, global = true)]
    sentiment_lexicon: Option<PathBuf>,
    #[arg(long, global = true)]
    emoticon_lexicon: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct DatasetArg {
    /// historic, train or test; every applicable dataset when unset.
    #[arg(long, value_parser = parse_dataset)]
    dataset: Option<Dataset>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate streams and truth files.
    Simulate(DatasetArg),
    /// Run the lifecycle engine over streams: event logs and snapshots.
    Detect(DatasetArg),
    /// Feature matrices for the training and test streams.
    Featurize(DatasetArg),
    /// Prototype index and top-gram tables from the historic stream.
    BuildIndex,
    /// Fit classifiers and regressors on the training features.
    Train,
    /// Apply every model to a stream's features (test by default).
    Predict(DatasetArg),
    /// Staged evaluation of the test predictions.
    Evaluate {
        #[command(flatten)]
        dataset: DatasetArg,
        /// Fail unless every F1 classifier reaches this F1 at the first stage.
        #[arg(long)]
        min_f1: Option<f64>,
        /// Fail unless models beat their baselines at every stage.
        #[arg(long)]
        require_baselines: bool,
    },
    /// Lifecycle statistics, class balance and truth agreement.
    Stats(DatasetArg),
}

fn parse_dataset(s: &str) -> Result<Dataset, String> {
    Dataset::parse(s).ok_or_else(|| format!("unknown dataset '{s}' (historic, train, test)"))
}

fn run_config(o: &Opts) -> Result<RunConfig> {
    let mut cfg = match &o.config {
        Some(p) => {
            let raw = std::fs::read(p).with_context(|| format!("reading {}", p.display()))?;
            serde_json::from_slice(&raw).with_context(|| format!("parsing {}", p.display()))?
        }
        None => RunConfig::default(),
    };
    if let Some(d) = o.delta {
        cfg.delta = d;
    }
    if let Some(w) = o.window_minutes {
        cfg.window_minutes = w;
    }
    if let Some(s) = &o.stages {
        cfg.stages = s.clone();
    }
    if !o.beta.is_empty() {
        cfg.betas = o.beta.clone();
    }
    if let Some(s) = o.seed {
        cfg.seed = s;
    }
    for (flag, field) in [
        (&o.scenario, &mut cfg.scenario),
        (&o.sentiment_lexicon, &mut cfg.sentiment_lexicon),
        (&o.emoticon_lexicon, &mut cfg.emoticon_lexicon),
    ] {
        if flag.is_some() {
            field.clone_from(flag);
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn datasets(arg: &DatasetArg, default: &[Dataset]) -> Vec<Dataset> {
    arg.dataset.map_or_else(|| default.to_vec(), |d| vec![d])
}

fn lexicons(cfg: &RunConfig) -> Result<Lexicons> {
    Ok(Lexicons::load(cfg.sentiment_lexicon.as_deref(), cfg.emoticon_lexicon.as_deref())?)
}

fn base_scenario(path: Option<&Path>) -> Result<StreamScenario> {
    match path {
        Some(p) => {
            let raw = std::fs::read(p).with_context(|| format!("reading scenario {}", p.display()))?;
            Ok(serde_json::from_slice(&raw).with_context(|| format!("parsing scenario {}", p.display()))?)
        }
        None => Ok(StreamScenario::benchmark(0)),
    }
}

fn simulate(store: &Store, cfg: &RunConfig, which: &[Dataset]) -> Result<()> {
    let base = base_scenario(cfg.scenario.as_deref())?;
    let results: Vec<Result<(Dataset, GeneratedStream)>> = std::thread::scope(|s| {
        let handles: Vec<_> = which
            .iter()
            .map(|&d| {
                let sc = cfg.scenario_for(d, &base);
                s.spawn(move || -> Result<(Dataset, GeneratedStream)> {
                    sc.validate()?;
                    store.save_scenario(d, &sc)?;
                    let mut generated = None;
                    store.save_with(ArtifactKind::Stream, &Layout::stream(d), |w| -> Result<()> {
                        generated = Some(generate(&sc, w)?);
                        Ok(())
                    })?;
                    let g = generated.expect("generator ran");
                    store.save_truth(d, &g.truth)?;
                    Ok((d, g))
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("simulation thread panicked")).collect()
    });
    for r in results {
        let (d, g) = r?;
        let bursts = g.truth.iter().filter(|t| t.burst_min.is_some()).count();
        println!(
            "{}: {} tweets, {} hashtags, {} triggered, {} bursting",
            d.name(),
            g.tweets,
            g.hashtags,
            g.truth.len(),
            bursts
        );
    }
    Ok(())
}

fn detect(store: &Store, cfg: &RunConfig, which: &[Dataset]) -> Result<()> {
    let lex = lexicons(cfg)?;
    for &d in which {
        let reader = store.open_verified(ArtifactKind::Stream, &Layout::stream(d))?;
        let det = pipeline::detect(reader, &lex, cfg.engine(), EndOfStream::Drain)?;
        store.save_events(d, &det.output.events)?;
        store.save_snapshots(d, &det.output.snapshots)?;
        println!(
            "{}: {} tweets, {} events, {} snapshots, {} skipped lines",
            d.name(),
            det.output.tweets,
            det.output.events.len(),
            det.output.snapshots.len(),
            det.skipped
        );
    }
    Ok(())
}

fn build_index(store: &Store, cfg: &RunConfig) -> Result<pipeline::HistoricTables> {
    let h = Dataset::Historic;
    let tables = pipeline::build_tables(&store.load_snapshots(h)?, &store.load_events(h)?, &cfg.stages, cfg.sax)?;
    store.save_tables(&tables)?;
    println!("historic tables: {} stages", tables.top_grams.stages.len());
    Ok(tables)
}

fn featurize(store: &Store, cfg: &RunConfig, which: &[Dataset]) -> Result<()> {
    let tables = if store.exists(&Layout::tables()) {
        store.load_tables()?
    } else {
        log::info!("no historic tables yet; building them from the historic stream");
        build_index(store, cfg)?
    };
    for &d in which {
        let m = pipeline::featurize(&store.load_snapshots(d)?, &store.load_events(d)?, &tables)?;
        store.save_features(d, &m)?;
        let sizes: Vec<String> = m.iter().map(|x| format!("{} {}", x.task.name(), x.rows.len())).collect();
        println!("{}: {} rows", d.name(), sizes.join(", "));
    }
    Ok(())
}

fn train(store: &Store, cfg: &RunConfig) -> Result<()> {
    let models = pipeline::train(&store.load_features(Dataset::Train)?, cfg)?;
    if models.is_empty() {
        bail!("no stage had enough training data for any model");
    }
    store.save_models(&models)?;
    println!("{} models", models.len());
    Ok(())
}

fn predict(store: &Store, which: &[Dataset]) -> Result<()> {
    let models = store.load_models()?;
    for &d in which {
        let preds = pipeline::predict(&models, &store.load_features(d)?)?;
        store.save_predictions(d, &preds)?;
        println!("{}: {} predictions", d.name(), preds.len());
    }
    Ok(())
}

fn evaluate(store: &Store, cfg: &RunConfig, d: Dataset, thresholds: &Thresholds) -> Result<bool> {
    let models = store.load_models()?;
    let matrices = store.load_features(d)?;
    let preds = store.load_predictions(d)?;
    let report = staged_evaluation(&matrices, &models, &preds, &cfg.stages);
    store.save_report(&report)?;
    println!("{}", report.to_markdown());
    let violations = check_thresholds(&report, thresholds);
    for v in &violations {
        eprintln!("threshold violated: {v}");
    }
    Ok(violations.is_empty())
}

fn stats(store: &Store, cfg: &RunConfig, which: &[Dataset]) -> Result<bool> {
    let mut ok = true;
    for &d in which {
        let events = store.load_events(d)?;
        let snapshots = store.load_snapshots(d)?;
        let truth = if store.exists(&Layout::truth(d)) {
            Some(store.load_truth(d)?)
        } else {
            None
        };
        let summary = pipeline::summarize(&snapshots, &events, &cfg.stages, truth.as_deref())?;
        store.save_stats(d, &summary)?;
        println!("## {}\n\n{}", d.name(), summary.to_markdown());
        if summary.truth.as_ref().is_some_and(|t| !t.mismatches.is_empty()) {
            ok = false;
        }
    }
    Ok(ok)
}

fn run(cli: Cli) -> Result<bool> {
    let cfg = run_config(&cli.opts)?;
    let store = Store::open(&cli.opts.out, cfg.hash())?;
    match &cli.command {
        Command::Simulate(a) => simulate(&store, &cfg, &datasets(a, &Dataset::ALL))?,
        Command::Detect(a) => detect(&store, &cfg, &datasets(a, &Dataset::ALL))?,
        Command::Featurize(a) => featurize(&store, &cfg, &datasets(a, &[Dataset::Train, Dataset::Test]))?,
        Command::BuildIndex => {
            build_index(&store, &cfg)?;
        }
        Command::Train => train(&store, &cfg)?,
        Command::Predict(a) => predict(&store, &datasets(a, &[Dataset::Test]))?,
        Command::Evaluate {
            dataset,
            min_f1,
            require_baselines,
        } => {
            let mut t = cfg.thresholds.clone();
            if min_f1.is_some() {
                t.min_f1_first_stage = *min_f1;
            }
            if *require_baselines {
                t.beat_classification_baselines = true;
                t.beat_global_mean = true;
            }
            return evaluate(&store, &cfg, dataset.dataset.unwrap_or(Dataset::Test), &t);
        }
        Command::Stats(a) => return stats(&store, &cfg, &datasets(a, &Dataset::ALL)),
    }
    Ok(true)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
