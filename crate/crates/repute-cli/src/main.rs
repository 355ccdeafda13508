//! `repute` — reputation mining over customer review datasets.
//!
//! Five commands: `train` fits sentiment models from a labeled corpus,
//! `classify` labels a dataset with the active pipeline's classifier,
//! `reputation` runs a pipeline end to end and writes the report trio
//! (JSON, SVG, text), `sweep` scores every fusion threshold against ground
//! truth, and `report` re-renders the SVG and text views from an existing
//! structured report.

mod config;

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use repute_core::corpus::{
    load_dataset, load_labeled_lines, ColumnSchema, ReviewDataset,
};
use repute_core::evaluation::{default_t0_grid, t0_sweep, write_sweep_csv};
use repute_core::features::{
    build_vocabulary, load_external_vectors, vectorize, DocVector, Weighting,
};
use repute_core::pipeline::{
    classify_dataset, load_probabilities, run_reputation, PipelineModels, RunConfig,
    FINE_NB_FILE, POLARITY_NB_FILE, POLARITY_SVM_FILE, VOCABULARY_FILE,
};
use repute_core::report::{
    emit_pie_svg, emit_structured, emit_text_summary, load_structured,
};
use repute_core::sentiment::{
    evaluate_classifier, map_fine_labels, save_linear_svm, save_naive_bayes,
    LinearSvmModel, NaiveBayesModel,
};

use config::{resolve, FlagOverrides, Settings};

#[derive(Parser)]
#[command(
    name = "repute",
    version,
    about = "Reputation mining over customer reviews"
)]
struct Cli {
    /// Config file (TOML). Falls back to the REPUTE_CONFIG environment
    /// variable when the flag is absent.
    #[arg(long, global = true, env = "REPUTE_CONFIG")]
    config: Option<PathBuf>,
    /// Pipeline: cascade-fusion, fine-grained, attribute-aggregation, or
    /// credibility.
    #[arg(long, global = true)]
    pipeline: Option<String>,
    /// Opinion fusion threshold in [0, 1] (cascade-fusion).
    #[arg(long, global = true)]
    t0: Option<f64>,
    /// Upper end of the rating scale.
    #[arg(long = "scale-max", global = true)]
    scale_max: Option<u32>,
    /// Reference year for recency scoring.
    #[arg(long = "current-year", global = true)]
    current_year: Option<i32>,
    /// Reviews per top list in reports.
    #[arg(long = "top-k", global = true)]
    top_k: Option<usize>,
    /// Output destination; each command documents its default.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Directory holding trained model files.
    #[arg(long, global = true)]
    models: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TrainTask {
    /// Two-way polarity: a probabilistic model plus a max-margin model.
    Binary,
    /// Five-way sentiment intensity: a probabilistic model.
    FineGrained,
}

#[derive(Subcommand)]
enum Command {
    /// Train sentiment models from a labeled corpus.
    Train {
        /// Labeled corpus: a `label<TAB>text` / `__label__N text` file, or
        /// a review CSV with a gold_label column.
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, value_enum, default_value_t = TrainTask::Binary)]
        task: TrainTask,
        /// Labeled file to evaluate the trained models on.
        #[arg(long)]
        eval: Option<PathBuf>,
    },
    /// Label every review of a dataset and write the widened copy.
    Classify {
        /// Review CSV to classify.
        #[arg(long)]
        dataset: PathBuf,
    },
    /// Run the configured pipeline end to end and write the report files.
    Reputation {
        /// Review CSV for one entity.
        #[arg(long)]
        dataset: PathBuf,
        /// Per-review class probabilities from an external classifier
        /// (`review_id P_neg P_pos` lines).
        #[arg(long)]
        probabilities: Option<PathBuf>,
        /// Per-review document vectors (`review_id c1 c2 ...` lines).
        #[arg(long)]
        vectors: Option<PathBuf>,
    },
    /// Evaluate every fusion threshold against ground-truth reputations.
    Sweep {
        /// One review CSV, or a directory of them (one entity per file).
        #[arg(long)]
        dataset: PathBuf,
        /// CSV with entity_id and ground_truth columns.
        #[arg(long = "ground-truth")]
        ground_truth: PathBuf,
        /// Per-review probabilities, as for `reputation`.
        #[arg(long)]
        probabilities: Option<PathBuf>,
        /// Per-review vectors, as for `reputation`.
        #[arg(long)]
        vectors: Option<PathBuf>,
    },
    /// Re-render the SVG and text views from a structured report.
    Report {
        /// Structured report JSON produced by `reputation`.
        #[arg(long)]
        input: PathBuf,
    },
}

fn main() {
    match run() {
        Ok(()) => {}
        Err(error) => {
            // One machine-parsable line, whatever the depth of the cause
            // chain.
            let message = format!("{error:#}").replace('\n', "; ");
            eprintln!("error: {message}");
            std::process::exit(1);
        }
    }
}

fn run() -> Result<()> {
    let cli = Cli::parse();
    let flags = FlagOverrides {
        pipeline: cli.pipeline.clone(),
        t0: cli.t0,
        scale_max: cli.scale_max,
        current_year: cli.current_year,
        top_k: cli.top_k,
        models: cli.models.clone(),
    };
    let (mut settings, mut warnings) = resolve(cli.config.as_deref(), &flags)?;
    let command_name = match &cli.command {
        Command::Train { .. } => "train",
        Command::Classify { .. } => "classify",
        Command::Reputation { .. } => "reputation",
        Command::Sweep { .. } => "sweep",
        Command::Report { .. } => "report",
    };
    // Per-command data paths belong to the effective config too.
    if let Command::Reputation {
        probabilities,
        vectors,
        ..
    }
    | Command::Sweep {
        probabilities,
        vectors,
        ..
    } = &cli.command
    {
        if let Some(path) = probabilities {
            settings.set_probabilities_path(path.clone());
        }
        if let Some(path) = vectors {
            settings.set_vectors_path(path.clone());
        }
    }
    warnings.extend(settings.relevance_warnings(command_name));
    for warning in &warnings {
        eprintln!("{warning}");
    }
    eprintln!("config: {}", settings.effective_json());

    match &cli.command {
        Command::Train { corpus, task, eval } => {
            cmd_train(&settings, corpus, *task, eval.as_deref(), cli.out.as_deref())
        }
        Command::Classify { dataset } => {
            cmd_classify(&settings, dataset, cli.out.as_deref())
        }
        Command::Reputation { dataset, .. } => {
            cmd_reputation(&settings, dataset, cli.out.as_deref())
        }
        Command::Sweep {
            dataset,
            ground_truth,
            ..
        } => cmd_sweep(&settings, dataset, ground_truth, cli.out.as_deref()),
        Command::Report { input } => cmd_report(input, cli.out.as_deref()),
    }
}

/// Loads (label, text) pairs from either corpus format.
fn load_training_pairs(path: &Path, scale_max: u32) -> Result<Vec<(String, String)>> {
    if path.extension().is_some_and(|e| e == "csv") {
        let dataset = load_dataset(path, &ColumnSchema::default(), scale_max)?;
        let mut pairs = Vec::with_capacity(dataset.reviews.len());
        for review in &dataset.reviews {
            let label = review.gold_label.clone().ok_or_else(|| {
                anyhow::anyhow!(
                    "review '{}' in {} has no gold_label; training needs a labeled corpus",
                    review.id,
                    path.display()
                )
            })?;
            pairs.push((label, review.text.clone()));
        }
        Ok(pairs)
    } else {
        Ok(load_labeled_lines(path)?)
    }
}

/// Accepts the canonical polarity names plus the common shorthand.
fn normalize_binary_label(raw: &str) -> Result<String> {
    match raw {
        "positive" | "pos" | "1" => Ok("positive".to_string()),
        "negative" | "neg" | "0" => Ok("negative".to_string()),
        other => bail!(
            "label '{other}' is not a polarity label; expected positive/negative (or pos/neg, 1/0)"
        ),
    }
}

fn print_metrics(name: &str, split: &str, predicted: &[String], gold: &[String]) -> Result<()> {
    let metrics = evaluate_classifier(predicted, gold)?;
    println!(
        "{split} {name}: accuracy {:.4}, macro-F1 {:.4} ({} examples)",
        metrics.accuracy,
        metrics.macro_f1,
        gold.len()
    );
    Ok(())
}

fn cmd_train(
    settings: &Settings,
    corpus: &Path,
    task: TrainTask,
    eval: Option<&Path>,
    out: Option<&Path>,
) -> Result<()> {
    let pairs = load_training_pairs(corpus, settings.scale_max)?;
    let labels: Vec<String> = match task {
        TrainTask::Binary => pairs
            .iter()
            .map(|(label, _)| normalize_binary_label(label))
            .collect::<Result<_>>()?,
        TrainTask::FineGrained => {
            let raw: Vec<String> = pairs.iter().map(|(label, _)| label.clone()).collect();
            map_fine_labels(&raw)?
                .into_iter()
                .map(|label| label.to_string())
                .collect()
        }
    };
    let options = settings.preprocess();
    let tokens: Vec<Vec<String>> = pairs
        .iter()
        .map(|(_, text)| repute_core::corpus::preprocess(text, &options))
        .collect();

    // Optional held-out split, deterministic in the seed.
    let n = tokens.len();
    let n_eval = (n as f64 * settings.holdout).round() as usize;
    let (train_idx, eval_idx) = if n_eval > 0 {
        if n_eval >= n {
            bail!("holdout {} leaves no training data for {n} examples", settings.holdout);
        }
        let mut indices: Vec<usize> = (0..n).collect();
        indices.shuffle(&mut ChaCha8Rng::seed_from_u64(settings.seed));
        let (eval_part, train_part) = indices.split_at(n_eval);
        (train_part.to_vec(), eval_part.to_vec())
    } else {
        ((0..n).collect(), Vec::new())
    };

    let train_tokens: Vec<Vec<String>> =
        train_idx.iter().map(|&i| tokens[i].clone()).collect();
    let train_labels: Vec<String> = train_idx.iter().map(|&i| labels[i].clone()).collect();
    let vocabulary = build_vocabulary(&train_tokens, &settings.ngram_orders, settings.min_df)?;
    let counts: Vec<DocVector> = train_tokens
        .iter()
        .map(|t| vectorize(t, &vocabulary, Weighting::Count))
        .collect();
    println!(
        "training on {} documents (vocabulary: {} terms)",
        train_tokens.len(),
        vocabulary.len()
    );

    let nb = NaiveBayesModel::train(&counts, &train_labels, settings.alpha)?;
    let svm = match task {
        TrainTask::Binary => {
            let tfidf: Vec<DocVector> = train_tokens
                .iter()
                .map(|t| vectorize(t, &vocabulary, Weighting::Tfidf))
                .collect();
            Some(LinearSvmModel::train(
                &tfidf,
                &train_labels,
                settings.svm_lambda,
                settings.svm_epochs,
                settings.seed,
            )?)
        }
        TrainTask::FineGrained => None,
    };

    // Metrics on whatever evaluation data exists: the held-out split, an
    // explicit evaluation file, or both.
    let mut eval_sets: Vec<(&str, Vec<Vec<String>>, Vec<String>)> = Vec::new();
    if !eval_idx.is_empty() {
        eval_sets.push((
            "holdout",
            eval_idx.iter().map(|&i| tokens[i].clone()).collect(),
            eval_idx.iter().map(|&i| labels[i].clone()).collect(),
        ));
    }
    if let Some(eval_path) = eval {
        let eval_pairs = load_training_pairs(eval_path, settings.scale_max)?;
        let eval_labels: Vec<String> = match task {
            TrainTask::Binary => eval_pairs
                .iter()
                .map(|(label, _)| normalize_binary_label(label))
                .collect::<Result<_>>()?,
            TrainTask::FineGrained => {
                let raw: Vec<String> =
                    eval_pairs.iter().map(|(label, _)| label.clone()).collect();
                map_fine_labels(&raw)?
                    .into_iter()
                    .map(|label| label.to_string())
                    .collect()
            }
        };
        eval_sets.push((
            "eval",
            eval_pairs
                .iter()
                .map(|(_, text)| repute_core::corpus::preprocess(text, &options))
                .collect(),
            eval_labels,
        ));
    }
    for (split, eval_tokens, eval_labels) in &eval_sets {
        let eval_counts: Vec<DocVector> = eval_tokens
            .iter()
            .map(|t| vectorize(t, &vocabulary, Weighting::Count))
            .collect();
        let nb_predicted: Vec<String> = eval_counts
            .iter()
            .map(|doc| nb.predict(doc).map(|p| p.label))
            .collect::<Result<_, _>>()?;
        print_metrics("naive-bayes", split, &nb_predicted, eval_labels)?;
        if let Some(svm) = &svm {
            let eval_tfidf: Vec<DocVector> = eval_tokens
                .iter()
                .map(|t| vectorize(t, &vocabulary, Weighting::Tfidf))
                .collect();
            let svm_predicted: Vec<String> = eval_tfidf
                .iter()
                .map(|doc| svm.predict(doc).map(|p| p.label.to_string()))
                .collect::<Result<_, _>>()?;
            print_metrics("linear-svm", split, &svm_predicted, eval_labels)?;
        }
    }

    let out_dir = out
        .map(Path::to_path_buf)
        .or_else(|| settings.models_dir.clone())
        .unwrap_or_else(|| PathBuf::from("models"));
    std::fs::create_dir_all(&out_dir)
        .with_context(|| format!("cannot create model directory {}", out_dir.display()))?;
    let vocab_path = out_dir.join(VOCABULARY_FILE);
    let vocab_json =
        serde_json::to_string_pretty(&vocabulary).expect("vocabulary serializes");
    std::fs::write(&vocab_path, vocab_json + "\n")
        .with_context(|| format!("cannot write {}", vocab_path.display()))?;
    println!("wrote {}", vocab_path.display());
    match task {
        TrainTask::Binary => {
            let nb_path = out_dir.join(POLARITY_NB_FILE);
            save_naive_bayes(&nb, &vocabulary, &nb_path)?;
            println!("wrote {}", nb_path.display());
            let svm_path = out_dir.join(POLARITY_SVM_FILE);
            save_linear_svm(svm.as_ref().expect("binary task trains one"), &vocabulary, &svm_path)?;
            println!("wrote {}", svm_path.display());
        }
        TrainTask::FineGrained => {
            let nb_path = out_dir.join(FINE_NB_FILE);
            save_naive_bayes(&nb, &vocabulary, &nb_path)?;
            println!("wrote {}", nb_path.display());
        }
    }
    Ok(())
}

fn assemble_models(settings: &Settings) -> Result<PipelineModels> {
    let mut models = match &settings.models_dir {
        Some(dir) => PipelineModels::load_dir(dir)?,
        None => PipelineModels::default(),
    };
    if let Some(path) = &settings.probabilities_path {
        models.probabilities = Some(load_probabilities(path)?);
    }
    if let Some(path) = &settings.vectors_path {
        models.vectors = Some(load_external_vectors(path)?);
    }
    Ok(models)
}

fn load_entity(settings: &Settings, path: &Path) -> Result<ReviewDataset> {
    let mut dataset = load_dataset(path, &ColumnSchema::default(), settings.scale_max)?;
    if dataset.current_year.is_none() {
        dataset.current_year = settings.current_year;
    }
    Ok(dataset)
}

fn cmd_classify(settings: &Settings, dataset_path: &Path, out: Option<&Path>) -> Result<()> {
    let dataset = load_entity(settings, dataset_path)?;
    let models = assemble_models(settings)?;
    let output = classify_dataset(&dataset, &models, &settings.run_config())?;

    let out_path = out.map(Path::to_path_buf).unwrap_or_else(|| {
        let stem = dataset_path
            .file_stem()
            .map(|s| s.to_string_lossy().to_string())
            .unwrap_or_else(|| "dataset".to_string());
        dataset_path.with_file_name(format!("{stem}-classified.csv"))
    });
    let mut writer = csv::Writer::from_path(&out_path)
        .with_context(|| format!("cannot write {}", out_path.display()))?;
    let mut header = vec![
        "id",
        "text",
        "rating",
        "helpful_votes",
        "date",
        "user_id",
        "user_review_count",
        "user_helpful_votes",
        "gold_label",
        "predicted_label",
    ]
    .into_iter()
    .map(str::to_string)
    .collect::<Vec<_>>();
    for class in &output.classes {
        header.push(format!("p_{class}"));
    }
    writer.write_record(&header)?;
    let opt_num = |v: Option<f64>| v.map(|x| format!("{x}")).unwrap_or_default();
    let opt_int = |v: Option<i32>| v.map(|x| x.to_string()).unwrap_or_default();
    let opt_u64 = |v: Option<u64>| v.map(|x| x.to_string()).unwrap_or_default();
    for (review, row) in dataset.reviews.iter().zip(&output.rows) {
        let mut record = vec![
            review.id.clone(),
            review.text.clone(),
            opt_num(review.rating),
            review.helpful_votes.to_string(),
            opt_int(review.posting_year),
            review.user_id.clone(),
            opt_u64(review.user_review_count),
            opt_u64(review.user_helpful_votes),
            review.gold_label.clone().unwrap_or_default(),
            row.label.clone(),
        ];
        for p in &row.posteriors {
            record.push(format!("{p}"));
        }
        writer.write_record(&record)?;
    }
    writer.flush()?;
    println!("wrote {}", out_path.display());
    Ok(())
}

fn cmd_reputation(
    settings: &Settings,
    dataset_path: &Path,
    out: Option<&Path>,
) -> Result<()> {
    let dataset = load_entity(settings, dataset_path)?;
    let models = assemble_models(settings)?;
    let outcome = run_reputation(&dataset, &models, &settings.run_config())?;

    let out_dir = out.map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("reports"));
    std::fs::create_dir_all(&out_dir)
        .with_context(|| format!("cannot create output directory {}", out_dir.display()))?;
    let json_path = out_dir.join("report.json");
    emit_structured(&outcome.report, &json_path)?;
    let svg_path = out_dir.join("report.svg");
    emit_pie_svg(&outcome.report.categories, &svg_path)?;
    let text_path = out_dir.join("report.txt");
    emit_text_summary(&outcome.report, &text_path)?;

    println!("reputation: {:.4}", outcome.reputation);
    for path in [&json_path, &svg_path, &text_path] {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn cmd_sweep(
    settings: &Settings,
    dataset_path: &Path,
    ground_truth_path: &Path,
    out: Option<&Path>,
) -> Result<()> {
    // One CSV file is one entity; a directory holds one file per entity.
    let entity_files: Vec<PathBuf> = if dataset_path.is_dir() {
        let mut files: Vec<PathBuf> = std::fs::read_dir(dataset_path)
            .with_context(|| format!("cannot read directory {}", dataset_path.display()))?
            .filter_map(|entry| entry.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|e| e == "csv"))
            .collect();
        files.sort();
        files
    } else {
        vec![dataset_path.to_path_buf()]
    };
    if entity_files.is_empty() {
        bail!("no .csv datasets found in {}", dataset_path.display());
    }

    let truth = load_ground_truth(ground_truth_path)?;
    let models = assemble_models(settings)?;

    let mut datasets: HashMap<String, ReviewDataset> = HashMap::new();
    let mut entities: Vec<(String, f64)> = Vec::new();
    for file in &entity_files {
        let dataset = load_entity(settings, file)?;
        let id = dataset.entity_id.clone();
        let ground = *truth.get(&id).ok_or_else(|| {
            anyhow::anyhow!(
                "no ground truth for entity '{id}' in {}",
                ground_truth_path.display()
            )
        })?;
        entities.push((id.clone(), ground));
        datasets.insert(id, dataset);
    }

    let grid = default_t0_grid();
    let base = settings.run_config();
    let result = t0_sweep(&grid, &entities, |entity_id, t0| {
        let mut config: RunConfig = base.clone();
        config.t0 = t0;
        run_reputation(&datasets[entity_id], &models, &config)
            .map(|outcome| outcome.reputation)
            .map_err(|e| e.to_string())
    })?;

    let out_path = out.map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("sweep.csv"));
    write_sweep_csv(&result, &out_path)?;
    println!("wrote {}", out_path.display());

    let per_threshold = result.maer_per_threshold();
    if let Some((best_t0, best_maer)) = per_threshold
        .iter()
        .copied()
        .min_by(|a, b| a.1.total_cmp(&b.1))
    {
        println!("best t0: {best_t0:.2} (mean abs error {best_maer:.6})");
    }
    println!("grand mean abs error: {:.6}", result.grand_mean());
    Ok(())
}

fn load_ground_truth(path: &Path) -> Result<HashMap<String, f64>> {
    let mut reader = csv::Reader::from_path(path)
        .with_context(|| format!("cannot read ground truth {}", path.display()))?;
    let headers = reader.headers()?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| anyhow::anyhow!("{}: missing column '{name}'", path.display()))
    };
    let id_col = find("entity_id")?;
    let truth_col = find("ground_truth")?;
    let mut truth = HashMap::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let id = record
            .get(id_col)
            .ok_or_else(|| anyhow::anyhow!("{}:{}: short row", path.display(), i + 2))?;
        let value: f64 = record
            .get(truth_col)
            .ok_or_else(|| anyhow::anyhow!("{}:{}: short row", path.display(), i + 2))?
            .parse()
            .with_context(|| format!("{}:{}: invalid ground truth", path.display(), i + 2))?;
        if truth.insert(id.to_string(), value).is_some() {
            bail!("{}: duplicate entity '{id}'", path.display());
        }
    }
    if truth.is_empty() {
        bail!("{}: no ground-truth rows", path.display());
    }
    Ok(truth)
}

fn cmd_report(input: &Path, out: Option<&Path>) -> Result<()> {
    let report = load_structured(input)?;
    let out_dir = out
        .map(Path::to_path_buf)
        .or_else(|| input.parent().map(Path::to_path_buf))
        .unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&out_dir)
        .with_context(|| format!("cannot create output directory {}", out_dir.display()))?;
    let svg_path = out_dir.join("report.svg");
    emit_pie_svg(&report.categories, &svg_path)?;
    let text_path = out_dir.join("report.txt");
    emit_text_summary(&report, &text_path)?;
    println!("wrote {}", svg_path.display());
    println!("wrote {}", text_path.display());
    Ok(())
}
