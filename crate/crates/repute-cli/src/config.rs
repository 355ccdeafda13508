//! Config resolution: defaults, then the config file's top-level keys, then
//! its section for the active pipeline, then command-line flags. Explicitly
//! set keys the chosen pipeline or command ignores produce a warning, never
//! an error.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use repute_core::corpus::PreprocessOptions;
use repute_core::pipeline::{PipelineKind, RunConfig};
use repute_core::scoring::ScoreWeights;

/// Every tunable the tool understands, resolved to concrete values.
#[derive(Debug, Clone)]
pub struct Settings {
    pub pipeline: PipelineKind,
    pub t0: f64,
    pub scale_max: u32,
    pub current_year: Option<i32>,
    pub top_k: usize,
    pub lsa_rank: Option<usize>,
    pub floor_h: Option<f64>,
    pub midpoint: Option<f64>,
    pub weights: ScoreWeights,
    pub stopwords: bool,
    pub stemming: bool,
    pub min_df: u64,
    pub ngram_orders: Vec<usize>,
    pub models_dir: Option<PathBuf>,
    pub vectors_path: Option<PathBuf>,
    pub probabilities_path: Option<PathBuf>,
    pub entity_name: Option<String>,
    pub generated_at: Option<String>,
    pub alpha: f64,
    pub svm_lambda: f64,
    pub svm_epochs: usize,
    pub seed: u64,
    pub holdout: f64,
    /// Keys set by the file or by flags, for relevance warnings.
    explicit: BTreeSet<String>,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            pipeline: PipelineKind::AttributeAggregation,
            t0: 0.95,
            scale_max: 10,
            current_year: None,
            top_k: 3,
            lsa_rank: None,
            floor_h: None,
            midpoint: None,
            weights: ScoreWeights::default(),
            stopwords: true,
            stemming: true,
            min_df: 1,
            ngram_orders: vec![1],
            models_dir: None,
            vectors_path: None,
            probabilities_path: None,
            entity_name: None,
            generated_at: None,
            alpha: 1.0,
            svm_lambda: 0.01,
            svm_epochs: 30,
            seed: 42,
            holdout: 0.0,
            explicit: BTreeSet::new(),
        }
    }
}

/// The command-line values that override file configuration.
#[derive(Debug, Clone, Default)]
pub struct FlagOverrides {
    pub pipeline: Option<String>,
    pub t0: Option<f64>,
    pub scale_max: Option<u32>,
    pub current_year: Option<i32>,
    pub top_k: Option<usize>,
    pub models: Option<PathBuf>,
}

const TRAINING_KEYS: [&str; 5] = ["alpha", "svm_lambda", "svm_epochs", "seed", "holdout"];

/// Keys every pipeline reads.
const COMMON_KEYS: [&str; 9] = [
    "pipeline",
    "scale_max",
    "top_k",
    "models",
    "entity_name",
    "generated_at",
    "stopwords",
    "stemming",
    "current_year",
];

fn pipeline_reads(pipeline: PipelineKind, key: &str) -> bool {
    if COMMON_KEYS.contains(&key) {
        return true;
    }
    let extra: &[&str] = match pipeline {
        PipelineKind::CascadeFusion => {
            &["t0", "midpoint", "lsa_rank", "min_df", "ngram_orders", "vectors"]
        }
        PipelineKind::FineGrained => &["lsa_rank", "min_df", "ngram_orders", "vectors"],
        PipelineKind::AttributeAggregation => &["floor_h", "probabilities"],
        PipelineKind::Credibility => &[
            "floor_h",
            "probabilities",
            "weight_helpfulness",
            "weight_time",
            "weight_credibility",
        ],
    };
    extra.contains(&key)
}

fn train_reads(key: &str) -> bool {
    TRAINING_KEYS.contains(&key)
        || [
            "pipeline",
            "scale_max",
            "models",
            "stopwords",
            "stemming",
            "min_df",
            "ngram_orders",
        ]
        .contains(&key)
}

impl Settings {
    /// Warnings for explicitly set keys the given command will not read.
    pub fn relevance_warnings(&self, command: &str) -> Vec<String> {
        let mut warnings = Vec::new();
        for key in &self.explicit {
            let used = match command {
                "train" => train_reads(key),
                "sweep" => {
                    if key == "t0" {
                        warnings.push(
                            "warning: sweep varies t0 over the whole grid; the configured t0 is ignored"
                                .to_string(),
                        );
                        continue;
                    }
                    !TRAINING_KEYS.contains(&key.as_str())
                        && pipeline_reads(self.pipeline, key)
                }
                "report" => continue,
                _ => {
                    !TRAINING_KEYS.contains(&key.as_str())
                        && pipeline_reads(self.pipeline, key)
                }
            };
            if !used {
                let place = if TRAINING_KEYS.contains(&key.as_str()) {
                    "is used only by the train command".to_string()
                } else if command == "train" {
                    "is not used by the train command".to_string()
                } else {
                    format!("is not used by the {} pipeline", self.pipeline)
                };
                warnings.push(format!("warning: config key '{key}' {place}"));
            }
        }
        warnings
    }

    /// Command-flag override for the probability file; tracked like a
    /// config key so relevance warnings apply.
    pub fn set_probabilities_path(&mut self, path: PathBuf) {
        self.probabilities_path = Some(path);
        self.explicit.insert("probabilities".to_string());
    }

    /// Command-flag override for the vector file.
    pub fn set_vectors_path(&mut self, path: PathBuf) {
        self.vectors_path = Some(path);
        self.explicit.insert("vectors".to_string());
    }

    pub fn run_config(&self) -> RunConfig {
        let mut config = RunConfig::for_pipeline(self.pipeline);
        config.t0 = self.t0;
        config.scale_max = self.scale_max;
        config.current_year = self.current_year;
        config.top_k = self.top_k;
        config.lsa_rank = self.lsa_rank;
        config.floor_h = self.floor_h;
        config.weights = self.weights.clone();
        config.midpoint = self.midpoint;
        config.preprocess = self.preprocess();
        config.min_df = self.min_df;
        config.ngram_orders = self.ngram_orders.clone();
        config.entity_name = self.entity_name.clone();
        config.generated_at = self.generated_at.clone();
        config
    }

    pub fn preprocess(&self) -> PreprocessOptions {
        PreprocessOptions {
            remove_stopwords: self.stopwords,
            stem: self.stemming,
        }
    }

    /// The full effective configuration as one sorted, single-line JSON
    /// object, logged on every run.
    pub fn effective_json(&self) -> String {
        let mut map = serde_json::Map::new();
        let mut put = |k: &str, v: serde_json::Value| {
            map.insert(k.to_string(), v);
        };
        put("pipeline", self.pipeline.as_str().into());
        put("t0", self.t0.into());
        put("scale_max", self.scale_max.into());
        put(
            "current_year",
            self.current_year.map(Into::into).unwrap_or(serde_json::Value::Null),
        );
        put("top_k", (self.top_k as u64).into());
        put(
            "lsa_rank",
            self.lsa_rank
                .map(|k| serde_json::Value::from(k as u64))
                .unwrap_or(serde_json::Value::Null),
        );
        put(
            "floor_h",
            self.floor_h.map(Into::into).unwrap_or(serde_json::Value::Null),
        );
        put(
            "midpoint",
            self.midpoint.map(Into::into).unwrap_or(serde_json::Value::Null),
        );
        put("weight_helpfulness", self.weights.helpfulness.into());
        put("weight_time", self.weights.time.into());
        put("weight_credibility", self.weights.credibility.into());
        put("stopwords", self.stopwords.into());
        put("stemming", self.stemming.into());
        put("min_df", self.min_df.into());
        put(
            "ngram_orders",
            serde_json::Value::Array(
                self.ngram_orders
                    .iter()
                    .map(|&n| serde_json::Value::from(n as u64))
                    .collect(),
            ),
        );
        let path_or_null = |p: &Option<PathBuf>| {
            p.as_ref()
                .map(|p| serde_json::Value::from(p.display().to_string()))
                .unwrap_or(serde_json::Value::Null)
        };
        put("models", path_or_null(&self.models_dir));
        put("vectors", path_or_null(&self.vectors_path));
        put("probabilities", path_or_null(&self.probabilities_path));
        put(
            "entity_name",
            self.entity_name
                .clone()
                .map(Into::into)
                .unwrap_or(serde_json::Value::Null),
        );
        put(
            "generated_at",
            self.generated_at
                .clone()
                .map(Into::into)
                .unwrap_or(serde_json::Value::Null),
        );
        put("alpha", self.alpha.into());
        put("svm_lambda", self.svm_lambda.into());
        put("svm_epochs", (self.svm_epochs as u64).into());
        put("seed", self.seed.into());
        put("holdout", self.holdout.into());
        // serde_json::Map preserves insertion order by default; sort by
        // rebuilding through a BTreeMap for a stable log line.
        let sorted: std::collections::BTreeMap<_, _> = map.into_iter().collect();
        serde_json::to_string(&sorted).expect("config serializes")
    }
}

/// Loads (optionally) a TOML config file and folds in the flag overrides.
/// Returns the settings plus warnings about unknown keys or sections.
pub fn resolve(
    config_path: Option<&Path>,
    flags: &FlagOverrides,
) -> Result<(Settings, Vec<String>)> {
    let mut settings = Settings::default();
    let mut warnings = Vec::new();

    let table = match config_path {
        Some(path) => {
            let content = std::fs::read_to_string(path)
                .with_context(|| format!("cannot read config file {}", path.display()))?;
            Some(content.parse::<toml::Table>().with_context(|| {
                format!("cannot parse config file {}", path.display())
            })?)
        }
        None => None,
    };

    // The pipeline must be known before section overrides apply.
    let pipeline_name = flags
        .pipeline
        .clone()
        .or_else(|| {
            table.as_ref().and_then(|t| {
                t.get("pipeline")
                    .and_then(|v| v.as_str())
                    .map(str::to_string)
            })
        })
        .unwrap_or_else(|| PipelineKind::AttributeAggregation.as_str().to_string());
    settings.pipeline = pipeline_name.parse()?;
    if flags.pipeline.is_some() || table.as_ref().is_some_and(|t| t.contains_key("pipeline")) {
        settings.explicit.insert("pipeline".to_string());
    }

    if let Some(table) = &table {
        let section_names: Vec<&str> =
            PipelineKind::ALL.iter().map(|k| k.as_str()).collect();
        // Top level first; sections for pipelines other than the active one
        // are inert, and the active section is applied afterwards so it
        // always beats the top level.
        for (key, value) in table {
            if value.is_table() {
                if !section_names.contains(&key.as_str()) {
                    warnings.push(format!("warning: unknown config section [{key}]"));
                }
                continue;
            }
            if key == "pipeline" {
                continue; // handled above
            }
            apply_key(&mut settings, key, value, &mut warnings)?;
        }
        if let Some(section) = table
            .get(settings.pipeline.as_str())
            .and_then(|v| v.as_table())
        {
            for (key, value) in section {
                if value.is_table() {
                    warnings.push(format!(
                        "warning: nested table '{key}' inside [{}] is not a config key",
                        settings.pipeline
                    ));
                    continue;
                }
                if key == "pipeline" {
                    warnings.push(format!(
                        "warning: the pipeline cannot be switched inside [{}]",
                        settings.pipeline
                    ));
                    continue;
                }
                apply_key(&mut settings, key, value, &mut warnings)?;
            }
        }
    }

    apply_flags(&mut settings, flags);
    finish_weights(&mut settings)?;
    validate(&settings)?;
    Ok((settings, warnings))
}

fn apply_flags(settings: &mut Settings, flags: &FlagOverrides) {
    let mut mark = |k: &str| {
        settings.explicit.insert(k.to_string());
    };
    if let Some(t0) = flags.t0 {
        settings.t0 = t0;
        mark("t0");
    }
    if let Some(scale_max) = flags.scale_max {
        settings.scale_max = scale_max;
        mark("scale_max");
    }
    if let Some(year) = flags.current_year {
        settings.current_year = Some(year);
        mark("current_year");
    }
    if let Some(top_k) = flags.top_k {
        settings.top_k = top_k;
        mark("top_k");
    }
    if let Some(models) = &flags.models {
        settings.models_dir = Some(models.clone());
        mark("models");
    }
}

fn apply_key(
    settings: &mut Settings,
    key: &str,
    value: &toml::Value,
    warnings: &mut Vec<String>,
) -> Result<()> {
    let type_err = |expected: &str| {
        anyhow::anyhow!(
            "config key '{key}': expected {expected}, got {}",
            value.type_str()
        )
    };
    let as_f64 = |value: &toml::Value| -> Result<f64> {
        match value {
            toml::Value::Float(f) => Ok(*f),
            toml::Value::Integer(i) => Ok(*i as f64),
            _ => Err(type_err("a number")),
        }
    };
    let as_u64 = |value: &toml::Value| -> Result<u64> {
        match value {
            toml::Value::Integer(i) if *i >= 0 => Ok(*i as u64),
            toml::Value::Integer(_) => Err(anyhow::anyhow!(
                "config key '{key}': expected a nonnegative integer"
            )),
            _ => Err(type_err("an integer")),
        }
    };
    let as_bool = |value: &toml::Value| -> Result<bool> {
        value.as_bool().ok_or_else(|| type_err("a boolean"))
    };
    let as_str = |value: &toml::Value| -> Result<String> {
        value
            .as_str()
            .map(str::to_string)
            .ok_or_else(|| type_err("a string"))
    };

    match key {
        "t0" => settings.t0 = as_f64(value)?,
        "scale_max" => settings.scale_max = as_u64(value)? as u32,
        "current_year" => {
            settings.current_year = Some(
                value
                    .as_integer()
                    .ok_or_else(|| type_err("an integer"))? as i32,
            )
        }
        "top_k" => settings.top_k = as_u64(value)? as usize,
        "lsa_rank" => settings.lsa_rank = Some(as_u64(value)? as usize),
        "floor_h" => settings.floor_h = Some(as_f64(value)?),
        "midpoint" => settings.midpoint = Some(as_f64(value)?),
        "weight_helpfulness" => settings.weights.helpfulness = as_f64(value)?,
        "weight_time" => settings.weights.time = as_f64(value)?,
        "weight_credibility" => settings.weights.credibility = as_f64(value)?,
        "stopwords" => settings.stopwords = as_bool(value)?,
        "stemming" => settings.stemming = as_bool(value)?,
        "min_df" => settings.min_df = as_u64(value)?,
        "ngram_orders" => {
            let array = value.as_array().ok_or_else(|| type_err("an array"))?;
            let mut orders = Vec::with_capacity(array.len());
            for item in array {
                orders.push(as_u64(item)? as usize);
            }
            settings.ngram_orders = orders;
        }
        "models" => settings.models_dir = Some(PathBuf::from(as_str(value)?)),
        "vectors" => settings.vectors_path = Some(PathBuf::from(as_str(value)?)),
        "probabilities" => {
            settings.probabilities_path = Some(PathBuf::from(as_str(value)?))
        }
        "entity_name" => settings.entity_name = Some(as_str(value)?),
        "generated_at" => settings.generated_at = Some(as_str(value)?),
        "alpha" => settings.alpha = as_f64(value)?,
        "svm_lambda" => settings.svm_lambda = as_f64(value)?,
        "svm_epochs" => settings.svm_epochs = as_u64(value)? as usize,
        "seed" => settings.seed = as_u64(value)?,
        "holdout" => settings.holdout = as_f64(value)?,
        other => {
            warnings.push(format!("warning: unknown config key '{other}'"));
            return Ok(());
        }
    }
    settings.explicit.insert(key.to_string());
    Ok(())
}

/// The weights struct validates on construction; rebuild it so partial
/// overrides are checked as a set.
fn finish_weights(settings: &mut Settings) -> Result<()> {
    settings.weights = ScoreWeights::new(
        settings.weights.helpfulness,
        settings.weights.time,
        settings.weights.credibility,
    )?;
    Ok(())
}

fn validate(settings: &Settings) -> Result<()> {
    if !(0.0..=1.0).contains(&settings.holdout) || !settings.holdout.is_finite() {
        bail!("holdout fraction {} outside [0, 1]", settings.holdout);
    }
    if settings.holdout >= 1.0 && settings.holdout != 0.0 {
        bail!("holdout fraction must leave training data");
    }
    if !settings.alpha.is_finite() || settings.alpha <= 0.0 {
        bail!("smoothing alpha must be positive, got {}", settings.alpha);
    }
    if !settings.svm_lambda.is_finite() || settings.svm_lambda < 0.0 {
        bail!(
            "svm_lambda must be nonnegative, got {}",
            settings.svm_lambda
        );
    }
    if settings.svm_epochs == 0 {
        bail!("svm_epochs must be at least 1");
    }
    // Pipeline-level numeric ranges are validated again by the run config;
    // checking here turns them into config errors with the key name.
    settings.run_config().validate()?;
    Ok(())
}
