use std::path::{Path, PathBuf};

use clap::parser::ValueSource;
use clap::{ArgMatches, Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use sng::data_io::{ColumnRef, CsvSchema};
use sng::model::{default_lambda_start, Hyperparameters};

use crate::CliError;

/// Supervised neural gas: train per-class codebooks, sample synthetic data and
/// evaluate it on downstream classifiers.
#[derive(Debug, Parser)]
#[command(name = "sng", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train per-class codebooks on a labeled CSV and write the model JSON.
    Train(TrainArgs),
    /// Sample a synthetic dataset from a trained model.
    Generate(GenerateArgs),
    /// Repeated holdout comparing original, synthetic-only and mixed training data.
    Evaluate(EvaluateArgs),
    /// Fit an unsupervised neural gas to a ring of points and export snapshots.
    DemoTopology(DemoArgs),
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SchemaArgs {
    /// JSON file with keys label_column, feature_columns, has_header, delimiter.
    #[arg(long)]
    pub schema_config: Option<PathBuf>,
    /// Label column, by header name or zero-based index [default: last column].
    #[arg(long)]
    pub label_column: Option<String>,
    /// Comma-separated feature columns (names or indices) [default: all but the label].
    #[arg(long, value_delimiter = ',')]
    pub feature_columns: Option<Vec<String>>,
    /// The input has no header row.
    #[arg(long)]
    pub no_header: bool,
    /// Field delimiter [default: ,].
    #[arg(long)]
    pub delimiter: Option<char>,
    /// Unparseable rows to skip before failing [default: 0].
    #[arg(long)]
    pub max_rejected_rows: Option<usize>,
}

impl SchemaArgs {
    pub fn schema(&self) -> Result<CsvSchema, CliError> {
        let mut schema = match &self.schema_config {
            Some(path) => CsvSchema::from_json_file(path)?,
            None => CsvSchema::default(),
        };
        if let Some(col) = &self.label_column {
            schema.label_column = Some(col.parse().expect("infallible"));
        }
        if let Some(cols) = &self.feature_columns {
            schema.feature_columns = Some(
                cols.iter()
                    .map(|c| c.parse::<ColumnRef>().expect("infallible"))
                    .collect(),
            );
        }
        if self.no_header {
            schema.has_header = false;
        }
        if let Some(d) = self.delimiter {
            schema.delimiter = d;
        }
        if let Some(n) = self.max_rejected_rows {
            schema.max_rejected_rows = n;
        }
        Ok(schema)
    }
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct HyperArgs {
    /// Prototypes per class.
    #[arg(long, default_value_t = 10)]
    pub neurons: usize,
    /// Training epochs.
    #[arg(long, default_value_t = 100)]
    pub epochs: usize,
    #[arg(long, default_value_t = 0.5)]
    pub eta_start: f64,
    #[arg(long, default_value_t = 0.01)]
    pub eta_end: f64,
    /// Initial neighborhood range [default: neurons / 2].
    #[arg(long)]
    pub lambda_start: Option<f64>,
    #[arg(long, default_value_t = 0.01)]
    pub lambda_end: f64,
    /// Generation noise standard deviation, in normalized feature units.
    #[arg(long, default_value_t = 0.1)]
    pub noise_level: f64,
    /// Samples per running-loss log entry.
    #[arg(long, default_value_t = 32)]
    pub batch_size: usize,
    /// Do not clamp generated samples to the observed feature range.
    #[arg(long)]
    pub no_clip: bool,
}

impl HyperArgs {
    pub fn hyper(&self, seed: u64) -> Hyperparameters {
        Hyperparameters {
            neurons_per_class: self.neurons,
            max_iter: self.epochs,
            eta_start: self.eta_start,
            eta_end: self.eta_end,
            lambda_start: self
                .lambda_start
                .unwrap_or_else(|| default_lambda_start(self.neurons)),
            lambda_end: self.lambda_end,
            noise_level: self.noise_level,
            batch_size: self.batch_size,
            seed,
            clip_to_range: !self.no_clip,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct TrainArgs {
    /// JSON file of flag values; flags given on the command line take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Labeled input CSV.
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub schema: SchemaArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub hyper: HyperArgs,
    /// Seed for every random choice.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Model JSON output.
    #[arg(long, default_value = "model.json")]
    pub out: PathBuf,
    /// Per-epoch loss CSV [default: <out>.loss.csv].
    #[arg(long)]
    pub loss_out: Option<PathBuf>,
    /// Optional CSV of running losses every batch-size samples.
    #[arg(long)]
    pub batch_log: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct GenerateArgs {
    /// JSON file of flag values; flags given on the command line take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Model JSON written by `sng train`.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Total synthetic samples, split evenly across classes.
    #[arg(long, default_value_t = 2000)]
    pub count: usize,
    /// Override the model's noise level.
    #[arg(long)]
    pub noise_level: Option<f64>,
    /// Do not clamp generated samples to the observed feature range.
    #[arg(long)]
    pub no_clip: bool,
    /// Prototype selection: uniform or round-robin.
    #[arg(long, default_value = "uniform")]
    pub selection: String,
    /// Seed for every random choice.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Synthetic CSV output.
    #[arg(long, default_value = "synthetic.csv")]
    pub out: PathBuf,
    /// Provenance sidecar CSV [default: <out>.provenance.csv].
    #[arg(long)]
    pub provenance: Option<PathBuf>,
    /// Header of the label column.
    #[arg(long, default_value = "label")]
    pub label_name: String,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct EvaluateArgs {
    /// JSON file of flag values; flags given on the command line take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Labeled input CSV.
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub schema: SchemaArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub hyper: HyperArgs,
    /// Comma-separated regimes: original, synthetic_only, mixed.
    #[arg(long, value_delimiter = ',', default_value = "original,synthetic_only,mixed")]
    pub regimes: Vec<String>,
    /// Repeated holdout runs.
    #[arg(long, default_value_t = 5)]
    pub runs: usize,
    #[arg(long, default_value_t = 0.7)]
    pub train_fraction: f64,
    /// Synthetic samples generated per run.
    #[arg(long, default_value_t = 2000)]
    pub count: usize,
    /// Downstream classifier: logistic, knn or majority.
    #[arg(long, default_value = "logistic")]
    pub classifier: String,
    /// Neighbors for the knn classifier.
    #[arg(long, default_value_t = 5)]
    pub k: usize,
    /// Gradient-descent step for the logistic classifier.
    #[arg(long, default_value_t = 1.0)]
    pub lr_step: f64,
    /// Gradient-descent epochs for the logistic classifier.
    #[arg(long, default_value_t = 500)]
    pub lr_epochs: usize,
    /// Seed for every random choice.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Report JSON output.
    #[arg(long, default_value = "report.json")]
    pub report: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct DemoArgs {
    /// JSON file of flag values; flags given on the command line take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Target points on the ring.
    #[arg(long, default_value_t = 200)]
    pub points: usize,
    #[arg(long, default_value_t = 150)]
    pub neurons: usize,
    #[arg(long, default_value_t = 300)]
    pub epochs: usize,
    #[arg(long, default_value_t = 1.0)]
    pub radius: f64,
    /// Uniform radial jitter half-width.
    #[arg(long, default_value_t = 0.05)]
    pub jitter: f64,
    #[arg(long, default_value_t = 0.5)]
    pub eta_start: f64,
    #[arg(long, default_value_t = 0.01)]
    pub eta_end: f64,
    /// Initial neighborhood range [default: neurons / 2].
    #[arg(long)]
    pub lambda_start: Option<f64>,
    #[arg(long, default_value_t = 0.01)]
    pub lambda_end: f64,
    /// Seed for every random choice.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory for checkpoint CSVs and the SVG.
    #[arg(long, default_value = "topology")]
    pub out: PathBuf,
}

/// Fills every argument not given on the command line from the JSON object in
/// `config`. Keys are flag names (`eta-start` or `eta_start`).
pub fn merge_config<T>(args: T, matches: &ArgMatches, config: Option<&Path>) -> Result<T, CliError>
where
    T: Serialize + DeserializeOwned,
{
    let Some(path) = config else {
        return Ok(args);
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    let overrides: serde_json::Map<String, serde_json::Value> = serde_json::from_str(&text)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;

    let mut value = serde_json::to_value(&args).map_err(|e| CliError::Internal(e.to_string()))?;
    let fields = value.as_object_mut().expect("argument structs serialize to objects");
    for (key, v) in overrides {
        let key = key.replace('-', "_");
        if key == "config" {
            continue;
        }
        if !fields.contains_key(&key) {
            return Err(CliError::Usage(format!(
                "{}: unknown key '{key}'",
                path.display()
            )));
        }
        if matches.value_source(&key) == Some(ValueSource::CommandLine) {
            continue;
        }
        fields.insert(key, v);
    }
    serde_json::from_value(value)
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}
