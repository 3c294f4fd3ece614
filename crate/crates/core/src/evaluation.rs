//! Repeated stratified holdout: train the generator on each run's training
//! split, build the requested training regimes and score a downstream
//! classifier on the untouched test split.

pub mod classifiers;

use std::fmt::{self, Write as _};
use std::str::FromStr;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SngError};
use crate::model::{normalize_vector, Dataset, Hyperparameters};
use crate::neural_gas::train_supervised;
use crate::synthesis::{fidelity_mse, generate_with, NeuronSelection};

pub use classifiers::{
    Classifier, ClassifierSpec, KNearestNeighbors, LogisticRegression, MajorityClass,
};

/// Which data the downstream classifier is trained on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Original,
    SyntheticOnly,
    Mixed,
}

impl Regime {
    pub const ALL: [Regime; 3] = [Regime::Original, Regime::SyntheticOnly, Regime::Mixed];

    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Original => "original",
            Regime::SyntheticOnly => "synthetic_only",
            Regime::Mixed => "mixed",
        }
    }

    pub fn uses_synthetic(self) -> bool {
        self != Regime::Original
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Regime {
    type Err = SngError;

    fn from_str(s: &str) -> Result<Self> {
        Regime::ALL
            .into_iter()
            .find(|r| r.as_str() == s)
            .ok_or_else(|| {
                SngError::InvalidArgument(format!(
                    "unknown regime '{s}' (expected original, synthetic_only or mixed)"
                ))
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub train_fraction: f64,
    pub runs: usize,
    pub regimes: Vec<Regime>,
    pub classifier: ClassifierSpec,
    pub seed: u64,
    /// Synthetic samples generated per run.
    pub synthetic_count: usize,
    pub neuron_selection: NeuronSelection,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            train_fraction: 0.7,
            runs: 5,
            regimes: Regime::ALL.to_vec(),
            classifier: ClassifierSpec::default(),
            seed: 0,
            synthetic_count: 2000,
            neuron_selection: NeuronSelection::Uniform,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(SngError::InvalidArgument(format!(
                "train_fraction must lie in (0, 1), got {}",
                self.train_fraction
            )));
        }
        if self.runs == 0 {
            return Err(SngError::InvalidArgument("runs must be positive".into()));
        }
        if self.regimes.is_empty() {
            return Err(SngError::InvalidArgument("no regimes selected".into()));
        }
        if self.synthetic_count == 0 && self.regimes.iter().any(|r| r.uses_synthetic()) {
            return Err(SngError::InvalidArgument(
                "synthetic regimes need synthetic_count > 0".into(),
            ));
        }
        Ok(())
    }
}

/// Row indices into the split dataset, each list ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Per class, `round(fraction * n)` rows (clamped so both sides get at least
/// one) go to training; the rest are test rows.
pub fn stratified_split_indices(dataset: &Dataset, train_fraction: f64, seed: u64) -> Result<Split> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(SngError::InvalidArgument(format!(
            "train_fraction must lie in (0, 1), got {train_fraction}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for class in 0..dataset.num_classes() {
        let mut rows = dataset.class_indices(class);
        if rows.len() < 2 {
            return Err(SngError::Data(format!(
                "class '{}' has {} sample(s); stratified splitting needs at least 2",
                dataset.class_names[class],
                rows.len()
            )));
        }
        rows.shuffle(&mut rng);
        let n_train = ((train_fraction * rows.len() as f64).round() as usize).clamp(1, rows.len() - 1);
        train.extend_from_slice(&rows[..n_train]);
        test.extend_from_slice(&rows[n_train..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok(Split { train, test })
}

pub fn stratified_split(dataset: &Dataset, train_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    let split = stratified_split_indices(dataset, train_fraction, seed)?;
    Ok((dataset.subset(&split.train), dataset.subset(&split.test)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
    pub per_class: Vec<ClassMetrics>,
    /// `confusion[truth][predicted]` counts.
    pub confusion: Vec<Vec<usize>>,
    /// Confusion rows scaled to percentages; rows without support stay zero.
    pub confusion_pct: Vec<Vec<f64>>,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Accuracy, macro-averaged precision/recall/F1 and the confusion matrix.
/// Undefined ratios (0/0) count as 0.
pub fn classify_metrics(predictions: &[usize], truth: &[usize], num_classes: usize) -> Result<Metrics> {
    if predictions.len() != truth.len() {
        return Err(SngError::InvalidArgument(format!(
            "{} predictions for {} labels",
            predictions.len(),
            truth.len()
        )));
    }
    if truth.is_empty() {
        return Err(SngError::InvalidArgument("no predictions to score".into()));
    }
    if let Some(&bad) = predictions.iter().chain(truth).find(|&&l| l >= num_classes) {
        return Err(SngError::InvalidArgument(format!(
            "label {bad} out of range for {num_classes} classes"
        )));
    }

    let mut confusion = vec![vec![0usize; num_classes]; num_classes];
    for (&p, &t) in predictions.iter().zip(truth) {
        confusion[t][p] += 1;
    }
    let correct: usize = (0..num_classes).map(|c| confusion[c][c]).sum();

    let per_class: Vec<ClassMetrics> = (0..num_classes)
        .map(|c| {
            let tp = confusion[c][c];
            let predicted: usize = confusion.iter().map(|row| row[c]).sum();
            let support: usize = confusion[c].iter().sum();
            let precision = ratio(tp, predicted);
            let recall = ratio(tp, support);
            let f1 = if precision + recall > 0.0 {
                2.0 * precision * recall / (precision + recall)
            } else {
                0.0
            };
            ClassMetrics {
                precision,
                recall,
                f1,
                support,
            }
        })
        .collect();
    let k = num_classes as f64;
    let confusion_pct = confusion
        .iter()
        .map(|row| {
            let total: usize = row.iter().sum();
            row.iter().map(|&n| 100.0 * ratio(n, total)).collect()
        })
        .collect();

    Ok(Metrics {
        accuracy: ratio(correct, truth.len()),
        macro_precision: per_class.iter().map(|m| m.precision).sum::<f64>() / k,
        macro_recall: per_class.iter().map(|m| m.recall).sum::<f64>() / k,
        macro_f1: per_class.iter().map(|m| m.f1).sum::<f64>() / k,
        per_class,
        confusion,
        confusion_pct,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeRun {
    pub regime: Regime,
    pub training_rows: usize,
    pub metrics: Metrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run: usize,
    pub seed: u64,
    pub train_rows: usize,
    pub test_rows: usize,
    /// Wall-clock time of the generator's training call.
    pub sng_train_ms: Option<f64>,
    pub fidelity_mse: Option<f64>,
    pub regimes: Vec<RegimeRun>,
}

/// Original-row identities used by one run, for leak auditing.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunAudit {
    pub run: usize,
    pub test_ids: Vec<usize>,
    pub generator_training_ids: Vec<usize>,
    pub regime_training_ids: Vec<(Regime, Vec<usize>)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeSummary {
    pub regime: Regime,
    pub runs: usize,
    pub mean_accuracy: f64,
    /// Population standard deviation of accuracy over runs.
    pub std_accuracy: f64,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
    pub fidelity_mse: Option<f64>,
    pub train_time_ms: Option<f64>,
    pub training_rows: usize,
    /// Row-normalized confusion percentages averaged over runs.
    pub confusion_pct: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub classifier: String,
    pub config: ExperimentConfig,
    pub hyper: Hyperparameters,
    pub class_names: Vec<String>,
    pub regimes: Vec<RegimeSummary>,
    pub runs: Vec<RunRecord>,
    #[serde(skip)]
    pub audit: Vec<RunAudit>,
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn population_std(xs: &[f64]) -> f64 {
    let m = mean(xs);
    (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / xs.len() as f64).sqrt()
}

/// Seed for stream `stream` of run seed `base` (splitmix64 finalizer).
fn derive_seed(base: u64, stream: u64) -> u64 {
    let mut z = base.wrapping_add(stream.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Runs the experiment with the classifier named in `config`.
pub fn run_experiment(
    original: &Dataset,
    model_hyper: &Hyperparameters,
    config: &ExperimentConfig,
) -> Result<EvaluationReport> {
    let spec = config.classifier.clone();
    run_experiment_with(original, model_hyper, config, &|| spec.build())
}

/// Runs the experiment with an arbitrary classifier; `make_classifier` is
/// called once per regime per run to get an unfitted instance.
///
/// Run `r` uses seed `config.seed + r` for its split and generator training and
/// a derived seed for sampling. Features are scaled with the training split's
/// ranges; the test split never feeds the generator or any classifier fit.
pub fn run_experiment_with(
    original: &Dataset,
    model_hyper: &Hyperparameters,
    config: &ExperimentConfig,
    make_classifier: &dyn Fn() -> Box<dyn Classifier>,
) -> Result<EvaluationReport> {
    config.validate()?;
    model_hyper.validate()?;
    if original.normalized {
        return Err(SngError::InvalidState(
            "experiments expect a raw (unnormalized) dataset".into(),
        ));
    }
    crate::model::ensure_valid(original)?;

    let num_classes = original.num_classes();
    let needs_synthetic = config.regimes.iter().any(|r| r.uses_synthetic());
    let mut runs = Vec::with_capacity(config.runs);
    let mut audit = Vec::with_capacity(config.runs);

    for run in 0..config.runs {
        let seed = config.seed.wrapping_add(run as u64);
        let split = stratified_split_indices(original, config.train_fraction, seed)?;
        let train_raw = original.subset(&split.train);
        let test_raw = original.subset(&split.test);
        let train = train_raw.normalize()?;
        let test = test_raw.normalize_with(&train_raw.norm_meta)?;
        let test_x: Vec<Vec<f64>> = test.samples.iter().map(|s| s.features.clone()).collect();
        let test_y: Vec<usize> = test.samples.iter().map(|s| s.label).collect();
        let train_x: Vec<Vec<f64>> = train.samples.iter().map(|s| s.features.clone()).collect();
        let train_y: Vec<usize> = train.samples.iter().map(|s| s.label).collect();

        let mut sng_train_ms = None;
        let mut fidelity = None;
        let mut synth_x = Vec::new();
        let mut synth_y = Vec::new();
        if needs_synthetic {
            let hyper = Hyperparameters {
                seed,
                ..model_hyper.clone()
            };
            let started = Instant::now();
            let model = train_supervised(&train, &hyper)?;
            sng_train_ms = Some(started.elapsed().as_secs_f64() * 1e3);
            let batch = generate_with(
                &model,
                config.synthetic_count,
                derive_seed(seed, 1),
                config.neuron_selection,
            )?;
            fidelity = Some(fidelity_mse(&train_raw, &batch)?);
            for s in &batch.samples {
                synth_x.push(normalize_vector(&train_raw.norm_meta, &s.features));
                synth_y.push(s.label);
            }
        }

        let mut regime_runs = Vec::with_capacity(config.regimes.len());
        let mut regime_ids = Vec::with_capacity(config.regimes.len());
        for &regime in &config.regimes {
            let (xs, ys, ids): (Vec<Vec<f64>>, Vec<usize>, Vec<usize>) = match regime {
                Regime::Original => (train_x.clone(), train_y.clone(), split.train.clone()),
                Regime::SyntheticOnly => (synth_x.clone(), synth_y.clone(), Vec::new()),
                Regime::Mixed => (
                    train_x.iter().chain(&synth_x).cloned().collect(),
                    train_y.iter().chain(&synth_y).copied().collect(),
                    split.train.clone(),
                ),
            };
            let mut classifier = make_classifier();
            classifier.fit(&xs, &ys, num_classes)?;
            let predictions = classifier.predict(&test_x)?;
            regime_runs.push(RegimeRun {
                regime,
                training_rows: xs.len(),
                metrics: classify_metrics(&predictions, &test_y, num_classes)?,
            });
            regime_ids.push((regime, ids));
        }

        audit.push(RunAudit {
            run,
            test_ids: split.test.clone(),
            generator_training_ids: if needs_synthetic {
                split.train.clone()
            } else {
                Vec::new()
            },
            regime_training_ids: regime_ids,
        });
        runs.push(RunRecord {
            run,
            seed,
            train_rows: split.train.len(),
            test_rows: split.test.len(),
            sng_train_ms,
            fidelity_mse: fidelity,
            regimes: regime_runs,
        });
    }

    let regimes = config
        .regimes
        .iter()
        .enumerate()
        .map(|(i, &regime)| summarize(regime, i, &runs, num_classes))
        .collect();
    Ok(EvaluationReport {
        classifier: make_classifier().name(),
        config: config.clone(),
        hyper: model_hyper.clone(),
        class_names: original.class_names.clone(),
        regimes,
        runs,
        audit,
    })
}

fn summarize(regime: Regime, slot: usize, runs: &[RunRecord], num_classes: usize) -> RegimeSummary {
    let per_run: Vec<&RegimeRun> = runs.iter().map(|r| &r.regimes[slot]).collect();
    let collect = |f: &dyn Fn(&Metrics) -> f64| -> Vec<f64> { per_run.iter().map(|r| f(&r.metrics)).collect() };
    let accuracies = collect(&|m| m.accuracy);

    let mut confusion_pct = vec![vec![0.0; num_classes]; num_classes];
    for r in &per_run {
        for (acc_row, row) in confusion_pct.iter_mut().zip(&r.metrics.confusion_pct) {
            for (a, v) in acc_row.iter_mut().zip(row) {
                *a += v / per_run.len() as f64;
            }
        }
    }
    let optional_mean = |xs: Vec<Option<f64>>| -> Option<f64> {
        let xs: Option<Vec<f64>> = xs.into_iter().collect();
        xs.map(|v| mean(&v))
    };
    let (fidelity, train_time) = if regime.uses_synthetic() {
        (
            optional_mean(runs.iter().map(|r| r.fidelity_mse).collect()),
            optional_mean(runs.iter().map(|r| r.sng_train_ms).collect()),
        )
    } else {
        (None, None)
    };

    RegimeSummary {
        regime,
        runs: runs.len(),
        mean_accuracy: mean(&accuracies),
        std_accuracy: population_std(&accuracies),
        macro_precision: mean(&collect(&|m| m.macro_precision)),
        macro_recall: mean(&collect(&|m| m.macro_recall)),
        macro_f1: mean(&collect(&|m| m.macro_f1)),
        fidelity_mse: fidelity,
        train_time_ms: train_time,
        training_rows: per_run[0].training_rows,
        confusion_pct,
    }
}

impl EvaluationReport {
    pub fn summary(&self, regime: Regime) -> Option<&RegimeSummary> {
        self.regimes.iter().find(|r| r.regime == regime)
    }

    /// Copy with every wall-clock field cleared, for reproducibility checks.
    pub fn without_timing(&self) -> EvaluationReport {
        let mut out = self.clone();
        for r in &mut out.runs {
            r.sng_train_ms = r.sng_train_ms.map(|_| 0.0);
        }
        for s in &mut out.regimes {
            s.train_time_ms = s.train_time_ms.map(|_| 0.0);
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Plain-text table with one column per regime and one row per metric,
    /// followed by the averaged confusion matrices.
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        let opt = |v: Option<f64>, prec: usize| v.map_or("-".to_string(), |x| format!("{x:.prec$}"));
        let mut rows: Vec<(String, Vec<String>)> = vec![
            ("Accuracy".into(), self.regimes.iter().map(|r| format!("{:.4}", r.mean_accuracy)).collect()),
            ("Std".into(), self.regimes.iter().map(|r| format!("{:.4}", r.std_accuracy)).collect()),
            ("Precision".into(), self.regimes.iter().map(|r| format!("{:.4}", r.macro_precision)).collect()),
            ("Recall".into(), self.regimes.iter().map(|r| format!("{:.4}", r.macro_recall)).collect()),
            ("F1".into(), self.regimes.iter().map(|r| format!("{:.4}", r.macro_f1)).collect()),
            ("MSE".into(), self.regimes.iter().map(|r| opt(r.fidelity_mse, 4)).collect()),
            ("Train runtime (ms)".into(), self.regimes.iter().map(|r| opt(r.train_time_ms, 1)).collect()),
        ];
        rows.push((
            "Training rows".into(),
            self.regimes.iter().map(|r| r.training_rows.to_string()).collect(),
        ));

        let label_w = rows.iter().map(|(l, _)| l.len()).max().unwrap_or(0);
        let col_w: Vec<usize> = self
            .regimes
            .iter()
            .enumerate()
            .map(|(i, r)| rows.iter().map(|(_, v)| v[i].len()).max().unwrap_or(0).max(r.regime.as_str().len()))
            .collect();

        let _ = writeln!(
            out,
            "classifier: {}  runs: {}  train fraction: {}",
            self.classifier, self.config.runs, self.config.train_fraction
        );
        let _ = write!(out, "{:<label_w$}", "Metric");
        for (r, w) in self.regimes.iter().zip(&col_w) {
            let _ = write!(out, "  {:>w$}", r.regime.as_str());
        }
        out.push('\n');
        for (label, values) in &rows {
            let _ = write!(out, "{label:<label_w$}");
            for (v, w) in values.iter().zip(&col_w) {
                let _ = write!(out, "  {v:>w$}");
            }
            out.push('\n');
        }

        let name_w = self.class_names.iter().map(String::len).max().unwrap_or(0);
        for r in &self.regimes {
            let _ = writeln!(out, "\nConfusion matrix (% of true class), {}:", r.regime);
            for (name, row) in self.class_names.iter().zip(&r.confusion_pct) {
                let cells: Vec<String> = row.iter().map(|v| format!("{v:.1}")).collect();
                let _ = writeln!(out, "  {name:<name_w$} [{}]", cells.join(" "));
            }
        }
        out
    }
}
