//! Domain types shared by training, synthesis and evaluation.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SngError};

/// Format tag written into every serialized model.
pub const MODEL_FORMAT_VERSION: &str = "sng-model/1";

/// One labeled feature vector. `label` indexes into the owning dataset's class list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub features: Vec<f64>,
    pub label: usize,
}

impl Sample {
    pub fn new(features: Vec<f64>, label: usize) -> Self {
        Sample { features, label }
    }
}

/// Observed raw range of one feature, used for min-max scaling to `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureRange {
    pub min: f64,
    pub max: f64,
}

impl FeatureRange {
    pub fn new(min: f64, max: f64) -> Self {
        FeatureRange { min, max }
    }

    pub fn span(&self) -> f64 {
        self.max - self.min
    }

    /// Constant features (zero span) map to 0.
    pub fn normalize(&self, value: f64) -> f64 {
        let span = self.span();
        if span > 0.0 {
            (value - self.min) / span
        } else {
            0.0
        }
    }

    pub fn denormalize(&self, value: f64) -> f64 {
        self.min + value * self.span()
    }
}

/// Per-feature ranges of a set of samples. Empty input yields `[0, 0]` ranges.
pub fn compute_norm_meta(samples: &[Sample], dim: usize) -> Vec<FeatureRange> {
    let mut meta = vec![
        FeatureRange {
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
        };
        dim
    ];
    for sample in samples {
        for (range, &v) in meta.iter_mut().zip(&sample.features) {
            if v.is_finite() {
                range.min = range.min.min(v);
                range.max = range.max.max(v);
            }
        }
    }
    for range in &mut meta {
        if range.min > range.max {
            *range = FeatureRange::new(0.0, 0.0);
        }
    }
    meta
}

/// Labeled feature matrix plus the bookkeeping needed to move between raw and
/// normalized feature units.
///
/// `norm_meta` always describes raw units. When `normalized` is set the sample
/// features have already been scaled with it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub samples: Vec<Sample>,
    pub class_names: Vec<String>,
    pub feature_names: Vec<String>,
    pub norm_meta: Vec<FeatureRange>,
    pub normalized: bool,
}

impl Dataset {
    /// Builds a raw-unit dataset and computes its `norm_meta` from the samples.
    pub fn new(samples: Vec<Sample>, class_names: Vec<String>, feature_names: Vec<String>) -> Self {
        let norm_meta = compute_norm_meta(&samples, feature_names.len());
        Dataset {
            samples,
            class_names,
            feature_names,
            norm_meta,
            normalized: false,
        }
    }

    pub fn dim(&self) -> usize {
        self.feature_names.len()
    }

    pub fn num_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.num_classes()];
        for s in &self.samples {
            if let Some(c) = counts.get_mut(s.label) {
                *c += 1;
            }
        }
        counts
    }

    /// Row indices of every sample with the given label, in dataset order.
    pub fn class_indices(&self, class: usize) -> Vec<usize> {
        self.samples
            .iter()
            .enumerate()
            .filter(|(_, s)| s.label == class)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn class_index(&self, name: &str) -> Option<usize> {
        self.class_names.iter().position(|c| c == name)
    }

    /// Scales a raw dataset with its own ranges.
    pub fn normalize(&self) -> Result<Dataset> {
        self.normalize_with(&self.norm_meta)
    }

    /// Scales a raw dataset with externally supplied ranges (e.g. the training
    /// split's). Values outside those ranges map outside `[0, 1]`.
    pub fn normalize_with(&self, meta: &[FeatureRange]) -> Result<Dataset> {
        if self.normalized {
            return Err(SngError::InvalidState("dataset is already normalized".into()));
        }
        if meta.len() != self.dim() {
            return Err(SngError::InvalidArgument(format!(
                "norm_meta has {} features, dataset has {}",
                meta.len(),
                self.dim()
            )));
        }
        let samples = self
            .samples
            .iter()
            .map(|s| Sample::new(normalize_vector(meta, &s.features), s.label))
            .collect();
        Ok(Dataset {
            samples,
            class_names: self.class_names.clone(),
            feature_names: self.feature_names.clone(),
            norm_meta: meta.to_vec(),
            normalized: true,
        })
    }

    pub fn denormalize(&self) -> Result<Dataset> {
        if !self.normalized {
            return Err(SngError::InvalidState("dataset is not normalized".into()));
        }
        let samples = self
            .samples
            .iter()
            .map(|s| Sample::new(denormalize_vector(&self.norm_meta, &s.features), s.label))
            .collect();
        Ok(Dataset {
            samples,
            class_names: self.class_names.clone(),
            feature_names: self.feature_names.clone(),
            norm_meta: self.norm_meta.clone(),
            normalized: false,
        })
    }

    /// Dataset made of the given rows, keeping the class and feature lists.
    /// Raw subsets get fresh ranges; normalized subsets keep the parent's.
    pub fn subset(&self, rows: &[usize]) -> Dataset {
        let samples: Vec<Sample> = rows.iter().map(|&i| self.samples[i].clone()).collect();
        let norm_meta = if self.normalized {
            self.norm_meta.clone()
        } else {
            compute_norm_meta(&samples, self.dim())
        };
        Dataset {
            samples,
            class_names: self.class_names.clone(),
            feature_names: self.feature_names.clone(),
            norm_meta,
            normalized: self.normalized,
        }
    }

    /// Features of every sample, in normalized units.
    pub fn normalized_features(&self) -> Vec<Vec<f64>> {
        if self.normalized {
            self.samples.iter().map(|s| s.features.clone()).collect()
        } else {
            self.samples
                .iter()
                .map(|s| normalize_vector(&self.norm_meta, &s.features))
                .collect()
        }
    }
}

pub fn normalize_vector(meta: &[FeatureRange], raw: &[f64]) -> Vec<f64> {
    meta.iter().zip(raw).map(|(r, &v)| r.normalize(v)).collect()
}

pub fn denormalize_vector(meta: &[FeatureRange], scaled: &[f64]) -> Vec<f64> {
    meta.iter().zip(scaled).map(|(r, &v)| r.denormalize(v)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FindingKind {
    NonFinite,
    EmptyClass,
    DimensionMismatch,
    InvalidLabel,
    InvalidRange,
    RejectedRow,
    FewSamplesForNeurons,
    UnderAllocatedClass,
}

/// A non-fatal validation result. Row and column are zero-based when present.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Finding {
    pub kind: FindingKind,
    pub row: Option<usize>,
    pub column: Option<usize>,
    pub message: String,
}

impl Finding {
    pub fn new(kind: FindingKind, message: impl Into<String>) -> Self {
        Finding {
            kind,
            row: None,
            column: None,
            message: message.into(),
        }
    }

    pub fn at(mut self, row: Option<usize>, column: Option<usize>) -> Self {
        self.row = row;
        self.column = column;
        self
    }
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

/// Checks every dataset invariant and reports one finding per violation.
pub fn validate_dataset(dataset: &Dataset) -> Vec<Finding> {
    let mut findings = Vec::new();
    let dim = dataset.dim();

    if dataset.norm_meta.len() != dim {
        findings.push(Finding::new(
            FindingKind::DimensionMismatch,
            format!(
                "norm_meta has {} entries but there are {} features",
                dataset.norm_meta.len(),
                dim
            ),
        ));
    }
    for (col, range) in dataset.norm_meta.iter().enumerate() {
        if range.min.is_nan() || range.max.is_nan() || range.min > range.max {
            findings.push(
                Finding::new(
                    FindingKind::InvalidRange,
                    format!("feature {col}: min {} exceeds max {}", range.min, range.max),
                )
                .at(None, Some(col)),
            );
        }
    }

    for (row, sample) in dataset.samples.iter().enumerate() {
        if sample.features.len() != dim {
            findings.push(
                Finding::new(
                    FindingKind::DimensionMismatch,
                    format!("row {row}: {} features, expected {dim}", sample.features.len()),
                )
                .at(Some(row), None),
            );
        }
        for (col, v) in sample.features.iter().enumerate() {
            if !v.is_finite() {
                findings.push(
                    Finding::new(
                        FindingKind::NonFinite,
                        format!("row {row}, column {col}: non-finite value {v}"),
                    )
                    .at(Some(row), Some(col)),
                );
            }
        }
        if sample.label >= dataset.num_classes() {
            findings.push(
                Finding::new(
                    FindingKind::InvalidLabel,
                    format!("row {row}: label {} out of range", sample.label),
                )
                .at(Some(row), None),
            );
        }
    }

    for (class, count) in dataset.class_counts().into_iter().enumerate() {
        if count == 0 {
            findings.push(Finding::new(
                FindingKind::EmptyClass,
                format!("empty class '{}'", dataset.class_names[class]),
            ));
        }
    }
    findings
}

/// Turns a non-empty finding list into a data error.
pub fn ensure_valid(dataset: &Dataset) -> Result<()> {
    let findings = validate_dataset(dataset);
    if findings.is_empty() {
        Ok(())
    } else {
        let msgs: Vec<String> = findings.iter().map(|f| f.message.clone()).collect();
        Err(SngError::Data(msgs.join("; ")))
    }
}

/// Training and generation settings. Schedules decay geometrically from
/// `*_start` to `*_end` over `max_iter` epochs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Hyperparameters {
    pub neurons_per_class: usize,
    pub max_iter: usize,
    pub eta_start: f64,
    pub eta_end: f64,
    pub lambda_start: f64,
    pub lambda_end: f64,
    /// Standard deviation of the generation noise, in normalized feature units.
    pub noise_level: f64,
    /// Granularity of the intra-epoch running-loss log; does not affect updates.
    pub batch_size: usize,
    pub seed: u64,
    pub clip_to_range: bool,
}

impl Default for Hyperparameters {
    fn default() -> Self {
        Hyperparameters {
            neurons_per_class: 10,
            max_iter: 100,
            eta_start: 0.5,
            eta_end: 0.01,
            lambda_start: 5.0,
            lambda_end: 0.01,
            noise_level: 0.1,
            batch_size: 32,
            seed: 0,
            clip_to_range: true,
        }
    }
}

impl Hyperparameters {
    /// Defaults for `n` neurons per class, with `lambda_start = n / 2`.
    pub fn with_neurons(n: usize) -> Self {
        Hyperparameters {
            neurons_per_class: n,
            lambda_start: default_lambda_start(n),
            ..Default::default()
        }
    }

    /// `max_iter = 0` is accepted and means "initialize only".
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(SngError::InvalidArgument(msg));
        if self.neurons_per_class == 0 {
            return bad("neurons_per_class must be positive".into());
        }
        if self.batch_size == 0 {
            return bad("batch_size must be positive".into());
        }
        for (name, v) in [
            ("eta_start", self.eta_start),
            ("eta_end", self.eta_end),
            ("lambda_start", self.lambda_start),
            ("lambda_end", self.lambda_end),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("{name} must be a positive finite number, got {v}"));
            }
        }
        if self.eta_end > self.eta_start {
            return bad(format!(
                "eta_end ({}) must not exceed eta_start ({})",
                self.eta_end, self.eta_start
            ));
        }
        if self.lambda_end > self.lambda_start {
            return bad(format!(
                "lambda_end ({}) must not exceed lambda_start ({})",
                self.lambda_end, self.lambda_start
            ));
        }
        if !(self.noise_level.is_finite() && self.noise_level >= 0.0) {
            return bad(format!("noise_level must be >= 0, got {}", self.noise_level));
        }
        Ok(())
    }
}

pub fn default_lambda_start(neurons: usize) -> f64 {
    neurons as f64 / 2.0
}

/// Row-major matrix of prototype vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct Codebook {
    dim: usize,
    weights: Vec<f64>,
}

impl Codebook {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != dim) {
            return Err(SngError::InvalidArgument(
                "codebook rows have inconsistent dimensions".into(),
            ));
        }
        Ok(Codebook {
            dim,
            weights: rows.into_iter().flatten().collect(),
        })
    }

    pub fn from_flat(dim: usize, weights: Vec<f64>) -> Result<Self> {
        if dim == 0 && !weights.is_empty() || dim > 0 && !weights.len().is_multiple_of(dim) {
            return Err(SngError::InvalidArgument(format!(
                "{} weights do not form rows of length {dim}",
                weights.len()
            )));
        }
        Ok(Codebook { dim, weights })
    }

    pub fn len(&self) -> usize {
        self.weights.len().checked_div(self.dim).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.weights[i * self.dim..(i + 1) * self.dim]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.weights[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.weights.chunks_exact(self.dim.max(1))
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.weights
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.rows().map(<[f64]>::to_vec).collect()
    }
}

impl TryFrom<Vec<Vec<f64>>> for Codebook {
    type Error = SngError;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        Codebook::from_rows(rows)
    }
}

impl From<Codebook> for Vec<Vec<f64>> {
    fn from(cb: Codebook) -> Self {
        cb.to_rows()
    }
}

/// Trained per-class codebooks. `codebooks[c]` holds the prototypes of
/// `class_names[c]`, in normalized feature units.
#[derive(Debug, Clone, PartialEq)]
pub struct SngModel {
    pub hyper: Hyperparameters,
    pub class_names: Vec<String>,
    pub feature_names: Vec<String>,
    pub codebooks: Vec<Codebook>,
    pub norm_meta: Vec<FeatureRange>,
    pub loss_history: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct ClassCodebook {
    class: String,
    prototypes: Codebook,
}

#[derive(Serialize, Deserialize)]
struct ModelDocument {
    version: String,
    hyperparameters: Hyperparameters,
    class_names: Vec<String>,
    feature_names: Vec<String>,
    codebooks: Vec<ClassCodebook>,
    norm_meta: Vec<FeatureRange>,
    loss_history: Vec<f64>,
}

impl SngModel {
    pub fn dim(&self) -> usize {
        self.feature_names.len()
    }

    pub fn num_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = ModelDocument {
            version: MODEL_FORMAT_VERSION.to_string(),
            hyperparameters: self.hyper.clone(),
            class_names: self.class_names.clone(),
            feature_names: self.feature_names.clone(),
            codebooks: self
                .class_names
                .iter()
                .zip(&self.codebooks)
                .map(|(class, cb)| ClassCodebook {
                    class: class.clone(),
                    prototypes: cb.clone(),
                })
                .collect(),
            norm_meta: self.norm_meta.clone(),
            loss_history: self.loss_history.clone(),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ModelDocument = serde_json::from_str(text)?;
        if doc.version != MODEL_FORMAT_VERSION {
            return Err(SngError::Data(format!(
                "unsupported model version '{}', expected '{MODEL_FORMAT_VERSION}'",
                doc.version
            )));
        }
        let dim = doc.feature_names.len();
        if doc.norm_meta.len() != dim {
            return Err(SngError::Data(format!(
                "norm_meta has {} entries for {dim} features",
                doc.norm_meta.len()
            )));
        }
        let mut codebooks = Vec::with_capacity(doc.class_names.len());
        for class in &doc.class_names {
            let entry = doc
                .codebooks
                .iter()
                .find(|e| &e.class == class)
                .ok_or_else(|| SngError::Data(format!("no codebook for class '{class}'")))?;
            let cb = &entry.prototypes;
            if !cb.is_empty() && cb.dim() != dim {
                return Err(SngError::Data(format!(
                    "codebook for class '{class}' has dimension {}, expected {dim}",
                    cb.dim()
                )));
            }
            if cb.as_flat().iter().any(|v| !v.is_finite()) {
                return Err(SngError::Data(format!(
                    "codebook for class '{class}' has non-finite weights"
                )));
            }
            codebooks.push(cb.clone());
        }
        Ok(SngModel {
            hyper: doc.hyperparameters,
            class_names: doc.class_names,
            feature_names: doc.feature_names,
            codebooks,
            norm_meta: doc.norm_meta,
            loss_history: doc.loss_history,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut text = self.to_json()?;
        text.push('\n');
        std::fs::write(path, text).map_err(|e| SngError::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| SngError::io(path, e))?;
        Self::from_json(&text)
    }
}

/// Where a synthetic sample came from: class, source neuron and the position of
/// the draw in the generator's sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub class: usize,
    pub neuron: usize,
    pub draw: u64,
}

/// Generated samples in raw feature units, with one provenance record per sample.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticBatch {
    pub samples: Vec<Sample>,
    pub provenance: Vec<Provenance>,
    pub class_names: Vec<String>,
    pub feature_names: Vec<String>,
}

impl SyntheticBatch {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.class_names.len()];
        for s in &self.samples {
            counts[s.label] += 1;
        }
        counts
    }

    /// Raw-unit dataset with the batch's class and feature lists.
    pub fn to_dataset(&self) -> Dataset {
        Dataset::new(
            self.samples.clone(),
            self.class_names.clone(),
            self.feature_names.clone(),
        )
    }
}
