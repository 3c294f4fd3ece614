//! Downstream classifiers used to score each data regime.
//!
//! Anything implementing [`Classifier`] can be plugged into
//! [`run_experiment_with`](super::run_experiment_with); the built-ins are small and
//! fully deterministic.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SngError};

pub trait Classifier {
    fn name(&self) -> String;

    fn fit(&mut self, features: &[Vec<f64>], labels: &[usize], num_classes: usize) -> Result<()>;

    fn predict(&self, features: &[Vec<f64>]) -> Result<Vec<usize>>;
}

/// Registered built-in classifiers and their settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClassifierSpec {
    Logistic { learning_rate: f64, epochs: usize },
    Knn { k: usize },
    Majority,
}

impl Default for ClassifierSpec {
    fn default() -> Self {
        ClassifierSpec::logistic()
    }
}

impl ClassifierSpec {
    pub const NAMES: [&'static str; 3] = ["logistic", "knn", "majority"];

    pub fn logistic() -> Self {
        ClassifierSpec::Logistic {
            learning_rate: 1.0,
            epochs: 500,
        }
    }

    pub fn knn() -> Self {
        ClassifierSpec::Knn { k: 5 }
    }

    /// Built-in classifier by registry name with default settings.
    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "logistic" => Ok(Self::logistic()),
            "knn" => Ok(Self::knn()),
            "majority" => Ok(ClassifierSpec::Majority),
            other => Err(SngError::InvalidArgument(format!(
                "unknown classifier '{other}' (expected one of {})",
                Self::NAMES.join(", ")
            ))),
        }
    }

    pub fn build(&self) -> Box<dyn Classifier> {
        match *self {
            ClassifierSpec::Logistic {
                learning_rate,
                epochs,
            } => Box::new(LogisticRegression::new(learning_rate, epochs)),
            ClassifierSpec::Knn { k } => Box::new(KNearestNeighbors::new(k)),
            ClassifierSpec::Majority => Box::new(MajorityClass::default()),
        }
    }
}

fn check_training_set(features: &[Vec<f64>], labels: &[usize], num_classes: usize) -> Result<()> {
    if features.is_empty() {
        return Err(SngError::InvalidState("empty training set".into()));
    }
    if features.len() != labels.len() {
        return Err(SngError::InvalidArgument(format!(
            "{} feature rows but {} labels",
            features.len(),
            labels.len()
        )));
    }
    if let Some(&bad) = labels.iter().find(|&&l| l >= num_classes) {
        return Err(SngError::InvalidArgument(format!(
            "label {bad} out of range for {num_classes} classes"
        )));
    }
    Ok(())
}

/// Index of the maximum; ties go to the lowest index.
fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Softmax regression trained by full-batch gradient descent on the mean
/// cross-entropy, starting from zero weights.
#[derive(Debug, Clone)]
pub struct LogisticRegression {
    pub learning_rate: f64,
    pub epochs: usize,
    /// `num_classes` rows of `dim + 1` weights; the last entry is the bias.
    weights: Vec<Vec<f64>>,
}

impl LogisticRegression {
    pub fn new(learning_rate: f64, epochs: usize) -> Self {
        LogisticRegression {
            learning_rate,
            epochs,
            weights: Vec::new(),
        }
    }

    fn probabilities(&self, x: &[f64], out: &mut [f64]) {
        for (o, w) in out.iter_mut().zip(&self.weights) {
            let (bias, coef) = w.split_last().expect("fitted weights");
            *o = bias + coef.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
        }
        let max = out.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for o in out.iter_mut() {
            *o = (*o - max).exp();
            sum += *o;
        }
        for o in out.iter_mut() {
            *o /= sum;
        }
    }
}

impl Classifier for LogisticRegression {
    fn name(&self) -> String {
        "logistic".into()
    }

    fn fit(&mut self, features: &[Vec<f64>], labels: &[usize], num_classes: usize) -> Result<()> {
        check_training_set(features, labels, num_classes)?;
        let dim = features[0].len();
        let n = features.len() as f64;
        self.weights = vec![vec![0.0; dim + 1]; num_classes];
        let mut grad = vec![vec![0.0; dim + 1]; num_classes];
        let mut probs = vec![0.0; num_classes];
        for _ in 0..self.epochs {
            grad.iter_mut().for_each(|g| g.fill(0.0));
            for (x, &y) in features.iter().zip(labels) {
                self.probabilities(x, &mut probs);
                for (c, g) in grad.iter_mut().enumerate() {
                    let err = probs[c] - f64::from(u8::from(c == y));
                    for (gj, xj) in g.iter_mut().zip(x) {
                        *gj += err * xj;
                    }
                    g[dim] += err;
                }
            }
            for (w, g) in self.weights.iter_mut().zip(&grad) {
                for (wj, gj) in w.iter_mut().zip(g) {
                    *wj -= self.learning_rate * gj / n;
                }
            }
        }
        Ok(())
    }

    fn predict(&self, features: &[Vec<f64>]) -> Result<Vec<usize>> {
        if self.weights.is_empty() {
            return Err(SngError::InvalidState("classifier is not fitted".into()));
        }
        let mut probs = vec![0.0; self.weights.len()];
        Ok(features
            .iter()
            .map(|x| {
                self.probabilities(x, &mut probs);
                argmax(&probs)
            })
            .collect())
    }
}

/// Euclidean k-NN with majority voting. Equal distances favor the earlier
/// training row; tied votes favor the lower class index.
#[derive(Debug, Clone)]
pub struct KNearestNeighbors {
    pub k: usize,
    features: Vec<Vec<f64>>,
    labels: Vec<usize>,
    num_classes: usize,
}

impl KNearestNeighbors {
    pub fn new(k: usize) -> Self {
        KNearestNeighbors {
            k,
            features: Vec::new(),
            labels: Vec::new(),
            num_classes: 0,
        }
    }
}

impl Classifier for KNearestNeighbors {
    fn name(&self) -> String {
        format!("knn(k={})", self.k)
    }

    fn fit(&mut self, features: &[Vec<f64>], labels: &[usize], num_classes: usize) -> Result<()> {
        check_training_set(features, labels, num_classes)?;
        if self.k == 0 {
            return Err(SngError::InvalidArgument("k must be positive".into()));
        }
        self.features = features.to_vec();
        self.labels = labels.to_vec();
        self.num_classes = num_classes;
        Ok(())
    }

    fn predict(&self, features: &[Vec<f64>]) -> Result<Vec<usize>> {
        if self.features.is_empty() {
            return Err(SngError::InvalidState("classifier is not fitted".into()));
        }
        let k = self.k.min(self.features.len());
        let mut dist: Vec<(f64, usize)> = Vec::with_capacity(self.features.len());
        let mut votes = vec![0.0; self.num_classes];
        Ok(features
            .iter()
            .map(|q| {
                dist.clear();
                dist.extend(self.features.iter().enumerate().map(|(i, t)| {
                    (t.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum(), i)
                }));
                let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
                if k < dist.len() {
                    dist.select_nth_unstable_by(k - 1, cmp);
                }
                votes.fill(0.0);
                for &(_, i) in &dist[..k] {
                    votes[self.labels[i]] += 1.0;
                }
                argmax(&votes)
            })
            .collect())
    }
}

/// Always predicts the most frequent training class (lowest index on ties).
#[derive(Debug, Clone, Default)]
pub struct MajorityClass {
    class: Option<usize>,
}

impl Classifier for MajorityClass {
    fn name(&self) -> String {
        "majority".into()
    }

    fn fit(&mut self, features: &[Vec<f64>], labels: &[usize], num_classes: usize) -> Result<()> {
        check_training_set(features, labels, num_classes)?;
        let mut counts = vec![0.0; num_classes];
        for &l in labels {
            counts[l] += 1.0;
        }
        self.class = Some(argmax(&counts));
        Ok(())
    }

    fn predict(&self, features: &[Vec<f64>]) -> Result<Vec<usize>> {
        let class = self
            .class
            .ok_or_else(|| SngError::InvalidState("classifier is not fitted".into()))?;
        Ok(vec![class; features.len()])
    }
}
