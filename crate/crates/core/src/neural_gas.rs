//! Rank-based neural gas adaptation.
//!
//! Every neuron moves toward the input by `eta(t) * exp(-k / lambda(t))`, where
//! `k` is the neuron's distance rank (0 = closest). Supervised training keeps one
//! codebook per class and only adapts the codebook of the sample's own class.
//! The schedule index `t` counts epochs.

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SngError};
use crate::model::{ensure_valid, Codebook, Dataset, Finding, FindingKind, Hyperparameters, SngModel};

/// Half-width of the uniform jitter applied when a class has fewer samples than neurons.
pub const INIT_JITTER: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankedNeuron {
    pub neuron_index: usize,
    pub rank: usize,
    /// Euclidean distance to the input.
    pub distance: f64,
}

fn geometric_decay(start: f64, end: f64, t: usize, max_iter: usize) -> Result<f64> {
    if t > max_iter {
        return Err(SngError::InvalidArgument(format!(
            "iteration {t} outside 0..={max_iter}"
        )));
    }
    if max_iter == 0 {
        return Ok(start);
    }
    Ok(start * (end / start).powf(t as f64 / max_iter as f64))
}

/// `eta_start * (eta_end / eta_start)^(t / max_iter)`.
pub fn learning_rate_at(t: usize, hyper: &Hyperparameters) -> Result<f64> {
    geometric_decay(hyper.eta_start, hyper.eta_end, t, hyper.max_iter)
}

/// `lambda_start * (lambda_end / lambda_start)^(t / max_iter)`.
pub fn lambda_at(t: usize, hyper: &Hyperparameters) -> Result<f64> {
    geometric_decay(hyper.lambda_start, hyper.lambda_end, t, hyper.max_iter)
}

/// `exp(-k / lambda)`.
pub fn neighborhood_weight(k: usize, lambda: f64) -> Result<f64> {
    if lambda.is_nan() || lambda <= 0.0 {
        return Err(SngError::InvalidArgument(format!(
            "lambda must be positive, got {lambda}"
        )));
    }
    Ok((-(k as f64) / lambda).exp())
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Scratch buffers reused across updates.
#[derive(Default)]
struct RankScratch {
    dist2: Vec<f64>,
    order: Vec<usize>,
}

impl RankScratch {
    /// Fills `order` with neuron indices sorted by squared distance, ties by index.
    fn rank(&mut self, x: &[f64], codebook: &Codebook) {
        self.dist2.clear();
        self.dist2.extend(codebook.rows().map(|w| squared_distance(x, w)));
        self.order.clear();
        self.order.extend(0..codebook.len());
        let d = &self.dist2;
        self.order
            .sort_unstable_by(|&a, &b| d[a].total_cmp(&d[b]).then(a.cmp(&b)));
    }
}

/// Ranks all neurons of `codebook` by Euclidean distance to `x`. The result is
/// ordered by rank.
pub fn rank_neurons(x: &[f64], codebook: &Codebook) -> Result<Vec<RankedNeuron>> {
    if codebook.is_empty() {
        return Err(SngError::InvalidArgument("codebook is empty".into()));
    }
    if x.len() != codebook.dim() {
        return Err(SngError::InvalidArgument(format!(
            "input has dimension {}, codebook has {}",
            x.len(),
            codebook.dim()
        )));
    }
    let mut scratch = RankScratch::default();
    scratch.rank(x, codebook);
    Ok(scratch
        .order
        .iter()
        .enumerate()
        .map(|(rank, &i)| RankedNeuron {
            neuron_index: i,
            rank,
            distance: scratch.dist2[i].sqrt(),
        })
        .collect())
}

/// One online update of every neuron toward `x`. Returns the squared distance
/// of the best-matching neuron before the update.
fn adapt(codebook: &mut Codebook, x: &[f64], eta: f64, lambda: f64, scratch: &mut RankScratch) -> f64 {
    scratch.rank(x, codebook);
    let best = scratch.dist2[scratch.order[0]];
    for (rank, &i) in scratch.order.iter().enumerate() {
        let step = eta * (-(rank as f64) / lambda).exp();
        for (w, &xv) in codebook.row_mut(i).iter_mut().zip(x) {
            *w += step * (xv - *w);
        }
    }
    best
}

fn best_match_sq(x: &[f64], codebook: &Codebook) -> f64 {
    codebook
        .rows()
        .map(|w| squared_distance(x, w))
        .fold(f64::INFINITY, f64::min)
}

/// Mean squared distance from each point to its nearest prototype.
pub fn quantization_error(points: &[Vec<f64>], codebook: &Codebook) -> f64 {
    if points.is_empty() {
        return 0.0;
    }
    points.iter().map(|p| best_match_sq(p, codebook)).sum::<f64>() / points.len() as f64
}

/// Running loss over one logging batch: mean best-match squared distance seen
/// just before each sample's update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatchLoss {
    pub epoch: usize,
    pub batch: usize,
    pub samples: usize,
    pub running_loss: f64,
}

/// Non-fatal issues with a training request, e.g. classes smaller than the codebook.
pub fn training_findings(dataset: &Dataset, hyper: &Hyperparameters) -> Vec<Finding> {
    dataset
        .class_counts()
        .into_iter()
        .enumerate()
        .filter(|&(_, n)| n > 0 && n < hyper.neurons_per_class)
        .map(|(c, n)| {
            Finding::new(
                FindingKind::FewSamplesForNeurons,
                format!(
                    "class '{}' has {n} samples for {} neurons; initializing with replacement and jitter",
                    dataset.class_names[c], hyper.neurons_per_class
                ),
            )
        })
        .collect()
}

fn init_class_codebook(
    dataset: &Dataset,
    rows: &[usize],
    neurons: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Codebook> {
    let dim = dataset.dim();
    let mut weights = Vec::with_capacity(neurons * dim);
    if rows.len() >= neurons {
        for pick in index::sample(rng, rows.len(), neurons).into_iter() {
            weights.extend_from_slice(&dataset.samples[rows[pick]].features);
        }
    } else {
        for _ in 0..neurons {
            let src = &dataset.samples[rows[rng.gen_range(0..rows.len())]].features;
            for &v in src {
                weights.push(v + rng.gen_range(-INIT_JITTER..=INIT_JITTER));
            }
        }
    }
    Codebook::from_flat(dim, weights)
}

/// Trains one codebook per class on a normalized dataset.
pub fn train_supervised(dataset: &Dataset, hyper: &Hyperparameters) -> Result<SngModel> {
    train_supervised_logged(dataset, hyper, |_| {})
}

/// [`train_supervised`] that also reports a running loss every `batch_size` samples.
pub fn train_supervised_logged(
    dataset: &Dataset,
    hyper: &Hyperparameters,
    on_batch: impl FnMut(&BatchLoss),
) -> Result<SngModel> {
    hyper.validate()?;
    check_training_data(dataset)?;
    ensure_valid(dataset)?;

    let mut rng = ChaCha8Rng::seed_from_u64(hyper.seed);
    let mut codebooks = Vec::with_capacity(dataset.num_classes());
    for class in 0..dataset.num_classes() {
        let rows = dataset.class_indices(class);
        codebooks.push(init_class_codebook(
            dataset,
            &rows,
            hyper.neurons_per_class,
            &mut rng,
        )?);
    }
    run_epochs(dataset, hyper, codebooks, &mut rng, on_batch)
}

/// Continues training from caller-supplied codebooks (one per class, any
/// neuron count). Classes without samples are allowed and keep their codebook.
/// The seed drives only the presentation order here.
pub fn train_supervised_from(
    dataset: &Dataset,
    hyper: &Hyperparameters,
    initial: Vec<Codebook>,
) -> Result<SngModel> {
    hyper.validate()?;
    check_training_data(dataset)?;
    let findings: Vec<Finding> = crate::model::validate_dataset(dataset)
        .into_iter()
        .filter(|f| f.kind != FindingKind::EmptyClass)
        .collect();
    if let Some(f) = findings.first() {
        return Err(SngError::Data(f.message.clone()));
    }
    if dataset.is_empty() {
        return Err(SngError::Data("no training samples".into()));
    }
    if initial.len() != dataset.num_classes() {
        return Err(SngError::InvalidArgument(format!(
            "{} initial codebooks for {} classes",
            initial.len(),
            dataset.num_classes()
        )));
    }
    if initial.iter().any(|cb| cb.is_empty() || cb.dim() != dataset.dim()) {
        return Err(SngError::InvalidArgument(
            "initial codebooks must be non-empty and match the feature dimension".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(hyper.seed);
    run_epochs(dataset, hyper, initial, &mut rng, |_| {})
}

fn check_training_data(dataset: &Dataset) -> Result<()> {
    if !dataset.normalized {
        return Err(SngError::InvalidState(
            "training requires a normalized dataset".into(),
        ));
    }
    if dataset.dim() == 0 {
        return Err(SngError::Data("dataset has no features".into()));
    }
    Ok(())
}

fn run_epochs(
    dataset: &Dataset,
    hyper: &Hyperparameters,
    mut codebooks: Vec<Codebook>,
    rng: &mut ChaCha8Rng,
    mut on_batch: impl FnMut(&BatchLoss),
) -> Result<SngModel> {
    let mut order: Vec<usize> = (0..dataset.len()).collect();
    let mut scratch = RankScratch::default();
    let mut loss_history = Vec::with_capacity(hyper.max_iter);
    for epoch in 0..hyper.max_iter {
        let eta = learning_rate_at(epoch, hyper)?;
        let lambda = lambda_at(epoch, hyper)?;
        order.shuffle(rng);

        let mut batch_sum = 0.0;
        let mut batch_len = 0;
        let mut batch = 0;
        for &row in &order {
            let sample = &dataset.samples[row];
            batch_sum += adapt(
                &mut codebooks[sample.label],
                &sample.features,
                eta,
                lambda,
                &mut scratch,
            );
            batch_len += 1;
            if batch_len == hyper.batch_size {
                on_batch(&BatchLoss {
                    epoch,
                    batch,
                    samples: batch_len,
                    running_loss: batch_sum / batch_len as f64,
                });
                batch += 1;
                batch_sum = 0.0;
                batch_len = 0;
            }
        }
        if batch_len > 0 {
            on_batch(&BatchLoss {
                epoch,
                batch,
                samples: batch_len,
                running_loss: batch_sum / batch_len as f64,
            });
        }

        // epoch-end pass, in row order
        let total: f64 = dataset
            .samples
            .iter()
            .map(|s| best_match_sq(&s.features, &codebooks[s.label]))
            .sum();
        loss_history.push(total / dataset.len() as f64);
    }

    Ok(SngModel {
        hyper: hyper.clone(),
        class_names: dataset.class_names.clone(),
        feature_names: dataset.feature_names.clone(),
        codebooks,
        norm_meta: dataset.norm_meta.clone(),
        loss_history,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnsupervisedFit {
    pub codebook: Codebook,
    /// Quantization error after each epoch.
    pub loss_history: Vec<f64>,
}

/// Single-codebook neural gas over unlabeled points.
pub fn train_unsupervised(
    points: &[Vec<f64>],
    n_neurons: usize,
    hyper: &Hyperparameters,
) -> Result<UnsupervisedFit> {
    train_unsupervised_observed(points, n_neurons, hyper, |_, _| {})
}

/// [`train_unsupervised`] that hands the codebook to `observer` after
/// initialization (epoch 0) and after every completed epoch.
///
/// Neurons start uniformly distributed over the bounding box of the points.
pub fn train_unsupervised_observed(
    points: &[Vec<f64>],
    n_neurons: usize,
    hyper: &Hyperparameters,
    mut observer: impl FnMut(usize, &Codebook),
) -> Result<UnsupervisedFit> {
    hyper.validate()?;
    if n_neurons == 0 {
        return Err(SngError::InvalidArgument("n_neurons must be positive".into()));
    }
    let dim = match points.first() {
        Some(p) if !p.is_empty() => p.len(),
        Some(_) => return Err(SngError::Data("points have no features".into())),
        None => return Err(SngError::Data("no points to fit".into())),
    };
    for (row, p) in points.iter().enumerate() {
        if p.len() != dim {
            return Err(SngError::Data(format!(
                "point {row} has dimension {}, expected {dim}",
                p.len()
            )));
        }
        if p.iter().any(|v| !v.is_finite()) {
            return Err(SngError::Data(format!("point {row} has a non-finite value")));
        }
    }

    let mut lo = vec![f64::INFINITY; dim];
    let mut hi = vec![f64::NEG_INFINITY; dim];
    for p in points {
        for j in 0..dim {
            lo[j] = lo[j].min(p[j]);
            hi[j] = hi[j].max(p[j]);
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(hyper.seed);
    let mut weights = Vec::with_capacity(n_neurons * dim);
    for _ in 0..n_neurons {
        for j in 0..dim {
            weights.push(lo[j] + rng.gen::<f64>() * (hi[j] - lo[j]));
        }
    }
    let mut codebook = Codebook::from_flat(dim, weights)?;
    observer(0, &codebook);

    let mut order: Vec<usize> = (0..points.len()).collect();
    let mut scratch = RankScratch::default();
    let mut loss_history = Vec::with_capacity(hyper.max_iter);
    for epoch in 0..hyper.max_iter {
        let eta = learning_rate_at(epoch, hyper)?;
        let lambda = lambda_at(epoch, hyper)?;
        order.shuffle(&mut rng);
        for &row in &order {
            adapt(&mut codebook, &points[row], eta, lambda, &mut scratch);
        }
        loss_history.push(quantization_error(points, &codebook));
        observer(epoch + 1, &codebook);
    }
    Ok(UnsupervisedFit {
        codebook,
        loss_history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Sample;
    use proptest::prelude::*;

    fn cb(rows: Vec<Vec<f64>>) -> Codebook {
        Codebook::from_rows(rows).unwrap()
    }

    fn hyper(max_iter: usize) -> Hyperparameters {
        Hyperparameters {
            max_iter,
            ..Default::default()
        }
    }

    #[test]
    fn learning_rate_endpoints_and_midpoint() {
        let h = hyper(100);
        assert_eq!(learning_rate_at(0, &h).unwrap(), h.eta_start);
        let end = learning_rate_at(100, &h).unwrap();
        assert!((end - h.eta_end).abs() <= 1e-12 * h.eta_end);
        let mid = learning_rate_at(50, &h).unwrap();
        let expected = (h.eta_start * h.eta_end).sqrt();
        assert!((mid - expected).abs() <= 1e-12 * expected);
        assert!(learning_rate_at(101, &h).is_err());
    }

    #[test]
    fn lambda_midpoint_is_geometric_mean() {
        let h = Hyperparameters {
            lambda_start: 5.0,
            lambda_end: 0.05,
            max_iter: 100,
            ..Default::default()
        };
        assert_eq!(lambda_at(0, &h).unwrap(), 5.0);
        assert!((lambda_at(100, &h).unwrap() - 0.05).abs() < 1e-12 * 0.05);
        assert!((lambda_at(50, &h).unwrap() - 0.5).abs() < 1e-12 * 0.5);
        assert!(lambda_at(101, &h).is_err());
    }

    #[test]
    fn neighborhood_weight_values() {
        assert_eq!(neighborhood_weight(0, 0.3).unwrap(), 1.0);
        let at_lambda = neighborhood_weight(2, 2.0).unwrap();
        assert!((at_lambda - 0.36787944117144233).abs() < 1e-15);
        // e^-3 by its series, independent of exp()
        let series: f64 = (0..40)
            .scan(1.0f64, |term, n| {
                let out = *term;
                *term *= -3.0 / (n as f64 + 1.0);
                Some(out)
            })
            .sum();
        let w = neighborhood_weight(3, 1.0).unwrap();
        assert!((w - series).abs() < 1e-12);
        assert!((w - 0.0498).abs() < 1e-4);
        assert!(neighborhood_weight(1, 0.0).is_err());
        assert!(neighborhood_weight(1, -1.0).is_err());
    }

    #[test]
    fn rank_neurons_orders_by_distance() {
        let ranks = rank_neurons(&[0.0, 0.0], &cb(vec![vec![1.0, 0.0], vec![0.0, 0.0], vec![5.0, 5.0]]))
            .unwrap();
        let by_neuron = |i: usize| ranks.iter().find(|r| r.neuron_index == i).unwrap().rank;
        assert_eq!((by_neuron(1), by_neuron(0), by_neuron(2)), (0, 1, 2));
        assert_eq!(ranks[0].distance, 0.0);
        assert_eq!(ranks[1].distance, 1.0);
        assert!((ranks[2].distance - 50f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn rank_ties_go_to_lower_index() {
        let rows = vec![
            vec![9.0], vec![8.0], vec![1.0], vec![7.0], vec![6.0], vec![-1.0],
        ];
        let ranks = rank_neurons(&[0.0], &cb(rows)).unwrap();
        assert_eq!(ranks[0].neuron_index, 2);
        assert_eq!(ranks[1].neuron_index, 5);
    }

    #[test]
    fn rank_neurons_rejects_bad_input() {
        assert!(rank_neurons(&[0.0], &cb(vec![vec![1.0, 2.0]])).is_err());
        assert!(rank_neurons(&[0.0], &Codebook::from_flat(1, vec![]).unwrap()).is_err());
    }

    fn one_class(points: Vec<Vec<f64>>) -> Dataset {
        let dim = points[0].len();
        Dataset::new(
            points.into_iter().map(|p| Sample::new(p, 0)).collect(),
            vec!["a".into()],
            (0..dim).map(|i| format!("f{i}")).collect(),
        )
        .normalize()
        .unwrap()
    }

    #[test]
    fn zero_epochs_returns_initialization() {
        let ds = one_class(vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![0.5, 0.2]]);
        let h = Hyperparameters {
            neurons_per_class: 3,
            max_iter: 0,
            ..Default::default()
        };
        let model = train_supervised(&ds, &h).unwrap();
        assert!(model.loss_history.is_empty());
        let mut rows = model.codebooks[0].to_rows();
        rows.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut data: Vec<Vec<f64>> = ds.samples.iter().map(|s| s.features.clone()).collect();
        data.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(rows, data);
    }

    #[test]
    fn small_class_initializes_with_jitter() {
        let ds = one_class(vec![vec![0.0, 0.0], vec![1.0, 1.0]]);
        let h = Hyperparameters {
            neurons_per_class: 5,
            max_iter: 0,
            ..Default::default()
        };
        assert_eq!(training_findings(&ds, &h).len(), 1);
        let model = train_supervised(&ds, &h).unwrap();
        assert_eq!(model.codebooks[0].len(), 5);
        for row in model.codebooks[0].rows() {
            let near = ds.samples.iter().any(|s| {
                s.features
                    .iter()
                    .zip(row)
                    .all(|(a, b)| (a - b).abs() <= INIT_JITTER)
            });
            assert!(near);
        }
    }

    #[test]
    fn training_requires_normalized_data() {
        let ds = Dataset::new(
            vec![Sample::new(vec![1.0], 0)],
            vec!["a".into()],
            vec!["x".into()],
        );
        assert!(matches!(
            train_supervised(&ds, &hyper(1)),
            Err(SngError::InvalidState(_))
        ));
    }

    #[test]
    fn empty_class_is_rejected() {
        let mut ds = one_class(vec![vec![0.0], vec![1.0]]);
        ds.class_names.push("b".into());
        assert!(matches!(train_supervised(&ds, &hyper(1)), Err(SngError::Data(_))));
    }

    #[test]
    fn batch_log_covers_every_sample() {
        let ds = one_class((0..70).map(|i| vec![i as f64 / 69.0]).collect());
        let h = Hyperparameters {
            max_iter: 3,
            batch_size: 32,
            ..Default::default()
        };
        let mut logs = Vec::new();
        train_supervised_logged(&ds, &h, |b| logs.push(*b)).unwrap();
        assert_eq!(logs.len(), 9);
        assert_eq!(logs.iter().map(|b| b.samples).sum::<usize>(), 210);
        assert_eq!(logs[2].samples, 6);
    }

    #[test]
    fn single_point_single_neuron_snaps_to_point() {
        let h = Hyperparameters {
            neurons_per_class: 1,
            max_iter: 1,
            eta_start: 1.0,
            eta_end: 1.0,
            lambda_start: 1e6,
            lambda_end: 1e6,
            ..Default::default()
        };
        let fit = train_unsupervised(&[vec![0.3, -2.0]], 1, &h).unwrap();
        assert_eq!(fit.codebook.row(0), &[0.3, -2.0]);
    }

    #[test]
    fn single_neuron_moves_toward_mean() {
        let points: Vec<Vec<f64>> = (0..50)
            .map(|i| vec![(i % 7) as f64, (i % 5) as f64 * 2.0])
            .collect();
        let mean: Vec<f64> = (0..2)
            .map(|j| points.iter().map(|p| p[j]).sum::<f64>() / points.len() as f64)
            .collect();
        let h = Hyperparameters {
            neurons_per_class: 1,
            max_iter: 50,
            lambda_start: 0.5,
            ..Default::default()
        };
        let mut initial = None;
        let fit = train_unsupervised_observed(&points, 1, &h, |e, c| {
            if e == 0 {
                initial = Some(c.row(0).to_vec());
            }
        })
        .unwrap();
        let dist = |w: &[f64]| squared_distance(w, &mean).sqrt();
        assert!(dist(fit.codebook.row(0)) < dist(&initial.unwrap()));
    }

    #[test]
    fn unsupervised_rejects_empty_input() {
        assert!(train_unsupervised(&[], 3, &hyper(1)).is_err());
        assert!(train_unsupervised(&[vec![1.0]], 0, &hyper(1)).is_err());
        assert!(train_unsupervised(&[vec![1.0], vec![1.0, 2.0]], 1, &hyper(1)).is_err());
    }

    proptest! {
        #[test]
        fn ranks_form_a_permutation(
            x in prop::collection::vec(-10.0f64..10.0, 3),
            rows in prop::collection::vec(prop::collection::vec(-10.0f64..10.0, 3), 1..20),
        ) {
            let k = rows.len();
            let ranks = rank_neurons(&x, &cb(rows)).unwrap();
            let mut seen: Vec<usize> = ranks.iter().map(|r| r.rank).collect();
            seen.sort_unstable();
            prop_assert_eq!(seen, (0..k).collect::<Vec<_>>());
            let mut idx: Vec<usize> = ranks.iter().map(|r| r.neuron_index).collect();
            idx.sort_unstable();
            prop_assert_eq!(idx, (0..k).collect::<Vec<_>>());
            for w in ranks.windows(2) {
                prop_assert!(w[0].distance <= w[1].distance);
            }
        }

        #[test]
        fn schedules_are_monotone(
            start in 0.01f64..10.0, ratio in 0.001f64..0.999, max_iter in 1usize..500,
            a in 0usize..500, b in 0usize..500,
        ) {
            let (t1, t2) = (a.min(b) % (max_iter + 1), a.max(b) % (max_iter + 1));
            prop_assume!(t1 < t2);
            let h = Hyperparameters {
                eta_start: start, eta_end: start * ratio,
                lambda_start: start * 3.0, lambda_end: start * 3.0 * ratio,
                max_iter, ..Default::default()
            };
            prop_assert!(learning_rate_at(t1, &h).unwrap() > learning_rate_at(t2, &h).unwrap());
            prop_assert!(lambda_at(t1, &h).unwrap() > lambda_at(t2, &h).unwrap());
        }

        #[test]
        fn prototypes_stay_inside_unit_cube(
            points in prop::collection::vec(prop::collection::vec(0.0f64..=1.0, 2), 4..30),
            seed in 0u64..1000,
        ) {
            let n = points.len();
            let samples: Vec<Sample> = points.into_iter().enumerate()
                .map(|(i, p)| Sample::new(p, i % 2)).collect();
            let ds = Dataset {
                norm_meta: vec![crate::model::FeatureRange::new(0.0, 1.0); 2],
                samples,
                class_names: vec!["a".into(), "b".into()],
                feature_names: vec!["x".into(), "y".into()],
                normalized: true,
            };
            let h = Hyperparameters {
                neurons_per_class: (n / 2).min(4), max_iter: 5, eta_start: 1.0, seed,
                ..Default::default()
            };
            let model = train_supervised(&ds, &h).unwrap();
            for c in &model.codebooks {
                prop_assert!(c.as_flat().iter().all(|v| (0.0..=1.0).contains(v)));
            }
        }
    }
}
