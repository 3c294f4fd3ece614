//! Class-conditional sampling from trained codebooks: a prototype of the
//! requested class plus isotropic Gaussian noise in normalized units.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SngError};
use crate::model::{
    denormalize_vector, normalize_vector, Dataset, Finding, FindingKind, Provenance, Sample,
    SngModel, SyntheticBatch,
};

/// How the source prototype is picked for each synthetic sample.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NeuronSelection {
    #[default]
    Uniform,
    RoundRobin,
}

/// Equal per-class counts; the remainder goes one each to the lowest class indices.
pub fn allocate(total: usize, num_classes: usize) -> Vec<usize> {
    if num_classes == 0 {
        return Vec::new();
    }
    let base = total / num_classes;
    let extra = total % num_classes;
    (0..num_classes)
        .map(|c| base + usize::from(c < extra))
        .collect()
}

/// Warns when `total` is too small to give every class at least one sample.
pub fn allocation_findings(total: usize, model: &SngModel) -> Vec<Finding> {
    allocate(total, model.num_classes())
        .into_iter()
        .enumerate()
        .filter(|&(_, n)| n == 0)
        .map(|(c, _)| {
            Finding::new(
                FindingKind::UnderAllocatedClass,
                format!(
                    "class '{}' receives no samples ({total} requested for {} classes)",
                    model.class_names[c],
                    model.num_classes()
                ),
            )
        })
        .collect()
}

pub fn generate(model: &SngModel, total_samples: usize, seed: u64) -> Result<SyntheticBatch> {
    generate_with(model, total_samples, seed, NeuronSelection::Uniform)
}

/// Draws `total_samples` synthetic samples, class by class in index order.
///
/// Noise is `noise_level` times a standard normal per feature. With
/// `clip_to_range` the perturbed vector is clamped to `[0, 1]` before it is
/// mapped back to raw units, which truncates the Gaussian tails.
pub fn generate_with(
    model: &SngModel,
    total_samples: usize,
    seed: u64,
    selection: NeuronSelection,
) -> Result<SyntheticBatch> {
    if total_samples == 0 {
        return Err(SngError::InvalidArgument(
            "total_samples must be positive".into(),
        ));
    }
    if model.codebooks.is_empty() || model.codebooks.len() != model.num_classes() {
        return Err(SngError::InvalidState("model has no trained codebooks".into()));
    }
    let dim = model.dim();
    if let Some(c) = model
        .codebooks
        .iter()
        .position(|cb| cb.is_empty() || cb.dim() != dim)
    {
        return Err(SngError::InvalidState(format!(
            "codebook for class '{}' is empty or has the wrong dimension",
            model.class_names[c]
        )));
    }
    let sigma = model.hyper.noise_level;
    if !(sigma.is_finite() && sigma >= 0.0) {
        return Err(SngError::InvalidArgument(format!(
            "noise_level must be >= 0, got {sigma}"
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = Vec::with_capacity(total_samples);
    let mut provenance = Vec::with_capacity(total_samples);
    let mut draw = 0u64;
    let mut point = vec![0.0; dim];
    for (class, count) in allocate(total_samples, model.num_classes()).into_iter().enumerate() {
        let codebook = &model.codebooks[class];
        for j in 0..count {
            let neuron = match selection {
                NeuronSelection::Uniform => rng.gen_range(0..codebook.len()),
                NeuronSelection::RoundRobin => j % codebook.len(),
            };
            for (p, &w) in point.iter_mut().zip(codebook.row(neuron)) {
                let eps: f64 = rng.sample(StandardNormal);
                *p = w + sigma * eps;
                if model.hyper.clip_to_range {
                    *p = p.clamp(0.0, 1.0);
                }
            }
            samples.push(Sample::new(denormalize_vector(&model.norm_meta, &point), class));
            provenance.push(Provenance {
                class,
                neuron,
                draw,
            });
            draw += 1;
        }
    }

    Ok(SyntheticBatch {
        samples,
        provenance,
        class_names: model.class_names.clone(),
        feature_names: model.feature_names.clone(),
    })
}

/// Mean per-feature squared error between each synthetic sample and its nearest
/// same-class original, in the original dataset's normalized units.
///
/// Matching is by Euclidean distance with ties going to the lowest original row.
pub fn fidelity_mse(original: &Dataset, synthetic: &SyntheticBatch) -> Result<f64> {
    let dim = original.dim();
    if synthetic.feature_names.len() != dim {
        return Err(SngError::InvalidArgument(format!(
            "synthetic batch has {} features, original has {dim}",
            synthetic.feature_names.len()
        )));
    }
    if original.is_empty() || synthetic.is_empty() || dim == 0 {
        return Err(SngError::InvalidArgument(
            "fidelity needs non-empty original and synthetic sets".into(),
        ));
    }

    let originals = original.normalized_features();
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); original.num_classes()];
    for (row, s) in original.samples.iter().enumerate() {
        by_class[s.label].push(row);
    }
    // synthetic class index -> rows of the matching original class
    let mut candidates: Vec<Option<&[usize]>> = Vec::with_capacity(synthetic.class_names.len());
    for name in &synthetic.class_names {
        candidates.push(
            original
                .class_index(name)
                .map(|c| by_class[c].as_slice())
                .filter(|rows| !rows.is_empty()),
        );
    }

    let mut total = 0.0;
    for s in &synthetic.samples {
        let rows = candidates[s.label].ok_or_else(|| {
            SngError::Data(format!(
                "class '{}' is present in the synthetic batch but not in the original data",
                synthetic.class_names[s.label]
            ))
        })?;
        let x = normalize_vector(&original.norm_meta, &s.features);
        let mut best = f64::INFINITY;
        for &row in rows {
            let d: f64 = originals[row]
                .iter()
                .zip(&x)
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            if d < best {
                best = d;
            }
        }
        total += best;
    }
    Ok(total / (synthetic.len() * dim) as f64)
}
