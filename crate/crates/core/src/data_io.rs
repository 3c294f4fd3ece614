//! CSV ingestion and output, plus the deterministic blob and ring fixtures.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SngError};
use crate::model::{Dataset, Finding, FindingKind, Sample, SyntheticBatch};

/// Column selector: zero-based position or header name.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ColumnRef {
    Index(usize),
    Name(String),
}

impl std::str::FromStr for ColumnRef {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s.parse::<usize>() {
            Ok(i) => ColumnRef::Index(i),
            Err(_) => ColumnRef::Name(s.to_string()),
        })
    }
}

impl std::fmt::Display for ColumnRef {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ColumnRef::Index(i) => write!(f, "#{i}"),
            ColumnRef::Name(n) => write!(f, "'{n}'"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CsvSchema {
    /// `None` selects the last column.
    pub label_column: Option<ColumnRef>,
    /// `None` selects every column except the label.
    pub feature_columns: Option<Vec<ColumnRef>>,
    pub has_header: bool,
    pub delimiter: char,
    /// Number of unparseable rows tolerated (and skipped) before loading fails.
    pub max_rejected_rows: usize,
}

impl Default for CsvSchema {
    fn default() -> Self {
        CsvSchema {
            label_column: None,
            feature_columns: None,
            has_header: true,
            delimiter: ',',
            max_rejected_rows: 0,
        }
    }
}

impl CsvSchema {
    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| SngError::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    fn delimiter_byte(&self) -> Result<u8> {
        u8::try_from(self.delimiter)
            .ok()
            .filter(u8::is_ascii)
            .ok_or_else(|| {
                SngError::InvalidArgument(format!("delimiter {:?} is not ASCII", self.delimiter))
            })
    }
}

#[derive(Debug, Clone)]
pub struct LoadedCsv {
    pub dataset: Dataset,
    /// One finding per skipped row.
    pub rejected: Vec<Finding>,
}

pub fn load_csv(path: impl AsRef<Path>, schema: &CsvSchema) -> Result<LoadedCsv> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| SngError::io(path, e))?;
    read_csv(file, schema)
}

fn resolve(col: &ColumnRef, headers: &[String], what: &str) -> Result<usize> {
    match col {
        ColumnRef::Index(i) if *i < headers.len() => Ok(*i),
        ColumnRef::Name(n) => headers
            .iter()
            .position(|h| h == n)
            .ok_or_else(|| SngError::Data(format!("{what} column {col} not found"))),
        _ => Err(SngError::Data(format!(
            "{what} column {col} out of range ({} columns)",
            headers.len()
        ))),
    }
}

/// Parses delimited text into a raw-unit dataset. Class indices follow the order
/// in which labels first appear.
pub fn read_csv<R: Read>(reader: R, schema: &CsvSchema) -> Result<LoadedCsv> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(schema.has_header)
        .delimiter(schema.delimiter_byte()?)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let mut records = Vec::new();
    for rec in rdr.records() {
        records.push(rec?);
    }
    let headers: Vec<String> = if schema.has_header {
        rdr.headers()?.iter().map(str::to_string).collect()
    } else {
        let width = records.first().map_or(0, csv::StringRecord::len);
        (0..width).map(|i| format!("col{i}")).collect()
    };
    if headers.is_empty() {
        return Err(SngError::Data("input has no columns".into()));
    }

    let label_col = match &schema.label_column {
        Some(c) => resolve(c, &headers, "label")?,
        None => headers.len() - 1,
    };
    let feature_cols: Vec<usize> = match &schema.feature_columns {
        Some(cols) => cols
            .iter()
            .map(|c| resolve(c, &headers, "feature"))
            .collect::<Result<_>>()?,
        None => (0..headers.len()).filter(|&i| i != label_col).collect(),
    };
    if feature_cols.is_empty() {
        return Err(SngError::Data("no feature columns selected".into()));
    }
    if feature_cols.contains(&label_col) {
        return Err(SngError::Data(format!(
            "label column '{}' is also listed as a feature",
            headers[label_col]
        )));
    }

    let mut class_names: Vec<String> = Vec::new();
    let mut samples = Vec::with_capacity(records.len());
    let mut rejected = Vec::new();
    for rec in &records {
        let line = rec.position().map_or(0, |p| p.line()) as usize;
        let reject = |column: Option<usize>, msg: String| {
            Finding::new(FindingKind::RejectedRow, format!("line {line}: {msg}")).at(Some(line), column)
        };
        let Some(label) = rec.get(label_col).filter(|l| !l.is_empty()) else {
            rejected.push(reject(Some(label_col), "missing label".into()));
            continue;
        };
        let mut features = Vec::with_capacity(feature_cols.len());
        let mut bad = None;
        for &col in &feature_cols {
            let cell = rec.get(col).unwrap_or("");
            match cell.parse::<f64>() {
                Ok(v) if v.is_finite() => features.push(v),
                _ => {
                    bad = Some(reject(
                        Some(col),
                        format!("column '{}': cannot parse {cell:?} as a finite number", headers[col]),
                    ));
                    break;
                }
            }
        }
        if let Some(f) = bad {
            rejected.push(f);
            continue;
        }
        let class = match class_names.iter().position(|c| c == label) {
            Some(c) => c,
            None => {
                class_names.push(label.to_string());
                class_names.len() - 1
            }
        };
        samples.push(Sample::new(features, class));
    }

    if rejected.len() > schema.max_rejected_rows {
        return Err(SngError::Data(format!(
            "{} unparseable row(s), tolerance {}; first: {}",
            rejected.len(),
            schema.max_rejected_rows,
            rejected[0]
        )));
    }
    if samples.is_empty() {
        return Err(SngError::Data("no data rows".into()));
    }
    let feature_names = feature_cols.iter().map(|&c| headers[c].clone()).collect();
    Ok(LoadedCsv {
        dataset: Dataset::new(samples, class_names, feature_names),
        rejected,
    })
}

fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

/// Feature columns followed by a `label_name` column holding class names.
pub fn write_dataset_csv<W: Write>(out: W, dataset: &Dataset, label_name: &str) -> Result<()> {
    write_labeled(out, &dataset.feature_names, &dataset.class_names, &dataset.samples, label_name)
}

/// Same layout as [`write_dataset_csv`], values in raw units.
pub fn write_synthetic_csv<W: Write>(out: W, batch: &SyntheticBatch, label_name: &str) -> Result<()> {
    write_labeled(out, &batch.feature_names, &batch.class_names, &batch.samples, label_name)
}

fn write_labeled<W: Write>(
    out: W,
    feature_names: &[String],
    class_names: &[String],
    samples: &[Sample],
    label_name: &str,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<&str> = feature_names.iter().map(String::as_str).collect();
    header.push(label_name);
    w.write_record(&header)?;
    for s in samples {
        let mut row: Vec<String> = s.features.iter().map(|&v| fmt_f64(v)).collect();
        row.push(class_names[s.label].clone());
        w.write_record(&row)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Sidecar with columns `row, class, neuron_index`.
pub fn write_provenance_csv<W: Write>(out: W, batch: &SyntheticBatch) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["row", "class", "neuron_index"])?;
    for (row, p) in batch.provenance.iter().enumerate() {
        w.write_record([
            row.to_string(),
            batch.class_names[p.class].clone(),
            p.neuron.to_string(),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Two columns, `epoch, loss`; epoch `t` is the loss after the `t`-th pass (0-based).
pub fn write_loss_csv<W: Write>(out: W, losses: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["epoch", "loss"])?;
    for (t, &l) in losses.iter().enumerate() {
        w.write_record([t.to_string(), fmt_f64(l)])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Unlabeled point matrix with the given header.
pub fn write_points_csv<W: Write, P: AsRef<[f64]>>(out: W, header: &[&str], points: &[P]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for p in points {
        w.write_record(p.as_ref().iter().map(|&v| fmt_f64(v)))?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Centroid of class `c` among `k`: evenly spaced on a circle in the first two
/// axes so adjacent centroids sit exactly `separation` apart (a line in 1-D).
pub fn blob_centroid(c: usize, k: usize, dim: usize, separation: f64) -> Vec<f64> {
    let mut centroid = vec![0.0; dim];
    if dim == 1 {
        centroid[0] = c as f64 * separation;
    } else if k > 1 {
        let radius = separation / (2.0 * (std::f64::consts::PI / k as f64).sin());
        let angle = 2.0 * std::f64::consts::PI * c as f64 / k as f64;
        centroid[0] = radius * angle.cos();
        centroid[1] = radius * angle.sin();
    }
    centroid
}

/// Isotropic Gaussian clusters, one per class, `n_per_class` samples each.
pub fn make_blobs(
    n_per_class: usize,
    num_classes: usize,
    dim: usize,
    centroid_separation: f64,
    cluster_std: f64,
    seed: u64,
) -> Result<Dataset> {
    if n_per_class == 0 || num_classes == 0 || dim == 0 {
        return Err(SngError::InvalidArgument(
            "blob counts and dimension must be positive".into(),
        ));
    }
    if !(centroid_separation > 0.0 && cluster_std > 0.0) {
        return Err(SngError::InvalidArgument(
            "separation and std must be positive".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = Vec::with_capacity(n_per_class * num_classes);
    for c in 0..num_classes {
        let centroid = blob_centroid(c, num_classes, dim, centroid_separation);
        for _ in 0..n_per_class {
            let features = centroid
                .iter()
                .map(|&m| m + cluster_std * rng.sample::<f64, _>(StandardNormal))
                .collect();
            samples.push(Sample::new(features, c));
        }
    }
    Ok(Dataset::new(
        samples,
        (0..num_classes).map(|c| format!("class_{c}")).collect(),
        (0..dim).map(|j| format!("f{j}")).collect(),
    ))
}

/// Points at uniform angles around the origin, radius perturbed uniformly by `±jitter`.
pub fn make_ring(n_points: usize, radius: f64, jitter: f64, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n_points)
        .map(|_| {
            let angle = rng.gen::<f64>() * std::f64::consts::TAU;
            let r = if jitter > 0.0 {
                radius + rng.gen_range(-jitter..=jitter)
            } else {
                radius
            };
            vec![r * angle.cos(), r * angle.sin()]
        })
        .collect()
}
