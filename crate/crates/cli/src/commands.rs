use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::ArgMatches;

use sng::data_io::{self, load_csv, make_ring};
use sng::evaluation::{run_experiment, ClassifierSpec, ExperimentConfig, Regime};
use sng::model::{default_lambda_start, ensure_valid, Codebook, Dataset, Hyperparameters, SngModel};
use sng::neural_gas::{quantization_error, train_supervised_logged, train_unsupervised_observed, training_findings};
use sng::synthesis::{allocation_findings, generate_with, NeuronSelection};

use crate::args::{merge_config, DemoArgs, EvaluateArgs, GenerateArgs, SchemaArgs, TrainArgs};
use crate::svg;
use crate::CliError;

fn ensure_parent(path: &Path) -> Result<(), CliError> {
    match path.parent().filter(|d| !d.as_os_str().is_empty()) {
        Some(dir) => fs::create_dir_all(dir).map_err(|e| CliError::Data(format!("{}: {e}", dir.display()))),
        None => Ok(()),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    ensure_parent(path)?;
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

/// `dir/stem.suffix` next to `path`.
fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    path.with_file_name(format!("{stem}.{suffix}"))
}

fn require<'a>(path: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path, CliError> {
    path.as_deref()
        .ok_or_else(|| CliError::Usage(format!("--{flag} is required")))
}

fn load_dataset(path: &Path, schema_args: &SchemaArgs) -> Result<Dataset, CliError> {
    if !path.exists() {
        return Err(CliError::Data(format!("data file not found: {}", path.display())));
    }
    let loaded = load_csv(path, &schema_args.schema()?)?;
    for f in &loaded.rejected {
        eprintln!("warning: skipped {f}");
    }
    ensure_valid(&loaded.dataset)?;
    Ok(loaded.dataset)
}

pub fn train(args: TrainArgs, matches: &ArgMatches) -> Result<(), CliError> {
    let config = args.config.clone();
    let args = merge_config(args, matches, config.as_deref())?;
    let data = require(&args.data, "data")?;
    let hyper = args.hyper.hyper(args.seed);
    hyper.validate()?;

    let raw = load_dataset(data, &args.schema)?;
    let dataset = raw.normalize()?;
    for f in training_findings(&dataset, &hyper) {
        eprintln!("warning: {f}");
    }

    let mut batch_rows = Vec::new();
    let started = Instant::now();
    let model = train_supervised_logged(&dataset, &hyper, |b| {
        batch_rows.push([b.epoch as f64, b.batch as f64, b.running_loss]);
    })?;
    let elapsed = started.elapsed();

    ensure_parent(&args.out)?;
    model.save(&args.out)?;
    let loss_path = args.loss_out.clone().unwrap_or_else(|| sibling(&args.out, "loss.csv"));
    data_io::write_loss_csv(create(&loss_path)?, &model.loss_history)?;
    if let Some(path) = &args.batch_log {
        data_io::write_points_csv(create(path)?, &["epoch", "batch", "running_loss"], &batch_rows)?;
    }

    println!(
        "trained {} classes x {} neurons on {} samples ({} features)",
        model.num_classes(),
        hyper.neurons_per_class,
        dataset.len(),
        dataset.dim()
    );
    match model.loss_history.last() {
        Some(loss) => println!("final loss: {loss:.6} after {} epochs", model.loss_history.len()),
        None => println!("final loss: n/a (0 epochs)"),
    }
    println!("train time: {:.1} ms", elapsed.as_secs_f64() * 1e3);
    println!("model: {}", args.out.display());
    println!("loss: {}", loss_path.display());
    Ok(())
}

pub fn generate(args: GenerateArgs, matches: &ArgMatches) -> Result<(), CliError> {
    let config = args.config.clone();
    let args = merge_config(args, matches, config.as_deref())?;
    let model_path = require(&args.model, "model")?;
    let mut model = SngModel::load(model_path)?;
    if let Some(noise) = args.noise_level {
        model.hyper.noise_level = noise;
    }
    if args.no_clip {
        model.hyper.clip_to_range = false;
    }
    let selection = match args.selection.as_str() {
        "uniform" => NeuronSelection::Uniform,
        "round-robin" | "round_robin" => NeuronSelection::RoundRobin,
        other => {
            return Err(CliError::Usage(format!(
                "unknown selection '{other}' (expected uniform or round-robin)"
            )))
        }
    };
    for f in allocation_findings(args.count, &model) {
        eprintln!("warning: {f}");
    }

    let batch = generate_with(&model, args.count, args.seed, selection)?;
    data_io::write_synthetic_csv(create(&args.out)?, &batch, &args.label_name)?;
    let prov_path = args
        .provenance
        .clone()
        .unwrap_or_else(|| sibling(&args.out, "provenance.csv"));
    data_io::write_provenance_csv(create(&prov_path)?, &batch)?;

    println!("generated {} samples -> {}", batch.len(), args.out.display());
    for (name, n) in batch.class_names.iter().zip(batch.class_counts()) {
        println!("  {name}: {n}");
    }
    println!("provenance: {}", prov_path.display());
    Ok(())
}

pub fn evaluate(args: EvaluateArgs, matches: &ArgMatches) -> Result<(), CliError> {
    let config = args.config.clone();
    let args = merge_config(args, matches, config.as_deref())?;
    let data = require(&args.data, "data")?;
    let hyper = args.hyper.hyper(args.seed);

    let regimes = args
        .regimes
        .iter()
        .map(|r| r.trim().parse::<Regime>())
        .collect::<Result<Vec<_>, _>>()?;
    let classifier = match ClassifierSpec::by_name(&args.classifier)? {
        ClassifierSpec::Knn { .. } => ClassifierSpec::Knn { k: args.k },
        ClassifierSpec::Logistic { .. } => ClassifierSpec::Logistic {
            learning_rate: args.lr_step,
            epochs: args.lr_epochs,
        },
        other => other,
    };
    let experiment = ExperimentConfig {
        train_fraction: args.train_fraction,
        runs: args.runs,
        regimes,
        classifier,
        seed: args.seed,
        synthetic_count: args.count,
        ..Default::default()
    };

    let dataset = load_dataset(data, &args.schema)?;
    let report = run_experiment(&dataset, &hyper, &experiment)?;
    let mut json = report.to_json()?;
    json.push('\n');
    let path = &args.report;
    ensure_parent(path)?;
    fs::write(path, json).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;

    print!("{}", report.render_table());
    println!("\nreport: {}", path.display());
    Ok(())
}

/// Epochs at which neuron positions are exported: quarters of the run.
fn checkpoints(epochs: usize) -> Vec<usize> {
    let mut out: Vec<usize> = (0..=4).map(|q| epochs * q / 4).collect();
    out.dedup();
    out
}

pub fn demo_topology(args: DemoArgs, matches: &ArgMatches) -> Result<(), CliError> {
    let config = args.config.clone();
    let args = merge_config(args, matches, config.as_deref())?;
    if args.points == 0 {
        return Err(CliError::Usage("--points must be positive".into()));
    }
    let hyper = Hyperparameters {
        neurons_per_class: args.neurons,
        max_iter: args.epochs,
        eta_start: args.eta_start,
        eta_end: args.eta_end,
        lambda_start: args
            .lambda_start
            .unwrap_or_else(|| default_lambda_start(args.neurons)),
        lambda_end: args.lambda_end,
        seed: args.seed,
        ..Default::default()
    };
    hyper.validate()?;

    let targets = make_ring(args.points, args.radius, args.jitter, args.seed);
    let marks = checkpoints(args.epochs);
    let mut snapshots: Vec<(usize, Codebook)> = Vec::new();
    let fit = train_unsupervised_observed(&targets, args.neurons, &hyper, |epoch, cb| {
        if marks.contains(&epoch) {
            snapshots.push((epoch, cb.clone()));
        }
    })?;

    let out = &args.out;
    fs::create_dir_all(out).map_err(|e| CliError::Data(format!("{}: {e}", out.display())))?;
    data_io::write_points_csv(create(&out.join("targets.csv"))?, &["x", "y"], &targets)?;
    for (epoch, cb) in &snapshots {
        let path = out.join(format!("neurons_epoch_{epoch:04}.csv"));
        data_io::write_points_csv(create(&path)?, &["x", "y"], &cb.to_rows())?;
    }
    data_io::write_loss_csv(create(&out.join("loss.csv"))?, &fit.loss_history)?;
    let final_rows = fit.codebook.to_rows();
    let title = format!(
        "{} targets, {} neurons, {} epochs",
        args.points, args.neurons, args.epochs
    );
    fs::write(out.join("topology.svg"), svg::scatter_overlay(&targets, &final_rows, &title))
        .map_err(|e| CliError::Data(format!("{}: {e}", out.display())))?;

    let initial = &snapshots[0].1;
    println!(
        "quantization error: {:.6} (epoch 0) -> {:.6} (epoch {})",
        quantization_error(&targets, initial),
        quantization_error(&targets, &fit.codebook),
        args.epochs
    );
    println!(
        "wrote {} checkpoint CSVs and topology.svg to {}",
        snapshots.len(),
        out.display()
    );
    Ok(())
}
