use std::collections::HashMap;
use std::fs::{self, File};
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::Instant;

use sng::data_io::{make_blobs, write_dataset_csv};
use sng::model::{denormalize_vector, SngModel};
use tempfile::TempDir;

fn sng(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sng"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("spawn sng")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn ok(o: Output) -> Output {
    assert!(o.status.success(), "sng failed: {}\n{}", stderr(&o), stdout(&o));
    o
}

fn blobs_csv(dir: &Path, n_per_class: usize, classes: usize, dim: usize) -> PathBuf {
    let path = dir.join("blobs.csv");
    let data = make_blobs(n_per_class, classes, dim, 8.0, 1.0, 3).unwrap();
    write_dataset_csv(File::create(&path).unwrap(), &data, "label").unwrap();
    path
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

fn report(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn train_writes_model_and_per_epoch_loss() {
    let tmp = TempDir::new().unwrap();
    blobs_csv(tmp.path(), 40, 3, 2);
    ok(sng(&["train", "--data", "blobs.csv", "--epochs", "15", "--out", "m/model.json"], tmp.path()));

    let model = SngModel::load(tmp.path().join("m/model.json")).unwrap();
    assert_eq!(model.num_classes(), 3);
    assert!(model.codebooks.iter().all(|cb| cb.len() == 10));
    let loss = csv_rows(&tmp.path().join("m/model.loss.csv"));
    assert_eq!(loss.len(), 15);
    assert_eq!(loss[0][0], "0");
}

#[test]
fn missing_data_file_names_the_path() {
    let tmp = TempDir::new().unwrap();
    let o = sng(&["train", "--data", "nope/absent.csv"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("nope/absent.csv"), "{}", stderr(&o));
    assert_eq!(stderr(&o).trim().lines().count(), 1);
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let tmp = TempDir::new().unwrap();
    let o = sng(&["train", "--neuronz", "3"], tmp.path());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn help_lists_defaults() {
    let tmp = TempDir::new().unwrap();
    let o = ok(sng(&["train", "--help"], tmp.path()));
    let help = stdout(&o);
    for needle in ["--neurons", "[default: 10]", "[default: 100]", "[default: 0.5]", "--config"] {
        assert!(help.contains(needle), "missing {needle} in\n{help}");
    }
}

#[test]
fn realistic_dataset_trains_quickly() {
    let tmp = TempDir::new().unwrap();
    blobs_csv(tmp.path(), 388, 4, 5);
    let started = Instant::now();
    ok(sng(&["train", "--data", "blobs.csv"], tmp.path()));
    let secs = started.elapsed().as_secs_f64();
    assert!(secs < 10.0, "training took {secs:.1} s");
    assert!(tmp.path().join("model.json").exists());
}

#[test]
fn generate_balances_classes_and_is_reproducible() {
    let tmp = TempDir::new().unwrap();
    blobs_csv(tmp.path(), 30, 4, 3);
    ok(sng(&["train", "--data", "blobs.csv", "--epochs", "10"], tmp.path()));
    ok(sng(&["generate", "--model", "model.json", "--count", "2000", "--seed", "9", "--out", "a.csv"], tmp.path()));
    ok(sng(&["generate", "--model", "model.json", "--count", "2000", "--seed", "9", "--out", "b.csv"], tmp.path()));

    let rows = csv_rows(&tmp.path().join("a.csv"));
    assert_eq!(rows.len(), 2000);
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for r in &rows {
        *counts.entry(r.last().unwrap().as_str()).or_default() += 1;
    }
    assert_eq!(counts.len(), 4);
    assert!(counts.values().all(|&n| n == 500), "{counts:?}");

    let read = |f: &str| fs::read(tmp.path().join(f)).unwrap();
    assert_eq!(read("a.csv"), read("b.csv"));
    assert_eq!(read("a.provenance.csv"), read("b.provenance.csv"));
    assert_eq!(csv_rows(&tmp.path().join("a.provenance.csv")).len(), 2000);
}

#[test]
fn training_is_reproducible_for_a_seed() {
    let tmp = TempDir::new().unwrap();
    blobs_csv(tmp.path(), 30, 2, 2);
    ok(sng(&["train", "--data", "blobs.csv", "--epochs", "8", "--seed", "4", "--out", "a.json"], tmp.path()));
    ok(sng(&["train", "--data", "blobs.csv", "--epochs", "8", "--seed", "4", "--out", "b.json"], tmp.path()));
    assert_eq!(fs::read(tmp.path().join("a.json")).unwrap(), fs::read(tmp.path().join("b.json")).unwrap());
}

#[test]
fn zero_noise_reproduces_prototypes() {
    let tmp = TempDir::new().unwrap();
    blobs_csv(tmp.path(), 30, 3, 2);
    ok(sng(&["train", "--data", "blobs.csv", "--epochs", "10", "--neurons", "4"], tmp.path()));
    ok(sng(&["generate", "--model", "model.json", "--count", "60", "--noise-level", "0"], tmp.path()));

    let model = SngModel::load(tmp.path().join("model.json")).unwrap();
    let rows = csv_rows(&tmp.path().join("synthetic.csv"));
    let prov = csv_rows(&tmp.path().join("synthetic.provenance.csv"));
    for (row, p) in rows.iter().zip(&prov) {
        let class = model.class_names.iter().position(|c| *c == p[1]).unwrap();
        assert_eq!(row.last().unwrap(), &p[1]);
        let neuron: usize = p[2].parse().unwrap();
        let expect = denormalize_vector(&model.norm_meta, model.codebooks[class].row(neuron));
        for (v, e) in row[..row.len() - 1].iter().zip(&expect) {
            let v: f64 = v.parse().unwrap();
            assert!((v - e).abs() <= 1e-12 * e.abs().max(1.0), "{v} vs {e}");
        }
    }
}

#[test]
fn invalid_model_file_fails_cleanly() {
    let tmp = TempDir::new().unwrap();
    fs::write(tmp.path().join("bad.json"), "{\"not\": \"a model\"}").unwrap();
    let o = sng(&["generate", "--model", "bad.json"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("error:"));
    let o = sng(&["generate", "--model", "absent.json"], tmp.path());
    assert!(!o.status.success());
}

#[test]
fn evaluate_defaults_cover_all_regimes() {
    let tmp = TempDir::new().unwrap();
    blobs_csv(tmp.path(), 30, 3, 2);
    let o = ok(sng(&["evaluate", "--data", "blobs.csv", "--epochs", "10"], tmp.path()));
    assert!(stdout(&o).contains("synthetic_only"));

    let r = report(&tmp.path().join("report.json"));
    assert_eq!(r["config"]["runs"], 5);
    assert_eq!(r["runs"].as_array().unwrap().len(), 5);
    let regimes: Vec<&str> = r["regimes"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| s["regime"].as_str().unwrap())
        .collect();
    assert_eq!(regimes, ["original", "synthetic_only", "mixed"]);
}

#[test]
fn single_run_has_zero_spread_and_mixed_sizing() {
    let tmp = TempDir::new().unwrap();
    blobs_csv(tmp.path(), 30, 3, 2);
    ok(sng(
        &["evaluate", "--data", "blobs.csv", "--epochs", "10", "--runs", "1", "--count", "300", "--report", "out/r.json"],
        tmp.path(),
    ));
    let r = report(&tmp.path().join("out/r.json"));
    let train_rows = r["runs"][0]["train_rows"].as_u64().unwrap();
    for s in r["regimes"].as_array().unwrap() {
        assert_eq!(s["std_accuracy"].as_f64().unwrap(), 0.0);
        let expect = match s["regime"].as_str().unwrap() {
            "original" => train_rows,
            "synthetic_only" => 300,
            _ => train_rows + 300,
        };
        assert_eq!(s["training_rows"].as_u64().unwrap(), expect);
    }
}

fn qe_pair(out: &str) -> (f64, f64) {
    let line = out.lines().find(|l| l.starts_with("quantization error")).unwrap();
    let nums: Vec<f64> = line
        .split([' ', ':', '(', ')'])
        .filter_map(|w| w.parse().ok())
        .collect();
    (nums[0], nums[2])
}

#[test]
fn demo_topology_exports_checkpoints() {
    let tmp = TempDir::new().unwrap();
    let o = ok(sng(&["demo-topology"], tmp.path()));
    let dir = tmp.path().join("topology");
    for epoch in [0, 75, 150, 225, 300] {
        let rows = csv_rows(&dir.join(format!("neurons_epoch_{epoch:04}.csv")));
        assert_eq!(rows.len(), 150);
    }
    assert_eq!(csv_rows(&dir.join("targets.csv")).len(), 200);
    assert!(fs::read_to_string(dir.join("topology.svg")).unwrap().starts_with("<svg"));
    let (initial, last) = qe_pair(&stdout(&o));
    assert!(last < initial, "{initial} -> {last}");
}

#[test]
fn demo_topology_zero_epochs_keeps_initialization() {
    let tmp = TempDir::new().unwrap();
    ok(sng(&["demo-topology", "--epochs", "0", "--out", "zero", "--seed", "5"], tmp.path()));
    ok(sng(&["demo-topology", "--epochs", "4", "--out", "four", "--seed", "5"], tmp.path()));
    let csvs = |d: &str| {
        let mut names: Vec<String> = fs::read_dir(tmp.path().join(d))
            .unwrap()
            .map(|e| e.unwrap().file_name().into_string().unwrap())
            .filter(|n| n.starts_with("neurons_"))
            .collect();
        names.sort();
        names
    };
    assert_eq!(csvs("zero"), ["neurons_epoch_0000.csv"]);
    assert_eq!(csvs("four").len(), 5);
    let read = |p: &str| fs::read(tmp.path().join(p)).unwrap();
    assert_eq!(read("zero/neurons_epoch_0000.csv"), read("four/neurons_epoch_0000.csv"));
}

#[test]
fn config_file_fills_unset_flags_only() {
    let tmp = TempDir::new().unwrap();
    blobs_csv(tmp.path(), 30, 2, 2);
    fs::write(
        tmp.path().join("cfg.json"),
        r#"{"data": "blobs.csv", "epochs": 3, "neurons": 2, "out": "cfg_model.json"}"#,
    )
    .unwrap();
    ok(sng(&["train", "--config", "cfg.json", "--epochs", "5"], tmp.path()));

    let model = SngModel::load(tmp.path().join("cfg_model.json")).unwrap();
    assert!(model.codebooks.iter().all(|cb| cb.len() == 2));
    assert_eq!(model.loss_history.len(), 5);

    fs::write(tmp.path().join("typo.json"), r#"{"neuronz": 2}"#).unwrap();
    let o = sng(&["train", "--config", "typo.json", "--data", "blobs.csv"], tmp.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("neuronz"));
}
