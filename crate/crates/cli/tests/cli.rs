//! End-to-end checks of the `synclass` binary on a miniature synthetic
//! dataset laid out like MNIST.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use synclass_core::datasets::{write_idx, ImageSample};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_synclass")
}

struct Sandbox {
    root: PathBuf,
}

impl Sandbox {
    fn new(name: &str) -> Self {
        let root = std::env::temp_dir().join(format!("synclass-cli-{name}-{}", std::process::id()));
        let _ = std::fs::remove_dir_all(&root);
        std::fs::create_dir_all(root.join("data/mnist")).unwrap();
        // Two clearly separated classes: dark-ish digits vs bright ones.
        let make = |count: usize, offset: usize| -> Vec<ImageSample> {
            (0..count)
                .map(|i| {
                    let label = ((i + offset) % 2) as u8;
                    let base = if label == 0 { 40 } else { 200 };
                    let pixels = (0..28 * 28)
                        .map(|p| (base + (p + i) % 40) as u8)
                        .collect();
                    ImageSample {
                        pixels,
                        rows: 28,
                        cols: 28,
                        channels: 1,
                        label,
                    }
                })
                .collect()
        };
        let data = root.join("data/mnist");
        write_idx(
            &make(64, 0),
            &data.join("train-images-idx3-ubyte"),
            &data.join("train-labels-idx1-ubyte"),
        )
        .unwrap();
        write_idx(
            &make(32, 1),
            &data.join("t10k-images-idx3-ubyte"),
            &data.join("t10k-labels-idx1-ubyte"),
        )
        .unwrap();
        Sandbox { root }
    }

    fn write_manifest(&self, name: &str, body: &str) -> PathBuf {
        let path = self.root.join(name);
        let full = format!(
            "[dataset]\nkind = \"mnist\"\nroot = \"{}\"\n{body}",
            self.root.join("data").display()
        );
        std::fs::write(&path, full).unwrap();
        path
    }

    fn run(&self, args: &[&str]) -> Output {
        Command::new(bin())
            .current_dir(&self.root)
            .args(args)
            .output()
            .expect("binary runs")
    }
}

impl Drop for Sandbox {
    fn drop(&mut self) {
        let _ = std::fs::remove_dir_all(&self.root);
    }
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

const SMALL_TRAIN: &str = r#"
[pipeline]
setup = "setup1"
planes_per_channel = 4

[code]
rate = "1/2"
kind = "regular"
seed = 1

[model]
units = 6
seed = 3

[train]
epochs = 2
batch_size = 16
"#;

#[test]
fn build_code_writes_deterministic_alist() {
    let sandbox = Sandbox::new("buildcode");
    let out = sandbox.run(&[
        "build-code",
        "--rate",
        "1/2",
        "--regular",
        "--n",
        "128",
        "--seed",
        "9",
        "--out",
        "a.alist",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("size: 64x128"));
    let again = sandbox.run(&[
        "build-code",
        "--rate",
        "1/2",
        "--regular",
        "--n",
        "128",
        "--seed",
        "9",
        "--out",
        "b.alist",
    ]);
    assert!(again.status.success());
    let a = std::fs::read(sandbox.root.join("a.alist")).unwrap();
    let b = std::fs::read(sandbox.root.join("b.alist")).unwrap();
    assert_eq!(a, b, "same seed must give byte-identical alist files");
}

#[test]
fn build_code_rejects_unsupported_rate() {
    let sandbox = Sandbox::new("badrate");
    let out = sandbox.run(&["build-code", "--rate", "1/1", "--regular", "--out", "x.alist"]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
}

#[test]
fn train_eval_writes_record_and_reproduces_hashes() {
    let sandbox = Sandbox::new("traineval");
    let manifest = sandbox.write_manifest("exp.toml", SMALL_TRAIN);
    let manifest = manifest.to_str().unwrap();

    let out = sandbox.run(&["train-eval", "--manifest", manifest, "--quiet"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let record: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(record["history"].as_array().unwrap().len(), 2);
    assert!(record["metrics"]["accuracy"].as_f64().unwrap() >= 0.0);
    assert_eq!(record["metrics"]["rate"].as_f64().unwrap(), 0.5);
    // 3*6*(512+6) + 10*6 + 10 (the loader reports at least 10 classes).
    assert_eq!(record["metrics"]["param_count"].as_u64().unwrap(), 9394);

    let again = sandbox.run(&["train-eval", "--manifest", manifest, "--quiet"]);
    assert!(again.status.success(), "{}", stderr(&again));
    let record2: serde_json::Value = serde_json::from_str(&stdout(&again)).unwrap();
    for key in ["manifest_hash", "code_hash", "dataset_hash"] {
        assert_eq!(record[key], record2[key], "{key} must reproduce");
        assert!(record[key].as_str().unwrap().len() == 64);
    }
    assert_eq!(record["history"], record2["history"], "training must reproduce");

    // Artifacts land in the output dir.
    let runs: Vec<_> = std::fs::read_dir(sandbox.root.join("runs"))
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    let run_dir = runs.iter().find(|n| n.starts_with("run-")).expect("run dir");
    for file in ["run.json", "history.ldjson", "model.ckpt"] {
        assert!(
            sandbox.root.join("runs").join(run_dir).join(file).exists(),
            "{file} missing"
        );
    }
}

#[test]
fn encode_caches_and_reports_shapes() {
    let sandbox = Sandbox::new("encode");
    let manifest = sandbox.write_manifest("exp.toml", SMALL_TRAIN);
    let out = sandbox.run(&["encode", "--manifest", manifest.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("64 samples x 4 steps x 512"), "{text}");
    assert!(text.contains("32 samples x 4 steps x 512"), "{text}");
}

#[test]
fn export_features_shapes_and_range_check() {
    let sandbox = Sandbox::new("export");
    let manifest = sandbox.write_manifest("exp.toml", SMALL_TRAIN);
    let manifest = manifest.to_str().unwrap();
    let out = sandbox.run(&[
        "export-features",
        "--manifest",
        manifest,
        "--plane-index",
        "0",
        "--split",
        "validation",
        "--out",
        "features.csv",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = std::fs::read_to_string(sandbox.root.join("features.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 1 + 32);
    assert_eq!(lines[0].split(',').count(), 513);
    assert!(lines[1].split(',').all(|t| ["0", "1"].contains(&t)));

    let bad = sandbox.run(&[
        "export-features",
        "--manifest",
        manifest,
        "--plane-index",
        "99",
        "--out",
        "nope.csv",
    ]);
    assert_eq!(bad.status.code(), Some(2), "{}", stderr(&bad));
}

#[test]
fn sweep_collects_rows_and_survives_failures() {
    let sandbox = Sandbox::new("sweep");
    let manifest = sandbox.write_manifest("exp.toml", SMALL_TRAIN);
    let out = sandbox.run(&[
        "sweep",
        "--manifest",
        manifest.to_str().unwrap(),
        "--axis",
        "planes",
        "--values",
        "2,1",
        "--out",
        "sweep.csv",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = std::fs::read_to_string(sandbox.root.join("sweep.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3, "{text}");
    assert!(lines[1].starts_with("planes,1,ok"), "{text}");
    assert!(lines[2].starts_with("planes,2,ok"), "{text}");

    // An axis value that fails validation is recorded, not fatal.
    let out = sandbox.run(&[
        "sweep",
        "--manifest",
        manifest.to_str().unwrap(),
        "--axis",
        "planes",
        "--values",
        "2,9",
        "--out",
        "sweep2.csv",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = std::fs::read_to_string(sandbox.root.join("sweep2.csv")).unwrap();
    assert!(text.lines().nth(2).unwrap().starts_with("planes,9,error"), "{text}");

    let empty = sandbox.run(&[
        "sweep",
        "--manifest",
        manifest.to_str().unwrap(),
        "--axis",
        "qf",
        "--values",
        ",",
        "--out",
        "x.csv",
    ]);
    assert_eq!(empty.status.code(), Some(2));
}

#[test]
fn metrics_reports_df_on_synthetic_data() {
    let sandbox = Sandbox::new("metrics");
    let manifest = sandbox.write_manifest("exp.toml", SMALL_TRAIN);
    let out = sandbox.run(&[
        "metrics",
        "--manifest",
        manifest.to_str().unwrap(),
        "--sample",
        "16",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["sample_size"].as_u64().unwrap(), 16);
    let df = report["df_mean"].as_f64().unwrap();
    assert!(df.is_finite() && df > 0.0, "df_mean {df}");
    assert_eq!(report["rate_summary"]["gamma"].as_f64().unwrap(), 1.0);
}

#[test]
fn config_and_data_errors_use_distinct_exit_codes() {
    let sandbox = Sandbox::new("exitcodes");
    // setup1 without a code: configuration error.
    let bad = sandbox.write_manifest("bad.toml", "[pipeline]\nsetup = \"setup1\"\n");
    let out = sandbox.run(&["train-eval", "--manifest", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));

    // Valid manifest, missing dataset directory: data error.
    let manifest = sandbox.root.join("gone.toml");
    std::fs::write(
        &manifest,
        format!(
            "[dataset]\nkind = \"mnist\"\nroot = \"{}\"\n{SMALL_TRAIN}",
            sandbox.root.join("missing").display()
        ),
    )
    .unwrap();
    let out = sandbox.run(&["train-eval", "--manifest", manifest.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
}
