mod common;

use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};
use slimfl::experiment::{
    analyze, detect_convergence, detect_convergence_with, energy_ratio, energy_report,
    override_param, read_metrics_csv, run, sweep_analyze, sweep_run, ConvergenceCriterion,
    ExperimentConfig,
};
use slimfl::federation::RoundMetrics;
use slimfl::Error;

fn tiny_config(out: &Path, extra: &str) -> String {
    format!(
        r#"
[experiment]
seeds = [1]
output_dir = "{}"
rounds = 6
devices = 4

[data]
source = "synthetic"
classes = 4
per_class = 30
test_per_class = 10
dim = 5

[model]
hidden = [8]
{extra}
"#,
        out.display()
    )
}

fn sha(path: &Path) -> Vec<u8> {
    Sha256::digest(fs::read(path).unwrap()).to_vec()
}

#[test]
fn shipped_configs_round_trip() {
    let dir = common::repo_root().join("crates/core/configs");
    let mut seen = 0;
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let cfg = ExperimentConfig::from_toml(&fs::read_to_string(&path).unwrap()).unwrap();
        let again = ExperimentConfig::from_toml(&cfg.to_toml()).unwrap();
        assert_eq!(cfg, again, "{}", path.display());
        seen += 1;
    }
    assert!(seen >= 2);
}

#[test]
fn unknown_and_invalid_fields_are_named() {
    let dir = tempfile::tempdir().unwrap();
    let text = tiny_config(dir.path(), "[train]\nbogus = 1\n");
    match ExperimentConfig::from_toml(&text) {
        Err(Error::Config { field, .. }) => assert_eq!(field, "bogus"),
        other => panic!("{other:?}"),
    }
    let cfg = override_param(&tiny_config(dir.path(), ""), "channel.power_split", "0.4").unwrap();
    match cfg.validate() {
        Err(Error::Config { field, .. }) => assert_eq!(field, "channel.power_split"),
        other => panic!("{other:?}"),
    }
    let cfg = override_param(&tiny_config(dir.path(), ""), "train.st_weights", "[0.7, 0.7]").unwrap();
    assert!(matches!(cfg.validate(), Err(Error::Config { field, .. }) if field == "train.st_weights"));
}

#[test]
fn cli_missing_dataset_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(
        &cfg,
        "[experiment]\nrounds = 2\n[data]\nsource = \"idx\"\ntrain_labels = \"x\"\ntest_images = \"x\"\ntest_labels = \"x\"\n",
    )
    .unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_slimfl")).arg("run").arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("data.train_images"), "{err}");
}

#[test]
fn cli_run_analyze_and_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let cfg = dir.path().join("tiny.toml");
    fs::write(&cfg, tiny_config(&out_dir, "")).unwrap();
    let bin = env!("CARGO_BIN_EXE_slimfl");
    let run = Command::new(bin).arg("run").arg(&cfg).output().unwrap();
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let summary: serde_json::Value = serde_json::from_slice(&run.stdout).unwrap();
    assert_eq!(summary["rounds"], 6);
    let rows = read_metrics_csv(out_dir.join("metrics_seed1.csv")).unwrap();
    assert_eq!(rows.len(), 6);
    assert!(out_dir.join("summary.json").is_file());
    let header = fs::read_to_string(out_dir.join("metrics_seed1.csv")).unwrap();
    assert!(header.starts_with(
        "round,acc_0.5x,acc_1.0x,loss,decoded_none,decoded_lh_only,decoded_both,decoded_megabits,comm_power_mW,comp_MFLOPS"
    ));

    let an = Command::new(bin).args(["analyze", "--no-delta"]).arg(&cfg).output().unwrap();
    assert!(an.status.success());
    let report: serde_json::Value = serde_json::from_slice(&an.stdout).unwrap();
    for key in ["channel", "lambda", "d_samples", "B", "bound_curve", "ips"] {
        assert!(report.get(key).is_some(), "missing {key}");
    }

    let sw = Command::new(bin)
        .args(["sweep", "--config"])
        .arg(&cfg)
        .args(["--param", "train.st_weights", "--values", "[0.5, 0.5],[0.3, 0.7]"])
        .output()
        .unwrap();
    assert!(sw.status.success(), "{}", String::from_utf8_lossy(&sw.stderr));
    let rows: serde_json::Value = serde_json::from_slice(&sw.stdout).unwrap();
    assert_eq!(rows.as_array().unwrap().len(), 2);
    assert!(out_dir.join("sweep_train.st_weights.csv").is_file());
}

#[test]
fn same_seed_gives_identical_csv() {
    let dir = tempfile::tempdir().unwrap();
    let a = ExperimentConfig::from_toml(&tiny_config(&dir.path().join("a"), "")).unwrap();
    let b = ExperimentConfig::from_toml(&tiny_config(&dir.path().join("b"), "")).unwrap();
    run(&a).unwrap();
    run(&b).unwrap();
    let (ha, hb) = (sha(&dir.path().join("a/metrics_seed1.csv")), sha(&dir.path().join("b/metrics_seed1.csv")));
    assert_eq!(ha, hb);
}

#[test]
fn sweep_library_calls() {
    let dir = tempfile::tempdir().unwrap();
    let text = tiny_config(dir.path(), "[channel]\ntarget_p1 = 0.9\ntarget_p2 = 0.8\n");
    let values = vec!["0.95".to_string(), "0.85".to_string()];
    let rows = sweep_analyze(&text, "channel.target_p1", &values).unwrap();
    assert!((rows[0].p1 - 0.95).abs() < 1e-12);
    assert!((rows[1].p1 - 0.85).abs() < 1e-12);
    let runs = sweep_run(&text, "experiment.local_iters", &["1".into(), "2".into()]).unwrap();
    assert_eq!(runs.len(), 2);
    assert!(dir.path().join("experiment.local_iters=2/metrics_seed1.csv").is_file());
}

#[test]
fn analyze_reports_delta_for_synthetic_data() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig::from_toml(&tiny_config(dir.path(), "")).unwrap();
    let rep = analyze(&cfg, true).unwrap();
    let v = serde_json::to_value(&rep).unwrap();
    assert!(v["delta"]["delta"].as_f64().unwrap() > 0.0);
    assert!(v["B"].as_f64().unwrap() > 0.0);
}

#[test]
fn constant_traces() {
    assert_eq!(detect_convergence(&[0.85; 150]), Some(100));
    assert_eq!(detect_convergence(&[0.70; 300]), None);
    assert_eq!(detect_convergence(&[0.85; 99]), None);
}

/// Direct scan: recompute mean and std of every window from scratch.
fn reference_scan(trace: &[f64], c: ConvergenceCriterion) -> Option<usize> {
    (c.window..=trace.len()).find(|&end| {
        let w = &trace[end - c.window..end];
        let m = w.iter().sum::<f64>() / w.len() as f64;
        let v = w.iter().map(|x| (x - m).powi(2)).sum::<f64>() / w.len() as f64;
        m > c.mean && v.sqrt() < c.std
    })
}

#[test]
fn ramp_trace_matches_reference_scan() {
    for seed in 0..20 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let trace: Vec<f64> = (0..300)
            .map(|i| 0.9 * i as f64 / 299.0 + rng.random_range(-0.01..0.01))
            .collect();
        let want = reference_scan(&trace, ConvergenceCriterion::default());
        assert_eq!(detect_convergence(&trace), want, "seed {seed}");
        let short = ConvergenceCriterion { window: 30, mean: 0.7, std: 0.03 };
        let want = reference_scan(&trace, short);
        assert!(want.is_some());
        assert_eq!(detect_convergence_with(&trace, short), want, "seed {seed}");
    }
}

fn const_rows(n: usize, mw: f64, mflops: f64) -> Vec<RoundMetrics> {
    (1..=n)
        .map(|round| RoundMetrics {
            round,
            acc_0_5x: 0.8,
            acc_1_0x: 0.9,
            loss: 0.1,
            decoded_none: 0,
            decoded_lh_only: 0,
            decoded_both: 10,
            decoded_megabits: 1.0,
            comm_power_mw: mw,
            comp_mflops: mflops,
        })
        .collect()
}

#[test]
fn energy_totals() {
    let rows = const_rows(50, 199.5, 3.56);
    let rep = energy_report(&rows, Some(10));
    assert!(rep.complete);
    assert!((rep.comm_power_w - 1.995).abs() < 1e-12);
    assert!((rep.comp_mflops - 35.6).abs() < 1e-12);
    let other = energy_report(&const_rows(50, 399.0, 7.12), Some(10));
    let (comm, comp) = energy_ratio(&rep, &other);
    assert!((comm - 0.5).abs() < 1e-12 && (comp - 0.5).abs() < 1e-12);
    let none = energy_report(&rows, None);
    assert!(!none.complete && none.rounds == 50);
}

#[test]
fn synthetic_reference_config_under_five_minutes() {
    let path = common::repo_root().join("crates/core/configs/synthetic.toml");
    let mut cfg = ExperimentConfig::from_toml(&fs::read_to_string(path).unwrap()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    cfg.experiment.output_dir = dir.path().to_path_buf();
    assert_eq!((cfg.experiment.rounds, cfg.experiment.devices, cfg.data.alpha), (200, 10, 1.0));
    let t = Instant::now();
    let summary = run(&cfg).unwrap();
    assert!(t.elapsed().as_secs() < 300);
    assert!(summary.seeds[0].final_acc_1_0x > 0.5);
}
