use std::fs;
use std::path::Path;

use serde::Serialize;

use super::config::{DataSource, ExperimentConfig};
use super::convergence::{
    detect_convergence_with, energy_report, judged_trace, ConvergenceCriterion, EnergyReport,
};
use crate::data::{dirichlet_partition, load_idx, synth_dataset, Dataset};
use crate::error::{Error, Result};
use crate::federation::{Federation, RoundMetrics};
use crate::rng::{stream_rng, Stream};

/// Training and test sets described by the config.
pub fn load_datasets(cfg: &ExperimentConfig) -> Result<(Dataset, Dataset)> {
    let d = &cfg.data;
    let (mut train, mut test) = match d.source {
        DataSource::Idx => {
            let path = |p: &Option<std::path::PathBuf>, field: &str| {
                p.clone()
                    .ok_or_else(|| Error::config(field, "dataset path is required"))
            };
            let train = load_idx(
                path(&d.train_images, "data.train_images")?,
                path(&d.train_labels, "data.train_labels")?,
            )?;
            let test = load_idx(
                path(&d.test_images, "data.test_images")?,
                path(&d.test_labels, "data.test_labels")?,
            )?;
            (train, test)
        }
        DataSource::Synthetic => {
            // one draw for both sets so they share class means
            let mut rng = stream_rng(d.data_seed, Stream::Aux(0));
            let all = synth_dataset(
                d.classes,
                d.per_class + d.test_per_class,
                d.dim,
                d.spread,
                &mut rng,
            );
            let n_train = d.classes * d.per_class;
            let train_idx: Vec<usize> = (0..n_train).collect();
            let test_idx: Vec<usize> = (n_train..all.len()).collect();
            (all.subset(&train_idx), all.subset(&test_idx))
        }
    };
    if let Some(n) = d.train_limit {
        train = train.subset(&(0..n.min(train.len())).collect::<Vec<_>>());
    }
    if let Some(n) = d.test_limit {
        test = test.subset(&(0..n.min(test.len())).collect::<Vec<_>>());
    }
    let classes = train.classes.max(test.classes);
    train.classes = classes;
    test.classes = classes;
    Ok((train, test))
}

/// Runs every round of one seed without touching the filesystem.
pub fn simulate_seed(
    cfg: &ExperimentConfig,
    train: &Dataset,
    test: &Dataset,
    seed: u64,
) -> Result<Vec<RoundMetrics>> {
    let fed_cfg = cfg.federation();
    let shards = dirichlet_partition(
        &train.labels,
        train.classes,
        fed_cfg.devices,
        cfg.data.alpha,
        &mut stream_rng(seed, Stream::Partition),
    )?;
    let layout = cfg.layout(train.dim(), train.classes)?;
    let rounds = fed_cfg.rounds;
    let every = cfg.experiment.eval_every;
    let mut fed = Federation::new(
        fed_cfg,
        cfg.train_config()?,
        cfg.channel_config()?,
        cfg.cost_profile(),
        layout,
        train,
        shards,
        seed,
    )?;
    let mut out = Vec::with_capacity(rounds);
    for r in 1..=rounds {
        let eval = r % every == 0 || r == rounds;
        out.push(fed.run_round(eval.then_some(test))?);
    }
    Ok(out)
}

/// Runs `f` on a pool of `threads` workers, or the global pool when `None`.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::config("experiment.threads", e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}

pub fn metrics_csv(metrics: &[RoundMetrics]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for m in metrics {
        w.serialize(m).map_err(|e| Error::Io(std::io::Error::other(e)))?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

pub fn read_metrics_csv(path: impl AsRef<Path>) -> Result<Vec<RoundMetrics>> {
    let path = path.as_ref();
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::Format {
        file: path.display().to_string(),
        field: "header",
        reason: e.to_string(),
    })?;
    r.deserialize()
        .collect::<std::result::Result<Vec<RoundMetrics>, _>>()
        .map_err(|e| Error::Format {
            file: path.display().to_string(),
            field: "row",
            reason: e.to_string(),
        })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeedSummary {
    pub seed: u64,
    pub metrics_file: String,
    pub final_acc_0_5x: f64,
    pub final_acc_1_0x: f64,
    pub convergence_round: Option<usize>,
    pub energy: EnergyReport,
    pub total_decoded_megabits: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub name: String,
    pub scheme: &'static str,
    pub rounds: usize,
    pub devices: usize,
    pub comm_power_mw: f64,
    pub comp_mflops: f64,
    pub seeds: Vec<SeedSummary>,
}

pub fn criterion(cfg: &ExperimentConfig) -> ConvergenceCriterion {
    ConvergenceCriterion {
        window: cfg.analysis.convergence_window,
        mean: cfg.analysis.convergence_mean,
        std: cfg.analysis.convergence_std,
    }
}

pub fn summarize_seed(cfg: &ExperimentConfig, seed: u64, file: String, m: &[RoundMetrics]) -> SeedSummary {
    let conv = detect_convergence_with(&judged_trace(m), criterion(cfg));
    let last = m.last();
    SeedSummary {
        seed,
        metrics_file: file,
        final_acc_0_5x: last.map_or(f64::NAN, |r| r.acc_0_5x),
        final_acc_1_0x: last.map_or(f64::NAN, |r| r.acc_1_0x),
        convergence_round: conv,
        energy: energy_report(m, conv),
        total_decoded_megabits: m.iter().map(|r| r.decoded_megabits).sum(),
    }
}

/// Runs every seed, writing `metrics_seed<s>.csv` and `summary.json` into
/// the output directory.
pub fn run(cfg: &ExperimentConfig) -> Result<RunSummary> {
    cfg.validate()?;
    let (train, test) = load_datasets(cfg)?;
    let out = &cfg.experiment.output_dir;
    fs::create_dir_all(out)?;
    let mut seeds = Vec::new();
    let mut first: Option<RoundMetrics> = None;
    for &seed in &cfg.experiment.seeds {
        let m = with_threads(cfg.experiment.threads, || simulate_seed(cfg, &train, &test, seed))??;
        let name = format!("metrics_seed{seed}.csv");
        fs::write(out.join(&name), metrics_csv(&m)?)?;
        first = first.or_else(|| m.first().cloned());
        seeds.push(summarize_seed(cfg, seed, name, &m));
    }
    let summary = RunSummary {
        name: cfg.experiment.name.clone(),
        scheme: cfg.experiment.scheme.name(),
        rounds: cfg.experiment.rounds,
        devices: cfg.experiment.devices,
        comm_power_mw: first.as_ref().map_or(f64::NAN, |m| m.comm_power_mw),
        comp_mflops: first.as_ref().map_or(f64::NAN, |m| m.comp_mflops),
        seeds,
    };
    let json = serde_json::to_string_pretty(&summary).map_err(|e| Error::Io(e.into()))?;
    fs::write(out.join("summary.json"), json)?;
    Ok(summary)
}
