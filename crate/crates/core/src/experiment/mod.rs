//! Configuration, experiment runs, metrics files and reports.

mod analyze;
mod config;
mod convergence;
mod run;
mod sweep;

pub use analyze::{analyze, channel_report, d_samples, AnalysisReport, ChannelReport, DSample, IpsReport};
pub use config::{
    AlgorithmName, AnalysisSection, ChannelSection, CostProfileName, CostSection, DataSection,
    DataSource, ExperimentConfig, ExperimentSection, FadingName, LrMode, ModelSection,
    OptimizerName, TrainSection,
};
pub use convergence::{
    detect_convergence, detect_convergence_with, energy_ratio, energy_report, judged_trace,
    ConvergenceCriterion, EnergyReport,
};
pub use run::{
    load_datasets, metrics_csv, read_metrics_csv, run, simulate_seed, summarize_seed,
    with_threads, RunSummary, SeedSummary,
};
pub use sweep::{override_param, sweep_analyze, sweep_run, AnalyzeRow, RunRow};
