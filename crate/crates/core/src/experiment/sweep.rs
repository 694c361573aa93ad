use std::fs;
use std::path::PathBuf;

use serde::Serialize;

use super::analyze::{channel_report, ips_report};
use super::config::ExperimentConfig;
use super::run::run;
use crate::analysis::{optimize_lambda, PowerObjective};
use crate::error::{Error, Result};

/// Replaces the dotted `param` (e.g. `channel.power_split`) in a TOML
/// config with `value`, itself parsed as TOML (bare words become strings).
pub fn override_param(text: &str, param: &str, value: &str) -> Result<ExperimentConfig> {
    let mut table: toml::Table =
        toml::from_str(text).map_err(|e| Error::config("config", e.message().to_string()))?;
    let parsed = toml::from_str::<toml::Table>(&format!("v = {value}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(value.to_string()));
    let mut keys: Vec<&str> = param.split('.').collect();
    let last = keys
        .pop()
        .filter(|k| !k.is_empty())
        .ok_or_else(|| Error::config(param, "empty parameter name"))?;
    let mut node = &mut table;
    for k in keys {
        node = node
            .entry(k.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .ok_or_else(|| Error::config(param, format!("`{k}` is not a section")))?;
    }
    node.insert(last.to_string(), parsed);
    let text = toml::to_string(&table).map_err(|e| Error::config(param, e.to_string()))?;
    ExperimentConfig::from_toml(&text)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalyzeRow {
    pub value: String,
    pub power_split: f64,
    pub p1: f64,
    pub p2: f64,
    pub d: f64,
    pub lambda_num: f64,
    pub ips_width: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRow {
    pub value: String,
    pub seed: u64,
    #[serde(rename = "final_acc_0.5x")]
    pub final_acc_0_5x: f64,
    #[serde(rename = "final_acc_1.0x")]
    pub final_acc_1_0x: f64,
    pub convergence_round: Option<usize>,
    pub total_decoded_megabits: f64,
    pub comm_power_w: f64,
    pub comp_mflops: f64,
}

fn write_csv<T: Serialize>(path: &PathBuf, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| Error::Io(std::io::Error::other(e)))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    fs::write(path, bytes)?;
    Ok(())
}

/// Channel, power-split and width-selection quantities for each value.
/// Writes `sweep_<param>.csv` into the base config's output directory.
pub fn sweep_analyze(text: &str, param: &str, values: &[String]) -> Result<Vec<AnalyzeRow>> {
    let mut rows = Vec::new();
    let mut out_dir = None;
    for v in values {
        let cfg = override_param(text, param, v)?;
        cfg.validate()?;
        let ch = cfg.channel_config()?;
        let rep = channel_report(&ch, cfg.experiment.seeds[0]);
        let lambda = optimize_lambda(&PowerObjective::from_channel(&ch)).map_or(f64::NAN, |o| o.numeric);
        rows.push(AnalyzeRow {
            value: v.clone(),
            power_split: ch.power_split,
            p1: rep.p1,
            p2: rep.p2,
            d: rep.d_at_split,
            lambda_num: lambda,
            ips_width: ips_report(&cfg).chosen,
        });
        out_dir.get_or_insert(cfg.experiment.output_dir.clone());
    }
    if let Some(dir) = out_dir {
        fs::create_dir_all(&dir)?;
        write_csv(&dir.join(format!("sweep_{param}.csv")), &rows)?;
    }
    Ok(rows)
}

/// Full runs for each value, each into `<output_dir>/<param>=<value>/`.
pub fn sweep_run(text: &str, param: &str, values: &[String]) -> Result<Vec<RunRow>> {
    let mut rows = Vec::new();
    let mut base_dir = None;
    for v in values {
        let mut cfg = override_param(text, param, v)?;
        let base = cfg.experiment.output_dir.clone();
        cfg.experiment.output_dir = base.join(format!("{param}={v}"));
        let summary = run(&cfg)?;
        for s in summary.seeds {
            rows.push(RunRow {
                value: v.clone(),
                seed: s.seed,
                final_acc_0_5x: s.final_acc_0_5x,
                final_acc_1_0x: s.final_acc_1_0x,
                convergence_round: s.convergence_round,
                total_decoded_megabits: s.total_decoded_megabits,
                comm_power_w: s.energy.comm_power_w,
                comp_mflops: s.energy.comp_mflops,
            });
        }
        base_dir.get_or_insert(base);
    }
    if let Some(dir) = base_dir {
        write_csv(&dir.join(format!("sweep_{param}.csv")), &rows)?;
    }
    Ok(rows)
}
