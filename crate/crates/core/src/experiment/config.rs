//! TOML experiment configuration. Unknown keys are rejected and every field
//! is checked before a run starts.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analysis::ConvergenceParams;
use crate::channel::{dbm_to_watts, noise_power_from_psd, ChannelConfig, Fading};
use crate::error::{Error, Result};
use crate::federation::{CostProfile, FederationConfig, Scheme, VanillaRate, WeightingMode};
use crate::slim::{Layout, UL_MOBILENET_SIXTHS_MFLOPS};
use crate::train::{LocalAlgorithm, LrSchedule, Optimizer, TrainConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentSection,
    pub data: DataSection,
    #[serde(default)]
    pub model: ModelSection,
    #[serde(default)]
    pub train: TrainSection,
    #[serde(default)]
    pub channel: ChannelSection,
    #[serde(default)]
    pub cost: CostSection,
    #[serde(default)]
    pub analysis: AnalysisSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    #[serde(default = "d_name")]
    pub name: String,
    #[serde(default = "d_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default = "d_output")]
    pub output_dir: PathBuf,
    pub rounds: usize,
    #[serde(default = "d_devices")]
    pub devices: usize,
    #[serde(default = "d_one")]
    pub local_iters: usize,
    #[serde(default = "d_scheme")]
    pub scheme: Scheme,
    #[serde(default)]
    pub weighting: WeightingMode,
    #[serde(default)]
    pub vanilla_rate: VanillaRate,
    /// Worker threads for device-parallel training; all cores when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    /// Evaluate every this many rounds (and at the last one). Rows in
    /// between carry NaN accuracies.
    #[serde(default = "d_one")]
    pub eval_every: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataSource {
    Idx,
    Synthetic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSection {
    pub source: DataSource,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub train_images: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub train_labels: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub test_images: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub test_labels: Option<PathBuf>,
    /// Keep only the first this many training samples.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub train_limit: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub test_limit: Option<usize>,
    #[serde(default = "d_alpha")]
    pub alpha: f64,
    #[serde(default = "d_classes")]
    pub classes: usize,
    #[serde(default = "d_per_class")]
    pub per_class: usize,
    #[serde(default = "d_test_per_class")]
    pub test_per_class: usize,
    #[serde(default = "d_dim")]
    pub dim: usize,
    #[serde(default = "d_spread")]
    pub spread: f64,
    /// Seed of the synthetic dataset, independent of the run seeds.
    #[serde(default)]
    pub data_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    #[serde(default = "d_hidden")]
    pub hidden: Vec<usize>,
    #[serde(default = "d_half")]
    pub lh_ratio: f64,
}

impl Default for ModelSection {
    fn default() -> Self {
        Self {
            hidden: d_hidden(),
            lh_ratio: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlgorithmName {
    Sustrain,
    Slimtrain,
    Ustrain,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerName {
    Adam,
    Sgd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LrMode {
    Constant,
    Theorem1,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainSection {
    #[serde(default = "d_algorithm")]
    pub algorithm: AlgorithmName,
    #[serde(default = "d_two")]
    pub widths_per_iter: usize,
    #[serde(default = "d_weights")]
    pub st_weights: Vec<f64>,
    #[serde(default = "d_ratios")]
    pub width_ratios: Vec<f64>,
    #[serde(default = "d_optimizer")]
    pub optimizer: OptimizerName,
    #[serde(default = "d_eta0")]
    pub eta0: f64,
    #[serde(default = "d_lr_mode")]
    pub lr_mode: LrMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l: Option<f64>,
    #[serde(default = "d_beta1")]
    pub beta1: f64,
    #[serde(default = "d_beta2")]
    pub beta2: f64,
    #[serde(default = "d_eps")]
    pub eps: f64,
    #[serde(default = "d_batch")]
    pub batch_size: usize,
}

impl Default for TrainSection {
    fn default() -> Self {
        Self {
            algorithm: AlgorithmName::Sustrain,
            widths_per_iter: 2,
            st_weights: d_weights(),
            width_ratios: d_ratios(),
            optimizer: OptimizerName::Adam,
            eta0: d_eta0(),
            lr_mode: LrMode::Constant,
            mu: None,
            l: None,
            beta1: d_beta1(),
            beta2: d_beta2(),
            eps: d_eps(),
            batch_size: d_batch(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FadingName {
    Rayleigh,
    Rician,
    Twdp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSection {
    #[serde(default = "d_distance")]
    pub distance_m: f64,
    #[serde(default = "d_pathloss")]
    pub pathloss_exponent: f64,
    #[serde(default = "d_bandwidth")]
    pub bandwidth_hz: f64,
    #[serde(default = "d_power_dbm")]
    pub power_dbm: f64,
    /// Noise density; ignored when `noise_power_w` is given.
    #[serde(default = "d_noise_psd")]
    pub noise_dbm_per_hz: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_power_w: Option<f64>,
    /// Target rate; when absent it follows from `u_prime`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate_bps: Option<f64>,
    #[serde(default = "d_u_prime")]
    pub u_prime: f64,
    #[serde(default = "d_split")]
    pub power_split: f64,
    #[serde(default = "d_fading")]
    pub fading: FadingName,
    #[serde(default = "d_rice_nu")]
    pub rician_nu: f64,
    #[serde(default = "d_rice_sigma")]
    pub rician_sigma: f64,
    #[serde(default)]
    pub rician_normalize: bool,
    #[serde(default = "d_twdp_k")]
    pub twdp_k: f64,
    #[serde(default = "d_twdp_delta")]
    pub twdp_delta: f64,
    /// With `target_p2`, overrides `power_split` and the noise power so the
    /// Rayleigh decoding probabilities hit these targets.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_p1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_p2: Option<f64>,
}

impl Default for ChannelSection {
    fn default() -> Self {
        toml::from_str("").expect("all channel fields have defaults")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostProfileName {
    Measured,
    Reference,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostSection {
    #[serde(default = "d_profile")]
    pub profile: CostProfileName,
    #[serde(default = "d_bits")]
    pub bits_per_param: f64,
}

impl Default for CostSection {
    fn default() -> Self {
        Self {
            profile: CostProfileName::Measured,
            bits_per_param: d_bits(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisSection {
    #[serde(default = "d_mu")]
    pub mu: f64,
    #[serde(default = "d_one_f")]
    pub l: f64,
    #[serde(default = "d_one_f")]
    pub delta1: f64,
    #[serde(default = "d_bound_rounds")]
    pub bound_rounds: usize,
    #[serde(default = "d_batch")]
    pub delta_batch: usize,
    #[serde(default = "d_delta_draws")]
    pub delta_draws: usize,
    #[serde(default = "d_lambda_samples")]
    pub lambda_samples: usize,
    #[serde(default = "d_r_peak")]
    pub r_peak_mflops: f64,
    #[serde(default = "d_ips_target")]
    pub ips_target: f64,
    #[serde(default = "d_ips_costs")]
    pub ips_costs_mflops: Vec<f64>,
    #[serde(default = "d_window")]
    pub convergence_window: usize,
    #[serde(default = "d_conv_mean")]
    pub convergence_mean: f64,
    #[serde(default = "d_conv_std")]
    pub convergence_std: f64,
}

impl Default for AnalysisSection {
    fn default() -> Self {
        toml::from_str("").expect("all analysis fields have defaults")
    }
}

fn d_name() -> String {
    "experiment".into()
}
fn d_seeds() -> Vec<u64> {
    vec![0]
}
fn d_output() -> PathBuf {
    "out".into()
}
fn d_devices() -> usize {
    10
}
fn d_one() -> usize {
    1
}
fn d_two() -> usize {
    2
}
fn d_one_f() -> f64 {
    1.0
}
fn d_half() -> f64 {
    0.5
}
fn d_scheme() -> Scheme {
    Scheme::SlimFl
}
fn d_alpha() -> f64 {
    1.0
}
fn d_classes() -> usize {
    10
}
fn d_per_class() -> usize {
    100
}
fn d_test_per_class() -> usize {
    20
}
fn d_dim() -> usize {
    20
}
fn d_spread() -> f64 {
    1.0
}
fn d_hidden() -> Vec<usize> {
    vec![128]
}
fn d_algorithm() -> AlgorithmName {
    AlgorithmName::Sustrain
}
fn d_weights() -> Vec<f64> {
    vec![0.5, 0.5]
}
fn d_ratios() -> Vec<f64> {
    vec![0.5, 1.0]
}
fn d_optimizer() -> OptimizerName {
    OptimizerName::Adam
}
fn d_eta0() -> f64 {
    1e-3
}
fn d_lr_mode() -> LrMode {
    LrMode::Constant
}
fn d_beta1() -> f64 {
    0.9
}
fn d_beta2() -> f64 {
    0.999
}
fn d_eps() -> f64 {
    1e-8
}
fn d_batch() -> usize {
    64
}
fn d_distance() -> f64 {
    100.0
}
fn d_pathloss() -> f64 {
    2.5
}
fn d_bandwidth() -> f64 {
    75e6
}
fn d_power_dbm() -> f64 {
    23.0
}
fn d_noise_psd() -> f64 {
    -169.0
}
fn d_u_prime() -> f64 {
    0.667
}
fn d_split() -> f64 {
    0.662
}
fn d_fading() -> FadingName {
    FadingName::Rayleigh
}
fn d_rice_nu() -> f64 {
    0.5577
}
fn d_rice_sigma() -> f64 {
    0.2106
}
fn d_twdp_k() -> f64 {
    3.5
}
fn d_twdp_delta() -> f64 {
    0.1
}
fn d_profile() -> CostProfileName {
    CostProfileName::Measured
}
fn d_bits() -> f64 {
    32.0
}
fn d_mu() -> f64 {
    0.1
}
fn d_bound_rounds() -> usize {
    500
}
fn d_delta_draws() -> usize {
    20
}
fn d_lambda_samples() -> usize {
    50
}
fn d_r_peak() -> f64 {
    23.0
}
fn d_ips_target() -> f64 {
    100.0
}
fn d_ips_costs() -> Vec<f64> {
    UL_MOBILENET_SIXTHS_MFLOPS.to_vec()
}
fn d_window() -> usize {
    100
}
fn d_conv_mean() -> f64 {
    0.8
}
fn d_conv_std() -> f64 {
    0.0725
}

fn positive(field: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::config(field, format!("must be positive, got {v}")))
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| {
            let msg = e.message().to_string();
            let field = msg
                .split('`')
                .nth(1)
                .map(str::to_string)
                .unwrap_or_else(|| "config".into());
            Error::config(field, msg)
        })?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Reads and validates a config file.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = fs::read_to_string(path.as_ref()).map_err(|e| {
            Error::config("config", format!("cannot read {}: {e}", path.as_ref().display()))
        })?;
        let cfg = Self::from_toml(&text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let e = &self.experiment;
        if e.seeds.is_empty() {
            return Err(Error::config("experiment.seeds", "need at least one seed"));
        }
        if e.threads == Some(0) {
            return Err(Error::config("experiment.threads", "must be at least 1"));
        }
        if e.eval_every == 0 {
            return Err(Error::config("experiment.eval_every", "must be at least 1"));
        }
        self.federation().validate()?;
        let d = &self.data;
        positive("data.alpha", d.alpha)?;
        match d.source {
            DataSource::Idx => {
                for (field, p) in [
                    ("data.train_images", &d.train_images),
                    ("data.train_labels", &d.train_labels),
                    ("data.test_images", &d.test_images),
                    ("data.test_labels", &d.test_labels),
                ] {
                    match p {
                        None => return Err(Error::config(field, "dataset path is required")),
                        Some(p) if !p.is_file() => {
                            return Err(Error::config(field, format!("no such file {}", p.display())))
                        }
                        _ => {}
                    }
                }
            }
            DataSource::Synthetic => {
                if d.classes < 2 {
                    return Err(Error::config("data.classes", "need at least two classes"));
                }
                if d.per_class == 0 || d.test_per_class == 0 || d.dim == 0 {
                    return Err(Error::config("data.per_class", "sizes must be positive"));
                }
                if !(d.spread >= 0.0) {
                    return Err(Error::config("data.spread", "must be non-negative"));
                }
            }
        }
        if self.model.hidden.contains(&0) {
            return Err(Error::config("model.hidden", "layer widths must be positive"));
        }
        self.train_config()?.validate()?;
        self.channel_config()?.validate()?;
        let c = &self.cost;
        positive("cost.bits_per_param", c.bits_per_param)?;
        let a = &self.analysis;
        positive("analysis.mu", a.mu)?;
        if a.l < a.mu {
            return Err(Error::config("analysis.l", "must be at least mu"));
        }
        if a.convergence_window == 0 {
            return Err(Error::config("analysis.convergence_window", "must be positive"));
        }
        if a.ips_costs_mflops.is_empty() || a.ips_costs_mflops.iter().any(|&c| !(c > 0.0)) {
            return Err(Error::config("analysis.ips_costs_mflops", "need positive costs"));
        }
        Ok(())
    }

    pub fn federation(&self) -> FederationConfig {
        let e = &self.experiment;
        FederationConfig {
            devices: e.devices,
            rounds: e.rounds,
            local_iters: e.local_iters,
            scheme: e.scheme,
            weighting: e.weighting,
            algorithm: match self.train.algorithm {
                AlgorithmName::Sustrain => LocalAlgorithm::SusTrain,
                AlgorithmName::Slimtrain => LocalAlgorithm::SlimTrain,
                AlgorithmName::Ustrain => LocalAlgorithm::UsTrain {
                    widths_per_iter: self.train.widths_per_iter,
                },
            },
            vanilla_rate: e.vanilla_rate,
            lh_ratio: self.model.lh_ratio,
        }
    }

    pub fn train_config(&self) -> Result<TrainConfig> {
        let t = &self.train;
        let lr = match t.lr_mode {
            LrMode::Constant => LrSchedule::Constant { eta0: t.eta0 },
            LrMode::Theorem1 => LrSchedule::Theorem1 {
                mu: t.mu.ok_or_else(|| Error::config("train.mu", "required by theorem1 mode"))?,
                l: t.l.ok_or_else(|| Error::config("train.l", "required by theorem1 mode"))?,
            },
        };
        let optimizer = match t.optimizer {
            OptimizerName::Sgd => Optimizer::Sgd,
            OptimizerName::Adam => Optimizer::Adam {
                beta1: t.beta1,
                beta2: t.beta2,
                eps: t.eps,
            },
        };
        Ok(TrainConfig {
            st_weights: t.st_weights.clone(),
            width_ratios: t.width_ratios.clone(),
            lr,
            optimizer,
            batch_size: t.batch_size,
        })
    }

    pub fn channel_config(&self) -> Result<ChannelConfig> {
        let c = &self.channel;
        let fading = match c.fading {
            FadingName::Rayleigh => Fading::Rayleigh,
            FadingName::Rician => Fading::Rician {
                nu: c.rician_nu,
                sigma: c.rician_sigma,
                normalize: c.rician_normalize,
            },
            FadingName::Twdp => Fading::Twdp {
                k: c.twdp_k,
                delta: c.twdp_delta,
            },
        };
        if !(c.u_prime >= 0.0) {
            return Err(Error::config("channel.u_prime", "must be non-negative"));
        }
        let cfg = ChannelConfig {
            distance_m: c.distance_m,
            pathloss_exponent: c.pathloss_exponent,
            bandwidth_hz: c.bandwidth_hz,
            total_power_w: dbm_to_watts(c.power_dbm),
            noise_power_w: c
                .noise_power_w
                .unwrap_or_else(|| noise_power_from_psd(c.noise_dbm_per_hz, c.bandwidth_hz)),
            rate_bps: c
                .rate_bps
                .unwrap_or_else(|| c.bandwidth_hz * (1.0 + c.u_prime).log2()),
            power_split: c.power_split,
            fading,
        };
        match (c.target_p1, c.target_p2) {
            (None, None) => Ok(cfg),
            (Some(p1), Some(p2)) => cfg
                .calibrated(p1, p2)
                .map_err(|e| Error::config("channel.target_p1", e.to_string())),
            _ => Err(Error::config(
                "channel.target_p2",
                "target_p1 and target_p2 must be given together",
            )),
        }
    }

    pub fn cost_profile(&self) -> CostProfile {
        match self.cost.profile {
            CostProfileName::Measured => CostProfile::Measured {
                bits_per_param: self.cost.bits_per_param,
            },
            CostProfileName::Reference => CostProfile::Reference,
        }
    }

    pub fn layout(&self, input: usize, classes: usize) -> Result<Layout> {
        Layout::slim_mlp(input, &self.model.hidden, classes)
    }

    /// Bound constants for the configured channel; `delta` is supplied by
    /// the caller (usually an estimate).
    pub fn convergence_params(&self, delta: f64, p1: f64, p2: f64) -> ConvergenceParams {
        ConvergenceParams {
            mu: self.analysis.mu,
            l: self.analysis.l,
            delta,
            delta1: self.analysis.delta1,
            p1,
            p2,
            weights: self.train.st_weights.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[experiment]
rounds = 5

[data]
source = "synthetic"
"#;

    #[test]
    fn defaults_fill_in() {
        let cfg = ExperimentConfig::from_toml(MINIMAL).unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.experiment.devices, 10);
        assert_eq!(cfg.train.st_weights, vec![0.5, 0.5]);
        let ch = cfg.channel_config().unwrap();
        assert!((ch.u_prime() - 0.667).abs() < 1e-12);
    }

    #[test]
    fn round_trip() {
        let cfg = ExperimentConfig::from_toml(MINIMAL).unwrap();
        let again = ExperimentConfig::from_toml(&cfg.to_toml()).unwrap();
        assert_eq!(cfg, again);
    }

    #[test]
    fn unknown_key_rejected() {
        let text = format!("{MINIMAL}\nbogus = 1\n");
        let err = ExperimentConfig::from_toml(&text).unwrap_err();
        assert!(err.to_string().contains("bogus"), "{err}");
    }

    #[test]
    fn missing_dataset_path_names_field() {
        let text = MINIMAL.replace("synthetic", "idx");
        let cfg = ExperimentConfig::from_toml(&text).unwrap();
        let err = cfg.validate().unwrap_err();
        assert!(matches!(&err, Error::Config { field, .. } if field == "data.train_images"));
    }

    #[test]
    fn calibration_targets() {
        let text = format!("{MINIMAL}\n[channel]\ntarget_p1 = 0.7\ntarget_p2 = 0.5\n");
        let cfg = ExperimentConfig::from_toml(&text).unwrap();
        let p = crate::channel::decode_probabilities(&cfg.channel_config().unwrap()).unwrap();
        assert!((p[0] - 0.7).abs() < 1e-9 && (p[1] - 0.5).abs() < 1e-9);
        let half = format!("{MINIMAL}\n[channel]\ntarget_p1 = 0.7\n");
        assert!(ExperimentConfig::from_toml(&half).unwrap().validate().is_err());
    }
}
