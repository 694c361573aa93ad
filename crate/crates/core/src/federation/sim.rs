//! Round loop for SlimFL and the vanilla baselines.
//!
//! Every scheme is a set of lanes. A lane is one federated model with its own
//! per-device copies and optimizers, a list of parameter segments sent as
//! successive uplink messages, and the decoding thresholds of those
//! messages. SlimFL is one lane with two segments (0.5x and the rest);
//! Vanilla-0.5x and -1.0x are one lane with a single segment; Vanilla-1.5x
//! runs the two vanilla lanes side by side on separate links.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::aggregate::{aggregate_segments, Weighting, WeightingMode};
use super::eval::accuracy;
use crate::channel::{
    decode_probabilities, decode_with, rate_to_u_prime, thresholds_from, ChannelConfig,
    DecodeThresholds,
};
use crate::data::{sample_batch, Dataset, Shard};
use crate::error::{Error, Result};
use crate::rng::{stream_rng, Stream};
use crate::slim::{
    build_mask, model_cost, Layout, SlimmableParams, BITS_PER_PARAM_F32, UL_MOBILENET_0_5X,
    UL_MOBILENET_1_0X,
};
use crate::train::{local_step, LocalAlgorithm, NetBatch, OptimizerState, TrainConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    #[serde(rename = "slimfl")]
    SlimFl,
    #[serde(rename = "vanilla_0.5x")]
    Vanilla05,
    #[serde(rename = "vanilla_1.0x")]
    Vanilla10,
    #[serde(rename = "vanilla_1.5x")]
    Vanilla15,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::SlimFl => "slimfl",
            Scheme::Vanilla05 => "vanilla_0.5x",
            Scheme::Vanilla10 => "vanilla_1.0x",
            Scheme::Vanilla15 => "vanilla_1.5x",
        }
    }

    fn vanilla_widths(self) -> &'static [f64] {
        match self {
            Scheme::SlimFl => &[],
            Scheme::Vanilla05 => &[0.5],
            Scheme::Vanilla10 => &[1.0],
            Scheme::Vanilla15 => &[0.5, 1.0],
        }
    }
}

/// Uplink rate used by a vanilla model sent as one message.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum VanillaRate {
    /// The rate scales with the payload relative to the 0.5x segment, so
    /// every scheme spends the same airtime per round.
    #[default]
    PayloadScaled,
    /// The same rate as one SlimFL message.
    Same,
}

/// Where payload sizes and per-image compute come from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "profile", rename_all = "snake_case")]
pub enum CostProfile {
    /// Counted from the simulated network's layout.
    Measured { bits_per_param: f64 },
    /// The UL-MobileNet reference constants (0.5x and 1.0x only).
    Reference,
}

impl Default for CostProfile {
    fn default() -> Self {
        CostProfile::Measured {
            bits_per_param: BITS_PER_PARAM_F32,
        }
    }
}

impl CostProfile {
    /// `(bits per round, MFLOPS per image)` of the model at `ratio`.
    pub fn width_cost(&self, layout: &Layout, ratio: f64) -> Result<(u64, f64)> {
        match *self {
            CostProfile::Measured { bits_per_param } => {
                let c = model_cost(layout, &build_mask(layout, ratio)?, bits_per_param);
                Ok((c.bits_per_round, c.mflops()))
            }
            CostProfile::Reference => [UL_MOBILENET_0_5X, UL_MOBILENET_1_0X]
                .into_iter()
                .find(|w| w.ratio == ratio)
                .map(|w| (w.bits_per_round, w.mflops))
                .ok_or_else(|| {
                    Error::config("cost.profile", format!("no reference cost for width {ratio}"))
                }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FederationConfig {
    pub devices: usize,
    pub rounds: usize,
    pub local_iters: usize,
    pub scheme: Scheme,
    pub weighting: WeightingMode,
    /// Local algorithm of the SlimFL lane.
    pub algorithm: LocalAlgorithm,
    pub vanilla_rate: VanillaRate,
    /// Ratio of the first superposed segment.
    pub lh_ratio: f64,
}

impl Default for FederationConfig {
    fn default() -> Self {
        Self {
            devices: 10,
            rounds: 100,
            local_iters: 1,
            scheme: Scheme::SlimFl,
            weighting: WeightingMode::Empirical,
            algorithm: LocalAlgorithm::SusTrain,
            vanilla_rate: VanillaRate::PayloadScaled,
            lh_ratio: 0.5,
        }
    }
}

impl FederationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.devices == 0 {
            return Err(Error::config("experiment.devices", "must be at least 1"));
        }
        if self.rounds == 0 {
            return Err(Error::config("experiment.rounds", "must be at least 1"));
        }
        if self.local_iters == 0 {
            return Err(Error::config("train.local_iters", "must be at least 1"));
        }
        if !(self.lh_ratio > 0.0 && self.lh_ratio < 1.0) {
            return Err(Error::config("model.lh_ratio", "must lie in (0, 1)"));
        }
        Ok(())
    }
}

/// Per-round record of one scheme.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundMetrics {
    pub round: usize,
    #[serde(rename = "acc_0.5x")]
    pub acc_0_5x: f64,
    #[serde(rename = "acc_1.0x")]
    pub acc_1_0x: f64,
    pub loss: f64,
    pub decoded_none: usize,
    pub decoded_lh_only: usize,
    pub decoded_both: usize,
    pub decoded_megabits: f64,
    #[serde(rename = "comm_power_mW")]
    pub comm_power_mw: f64,
    #[serde(rename = "comp_MFLOPS")]
    pub comp_mflops: f64,
}

#[derive(Debug, Clone)]
pub struct Lane {
    /// Width this lane is evaluated at, or `None` for the slimmable lane
    /// (evaluated at 0.5x and 1.0x).
    pub width: Option<f64>,
    pub global: SlimmableParams,
    pub devices: Vec<Vec<f64>>,
    pub optimizers: Vec<OptimizerState>,
    pub segments: Vec<Vec<bool>>,
    pub segment_bits: Vec<u64>,
    pub thresholds: DecodeThresholds,
    /// Reported decode level for each value of `decoded_upto`.
    pub levels: Vec<usize>,
    pub algorithm: LocalAlgorithm,
    pub power_w: f64,
    pub mflops_per_image: f64,
    weighting: Weighting,
}

pub struct Federation<'a> {
    cfg: FederationConfig,
    train: TrainConfig,
    channel: ChannelConfig,
    data: &'a Dataset,
    shards: Vec<Shard>,
    seed: u64,
    round: usize,
    lanes: Vec<Lane>,
}

impl<'a> Federation<'a> {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        cfg: FederationConfig,
        train: TrainConfig,
        channel: ChannelConfig,
        cost: CostProfile,
        layout: Layout,
        data: &'a Dataset,
        shards: Vec<Shard>,
        seed: u64,
    ) -> Result<Self> {
        cfg.validate()?;
        train.validate()?;
        channel.validate()?;
        if shards.len() != cfg.devices {
            return Err(Error::Shape {
                context: "shards",
                expected: cfg.devices,
                actual: shards.len(),
            });
        }
        if layout.input_dim() != data.dim() {
            return Err(Error::Shape {
                context: "model input",
                expected: data.dim(),
                actual: layout.input_dim(),
            });
        }
        let init = SlimmableParams::init(layout.clone(), &mut stream_rng(seed, Stream::Init));
        let k = cfg.devices;
        let (lh_bits, _) = cost.width_cost(&layout, cfg.lh_ratio)?;
        let make_lane = |width: Option<f64>,
                         segments: Vec<Vec<bool>>,
                         segment_bits: Vec<u64>,
                         thresholds: DecodeThresholds,
                         levels: Vec<usize>,
                         algorithm: LocalAlgorithm,
                         power_w: f64,
                         mflops_per_image: f64,
                         probs: Option<Vec<f64>>| {
            let weighting = match (cfg.weighting, probs) {
                (WeightingMode::Expected, Some(probs)) => Weighting::Expected { probs },
                _ => Weighting::Empirical,
            };
            Lane {
                width,
                global: init.clone(),
                devices: vec![init.values().to_vec(); k],
                optimizers: vec![OptimizerState::new(train.optimizer, init.len()); k],
                segments,
                segment_bits,
                thresholds,
                levels,
                algorithm,
                power_w,
                mflops_per_image,
                weighting,
            }
        };
        let expected_probs = |t: &DecodeThresholds| -> Result<Option<Vec<f64>>> {
            if cfg.weighting != WeightingMode::Expected {
                return Ok(None);
            }
            match channel.fading {
                crate::channel::Fading::Rayleigh => Ok(Some(t.rayleigh_probabilities())),
                other => Err(Error::UnsupportedClosedForm(other.name())),
            }
        };
        let mut lanes = Vec::new();
        if cfg.scheme == Scheme::SlimFl {
            let lh = build_mask(&layout, cfg.lh_ratio)?;
            let (full_bits, _) = cost.width_cost(&layout, 1.0)?;
            let mflops: f64 = train
                .width_ratios
                .iter()
                .map(|&r| cost.width_cost(&layout, r).map(|c| c.1))
                .sum::<Result<f64>>()?;
            let thresholds = channel.thresholds();
            let probs = if cfg.weighting == WeightingMode::Expected {
                Some(decode_probabilities(&channel)?)
            } else {
                None
            };
            lanes.push(make_lane(
                None,
                vec![lh.bits().to_vec(), lh.complement_bits()],
                vec![lh_bits, full_bits - lh_bits],
                thresholds,
                vec![0, 1, 2],
                cfg.algorithm,
                channel.total_power_w,
                mflops,
                probs,
            ));
        } else {
            for &r in cfg.scheme.vanilla_widths() {
                let mask = build_mask(&layout, r)?;
                let (bits, mflops) = cost.width_cost(&layout, r)?;
                let rate = match cfg.vanilla_rate {
                    VanillaRate::PayloadScaled => channel.rate_bps * bits as f64 / lh_bits as f64,
                    VanillaRate::Same => channel.rate_bps,
                };
                let u2 = rate_to_u_prime(rate, channel.bandwidth_hz);
                let thresholds = thresholds_from(channel.c(), u2, &[channel.total_power_w]);
                let probs = expected_probs(&thresholds)?;
                let level = if r >= 1.0 { 2 } else { 1 };
                lanes.push(make_lane(
                    Some(r),
                    vec![mask.bits().to_vec()],
                    vec![bits],
                    thresholds,
                    vec![0, level],
                    LocalAlgorithm::FixedWidth { ratio: r },
                    channel.total_power_w,
                    mflops,
                    probs,
                ));
            }
        }
        Ok(Self {
            cfg,
            train,
            channel,
            data,
            shards,
            seed,
            round: 0,
            lanes,
        })
    }

    pub fn config(&self) -> &FederationConfig {
        &self.cfg
    }

    pub fn lanes(&self) -> &[Lane] {
        &self.lanes
    }

    /// Rounds completed so far.
    pub fn round(&self) -> usize {
        self.round
    }

    /// Total transmit power of one device per round, in mW.
    pub fn comm_power_mw(&self) -> f64 {
        self.lanes.iter().map(|l| l.power_w).sum::<f64>() * 1e3
    }

    /// Per-image compute of every width trained in a round, in MFLOPS.
    pub fn comp_mflops(&self) -> f64 {
        self.lanes.iter().map(|l| l.mflops_per_image).sum()
    }

    /// Global model evaluated at each reported width (NaN where the scheme
    /// has no model of that width).
    pub fn evaluate(&self, test: &Dataset) -> Result<(f64, f64)> {
        let mut acc = (f64::NAN, f64::NAN);
        for lane in &self.lanes {
            match lane.width {
                None => {
                    acc.0 = accuracy(&lane.global, test, self.cfg.lh_ratio)?;
                    acc.1 = accuracy(&lane.global, test, 1.0)?;
                }
                Some(r) if r >= 1.0 => acc.1 = accuracy(&lane.global, test, 1.0)?,
                Some(r) => acc.0 = accuracy(&lane.global, test, r)?,
            }
        }
        Ok(acc)
    }

    fn local_training(&mut self, round: usize) -> Result<Vec<f64>> {
        let k = self.cfg.devices;
        let data = self.data;
        let shards = &self.shards;
        let train = &self.train;
        let seed = self.seed;
        let iters = self.cfg.local_iters;
        let mut losses = Vec::new();
        for (li, lane) in self.lanes.iter_mut().enumerate() {
            let layout = lane.global.layout();
            let algo = lane.algorithm;
            let global = lane.global.values();
            let results: Vec<Result<f64>> = lane
                .devices
                .par_iter_mut()
                .zip(lane.optimizers.par_iter_mut())
                .enumerate()
                .map(|(dev, (params, opt))| {
                    params.copy_from_slice(global);
                    let id = li * k + dev;
                    let mut batch_rng = stream_rng(seed, Stream::Batch { device: id, round });
                    let mut width_rng = stream_rng(seed, Stream::WidthSample { device: id, round });
                    let mut loss = 0.0;
                    for _ in 0..iters {
                        let idx = sample_batch(&shards[dev].indices, train.batch_size, &mut batch_rng);
                        let (x, y) = data.batch(&idx);
                        let obj = NetBatch { layout, inputs: &x, labels: &y };
                        loss = local_step(&obj, params, train, algo, opt, &mut width_rng)?.combined;
                    }
                    Ok(loss)
                })
                .collect();
            for r in results {
                losses.push(r?);
            }
        }
        Ok(losses)
    }

    fn draw_outcomes(&self, round: usize) -> Vec<Vec<usize>> {
        let k = self.cfg.devices;
        self.lanes
            .iter()
            .enumerate()
            .map(|(li, lane)| {
                (0..k)
                    .map(|dev| {
                        let id = li * k + dev;
                        let mut rng = stream_rng(self.seed, Stream::Fading { device: id, round });
                        decode_with(&lane.thresholds, &self.channel.fading, &mut rng).decoded_upto
                    })
                    .collect()
            })
            .collect()
    }

    /// One round with fading drawn from the channel model.
    pub fn run_round(&mut self, test: Option<&Dataset>) -> Result<RoundMetrics> {
        let round = self.round + 1;
        let losses = self.local_training(round)?;
        let outcomes = self.draw_outcomes(round);
        self.finish_round(round, losses, &outcomes, test)
    }

    /// One round with decode outcomes given per lane and device instead of
    /// drawn (`outcomes[lane][device]` is `decoded_upto`).
    pub fn run_round_scripted(
        &mut self,
        outcomes: &[Vec<usize>],
        test: Option<&Dataset>,
    ) -> Result<RoundMetrics> {
        if outcomes.len() != self.lanes.len()
            || outcomes.iter().any(|o| o.len() != self.cfg.devices)
        {
            return Err(Error::DecodeSets("one outcome per lane and device required".into()));
        }
        let round = self.round + 1;
        let losses = self.local_training(round)?;
        self.finish_round(round, losses, outcomes, test)
    }

    fn finish_round(
        &mut self,
        round: usize,
        losses: Vec<f64>,
        outcomes: &[Vec<usize>],
        test: Option<&Dataset>,
    ) -> Result<RoundMetrics> {
        let k = self.cfg.devices;
        let mut level = vec![0usize; k];
        let mut bits = 0u64;
        for (lane, out) in self.lanes.iter_mut().zip(outcomes) {
            let next = aggregate_segments(
                lane.global.values(),
                &lane.devices,
                out,
                &lane.segments,
                &lane.weighting,
            )?;
            lane.global.values_mut().copy_from_slice(&next);
            for (dev, &d) in out.iter().enumerate() {
                let d = d.min(lane.segments.len());
                bits += lane.segment_bits[..d].iter().sum::<u64>();
                level[dev] = level[dev].max(lane.levels[d]);
            }
        }
        // downlink: devices restart from the new global at the next round
        for lane in &mut self.lanes {
            let g = lane.global.values().to_vec();
            lane.devices.iter_mut().for_each(|d| d.copy_from_slice(&g));
        }
        self.round = round;
        let (acc_0_5x, acc_1_0x) = match test {
            Some(t) => self.evaluate(t)?,
            None => (f64::NAN, f64::NAN),
        };
        Ok(RoundMetrics {
            round,
            acc_0_5x,
            acc_1_0x,
            loss: losses.iter().sum::<f64>() / losses.len().max(1) as f64,
            decoded_none: level.iter().filter(|&&l| l == 0).count(),
            decoded_lh_only: level.iter().filter(|&&l| l == 1).count(),
            decoded_both: level.iter().filter(|&&l| l == 2).count(),
            decoded_megabits: bits as f64 / 1e6,
            comm_power_mw: self.comm_power_mw(),
            comp_mflops: self.comp_mflops(),
        })
    }
}
