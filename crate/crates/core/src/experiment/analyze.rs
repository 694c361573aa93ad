use serde::Serialize;

use super::config::ExperimentConfig;
use super::run::load_datasets;
use crate::analysis::{
    estimate_delta, ips, ips_width_selection, lemma1_b, optimize_lambda, theorem1_bound,
    DeltaEstimate, LambdaOptimum, PowerObjective,
};
use crate::channel::{decode_probabilities, ChannelConfig, Fading};
use crate::data::dirichlet_partition;
use crate::error::Result;
use crate::rng::{stream_rng, Stream};
use crate::slim::SlimmableParams;

const MC_DRAWS: usize = 200_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DSample {
    pub lambda: f64,
    pub exact: f64,
    pub taylor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChannelReport {
    pub c: f64,
    pub u_prime: f64,
    pub total_power_mw: f64,
    pub p1_mw: f64,
    pub p2_mw: f64,
    pub p1: f64,
    pub p2: f64,
    /// Whether `p1, p2` are closed-form (Rayleigh) or Monte Carlo.
    pub closed_form: bool,
    pub d_at_split: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IpsReport {
    pub r_peak_mflops: f64,
    pub target: f64,
    pub ips: Vec<f64>,
    /// Index into the cost table, 0-based.
    pub chosen: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub channel: ChannelReport,
    pub lambda: Option<LambdaOptimum>,
    pub d_samples: Vec<DSample>,
    pub delta: Option<DeltaEstimate>,
    #[serde(rename = "B")]
    pub b: Option<f64>,
    pub bound_curve: Vec<f64>,
    pub ips: IpsReport,
}

pub fn channel_report(ch: &ChannelConfig, seed: u64) -> ChannelReport {
    let (p, closed_form) = match decode_probabilities(ch) {
        Ok(p) => (p, true),
        Err(_) => {
            let mut rng = stream_rng(seed, Stream::Aux(1));
            (ch.thresholds().monte_carlo_probabilities(&ch.fading, MC_DRAWS, &mut rng), false)
        }
    };
    let [p1w, p2w] = ch.powers();
    ChannelReport {
        c: ch.c(),
        u_prime: ch.u_prime(),
        total_power_mw: ch.total_power_w * 1e3,
        p1_mw: p1w * 1e3,
        p2_mw: p2w * 1e3,
        p1: p[0],
        p2: p[1],
        closed_form,
        d_at_split: 1.0 / p[0] + 1.0 / p[1],
    }
}

pub fn d_samples(obj: &PowerObjective, n: usize) -> Vec<DSample> {
    let lo = obj.lower_bound();
    (1..=n)
        .map(|i| {
            let lambda = lo + (1.0 - lo) * i as f64 / (n + 1) as f64;
            DSample {
                lambda,
                exact: obj.exact(lambda),
                taylor: obj.taylor(lambda),
            }
        })
        .collect()
}

pub fn ips_report(cfg: &ExperimentConfig) -> IpsReport {
    let a = &cfg.analysis;
    IpsReport {
        r_peak_mflops: a.r_peak_mflops,
        target: a.ips_target,
        ips: ips(a.r_peak_mflops, &a.ips_costs_mflops),
        chosen: ips_width_selection(a.r_peak_mflops, &a.ips_costs_mflops, a.ips_target),
    }
}

/// Closed-form quantities of the configured setup. The non-IIDness is
/// estimated on the first seed's partition at the initial model.
pub fn analyze(cfg: &ExperimentConfig, with_delta: bool) -> Result<AnalysisReport> {
    cfg.validate()?;
    let seed = cfg.experiment.seeds[0];
    let ch = cfg.channel_config()?;
    let channel = channel_report(&ch, seed);
    let obj = PowerObjective::from_channel(&ch);
    let lambda = optimize_lambda(&obj).ok();
    let delta = if with_delta {
        let (train, _) = load_datasets(cfg)?;
        let shards = dirichlet_partition(
            &train.labels,
            train.classes,
            cfg.experiment.devices,
            cfg.data.alpha,
            &mut stream_rng(seed, Stream::Partition),
        )?;
        let layout = cfg.layout(train.dim(), train.classes)?;
        let params = SlimmableParams::init(layout, &mut stream_rng(seed, Stream::Init));
        let mut rng = stream_rng(seed, Stream::Aux(2));
        Some(estimate_delta(
            &params,
            &train,
            &shards,
            cfg.analysis.delta_batch,
            cfg.analysis.delta_draws,
            &mut rng,
        )?)
    } else {
        None
    };
    let conv = cfg.convergence_params(
        delta.as_ref().map_or(0.0, |d| d.delta),
        channel.p1,
        channel.p2,
    );
    let b = lemma1_b(&conv).ok();
    let bound_curve = if b.is_some() {
        (1..=cfg.analysis.bound_rounds)
            .map(|t| theorem1_bound(&conv, t))
            .collect::<Result<Vec<_>>>()?
    } else {
        Vec::new()
    };
    Ok(AnalysisReport {
        d_samples: if matches!(ch.fading, Fading::Rayleigh) {
            d_samples(&obj, cfg.analysis.lambda_samples)
        } else {
            Vec::new()
        },
        channel,
        lambda,
        delta,
        b,
        bound_curve,
        ips: ips_report(cfg),
    })
}
