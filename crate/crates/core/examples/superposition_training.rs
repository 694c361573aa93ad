//! Local training of one slimmable model with SUSTrain, SlimTrain and
//! USTrain on Gaussian blobs, then accuracy at each width.
//!
//! cargo run --release --example superposition_training

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use slimfl::data::{sample_batch, synth_dataset};
use slimfl::federation::accuracy;
use slimfl::slim::{Layout, SlimmableParams};
use slimfl::train::{local_step, LocalAlgorithm, NetBatch, OptimizerState, TrainConfig};

fn main() -> slimfl::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let all = synth_dataset(10, 120, 20, 1.5, &mut rng);
    let train_idx: Vec<usize> = (0..1000).collect();
    let test = all.subset(&(1000..all.len()).collect::<Vec<_>>());
    let layout = Layout::slim_mlp(20, &[32], 10)?;
    let init = SlimmableParams::init(layout.clone(), &mut rng);

    let three = TrainConfig {
        st_weights: vec![1.0 / 3.0; 3],
        width_ratios: vec![0.25, 0.5, 1.0],
        ..TrainConfig::slimfl_default()
    };
    let runs = [
        ("sustrain", LocalAlgorithm::SusTrain, TrainConfig::slimfl_default()),
        ("slimtrain", LocalAlgorithm::SlimTrain, TrainConfig::slimfl_default()),
        ("ustrain", LocalAlgorithm::UsTrain { widths_per_iter: 3 }, three),
    ];
    println!("{:<10} {:>8} {:>8} {:>8} {:>8}", "algorithm", "loss", "0.25x", "0.5x", "1.0x");
    for (name, algo, cfg) in runs {
        let mut params = init.clone();
        let mut opt = OptimizerState::new(cfg.optimizer, params.len());
        let mut batch_rng = ChaCha8Rng::seed_from_u64(2);
        let mut loss = 0.0;
        for _ in 0..600 {
            let idx = sample_batch(&train_idx, cfg.batch_size, &mut batch_rng);
            let (x, y) = all.batch(&idx);
            let obj = NetBatch { layout: &layout, inputs: &x, labels: &y };
            loss = local_step(&obj, params.values_mut(), &cfg, algo, &mut opt, &mut batch_rng)?.combined;
        }
        print!("{name:<10} {loss:>8.4}");
        for r in [0.25, 0.5, 1.0] {
            print!(" {:>8.3}", accuracy(&params, &test, r)?);
        }
        println!();
    }
    Ok(())
}
