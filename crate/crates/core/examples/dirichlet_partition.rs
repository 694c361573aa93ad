//! Non-IID shards from a Dirichlet prior: class entropy and the gradient
//! dissimilarity estimate as the concentration α varies.
//!
//! cargo run --release --example dirichlet_partition

use slimfl::analysis::estimate_delta;
use slimfl::data::{class_entropy, dirichlet_partition, synth_dataset};
use slimfl::rng::{stream_rng, Stream};
use slimfl::slim::{Layout, SlimmableParams};

fn main() -> slimfl::Result<()> {
    let data = synth_dataset(10, 200, 20, 1.0, &mut stream_rng(0, Stream::Aux(0)));
    let layout = Layout::slim_mlp(20, &[32], 10)?;
    let params = SlimmableParams::init(layout, &mut stream_rng(0, Stream::Init));
    println!("{:>6} {:>10} {:>10} {:>10}", "alpha", "entropy", "delta", "sigma_bar");
    for alpha in [0.05, 0.1, 0.5, 1.0, 10.0, 100.0] {
        let shards = dirichlet_partition(&data.labels, 10, 10, alpha, &mut stream_rng(1, Stream::Partition))?;
        let h = shards.iter().map(|s| class_entropy(&s.class_histogram)).sum::<f64>() / 10.0;
        let est = estimate_delta(&params, &data, &shards, 32, 20, &mut stream_rng(1, Stream::Aux(1)))?;
        println!("{alpha:>6} {h:>10.4} {:>10.4} {:>10.5}", est.delta, est.sigma_bar);
    }
    let shards = dirichlet_partition(&data.labels, 10, 5, 0.1, &mut stream_rng(2, Stream::Partition))?;
    println!("\nclass histograms at alpha = 0.1:");
    for s in &shards {
        println!("device {}: {:?}", s.device_id, s.class_histogram);
    }
    Ok(())
}
