//! All four transmission schemes on the same non-IID Gaussian-blob
//! federation over a lossy channel: accuracy per width, decoded traffic,
//! power and compute.
//!
//! cargo run --release --example slimfl_vs_vanilla

use slimfl::experiment::{load_datasets, simulate_seed, ExperimentConfig};

fn config(scheme: &str) -> String {
    format!(
        r#"
[experiment]
rounds = 80
devices = 10
scheme = "{scheme}"
[data]
source = "synthetic"
alpha = 0.3
classes = 10
per_class = 100
test_per_class = 30
dim = 20
spread = 1.0
[model]
hidden = [32]
[channel]
target_p1 = 0.8
target_p2 = 0.6
"#
    )
}

fn main() -> slimfl::Result<()> {
    let base = ExperimentConfig::from_toml(&config("slimfl"))?;
    let (train, test) = load_datasets(&base)?;
    println!(
        "{:<13} {:>8} {:>8} {:>10} {:>10} {:>10}",
        "scheme", "acc0.5x", "acc1.0x", "Mbit/rnd", "mW", "MFLOPS"
    );
    for scheme in ["slimfl", "vanilla_0.5x", "vanilla_1.0x", "vanilla_1.5x"] {
        let cfg = ExperimentConfig::from_toml(&config(scheme))?;
        let m = simulate_seed(&cfg, &train, &test, 1)?;
        let last = m.last().expect("rounds > 0");
        let mbit = m.iter().map(|r| r.decoded_megabits).sum::<f64>() / m.len() as f64;
        println!(
            "{:<13} {:>8.3} {:>8.3} {:>10.4} {:>10.1} {:>10.4}",
            scheme, last.acc_0_5x, last.acc_1_0x, mbit, last.comm_power_mw, last.comp_mflops
        );
    }
    Ok(())
}
