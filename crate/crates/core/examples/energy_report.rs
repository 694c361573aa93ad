//! Energy spent until convergence, from the metrics of one run.
//!
//! cargo run --release --example energy_report

use slimfl::experiment::{
    detect_convergence_with, energy_ratio, energy_report, judged_trace, load_datasets,
    simulate_seed, ConvergenceCriterion, ExperimentConfig,
};

fn config(scheme: &str) -> String {
    format!(
        r#"
[experiment]
rounds = 120
devices = 10
scheme = "{scheme}"
[data]
source = "synthetic"
classes = 10
per_class = 100
test_per_class = 30
dim = 20
[model]
hidden = [32]
[channel]
target_p1 = 0.9
target_p2 = 0.8
[cost]
profile = "reference"
"#
    )
}

fn main() -> slimfl::Result<()> {
    let crit = ConvergenceCriterion { window: 20, mean: 0.8, std: 0.03 };
    let mut reports = Vec::new();
    for scheme in ["slimfl", "vanilla_1.5x"] {
        let cfg = ExperimentConfig::from_toml(&config(scheme))?;
        let (train, test) = load_datasets(&cfg)?;
        let m = simulate_seed(&cfg, &train, &test, 1)?;
        let conv = detect_convergence_with(&judged_trace(&m), crit);
        let rep = energy_report(&m, conv);
        println!(
            "{scheme:<13} converged at {:?}: {:.3} W over {} rounds, {:.2} MFLOPS (complete: {})",
            conv, rep.comm_power_w, rep.rounds, rep.comp_mflops, rep.complete
        );
        reports.push(rep);
    }
    let (comm, comp) = energy_ratio(&reports[0], &reports[1]);
    println!("slimfl / vanilla_1.5x: communication {comm:.3}, computation {comp:.3}");
    Ok(())
}
