//! Optimality gap of a federated quadratic trained with superposition
//! decoding, averaged over seeds, next to the analytic bound.
//!
//! cargo run --release --example convergence_bound

use slimfl::analysis::{lemma1_b, theorem1_bound, ConvergenceParams, FederatedQuadratic};
use slimfl::rng::{stream_rng, Stream};

fn main() -> slimfl::Result<()> {
    let k = 10;
    let q = FederatedQuadratic {
        curvature: vec![1.0, 2.0, 0.5, 1.5, 1.0, 3.0],
        optimum: vec![1.0, -2.0, 0.5, 0.0, 3.0, -1.0],
        lh: vec![true, true, true, false, false, false],
        noise_std: (0..k).map(|i| 0.5 + 0.1 * i as f64).collect(),
        weights: (0.5, 0.5),
    };
    let (p1, p2) = (0.9, 0.7);
    let theta1 = vec![0.0; q.dim()];
    let (mu, l) = q.moduli();
    let params = ConvergenceParams {
        mu,
        l,
        delta: q.delta(),
        delta1: theta1.iter().zip(&q.optimum).map(|(a, b)| (a - b) * (a - b)).sum(),
        p1,
        p2,
        weights: vec![q.weights.0, q.weights.1],
    };
    println!("mu = {mu}, L = {l}, delta = {:.3}, B = {:.3}", q.delta(), lemma1_b(&params)?);

    let (rounds, seeds) = (300, 50);
    let mut mean = vec![0.0; rounds];
    for s in 0..seeds {
        let gaps = q.simulate(&theta1, p1, p2, rounds, &mut stream_rng(s, Stream::Aux(5)))?;
        mean.iter_mut().zip(gaps).for_each(|(m, g)| *m += g / seeds as f64);
    }
    println!("{:>6} {:>12} {:>12}", "t", "mean gap", "bound");
    for t in [1, 2, 5, 10, 20, 50, 100, 200, 300] {
        println!("{:>6} {:>12.5} {:>12.5}", t, mean[t - 1], theorem1_bound(&params, t)?);
    }
    Ok(())
}
