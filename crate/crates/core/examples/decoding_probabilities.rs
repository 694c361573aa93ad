//! Successive decoding of the two superposed messages: closed-form
//! Rayleigh probabilities against Monte Carlo, and Monte Carlo only for
//! Rician and TWDP fading.
//!
//! cargo run --release --example decoding_probabilities

use slimfl::channel::{decode_probabilities, ChannelConfig, Fading};
use slimfl::rng::{stream_rng, Stream};

fn main() -> slimfl::Result<()> {
    let base = ChannelConfig::reference();
    println!("reference link: c = {:.3e}, u' = {:.3}", base.c(), base.u_prime());
    let p = decode_probabilities(&base)?;
    println!("reference probabilities: p1 = {:.6}, p2 = {:.6}\n", p[0], p[1]);

    let ch = base.calibrated(0.9, 0.7)?;
    println!("calibrated to (0.9, 0.7): lambda = {:.4}", ch.power_split);
    let t = ch.thresholds();
    println!("thresholds: tau1 = {:.4}, tau2 = {:.4}", t.tau[0], t.tau[1]);
    let draws = 200_000;
    let mut rng = stream_rng(7, Stream::Aux(0));
    for fading in [Fading::Rayleigh, Fading::rician_reference(), Fading::twdp_reference()] {
        let mc = t.monte_carlo_probabilities(&fading, draws, &mut rng);
        let closed = match decode_probabilities(&ChannelConfig { fading, ..ch }) {
            Ok(p) => format!("{:.4} {:.4}", p[0], p[1]),
            Err(e) => format!("({e})"),
        };
        println!("{:<8} MC {:.4} {:.4}   closed {}", fading.name(), mc[0], mc[1], closed);
    }
    Ok(())
}
