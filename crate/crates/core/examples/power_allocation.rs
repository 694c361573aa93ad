//! Power split between the two superposed messages: exact minimizer of
//! D(λ) = 1/p1 + 1/p2, its first-order closed form, and the curve itself.
//!
//! cargo run --example power_allocation

use slimfl::analysis::{lambda_closed, optimize_lambda, PowerObjective};
use slimfl::channel::ChannelConfig;

fn main() -> slimfl::Result<()> {
    let ch = ChannelConfig::reference();
    let obj = PowerObjective::from_channel(&ch);
    let opt = optimize_lambda(&obj)?;
    println!("lambda numeric {:.4}, closed {:.4}", opt.numeric, opt.closed);
    println!(
        "alternative expression gives {:.4} (above one: {})",
        opt.printed, opt.printed_exceeds_one
    );
    let p = ch.total_power_w * 1e3;
    println!("P1 = {:.1} mW, P2 = {:.1} mW\n", opt.numeric * p, (1.0 - opt.numeric) * p);

    // a noisier link so D(λ) is visibly above 2
    let noisy = PowerObjective { c: obj.p * 0.02, ..obj };
    let lo = noisy.lower_bound();
    println!("{:>8} {:>12} {:>12}", "lambda", "D exact", "D taylor");
    for i in 1..=12 {
        let l = lo + (1.0 - lo) * i as f64 / 13.0;
        println!("{:>8.4} {:>12.5} {:>12.5}", l, noisy.exact(l), noisy.taylor(l));
    }
    let o = optimize_lambda(&noisy)?;
    println!("noisy optimum {:.4} (closed form {:.4})", o.numeric, lambda_closed(noisy.u_prime));
    Ok(())
}
