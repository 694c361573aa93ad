//! Widest sub-network that still meets an images-per-second target on a
//! device with a given compute budget.
//!
//! cargo run --example width_selection

use slimfl::analysis::{ips, ips_width_selection};
use slimfl::slim::UL_MOBILENET_SIXTHS_MFLOPS as COSTS;

fn main() {
    let target = 100.0;
    println!("costs per image (MFLOPS): {COSTS:?}");
    println!("{:>10} {:>8}  IPS per width", "R_peak", "chosen");
    for r_peak in [10.0, 23.0, 50.0, 100.0, 200.0, 300.0, 382.0, 500.0] {
        let chosen = ips_width_selection(r_peak, &COSTS, target)
            .map_or("none".to_string(), |i| format!("{}/6x", i + 1));
        let v: Vec<String> = ips(r_peak, &COSTS).iter().map(|x| format!("{x:.0}")).collect();
        println!("{:>10} {:>8}  {}", r_peak, chosen, v.join(" "));
    }
}
