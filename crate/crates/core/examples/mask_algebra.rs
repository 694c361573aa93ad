//! Width masks of a slimmable MLP: nesting, segments and sub-network cost.
//!
//! cargo run --example mask_algebra

use slimfl::slim::{build_mask, model_cost, Layout, BITS_PER_PARAM_F32};

fn main() -> slimfl::Result<()> {
    let layout = Layout::slim_mlp(784, &[64, 64], 10)?;
    println!("parameters: {}", layout.param_count());
    println!("{:>6} {:>8} {:>10} {:>10}", "width", "params", "MFLOPS", "Mbit");
    let ratios = [0.25, 0.5, 0.75, 1.0];
    for &r in &ratios {
        let m = build_mask(&layout, r)?;
        let c = model_cost(&layout, &m, BITS_PER_PARAM_F32);
        println!("{:>5}x {:>8} {:>10.4} {:>10.4}", r, c.param_count, c.mflops(), c.megabits());
    }

    let lh = build_mask(&layout, 0.5)?;
    let full = build_mask(&layout, 1.0)?;
    let rh = full.difference(&lh);
    println!(
        "0.5x inside 1.0x: {}  LH {} + RH {} = {}",
        lh.is_subset_of(&full),
        lh.count_ones(),
        rh.iter().filter(|&&b| b).count(),
        full.count_ones()
    );
    for w in ratios.windows(2) {
        let (a, b) = (build_mask(&layout, w[0])?, build_mask(&layout, w[1])?);
        println!("{}x inside {}x: {}", w[0], w[1], a.is_subset_of(&b));
    }
    Ok(())
}
