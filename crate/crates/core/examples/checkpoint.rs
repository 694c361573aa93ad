//! Saves a slimmable model and reloads it bit for bit.
//!
//! cargo run --example checkpoint

use slimfl::rng::{stream_rng, Stream};
use slimfl::slim::{checkpoint, Layout, SlimmableParams};

fn main() -> slimfl::Result<()> {
    let layout = Layout::slim_mlp(16, &[12, 8], 4)?;
    let params = SlimmableParams::init(layout, &mut stream_rng(3, Stream::Init));
    let path = std::env::temp_dir().join("slimfl_example.ckpt");
    checkpoint::save(&params, &path)?;
    let back = checkpoint::load(&path)?;
    println!("{} parameters, {} bytes", back.len(), std::fs::metadata(&path)?.len());
    println!("identical: {}", back == params);
    std::fs::remove_file(&path)?;
    Ok(())
}
