//! Duhamel fixed-point iteration on [0, T]: successive differences contract
//! and the limit agrees with time marching.
//!
//! cargo run --release --example picard_contraction

use muskat_bubble::geometry::{BubbleState, PhysicalParams};
use muskat_bubble::io::verify::picard_report;
use muskat_bubble::SpectralFunction;

fn main() -> muskat_bubble::Result<()> {
    let f = SpectralFunction::cosine(32, 2, 0.005, 0.0);
    let init = BubbleState::from_projection(&f, [0.0; 2], 0.0)?;
    for (a_mu, a_rs) in [(0.0, 1.0), (0.5, 2.0), (0.5, -2.0)] {
        let rep = picard_report(&init, &PhysicalParams::new(a_mu, a_rs)?, 0.5, 100, 6)?;
        println!("A_mu {a_mu}  A_rs {a_rs:+}");
        for (i, d) in rep.differences.iter().enumerate() {
            let ratio = if i == 0 {
                String::new()
            } else {
                format!("ratio {:.3e}", rep.ratios[i - 1])
            };
            println!("  |u{} - u{}|_X = {d:.3e}  {ratio}", i + 1, i);
        }
        println!("  limit vs time marching: {:.2e}", rep.march_gap);
    }
    Ok(())
}
