//! Lossless snapshot encoding: hex IEEE bits plus a sha256 checksum.
//!
//! cargo run --release --example snapshot_roundtrip

use muskat_bubble::geometry::{normalize_initial_data, BubbleState};
use muskat_bubble::io::SnapshotRecord;
use muskat_bubble::SpectralFunction;

fn main() -> muskat_bubble::Result<()> {
    let mut shape = SpectralFunction::cosine(8, 2, 0.1, 0.3);
    shape.add_cosine(5, 0.01, 1.0);
    let norm = normalize_initial_data(&shape)?;
    let state = BubbleState {
        f: norm.f0,
        c: [0.1, -2.0 / 3.0],
        t: 0.125,
    };
    let line = SnapshotRecord::from_state(&state).to_line();
    println!("{line}");
    let back = SnapshotRecord::parse_line(&line)?.to_state()?;
    println!("bitwise identical: {}", back == state);
    let tampered = line.replacen("\"t\":\"3fc0", "\"t\":\"3fc1", 1);
    println!(
        "tampered record rejected: {}",
        SnapshotRecord::parse_line(&tampered)
            .and_then(|r| r.to_state())
            .is_err()
    );
    Ok(())
}
