//! Normalization of raw initial shapes to unit area with the pole at the
//! centroid.
//!
//! cargo run --release --example normalization

use std::f64::consts::PI;

use muskat_bubble::geometry::{area, centroid_moment, normalize_initial_data};
use muskat_bubble::SpectralFunction;

fn main() -> muskat_bubble::Result<()> {
    let n = 16;
    let shapes = [
        ("0.01 cos 2α", SpectralFunction::cosine(n, 2, 0.01, 0.0)),
        ("0.2 cos α", SpectralFunction::cosine(n, 1, 0.2, 0.0)),
        (
            "0.5 + 0.1 sin 3α",
            SpectralFunction::constant(n, 0.5).add(&SpectralFunction::sine(n, 3, 0.1)),
        ),
    ];
    for (name, f) in shapes {
        let out = normalize_initial_data(&f)?;
        let mo = centroid_moment(&out.f0);
        println!(
            "{name:<18} shift ({:+.3e}, {:+.3e})  scale {:.12}  |area-π| {:.1e}  |moment| {:.1e}",
            out.shift[0],
            out.shift[1],
            out.scale,
            (area(&out.f0) - PI).abs(),
            mo[0].hypot(mo[1])
        );
    }
    Ok(())
}
