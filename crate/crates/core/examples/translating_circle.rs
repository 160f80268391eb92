//! The trivial solution: a unit circle translating upward at speed A_ρσ.
//!
//! cargo run --release --example translating_circle

use muskat_bubble::diagnostics::drift_velocity;
use muskat_bubble::geometry::{BubbleState, PhysicalParams};
use muskat_bubble::integrator::{run, IntegratorConfig};

fn main() -> muskat_bubble::Result<()> {
    let cfg = IntegratorConfig {
        n_max: 32,
        dt: 1e-2,
        t_end: 2.0,
        floor: 0.0,
        ..IntegratorConfig::default()
    };
    for a_mu in [-1.0, 0.0, 0.5, 1.0] {
        for a_rs in [0.0, 1.0, -2.5] {
            let params = PhysicalParams::new(a_mu, a_rs)?;
            let traj = run(&BubbleState::circle(32), &cfg, &params)?;
            let worst = traj.records.iter().map(|r| r.norm_f11).fold(0.0, f64::max);
            let v = drift_velocity(&traj, 0.5)?;
            println!(
                "A_mu {a_mu:+.1}  A_rs {a_rs:+.1}  max|f|_F11 {worst:.1e}  drift ({:+.2e}, {:+.12})",
                v[0], v[1]
            );
        }
    }
    Ok(())
}
