//! Relaxation of a slightly elliptic bubble to the translating circle.
//!
//! cargo run --release --example exponential_decay -- [n_max] [dt] [t_end]

use std::time::Instant;

use muskat_bubble::diagnostics::{analyticity_fit, decay_fit_records, drift_velocity, ANALYTICITY_FLOOR};
use muskat_bubble::geometry::{normalize_initial_data, BubbleState, PhysicalParams};
use muskat_bubble::integrator::{run, IntegratorConfig};
use muskat_bubble::SpectralFunction;

fn main() -> muskat_bubble::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let n_max = args.first().and_then(|s| s.parse().ok()).unwrap_or(64);
    let dt = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(1e-3);
    let t_end = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(5.0);

    let params = PhysicalParams::new(0.0, 1.0)?;
    let shape = SpectralFunction::cosine(n_max, 2, 0.01, 0.0);
    let norm = normalize_initial_data(&shape)?;
    let init = BubbleState {
        f: norm.f0,
        c: [0.0; 2],
        t: 0.0,
    };
    let cfg = IntegratorConfig {
        n_max,
        dt,
        t_end,
        ..IntegratorConfig::default()
    };

    let clock = Instant::now();
    let traj = run(&init, &cfg, &params)?;
    println!(
        "steps {}  wall {:.1}s",
        traj.records.len() - 1,
        clock.elapsed().as_secs_f64()
    );
    for r in traj.records.iter().step_by((traj.records.len() / 20).max(1)) {
        println!(
            "t {:8.4}  |f|_F11 {:.6e}  area {:.1e}  c ({:+.6}, {:+.6})",
            r.t, r.norm_f11, r.area_residual, r.c[0], r.c[1]
        );
    }
    if let Ok(fit) = decay_fit_records(&traj, [0.5, 3.0]) {
        println!("decay rate {:.6}  R² {:.8}", fit.rate, fit.r_squared);
    }
    if let Some(t) = traj.converged_at {
        println!("reached the floor at t = {t:.4}");
    }
    match drift_velocity(&traj, 0.5) {
        Ok(v) => println!("drift velocity ({:+.3e}, {:.9})", v[0], v[1]),
        Err(e) => println!("drift velocity unavailable: {e}"),
    }
    let fit = analyticity_fit(&traj, ANALYTICITY_FLOOR);
    for s in fit.samples.iter().filter(|s| {
        [0.01, 0.05, 0.1, 0.2, 0.3, 0.5]
            .iter()
            .any(|t| (s.t - t).abs() < 0.5 * dt)
    }) {
        println!("rho({:.2}) = {:?} over {} modes", s.t, s.rho, s.active_modes);
    }
    Ok(())
}
