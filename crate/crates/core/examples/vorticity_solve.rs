//! Neumann-series vorticity solve against a dense collocation solve.
//!
//! cargo run --release --example vorticity_solve

use muskat_bubble::geometry::PhysicalParams;
use muskat_bubble::vorticity::{dense_solve_oracle, solve_vorticity, DEFAULT_TOL};
use muskat_bubble::{NormSpec, SpectralFunction};

fn main() -> muskat_bubble::Result<()> {
    let n = 32;
    let f = SpectralFunction::cosine(n, 2, 0.05, 0.0).add(&SpectralFunction::sine(n, 3, 0.02));
    for a_mu in [-0.9, -0.5, 0.0, 0.5, 0.9] {
        let p = PhysicalParams::new(a_mu, 1.5)?;
        let s = solve_vorticity(&f, &p, DEFAULT_TOL)?;
        let gap = s
            .omega
            .sub(&dense_solve_oracle(&f, &p)?)
            .wiener_norm(NormSpec::sobolev(0.0), false);
        println!(
            "A_mu {a_mu:+.1}  iterations {:3}  residual {:.1e}  |Neumann - dense|_F01 {gap:.1e}  mean {:.1e}",
            s.iterations,
            s.residual,
            s.omega.mean().abs()
        );
    }
    Ok(())
}
