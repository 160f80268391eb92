//! Diagonalization of the linearized frequency system: residuals of the
//! partial-product eigenvector matrices and their ℓ¹ operator norms.
//!
//! cargo run --release --example diagonalizer

use muskat_bubble::linear::{
    build_diagonalizer, build_repaired_diagonalizer, diagonalization_residual, inverse_residual, l1_norm,
    BidiagonalSystem,
};

fn main() -> muskat_bubble::Result<()> {
    println!("coupling      n   |SS⁻¹-I|   rows≥2     row 1      repaired   ‖S‖₁       ‖S⁻¹‖₁");
    for c in [0.5, 2.0, 4.0] {
        for n in [16, 32, 64, 128] {
            let sys = BidiagonalSystem::with_coupling(n, c)?;
            let stated = build_diagonalizer(&sys);
            let fixed = build_repaired_diagonalizer(&sys);
            let r = diagonalization_residual(&sys, &stated);
            let rr = diagonalization_residual(&sys, &fixed);
            println!(
                "{c:8.1} {n:6}   {:.2e}   {:.2e}   {:.2e}   {:.2e}   {:.6}   {:.6}",
                inverse_residual(&stated),
                r.rows_from_two,
                r.row_one,
                rr.full,
                l1_norm(&fixed.s),
                l1_norm(&fixed.s_inv)
            );
        }
    }
    Ok(())
}
