//! Closed forms of the kernel integrals against quadrature, and the sweep of
//! the reduced integrals that underlies the uniform bounds.
//!
//! cargo run --release --example oracle_integrals

use muskat_bubble::quadrature::{
    i1_reduced, i2_reduced, oracle_i1, oracle_i2, oracle_quadrature, OracleIndex, OracleKernel,
};

fn main() -> muskat_bubble::Result<()> {
    let cases = [
        (2, vec![1]),
        (0, vec![3, -3]),
        (5, vec![2, 7, -4]),
        (-11, vec![20]),
        (40, vec![-17, 9]),
    ];
    println!("   k  ks              I1 closed        I1 quad          I2 closed        I2 quad");
    for (k, ks) in cases {
        let idx = OracleIndex::new(k, ks.clone())?;
        println!(
            "{k:4}  {:<14} {:+.12}  {:+.12}  {:+.12}  {:+.12}",
            format!("{ks:?}"),
            oracle_i1(&idx),
            oracle_quadrature(&idx, OracleKernel::Sin)?,
            oracle_i2(&idx),
            oracle_quadrature(&idx, OracleKernel::Cot)?
        );
    }
    let (mut m1, mut m2) = (0.0f64, 0.0f64);
    for k in -200..=200 {
        for a in -200..=200 {
            m1 = m1.max(i1_reduced(k, a).abs());
            m2 = m2.max(i2_reduced(k, a).abs());
        }
    }
    println!("sweep |k|,|A| <= 200: max|I1| = {m1:.12}, max|I2| = {m2:.12}");
    Ok(())
}
