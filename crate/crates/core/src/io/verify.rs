//! Batch runner for the invariant suites, plus the measurement helpers it
//! shares with the test suite.

use std::str::FromStr;
use std::time::Instant;

use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::error::{Error, Result};
use crate::evolution::{c_dot, evaluate_n, evaluate_n1};
use crate::geometry::{BubbleState, PhysicalParams};
use crate::integrator::{picard_iterate, run, x_norm_difference, IntegratorConfig};
use crate::linear::{
    build_diagonalizer, build_repaired_diagonalizer, diagonalization_residual, inverse_residual, l1_norm,
    BidiagonalSystem,
};
use crate::quadrature::{
    i1_reduced, i2_reduced, oracle_i1, oracle_i2, oracle_quadrature, OracleIndex, OracleKernel, QuadratureRule,
};
use crate::spectral::{NormSpec, SpectralFunction};
use crate::vorticity::{dense_solve_oracle, linear_vorticity, solve_vorticity, trivial_vorticity, DEFAULT_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    Quick,
    Full,
}

impl FromStr for Level {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quick" => Ok(Level::Quick),
            "full" => Ok(Level::Full),
            other => Err(Error::InvalidArgument(format!("unknown level '{other}'"))),
        }
    }
}

/// Deliberate defects for checking that the suite notices them.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// Builds the diagonalizer from `b_k` with the wrong sign.
    FlipCouplingSign,
}

impl FromStr for Fault {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "flip-coupling-sign" => Ok(Fault::FlipCouplingSign),
            other => Err(Error::InvalidArgument(format!("unknown fault '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

fn l1(f: &SpectralFunction) -> f64 {
    f.wiener_norm(NormSpec::sobolev(0.0), false)
}

/// Random mean-zero perturbation with `‖f‖_{F^{1,1}} = norm11`, completed
/// with the area-preserving zero mode.
pub fn random_admissible_state(rng: &mut impl Rng, n_max: usize, norm11: f64) -> Result<SpectralFunction> {
    let mut f = SpectralFunction::zeros(n_max);
    for k in 1..=n_max.min(12) {
        let amp = rng.random_range(-1.0..1.0) / (k * k) as f64;
        let phase = rng.random_range(0.0..std::f64::consts::TAU);
        f.set_coeff(k, Complex64::from_polar(amp, phase));
    }
    let f = f.scale(norm11 / f.norm_s(1.0));
    Ok(BubbleState::from_projection(&f, [0.0; 2], 0.0)?.f)
}

/// Least-squares slope of `log err` against `log eps`.
pub fn loglog_slope(eps: &[f64], errs: &[f64]) -> f64 {
    let x: Vec<f64> = eps.iter().map(|e| e.ln()).collect();
    let y: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// `(‖N(εf)/ε - N₁(f)‖, ‖(ω̃(εf) - ω̃₀)/ε - ω̃₁(f)‖)` in `F^{0,1}` for each `ε`.
pub fn linearization_errors(
    shape: &SpectralFunction,
    params: &PhysicalParams,
    eps: &[f64],
) -> Result<(Vec<f64>, Vec<f64>)> {
    let n1 = evaluate_n1(shape, c_dot(shape, params), params);
    let w1 = linear_vorticity(shape, params);
    let w0 = trivial_vorticity(shape.n_max(), params);
    let mut en = Vec::new();
    let mut ew = Vec::new();
    for &e in eps {
        let fe = BubbleState::from_projection(&shape.scale(e), [0.0; 2], 0.0)?.f;
        let w = solve_vorticity(&fe, params, DEFAULT_TOL)?.omega;
        let n = evaluate_n(&fe, &w, c_dot(&fe, params))?;
        en.push(l1(&n.scale(1.0 / e).sub(&n1)));
        ew.push(l1(&w.sub(&w0).scale(1.0 / e).sub(&w1)));
    }
    Ok((en, ew))
}

/// Picard run: successive-difference ratios in the X norm and the distance of
/// the last iterate's final state from the time-marched solution.
pub struct PicardReport {
    pub differences: Vec<f64>,
    pub ratios: Vec<f64>,
    pub march_gap: f64,
}

pub fn picard_report(
    initial: &BubbleState,
    params: &PhysicalParams,
    t_end: f64,
    steps: usize,
    iters: usize,
) -> Result<PicardReport> {
    let cfg = IntegratorConfig {
        n_max: initial.n_max(),
        dt: t_end / steps as f64,
        t_end,
        floor: 0.0,
        ..IntegratorConfig::default()
    };
    let its = picard_iterate(initial, &cfg, params, steps, iters)?;
    let differences = its
        .windows(2)
        .map(|w| x_norm_difference(&w[1], &w[0]))
        .collect::<Result<Vec<_>>>()?;
    let ratios = differences.windows(2).map(|w| w[1] / w[0]).collect();
    let marched = run(initial, &cfg, params)?;
    let last = its
        .last()
        .and_then(|it| it.states.last())
        .expect("at least one iterate");
    let march_gap = l1(&last.f.sub(&marched.last().expect("non-empty").f));
    Ok(PicardReport {
        differences,
        ratios,
        march_gap,
    })
}

fn random_index(rng: &mut impl Rng, max: i64) -> OracleIndex {
    let n = rng.random_range(1..=3);
    let mut ks = Vec::with_capacity(n);
    while ks.len() < n {
        let q = rng.random_range(-max..=max);
        if q != 0 {
            ks.push(q);
        }
    }
    OracleIndex::new(rng.random_range(-max..=max), ks).expect("nonzero factors")
}

fn check_oracles(level: Level) -> Result<(bool, String)> {
    let mut rng = StdRng::seed_from_u64(7);
    let count = if level == Level::Full { 500 } else { 120 };
    let mut worst = 0.0f64;
    for _ in 0..count {
        let idx = random_index(&mut rng, 50);
        for (kernel, closed) in [
            (OracleKernel::Sin, oracle_i1(&idx)),
            (OracleKernel::Cot, oracle_i2(&idx)),
        ] {
            worst = worst.max((oracle_quadrature(&idx, kernel)? - closed).abs());
        }
    }
    Ok((
        worst < 1e-10,
        format!("{count} indices, max |quadrature - closed form| = {worst:.2e}"),
    ))
}

fn check_bounds(level: Level) -> Result<(bool, String)> {
    let r = if level == Level::Full { 200 } else { 60 };
    let (mut m1, mut m2) = (0.0f64, 0.0f64);
    for k in -r..=r {
        for a in -r..=r {
            m1 = m1.max(i1_reduced(k, a).abs());
            m2 = m2.max(i2_reduced(k, a).abs());
        }
    }
    Ok((
        m1 <= 4.0 + 1e-12 && m2 <= 10.0 / 3.0 + 1e-12,
        format!("|k|,|A| <= {r}: max|I1| = {m1:.6}, max|I2| = {m2:.6}"),
    ))
}

fn check_large_quadrature() -> Result<(bool, String)> {
    let rule = QuadratureRule::new(1 << 16)?;
    let mut rng = StdRng::seed_from_u64(11);
    let mut worst = 0.0f64;
    let mut tried = 0;
    while tried < 6 {
        let k = rng.random_range(1000..20000);
        let q = rng.random_range(2..500) * 2 + 1;
        let idx = OracleIndex::new(k, vec![q])?;
        if !idx.is_periodic(OracleKernel::Sin) {
            continue;
        }
        let samples = rule.sample(|b| idx.integrand(OracleKernel::Sin, b));
        worst = worst.max((rule.pv_integral(&samples)? - oracle_i1(&idx)).abs());
        tried += 1;
    }
    Ok((
        worst < 1e-8,
        format!("m = 65536, 6 high-frequency indices, max error {worst:.2e}"),
    ))
}

fn check_inverse(n: usize) -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    for c in [0.5, 2.0, 4.0] {
        let sys = BidiagonalSystem::with_coupling(n, c)?;
        worst = worst.max(inverse_residual(&build_diagonalizer(&sys)));
        worst = worst.max(inverse_residual(&build_repaired_diagonalizer(&sys)));
    }
    Ok((worst < 1e-12, format!("n = {n}: max |S S^-1 - I| = {worst:.2e}")))
}

fn check_diagonalization(n: usize, fault: Option<Fault>) -> Result<(bool, String)> {
    let mut rows2 = 0.0f64;
    let mut row1 = 0.0f64;
    let mut repaired = 0.0f64;
    for c in [0.5, 2.0, 4.0] {
        let sys = BidiagonalSystem::with_coupling(n, c)?;
        let basis = match fault {
            Some(Fault::FlipCouplingSign) => BidiagonalSystem::with_coupling(n, -c)?,
            None => sys.clone(),
        };
        let stated = diagonalization_residual(&sys, &build_diagonalizer(&basis));
        rows2 = rows2.max(stated.rows_from_two);
        row1 = row1.max(stated.row_one);
        repaired = repaired.max(diagonalization_residual(&sys, &build_repaired_diagonalizer(&basis)).full);
    }
    Ok((
        rows2 < 1e-10 && repaired < 1e-10,
        format!("n = {n}: rows k>=2 {rows2:.2e}, repaired full {repaired:.2e}, stated row 1 {row1:.2e} (reported)"),
    ))
}

fn check_norm_stability() -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    for c in [0.5, 2.0, 4.0] {
        let a = build_repaired_diagonalizer(&BidiagonalSystem::with_coupling(64, c)?);
        let b = build_repaired_diagonalizer(&BidiagonalSystem::with_coupling(128, c)?);
        worst = worst.max((l1_norm(&b.s) / l1_norm(&a.s) - 1.0).abs());
        worst = worst.max((l1_norm(&b.s_inv) / l1_norm(&a.s_inv) - 1.0).abs());
    }
    Ok((worst < 0.01, format!("relative l1-norm change 64 -> 128: {worst:.2e}")))
}

fn check_linearization() -> Result<(bool, String)> {
    let n = 24;
    let shape = SpectralFunction::cosine(n, 2, 1.0, 0.0).add(&SpectralFunction::sine(n, 3, 0.5));
    let p = PhysicalParams::new(0.5, 1.5)?;
    let eps = [1e-2, 1e-3, 1e-4];
    let (en, ew) = linearization_errors(&shape, &p, &eps)?;
    let (sn, sw) = (loglog_slope(&eps, &en), loglog_slope(&eps, &ew));
    Ok((sn >= 0.9 && sw >= 0.9, format!("slopes: N {sn:.3}, vorticity {sw:.3}")))
}

fn check_neumann(level: Level) -> Result<(bool, String)> {
    let mut rng = StdRng::seed_from_u64(3);
    let (count, n) = if level == Level::Full { (20, 24) } else { (4, 12) };
    let mut gap = 0.0f64;
    let mut res = 0.0f64;
    for _ in 0..count {
        let f = random_admissible_state(&mut rng, n, 0.05)?;
        let p = PhysicalParams::new(rng.random_range(-1.0..=1.0), rng.random_range(-4.0..=4.0))?;
        let s = solve_vorticity(&f, &p, DEFAULT_TOL)?;
        gap = gap.max(l1(&s.omega.sub(&dense_solve_oracle(&f, &p)?)));
        res = res.max(s.residual);
    }
    Ok((
        gap < 1e-8 && res < 1e-9,
        format!("{count} states: max gap {gap:.2e}, max residual {res:.2e}"),
    ))
}

fn check_picard(level: Level) -> Result<(bool, String)> {
    let (n, t_end, steps) = if level == Level::Full {
        (16, 0.5, 100)
    } else {
        (8, 0.2, 20)
    };
    let f = SpectralFunction::cosine(n, 2, 0.005, 0.0);
    let init = BubbleState::from_projection(&f, [0.0; 2], 0.0)?;
    let rep = picard_report(&init, &PhysicalParams::new(0.5, 1.0)?, t_end, steps, 5)?;
    let worst = rep.ratios.iter().cloned().fold(0.0, f64::max);
    Ok((
        worst < 0.5,
        format!(
            "max successive ratio {worst:.3e}, gap to time marching {:.2e}",
            rep.march_gap
        ),
    ))
}

/// Runs the suites and returns one result per check.
pub fn verify_command(level: Level, fault: Option<Fault>) -> Vec<CheckResult> {
    type Check = Box<dyn Fn() -> Result<(bool, String)>>;
    let big = if level == Level::Full { 128 } else { 64 };
    let mut checks: Vec<(&str, Check)> = vec![
        ("oracle_integrals", Box::new(move || check_oracles(level))),
        ("oracle_bounds", Box::new(move || check_bounds(level))),
        ("diagonalizer_inverse", Box::new(move || check_inverse(big))),
        (
            "diagonalization_residual",
            Box::new(move || check_diagonalization(big, fault)),
        ),
        ("diagonalizer_norms", Box::new(check_norm_stability)),
        ("linearization", Box::new(check_linearization)),
        ("neumann_vs_dense", Box::new(move || check_neumann(level))),
        ("picard_contraction", Box::new(move || check_picard(level))),
    ];
    if level == Level::Full {
        checks.push(("large_quadrature", Box::new(check_large_quadrature)));
    }
    checks
        .into_iter()
        .map(|(name, check)| {
            let clock = Instant::now();
            let (passed, detail) = match check() {
                Ok(r) => r,
                Err(e) => (false, format!("error: {e}")),
            };
            CheckResult {
                name: name.to_string(),
                passed,
                detail,
                seconds: clock.elapsed().as_secs_f64(),
            }
        })
        .collect()
}
