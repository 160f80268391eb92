//! Contour velocity `N(f) = I₁ + I₂ + I₃`, its linearization `N₁` and the
//! pole velocity `ċ`.

use std::f64::consts::PI;

use crate::error::Result;
use crate::geometry::{BubbleState, PhysicalParams};
use crate::spectral::SpectralFunction;
use crate::vorticity::{forcing_f, solve_with, Collocation, DOperator, KernelMatrix, VorticitySolution};

#[derive(Debug, Clone)]
pub struct EvolutionRhs {
    pub n_full: SpectralFunction,
    pub n_linear: SpectralFunction,
    pub n_remainder: SpectralFunction,
    pub c_dot: [f64; 2],
}

/// `ċ = ((1/π)∫f cos α, A_ρσ + (1/π)∫f sin α) = (2 Re f̂(1), A_ρσ - 2 Im f̂(1))`.
pub fn c_dot(f: &SpectralFunction, params: &PhysicalParams) -> [f64; 2] {
    let f1 = f.coeff(1);
    [2.0 * f1.re, params.a_rhosigma - 2.0 * f1.im]
}

fn assemble(
    grid: &Collocation,
    kernel: &KernelMatrix,
    f: &SpectralFunction,
    omega: &SpectralFunction,
    cdot: [f64; 2],
) -> Result<SpectralFunction> {
    let p = grid.size();
    let mut values = grid.apply_values(kernel, omega)?;
    for (i, v) in values.iter_mut().enumerate() {
        let a = 2.0 * PI * i as f64 / p as f64;
        let (s, c) = a.sin_cos();
        let c_tau = -cdot[0] * s + cdot[1] * c;
        // I₁ = ∂((1+f) ċ·τ)/(1+f) = f' ċ·τ/(1+f) - ċ·n
        *v += grid.slope(i) * c_tau / grid.radius(i) - cdot[0] * c - cdot[1] * s;
    }
    SpectralFunction::from_grid(&values, f.n_max())
}

/// `N(f)` for a given vorticity and pole velocity.
pub fn evaluate_n(f: &SpectralFunction, omega: &SpectralFunction, cdot: [f64; 2]) -> Result<SpectralFunction> {
    let grid = Collocation::new(f)?;
    let kernel = grid.velocity_kernel()?;
    assemble(&grid, &kernel, f, omega, cdot)
}

/// `N₁(f) = A_ρσ(1-A_μ)(|∂|(f sin) + ∂(f cos)) - (|∂|³f - |∂|f) - ċ₁ cos α - (ċ₂ - A_ρσ) sin α`.
pub fn evaluate_n1(f: &SpectralFunction, cdot: [f64; 2], params: &PhysicalParams) -> SpectralFunction {
    let n = f.n_max();
    let coupling = f.mul_sin().lambda_op().add(&f.mul_cos().derivative(1));
    let lam = f.lambda_op();
    let capillary = lam.lambda_op().lambda_op().sub(&lam);
    coupling
        .scale(params.coupling())
        .sub(&capillary)
        .sub(&SpectralFunction::cosine(n, 1, cdot[0], 0.0))
        .sub(&SpectralFunction::sine(n, 1, cdot[1] - params.a_rhosigma))
}

/// `N(f) - N₁(f)`.
pub fn evaluate_n_remainder(
    f: &SpectralFunction,
    omega: &SpectralFunction,
    cdot: [f64; 2],
    params: &PhysicalParams,
) -> Result<SpectralFunction> {
    Ok(evaluate_n(f, omega, cdot)?.sub(&evaluate_n1(f, cdot, params)))
}

/// Solves the vorticity equation at `state` and assembles the full right-hand side.
pub fn full_rhs(state: &BubbleState, params: &PhysicalParams, tol: f64) -> Result<(EvolutionRhs, VorticitySolution)> {
    let f = &state.f;
    let grid = Collocation::new(f)?;
    let forcing = forcing_f(f, params)?;
    let (vort, grid) = if params.a_mu == 0.0 {
        let sol = VorticitySolution {
            omega: forcing,
            residual: 0.0,
            iterations: 1,
        };
        (sol, grid)
    } else {
        let op = DOperator::from_collocation(grid)?;
        let sol = solve_with(&op, &forcing, params, tol)?;
        (sol, op.collocation().clone())
    };
    let kernel = grid.velocity_kernel()?;
    let cd = c_dot(f, params);
    let n_full = assemble(&grid, &kernel, f, &vort.omega, cd)?;
    let n_linear = evaluate_n1(f, cd, params);
    let n_remainder = n_full.sub(&n_linear);
    Ok((
        EvolutionRhs {
            n_full,
            n_linear,
            n_remainder,
            c_dot: cd,
        },
        vort,
    ))
}

/// `∫(1+f) N dα`, which vanishes for the exact velocity (area conservation).
pub fn weighted_mean(f: &SpectralFunction, n: &SpectralFunction) -> f64 {
    let one_plus = f.add(&SpectralFunction::constant(f.n_max(), 1.0));
    2.0 * PI * one_plus.product(n).mean()
}
