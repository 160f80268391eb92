//! The vorticity equation `ω̃ = 2A_μ 𝒟[f](ω̃) + F[f]`.
//!
//! Singular integrals are evaluated with an alternating-point rule: outputs
//! live on the even points of a grid of `2P` points and the quadrature nodes
//! `β_j = (2j+1)π/P` are odd multiples of its spacing, so every shifted sample
//! `g(α_i - β_j)` is an exact grid value and the `±β` node pairs cancel the
//! odd principal-value singularity.
//!
//! The reduced kernels use the backward difference
//! `Δ⁻_β f(α) = (f(α) - f(α-β)) / (2 sin(β/2))`. With that sign the kernel
//! of `I₂ + I₃` equals `-BR[z](ω̃)·∂_α z^⊥ / (1+f)` exactly, and `𝒟[f]`
//! equals `+BR[z](ω̃)·∂_α z`; the linear theory (mode coupling proportional to
//! `(1 - A_μ) A_ρσ`) is built on this operator.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{curvature, PhysicalParams};
use crate::spectral::{dealiased_grid, NormSpec, SpectralFunction};

/// Hard floor on `(Δ⁻_β f)² + (1+f(α))(1+f(α-β))`.
pub const DENOMINATOR_FLOOR: f64 = 1e-8;

/// Default Neumann tolerance on the increment in `F^{0,1}`.
pub const DEFAULT_TOL: f64 = 1e-13;

/// Kernel matrix over (collocation point, quadrature node); row-major `P × P`.
#[derive(Debug, Clone)]
pub struct KernelMatrix {
    p: usize,
    entries: Vec<f64>,
}

impl KernelMatrix {
    /// `Σ_j K_ij g(α_i - β_j)` for `g` sampled on the fine grid.
    fn apply_fine(&self, g_fine: &[f64]) -> Vec<f64> {
        let p = self.p;
        let two_p = 2 * p;
        (0..p)
            .into_par_iter()
            .map(|i| {
                let row = &self.entries[i * p..(i + 1) * p];
                // α_i - β_j has fine index 2i - 2j - 1 (mod 2P)
                let mut idx = (2 * i + two_p - 1) % two_p;
                let mut acc = 0.0;
                for k in row {
                    acc += k * g_fine[idx];
                    idx = if idx >= 2 { idx - 2 } else { idx + two_p - 2 };
                }
                acc
            })
            .collect()
    }
}

/// Grid data of `f` shared by all kernels built at one state.
#[derive(Debug, Clone)]
pub struct Collocation {
    n_max: usize,
    p: usize,
    /// `1 + f` on the fine grid of `2P` points.
    radius_fine: Vec<f64>,
    /// `f'` at the collocation points.
    slope: Vec<f64>,
    sin_half: Vec<f64>,
    cos_half: Vec<f64>,
}

/// One evaluated kernel node; `delta` is `Δ⁻_β f(α)`.
struct Node {
    u: f64,
    v: f64,
    s: f64,
    c: f64,
    delta: f64,
    den: f64,
    fp: f64,
}

impl Collocation {
    pub fn new(f: &SpectralFunction) -> Result<Self> {
        let n_max = f.n_max();
        let p = dealiased_grid(n_max);
        let radius_fine: Vec<f64> = f.to_grid(2 * p)?.into_iter().map(|v| 1.0 + v).collect();
        if let Some(r) = radius_fine.iter().copied().find(|r| *r <= 0.0) {
            return Err(Error::DegenerateCurve { min_radius: r });
        }
        let slope = f.derivative(1).to_grid(p)?;
        let (sin_half, cos_half) = (0..p)
            .map(|j| {
                let b = PI * (2 * j + 1) as f64 / p as f64;
                ((0.5 * b).sin(), (0.5 * b).cos())
            })
            .unzip();
        Ok(Self {
            n_max,
            p,
            radius_fine,
            slope,
            sin_half,
            cos_half,
        })
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// Number of collocation points (and quadrature nodes).
    pub fn size(&self) -> usize {
        self.p
    }

    /// `1 + f` at collocation point `i`.
    pub fn radius(&self, i: usize) -> f64 {
        self.radius_fine[2 * i]
    }

    pub fn slope(&self, i: usize) -> f64 {
        self.slope[i]
    }

    fn build(&self, entry: impl Fn(&Node) -> f64 + Sync) -> Result<KernelMatrix> {
        let p = self.p;
        let two_p = 2 * p;
        let rows: Vec<Result<Vec<f64>>> = (0..p)
            .into_par_iter()
            .map(|i| {
                let u = self.radius_fine[2 * i];
                let fp = self.slope[i];
                let mut row = Vec::with_capacity(p);
                for j in 0..p {
                    let v = self.radius_fine[(2 * i + two_p - 2 * j - 1) % two_p];
                    let s = self.sin_half[j];
                    let c = self.cos_half[j];
                    let delta = (u - v) / (2.0 * s);
                    let den = delta * delta + u * v;
                    if den < DENOMINATOR_FLOOR {
                        return Err(Error::DenominatorFloor { value: den });
                    }
                    row.push(entry(&Node {
                        u,
                        v,
                        s,
                        c,
                        delta,
                        den,
                        fp,
                    }));
                }
                Ok(row)
            })
            .collect();
        let mut entries = Vec::with_capacity(p * p);
        for row in rows {
            entries.extend(row?);
        }
        Ok(KernelMatrix { p, entries })
    }

    /// Kernel of `𝒟[f]`, weights included.
    pub fn d_kernel(&self) -> Result<KernelMatrix> {
        let w = 1.0 / self.p as f64; // (1/2π)·(2π/P)
        self.build(|n| {
            let num = n.u * n.v * n.s + n.u * n.delta - n.v * n.fp * n.c;
            w * num / n.den / (2.0 * n.s)
        })
    }

    /// Kernel of `I₂ + I₃` acting on `ω̃`, weights included.
    pub fn velocity_kernel(&self) -> Result<KernelMatrix> {
        let w = 1.0 / self.p as f64;
        self.build(|n| {
            let i2 = -(n.fp * n.delta + n.u * n.v * n.c) / n.den / (2.0 * n.s);
            let i3 = -0.5 * n.fp * n.v / n.den;
            w * (i2 + i3) / n.u
        })
    }

    /// Applies a kernel to `g` and returns collocation values.
    pub fn apply_values(&self, kernel: &KernelMatrix, g: &SpectralFunction) -> Result<Vec<f64>> {
        let g_fine = g.resized(self.n_max).to_grid(2 * self.p)?;
        Ok(kernel.apply_fine(&g_fine))
    }

    pub fn apply(&self, kernel: &KernelMatrix, g: &SpectralFunction) -> Result<SpectralFunction> {
        SpectralFunction::from_grid(&self.apply_values(kernel, g)?, self.n_max)
    }
}

/// `𝒟[f]` with its kernel assembled once.
#[derive(Debug, Clone)]
pub struct DOperator {
    grid: Collocation,
    kernel: KernelMatrix,
}

impl DOperator {
    pub fn new(f: &SpectralFunction) -> Result<Self> {
        Self::from_collocation(Collocation::new(f)?)
    }

    pub fn from_collocation(grid: Collocation) -> Result<Self> {
        let kernel = grid.d_kernel()?;
        Ok(Self { grid, kernel })
    }

    pub fn collocation(&self) -> &Collocation {
        &self.grid
    }

    /// `ℙ 𝒟[f](g)`.
    pub fn apply(&self, g: &SpectralFunction) -> Result<SpectralFunction> {
        Ok(self.grid.apply(&self.kernel, g)?.project_mean_zero())
    }
}

/// `𝒟[f](g)` for a single application.
pub fn apply_d(f: &SpectralFunction, g: &SpectralFunction) -> Result<SpectralFunction> {
    DOperator::new(f)?.apply(g)
}

/// `F[f] = 2∂K(f) - 2A_ρσ ∂((1+f) sin α)`.
pub fn forcing_f(f: &SpectralFunction, params: &PhysicalParams) -> Result<SpectralFunction> {
    let n = f.n_max();
    let k = curvature(f)?.derivative(1).scale(2.0);
    let lifted = f.mul_sin().add(&SpectralFunction::sine(n, 1, 1.0));
    Ok(k.axpy(-2.0 * params.a_rhosigma, &lifted.derivative(1))
        .project_mean_zero())
}

/// `ω̃₁(f) = 2A_μA_ρσ(∂(f sin) - |∂|(f cos)) - 2(∂³f + ∂f) - 2A_ρσ ∂(f sin)`.
pub fn linear_vorticity(f: &SpectralFunction, params: &PhysicalParams) -> SpectralFunction {
    let (am, ar) = (params.a_mu, params.a_rhosigma);
    let fs = f.mul_sin();
    let fc = f.mul_cos();
    let coupling = fs.derivative(1).sub(&fc.lambda_op()).scale(2.0 * am * ar);
    let capillary = f.derivative(3).add(&f.derivative(1)).scale(-2.0);
    coupling
        .add(&capillary)
        .axpy(-2.0 * ar, &fs.derivative(1))
        .project_mean_zero()
}

/// `ω̃₀ = -2A_ρσ cos α`.
pub fn trivial_vorticity(n_max: usize, params: &PhysicalParams) -> SpectralFunction {
    SpectralFunction::cosine(n_max, 1, -2.0 * params.a_rhosigma, 0.0)
}

#[derive(Debug, Clone)]
pub struct VorticitySolution {
    pub omega: SpectralFunction,
    pub residual: f64,
    pub iterations: usize,
}

fn l1(f: &SpectralFunction) -> f64 {
    f.wiener_norm(NormSpec::sobolev(0.0), false)
}

/// Neumann series `Σ (2A_μ𝒟[f])ⁿ F[f]`, summed until the increment drops below `tol`.
pub fn solve_vorticity(f: &SpectralFunction, params: &PhysicalParams, tol: f64) -> Result<VorticitySolution> {
    let forcing = forcing_f(f, params)?;
    if params.a_mu == 0.0 {
        return Ok(VorticitySolution {
            omega: forcing,
            residual: 0.0,
            iterations: 1,
        });
    }
    let op = DOperator::new(f)?;
    solve_with(&op, &forcing, params, tol)
}

/// Neumann iteration against a prebuilt operator.
pub fn solve_with(
    op: &DOperator,
    forcing: &SpectralFunction,
    params: &PhysicalParams,
    tol: f64,
) -> Result<VorticitySolution> {
    let gain = 2.0 * params.a_mu;
    let mut omega = forcing.clone();
    let mut term = forcing.clone();
    let mut last = f64::INFINITY;
    let mut growth = 0;
    let mut iterations = 1;
    while iterations < 500 {
        term = op.apply(&term)?.scale(gain);
        omega = omega.add(&term);
        iterations += 1;
        let inc = l1(&term);
        if !inc.is_finite() {
            return Err(Error::VorticityDivergence {
                iterations,
                increment: inc,
            });
        }
        if inc < tol {
            break;
        }
        growth = if inc > last { growth + 1 } else { 0 };
        if growth >= 3 {
            return Err(Error::VorticityDivergence {
                iterations,
                increment: inc,
            });
        }
        last = inc;
    }
    let residual = l1(&omega.sub(&op.apply(&omega)?.scale(gain)).sub(forcing));
    Ok(VorticitySolution {
        omega,
        residual,
        iterations,
    })
}

/// Dense solve of `(I - 2A_μ𝒟[f]) ω̃ = F[f]` in the real basis
/// `{cos kα, sin kα}`, `k = 1..=n_max`.
pub fn dense_solve_oracle(f: &SpectralFunction, params: &PhysicalParams) -> Result<SpectralFunction> {
    let forcing = forcing_f(f, params)?;
    if params.a_mu == 0.0 {
        return Ok(forcing);
    }
    let op = DOperator::new(f)?;
    let n = f.n_max();
    let dim = 2 * n;
    let gain = 2.0 * params.a_mu;
    let to_vec = |g: &SpectralFunction| {
        let mut v = DVector::zeros(dim);
        for k in 1..=n {
            let c = g.coeff(k as i64);
            v[2 * (k - 1)] = c.re;
            v[2 * (k - 1) + 1] = c.im;
        }
        v
    };
    let columns: Vec<Result<DVector<f64>>> = (0..dim)
        .into_par_iter()
        .map(|col| {
            let mut basis = SpectralFunction::zeros(n);
            let k = col / 2 + 1;
            let value = if col % 2 == 0 {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 1.0)
            };
            basis.set_coeff(k, value);
            let image = basis.sub(&op.apply(&basis)?.scale(gain));
            Ok(to_vec(&image))
        })
        .collect();
    let mut mat = DMatrix::zeros(dim, dim);
    for (j, col) in columns.into_iter().enumerate() {
        mat.set_column(j, &col?);
    }
    let lu = mat.lu();
    let pivot = lu.u().diagonal().iter().fold(f64::INFINITY, |a, v| a.min(v.abs()));
    if !(pivot > 1e-14) {
        return Err(Error::SingularMatrix { pivot });
    }
    let x = lu.solve(&to_vec(&forcing)).ok_or(Error::SingularMatrix { pivot })?;
    let coeffs = std::iter::once(Complex64::new(0.0, 0.0))
        .chain((0..n).map(|k| Complex64::new(x[2 * k], x[2 * k + 1])))
        .collect();
    SpectralFunction::from_coeffs(coeffs)
}
