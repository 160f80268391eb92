//! Real 2π-periodic functions stored by their Fourier coefficients.
//!
//! Only the modes `k = 0..=n_max` are stored; negative modes are implied by
//! Hermitian symmetry `f̂(-k) = conj(f̂(k))`, so every value of
//! [`SpectralFunction`] is the coefficient vector of a real function. All
//! multipliers in this module satisfy `m(-k) = conj(m(k))`, which is why they
//! only need to be applied on the non-negative half.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn forward_plan(m: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(m))
}

fn inverse_plan(m: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(m))
}

/// Collocation size used for dealiased products of functions truncated at `n_max`.
pub fn dealiased_grid(n_max: usize) -> usize {
    (4 * n_max).max(32)
}

/// Weighted Wiener norm parameters `Σ e^{ν|k|t} |k|^s |f̂(k)|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormSpec {
    pub s: f64,
    pub nu: f64,
    pub t: f64,
}

impl NormSpec {
    pub fn new(s: f64, nu: f64, t: f64) -> Result<Self> {
        if !(s >= 0.0 && nu >= 0.0 && t >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "norm parameters must be non-negative (s={s}, nu={nu}, t={t})"
            )));
        }
        Ok(Self { s, nu, t })
    }

    /// Plain `F^{s,1}` weight (no analytic factor).
    pub fn sobolev(s: f64) -> Self {
        Self { s, nu: 0.0, t: 0.0 }
    }

    #[inline]
    pub fn weight(&self, k: usize) -> f64 {
        let kf = k as f64;
        (self.nu * kf * self.t).exp() * kf.powf(self.s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralFunction {
    coeffs: Vec<Complex64>,
}

impl SpectralFunction {
    pub fn zeros(n_max: usize) -> Self {
        Self {
            coeffs: vec![Complex64::new(0.0, 0.0); n_max + 1],
        }
    }

    /// Builds from non-negative mode coefficients `f̂(0..=n_max)`. The zero
    /// mode's imaginary part is discarded.
    pub fn from_coeffs(mut coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidArgument("empty coefficient vector".into()));
        }
        if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::InvalidArgument("non-finite coefficient".into()));
        }
        coeffs[0].im = 0.0;
        Ok(Self { coeffs })
    }

    pub fn constant(n_max: usize, value: f64) -> Self {
        let mut f = Self::zeros(n_max);
        f.coeffs[0] = Complex64::new(value, 0.0);
        f
    }

    /// `amplitude * cos(k α + phase)`.
    pub fn cosine(n_max: usize, k: usize, amplitude: f64, phase: f64) -> Self {
        let mut f = Self::zeros(n_max);
        f.add_cosine(k, amplitude, phase);
        f
    }

    /// `amplitude * sin(k α)`.
    pub fn sine(n_max: usize, k: usize, amplitude: f64) -> Self {
        Self::cosine(n_max, k, amplitude, -PI / 2.0)
    }

    /// Adds `amplitude * cos(k α + phase)`; modes above `n_max` are dropped.
    pub fn add_cosine(&mut self, k: usize, amplitude: f64, phase: f64) {
        if k > self.n_max() {
            return;
        }
        if k == 0 {
            self.coeffs[0].re += amplitude * phase.cos();
        } else {
            self.coeffs[k] += Complex64::from_polar(0.5 * amplitude, phase);
        }
    }

    #[inline]
    pub fn n_max(&self) -> usize {
        self.coeffs.len() - 1
    }

    #[inline]
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// `f̂(k)` for any integer `k`; zero outside the stored band.
    #[inline]
    pub fn coeff(&self, k: i64) -> Complex64 {
        let idx = k.unsigned_abs() as usize;
        match self.coeffs.get(idx) {
            Some(c) if k >= 0 => *c,
            Some(c) => c.conj(),
            None => Complex64::new(0.0, 0.0),
        }
    }

    /// Sets `f̂(k)` (and implicitly `f̂(-k)`) for `0 <= k <= n_max`.
    pub fn set_coeff(&mut self, k: usize, value: Complex64) {
        self.coeffs[k] = if k == 0 { Complex64::new(value.re, 0.0) } else { value };
    }

    pub fn mean(&self) -> f64 {
        self.coeffs[0].re
    }

    /// Copy truncated or zero-padded to a new cutoff.
    pub fn resized(&self, n_max: usize) -> Self {
        let mut out = Self::zeros(n_max);
        let n = n_max.min(self.n_max());
        out.coeffs[..=n].copy_from_slice(&self.coeffs[..=n]);
        out
    }

    /// Applies a Hermitian multiplier given on `k >= 0`.
    pub fn multiplier(&self, m: impl Fn(usize) -> Complex64) -> Self {
        let mut coeffs: Vec<Complex64> = self.coeffs.iter().enumerate().map(|(k, c)| c * m(k)).collect();
        coeffs[0].im = 0.0;
        Self { coeffs }
    }

    pub fn scale(&self, a: f64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|c| c * a).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a - b)
    }

    /// `self + a * other`
    pub fn axpy(&self, a: f64, other: &Self) -> Self {
        self.zip_with(other, |x, y| x + y * a)
    }

    fn zip_with(&self, other: &Self, op: impl Fn(Complex64, Complex64) -> Complex64) -> Self {
        let n = self.n_max().max(other.n_max());
        let coeffs = (0..=n)
            .map(|k| op(self.coeff(k as i64), other.coeff(k as i64)))
            .collect();
        Self { coeffs }
    }

    /// Multiplier `-i sgn(k)`.
    pub fn hilbert(&self) -> Self {
        self.multiplier(|k| {
            if k == 0 {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(0.0, -1.0)
            }
        })
    }

    /// `|∂_α|`, multiplier `|k|`.
    pub fn lambda_op(&self) -> Self {
        self.multiplier(|k| Complex64::new(k as f64, 0.0))
    }

    /// `∂_α^order`, multiplier `(ik)^order`.
    pub fn derivative(&self, order: u32) -> Self {
        self.multiplier(|k| Complex64::new(0.0, k as f64).powu(order))
    }

    pub fn project_mean_zero(&self) -> Self {
        let mut out = self.clone();
        out.coeffs[0] = Complex64::new(0.0, 0.0);
        out
    }

    /// Product with `cos α`, truncated to the same cutoff.
    pub fn mul_cos(&self) -> Self {
        self.shift_product(Complex64::new(0.5, 0.0))
    }

    /// Product with `sin α`, truncated to the same cutoff.
    pub fn mul_sin(&self) -> Self {
        self.shift_product(Complex64::new(0.0, -0.5))
    }

    // (f · (w e^{iα} + conj(w) e^{-iα}))^(k) = w f̂(k-1) + conj(w) f̂(k+1)
    fn shift_product(&self, w: Complex64) -> Self {
        let n = self.n_max() as i64;
        let coeffs = (0..=n)
            .map(|k| w * self.coeff(k - 1) + w.conj() * self.coeff(k + 1))
            .collect();
        let mut out = Self { coeffs };
        out.coeffs[0].im = 0.0;
        out
    }

    /// Point evaluation by direct synthesis.
    pub fn evaluate(&self, alpha: f64) -> f64 {
        let mut acc = self.coeffs[0].re;
        for (k, c) in self.coeffs.iter().enumerate().skip(1) {
            let e = Complex64::from_polar(1.0, k as f64 * alpha);
            acc += 2.0 * (c * e).re;
        }
        acc
    }

    /// Samples `f(2πj/m)`, `j = 0..m`.
    pub fn to_grid(&self, m: usize) -> Result<Vec<f64>> {
        let n = self.n_max();
        if m < 2 * n + 1 {
            return Err(Error::Aliasing {
                m,
                n_max: n,
                required: 2 * n + 1,
            });
        }
        let mut buf = vec![Complex64::new(0.0, 0.0); m];
        buf[0] = self.coeffs[0];
        for k in 1..=n {
            buf[k] = self.coeffs[k];
            buf[m - k] = self.coeffs[k].conj();
        }
        inverse_plan(m).process(&mut buf);
        Ok(buf.into_iter().map(|c| c.re).collect())
    }

    /// Discrete Fourier coefficients of real samples on the uniform grid,
    /// truncated to `n_max`. Requires `samples.len() >= 2 n_max + 1`.
    pub fn from_grid(samples: &[f64], n_max: usize) -> Result<Self> {
        let m = samples.len();
        if m < 2 * n_max + 1 {
            return Err(Error::Aliasing {
                m,
                n_max,
                required: 2 * n_max + 1,
            });
        }
        if let Some(j) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(j));
        }
        let mut buf: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        forward_plan(m).process(&mut buf);
        let inv = 1.0 / m as f64;
        let mut coeffs: Vec<Complex64> = buf[..=n_max].iter().map(|c| c * inv).collect();
        coeffs[0].im = 0.0;
        Ok(Self { coeffs })
    }

    /// Dealiased pointwise product.
    pub fn product(&self, other: &Self) -> Self {
        let n = self.n_max().max(other.n_max());
        let m = dealiased_grid(n);
        let a = self.to_grid(m).expect("dealiased grid");
        let b = other.to_grid(m).expect("dealiased grid");
        let p: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x * y).collect();
        Self::from_grid(&p, n).expect("dealiased grid")
    }

    /// `Σ_{k≠0} w(k)|f̂(k)|`, plus `|f̂(0)|` when `homogeneous` is false.
    pub fn wiener_norm(&self, spec: NormSpec, homogeneous: bool) -> f64 {
        let tail: f64 = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| spec.weight(k) * c.norm())
            .sum();
        let zero = if homogeneous { 0.0 } else { self.coeffs[0].norm() };
        zero + 2.0 * tail
    }

    /// Shorthand for the homogeneous `F^{s,1}` seminorm.
    pub fn norm_s(&self, s: f64) -> f64 {
        self.wiener_norm(NormSpec::sobolev(s), true)
    }

    /// `‖ℙf‖²_{L²} / (2π) = Σ_{k≠0} |f̂(k)|²`.
    pub fn projected_energy(&self) -> f64 {
        2.0 * self.coeffs.iter().skip(1).map(|c| c.norm_sqr()).sum::<f64>()
    }

    pub fn max_abs_coeff_diff(&self, other: &Self) -> f64 {
        let n = self.n_max().max(other.n_max()) as i64;
        (0..=n)
            .map(|k| (self.coeff(k) - other.coeff(k)).norm())
            .fold(0.0, f64::max)
    }
}

/// Returns `(‖f‖_{s}, ‖f‖_{s1}^θ ‖f‖_{s2}^{1-θ})` with `s = θ s1 + (1-θ) s2`,
/// all homogeneous and weighted by `e^{ν|k|t}`.
pub fn interpolation_check(f: &SpectralFunction, s1: f64, s2: f64, theta: f64, nu: f64, t: f64) -> Result<(f64, f64)> {
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::InvalidArgument(format!("theta = {theta} outside [0,1]")));
    }
    if !(0.0 <= s1 && s1 <= s2) {
        return Err(Error::InvalidArgument(format!(
            "need 0 <= s1 <= s2, got s1={s1}, s2={s2}"
        )));
    }
    let s = theta * s1 + (1.0 - theta) * s2;
    let norm = |s| f.wiener_norm(NormSpec::new(s, nu, t).expect("validated"), true);
    let lhs = norm(s);
    let rhs = norm(s1).powf(theta) * norm(s2).powf(1.0 - theta);
    Ok((lhs, rhs))
}
