//! Linear theory in frequency space: `d/dt ĝ(k) = -a_k ĝ(k) + b_k ĝ(k+1)`
//! for `k ≥ 1`, its explicit diagonalization and the exponential propagators
//! built on it.
//!
//! Mode vectors are indexed by `k - 1` (so index 0 is the `k = 1` mode);
//! negative modes follow by conjugation.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::PhysicalParams;
use crate::spectral::{NormSpec, SpectralFunction};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// `a_k = k(k² - 1 + δ₁(k))`.
pub fn eigenvalue(k: usize) -> f64 {
    let kf = k as f64;
    if k == 1 {
        1.0
    } else {
        kf * (kf * kf - 1.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BidiagonalSystem {
    a: Vec<f64>,
    b: Vec<Complex64>,
}

impl BidiagonalSystem {
    pub fn new(n: usize, params: &PhysicalParams) -> Result<Self> {
        Self::with_coupling(n, params.coupling())
    }

    /// System with `b_k = i·coupling·k`.
    pub fn with_coupling(n: usize, coupling: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument(format!("system dimension {n} < 2")));
        }
        Ok(Self {
            a: (1..=n).map(eigenvalue).collect(),
            b: (1..=n).map(|k| Complex64::new(0.0, coupling * k as f64)).collect(),
        })
    }

    pub fn n(&self) -> usize {
        self.a.len()
    }

    /// `a_k` for `k = 1..=n`.
    pub fn a(&self, k: usize) -> f64 {
        self.a[k - 1]
    }

    /// `b_k` for `k = 1..=n`.
    pub fn b(&self, k: usize) -> Complex64 {
        self.b[k - 1]
    }

    /// Truncated operator: `M_kk = -a_k`, `M_{k,k+1} = b_k`.
    pub fn matrix(&self) -> DMatrix<Complex64> {
        let n = self.n();
        let mut m = DMatrix::from_element(n, n, ZERO);
        for k in 0..n {
            m[(k, k)] = Complex64::new(-self.a[k], 0.0);
            if k + 1 < n {
                m[(k, k + 1)] = self.b[k];
            }
        }
        m
    }
}

/// Upper-triangular `S` (right eigenvectors as columns) and `S⁻¹` (left
/// eigenvectors as rows), both with unit diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalizerPair {
    pub s: DMatrix<Complex64>,
    pub s_inv: DMatrix<Complex64>,
}

/// Fills rows/columns `first..=n` (1-based) with the partial-product formulas
/// and leaves the rest as identity.
fn partial_products(sys: &BidiagonalSystem, first: usize) -> DiagonalizerPair {
    let n = sys.n();
    let mut s = DMatrix::identity(n, n);
    let mut s_inv = DMatrix::identity(n, n);
    for k in first..=n {
        // S⁻¹_{k,k+l} = (-1)^l Π_{m=1}^{l} b_{k+m-1} / (a_k - a_{k+m})
        let mut acc = ONE;
        for j in k + 1..=n {
            acc *= -sys.b(j - 1) / (sys.a(k) - sys.a(j));
            s_inv[(k - 1, j - 1)] = acc;
        }
    }
    for j in first..=n {
        // S_{k,j} = Π_{m=k}^{j-1} b_m / (a_m - a_j), built from k = j-1 down
        let mut acc = ONE;
        for k in (first..j).rev() {
            acc *= sys.b(k) / (sys.a(k) - sys.a(j));
            s[(k - 1, j - 1)] = acc;
        }
    }
    DiagonalizerPair { s, s_inv }
}

/// The diagonalizer as stated: partial products for `j ≥ k ≥ 2`, identity in
/// the first row and column.
pub fn build_diagonalizer(sys: &BidiagonalSystem) -> DiagonalizerPair {
    partial_products(sys, 2)
}

/// Eigenvector matrices for all rows `k ≥ 1`; diagonalizes the full system.
pub fn build_repaired_diagonalizer(sys: &BidiagonalSystem) -> DiagonalizerPair {
    partial_products(sys, 1)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagonalizationResidual {
    /// Max-norm of `S⁻¹ M S - diag(-a)` over all entries.
    pub full: f64,
    /// Same, restricted to rows `k ≥ 2`.
    pub rows_from_two: f64,
    /// Same, restricted to row `k = 1`.
    pub row_one: f64,
}

pub fn diagonalization_residual(sys: &BidiagonalSystem, pair: &DiagonalizerPair) -> DiagonalizationResidual {
    let n = sys.n();
    let mut r = &pair.s_inv * sys.matrix() * &pair.s;
    for k in 0..n {
        r[(k, k)] += Complex64::new(sys.a[k], 0.0);
    }
    let row_max = |k: usize| (0..n).map(|j| r[(k, j)].norm()).fold(0.0, f64::max);
    let row_one = row_max(0);
    let rows_from_two = (1..n).map(row_max).fold(0.0, f64::max);
    DiagonalizationResidual {
        full: row_one.max(rows_from_two),
        rows_from_two,
        row_one,
    }
}

/// `max |S S⁻¹ - I|`.
pub fn inverse_residual(pair: &DiagonalizerPair) -> f64 {
    let n = pair.s.nrows();
    let p = &pair.s * &pair.s_inv;
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { ONE } else { ZERO };
            worst = worst.max((p[(i, j)] - target).norm());
        }
    }
    worst
}

/// `ℓ¹ → ℓ¹` operator norm (largest column sum) in the weighted space
/// `Σ_k w(k)|z_k|`.
pub fn weighted_l1_norm(mat: &DMatrix<Complex64>, spec: NormSpec) -> f64 {
    let n = mat.nrows();
    (0..n)
        .map(|j| {
            let wj = spec.weight(j + 1);
            (0..n).map(|i| spec.weight(i + 1) * mat[(i, j)].norm()).sum::<f64>() / wj
        })
        .fold(0.0, f64::max)
}

pub fn l1_norm(mat: &DMatrix<Complex64>) -> f64 {
    weighted_l1_norm(mat, NormSpec::sobolev(0.0))
}

/// Diagonal semigroup: mode `k ≥ 1` multiplied by `e^{-a_k dt}`.
pub fn semigroup_apply(g: &SpectralFunction, dt: f64) -> SpectralFunction {
    g.multiplier(|k| {
        if k == 0 {
            ONE
        } else {
            Complex64::new((-eigenvalue(k) * dt).exp(), 0.0)
        }
    })
}

/// `φ₁(z) = (e^z - 1)/z` and `φ₂(z) = (e^z - 1 - z)/z²`.
pub fn phi12(z: f64) -> (f64, f64) {
    if z.abs() < 0.1 {
        let (mut p1, mut p2) = (0.0, 0.0);
        let mut term = 1.0; // z^k / k!
        for k in 0..16 {
            let kf = k as f64;
            p1 += term / (kf + 1.0);
            p2 += term / ((kf + 1.0) * (kf + 2.0));
            term *= z / (kf + 1.0);
        }
        (p1, p2)
    } else {
        let em1 = z.exp_m1();
        (em1 / z, (em1 - z) / (z * z))
    }
}

/// Mode vector `(ĝ(1), …, ĝ(n))`.
pub fn to_modes(g: &SpectralFunction) -> Vec<Complex64> {
    (1..=g.n_max()).map(|k| g.coeff(k as i64)).collect()
}

/// Mean-zero function with the given positive modes.
pub fn from_modes(modes: &[Complex64]) -> SpectralFunction {
    let mut coeffs = Vec::with_capacity(modes.len() + 1);
    coeffs.push(ZERO);
    coeffs.extend_from_slice(modes);
    SpectralFunction::from_coeffs(coeffs).expect("finite modes")
}

fn upper_mul(mat: &DMatrix<Complex64>, v: &[Complex64]) -> Vec<Complex64> {
    let n = v.len();
    (0..n).map(|i| (i..n).map(|j| mat[(i, j)] * v[j]).sum()).collect()
}

/// Linear operator in its eigenbasis `y = S⁻¹ ĝ`.
#[derive(Debug, Clone)]
pub struct Propagator {
    system: BidiagonalSystem,
    pair: DiagonalizerPair,
}

impl Propagator {
    pub fn new(n: usize, params: &PhysicalParams) -> Result<Self> {
        let system = BidiagonalSystem::new(n, params)?;
        let pair = build_repaired_diagonalizer(&system);
        Ok(Self { system, pair })
    }

    pub fn n(&self) -> usize {
        self.system.n()
    }

    pub fn system(&self) -> &BidiagonalSystem {
        &self.system
    }

    pub fn pair(&self) -> &DiagonalizerPair {
        &self.pair
    }

    fn check(&self, g: &SpectralFunction) -> Result<()> {
        if g.n_max() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                found: g.n_max(),
            });
        }
        Ok(())
    }

    pub fn to_diag(&self, g: &SpectralFunction) -> Result<Vec<Complex64>> {
        self.check(g)?;
        Ok(upper_mul(&self.pair.s_inv, &to_modes(g)))
    }

    pub fn from_diag(&self, y: &[Complex64]) -> SpectralFunction {
        from_modes(&upper_mul(&self.pair.s, y))
    }

    /// `e^{-t𝒜}` including the coupling: `S e^{-Λt} S⁻¹ g`.
    pub fn evolve_linear(&self, g: &SpectralFunction, t: f64) -> Result<SpectralFunction> {
        let y: Vec<Complex64> = self
            .to_diag(g)?
            .iter()
            .enumerate()
            .map(|(i, v)| v * (-self.system.a[i] * t).exp())
            .collect();
        Ok(self.from_diag(&y))
    }

    /// One step of the mild formulation in the eigenbasis:
    /// `y(dt) = e^{-Λdt} y + ∫_0^{dt} e^{-Λ(dt-τ)} n(τ) dτ`, with `n` linearly
    /// interpolated between equispaced samples covering `[0, dt]`
    /// (a single sample is held constant).
    pub fn duhamel_diag(&self, y: &[Complex64], samples: &[Vec<Complex64>], dt: f64) -> Result<Vec<Complex64>> {
        let n = self.n();
        if y.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: y.len(),
            });
        }
        if let Some(bad) = samples.iter().find(|s| s.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: bad.len(),
            });
        }
        let mut out: Vec<Complex64> = y
            .iter()
            .enumerate()
            .map(|(i, v)| v * (-self.system.a[i] * dt).exp())
            .collect();
        match samples.len() {
            0 => {}
            1 => {
                for i in 0..n {
                    let (p1, _) = phi12(-self.system.a[i] * dt);
                    out[i] += samples[0][i] * (dt * p1);
                }
            }
            m => {
                let h = dt / (m - 1) as f64;
                for i in 0..n {
                    let a = self.system.a[i];
                    let (p1, p2) = phi12(-a * h);
                    let (w_left, w_right) = (h * (p1 - p2), h * p2);
                    for seg in 0..m - 1 {
                        let decay = (-a * (dt - (seg + 1) as f64 * h)).exp();
                        out[i] += (samples[seg][i] * w_left + samples[seg + 1][i] * w_right) * decay;
                    }
                }
            }
        }
        Ok(out)
    }

    /// [`Propagator::duhamel_diag`] in physical modes: `pf` and the
    /// nonlinear samples are mean-zero functions.
    pub fn duhamel_propagate(
        &self,
        pf: &SpectralFunction,
        nonlinear: &[SpectralFunction],
        dt: f64,
    ) -> Result<SpectralFunction> {
        let y = self.to_diag(pf)?;
        let samples = nonlinear.iter().map(|g| self.to_diag(g)).collect::<Result<Vec<_>>>()?;
        Ok(self.from_diag(&self.duhamel_diag(&y, &samples, dt)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn system_examples() {
        let p = PhysicalParams::new(0.25, 2.0).unwrap();
        let sys = BidiagonalSystem::new(8, &p).unwrap();
        assert_eq!((sys.a(1), sys.a(2), sys.a(3)), (1.0, 6.0, 24.0));
        assert_eq!(sys.b(2), c(0.0, 2.0 * 0.75 * 2.0));
        assert!((2..=8).all(|k| sys.a(k) > sys.a(k - 1)));
        let sys = BidiagonalSystem::new(8, &PhysicalParams::new(1.0, 3.0).unwrap()).unwrap();
        assert!((1..=8).all(|k| sys.b(k) == ZERO));
        assert!(BidiagonalSystem::with_coupling(1, 1.0).is_err());
    }

    #[test]
    fn diagonalizer_examples() {
        let sys = BidiagonalSystem::with_coupling(6, 0.0).unwrap();
        let pair = build_diagonalizer(&sys);
        assert_eq!(pair.s, DMatrix::identity(6, 6));
        assert_eq!(pair.s_inv, DMatrix::identity(6, 6));
        assert_eq!(diagonalization_residual(&sys, &pair).full, 0.0);

        let sys = BidiagonalSystem::with_coupling(4, 1.0).unwrap();
        let pair = build_diagonalizer(&sys);
        assert!((pair.s_inv[(1, 2)] - c(0.0, 1.0 / 9.0)).norm() < 1e-15);
        for k in 0..4 {
            assert_eq!(pair.s[(k, k)], ONE);
            assert_eq!(pair.s_inv[(k, k)], ONE);
        }
    }

    #[test]
    fn stated_and_repaired_residuals() {
        for coupling in [0.5, 2.0, 4.0] {
            let sys = BidiagonalSystem::with_coupling(32, coupling).unwrap();
            let stated = build_diagonalizer(&sys);
            let r = diagonalization_residual(&sys, &stated);
            assert!(inverse_residual(&stated) < 1e-12);
            assert!(r.rows_from_two < 1e-10);
            // row 1 keeps b₁ S_{2,j}; its (1,2) entry is exactly b₁
            assert!(r.row_one >= coupling * (1.0 - 1e-12));
            let fixed = build_repaired_diagonalizer(&sys);
            assert!(inverse_residual(&fixed) < 1e-12);
            assert!(diagonalization_residual(&sys, &fixed).full < 1e-10);
        }
    }

    #[test]
    fn l1_norms_stabilize() {
        let norms: Vec<(f64, f64)> = [16, 32, 64, 128]
            .iter()
            .map(|&n| {
                let pair = build_repaired_diagonalizer(&BidiagonalSystem::with_coupling(n, 4.0).unwrap());
                (l1_norm(&pair.s), l1_norm(&pair.s_inv))
            })
            .collect();
        let (a, b) = (norms[2], norms[3]);
        assert!((b.0 - a.0).abs() < 0.01 * a.0 && (b.1 - a.1).abs() < 0.01 * a.1);
    }

    #[test]
    fn semigroup_examples() {
        let g = SpectralFunction::cosine(8, 2, 1.0, 0.0).add(&SpectralFunction::sine(8, 5, 0.3));
        assert_eq!(semigroup_apply(&g, 0.0), g);
        let out = semigroup_apply(&SpectralFunction::cosine(8, 2, 1.0, 0.0), 1.0);
        assert!((out.coeff(2).re - 0.5 * (-6.0f64).exp()).abs() < 1e-18);
        let out = semigroup_apply(&g, 0.01);
        for k in 1..=8 {
            assert!(out.coeff(k).norm() <= g.coeff(k).norm());
        }
    }

    #[test]
    fn phi_functions() {
        for z in [-1e-8, -0.05, 0.05, -0.2, -3.0, -500.0] {
            let (p1, p2) = phi12(z);
            let e1 = if z.abs() > 1e-3 {
                z.exp_m1() / z
            } else {
                1.0 + z / 2.0 + z * z / 6.0
            };
            assert!((p1 - e1).abs() < 1e-14);
            assert!((p1 - 1.0 - z * p2).abs() < 1e-14);
        }
    }

    #[test]
    fn constant_forcing_weights() {
        let prop = Propagator::new(6, &PhysicalParams::new(1.0, 0.0).unwrap()).unwrap();
        let zero = vec![ZERO; 6];
        let forcing = vec![ONE; 6];
        let dt = 0.05;
        let y = prop.duhamel_diag(&zero, &[forcing.clone()], dt).unwrap();
        let y2 = prop.duhamel_diag(&zero, &[forcing.clone(), forcing], dt).unwrap();
        for k in 1..=6 {
            let a = eigenvalue(k);
            let exact = (1.0 - (-a * dt).exp()) / a;
            assert!((y[k - 1].re - exact).abs() < 1e-15);
            assert!((y2[k - 1].re - exact).abs() < 1e-15);
        }
    }

    fn expm(m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let n = m.nrows();
        let norm = (0..n)
            .map(|i| (0..n).map(|j| m[(i, j)].norm()).sum::<f64>())
            .fold(0.0, f64::max);
        let squarings = (norm / 0.25).log2().ceil().max(0.0) as i32;
        let a = m.map(|v| v / 2f64.powi(squarings));
        let mut out = DMatrix::identity(n, n);
        let mut term = DMatrix::identity(n, n);
        for k in 1..24 {
            term = &term * &a / Complex64::new(k as f64, 0.0);
            out += &term;
        }
        for _ in 0..squarings {
            out = &out * &out;
        }
        out
    }

    #[test]
    fn duhamel_matches_matrix_exponential() {
        let p = PhysicalParams::new(0.25, 2.5).unwrap();
        let n = 32;
        let prop = Propagator::new(n, &p).unwrap();
        let mut g = SpectralFunction::zeros(n);
        for k in 1..=n {
            g.set_coeff(k, c(1.0 / (k * k) as f64, 0.3 / k as f64));
        }
        let dt = 0.01;
        let got = to_modes(&prop.duhamel_propagate(&g, &[], dt).unwrap());
        let v = nalgebra::DVector::from_vec(to_modes(&g));
        let want = expm(&prop.system().matrix().map(|x| x * dt)) * v;
        let err = (0..n).map(|i| (got[i] - want[i]).norm()).fold(0.0, f64::max);
        assert!(err < 1e-9, "{err}");
        let linear = to_modes(&prop.evolve_linear(&g, dt).unwrap());
        assert!((0..n).all(|i| (linear[i] - got[i]).norm() < 1e-12));
        // uncoupled: pure mode-wise decay
        let prop0 = Propagator::new(n, &PhysicalParams::new(1.0, 2.5).unwrap()).unwrap();
        let out = prop0.duhamel_propagate(&g, &[], dt).unwrap();
        assert!(out.max_abs_coeff_diff(&semigroup_apply(&g, dt)) < 1e-15);
    }

    #[test]
    fn semigroup_smoothing_constant() {
        let nu = 0.1;
        let t_end = 1.0;
        let mut g = SpectralFunction::zeros(32);
        for k in 1..=32 {
            g.add_cosine(k, (k as f64).powi(-3), 0.0);
        }
        // exact τ-integral per mode vs trapezoid in τ
        let mut exact = 0.0;
        for k in 1..=32 {
            let rate = eigenvalue(k) - nu * k as f64;
            exact += 2.0 * (k as f64).powi(4) * g.coeff(k as i64).norm() * (-(-rate * t_end).exp_m1()) / rate;
        }
        // Gauss-Legendre on geometrically graded panels resolves the k³ decay
        let gl = crate::quadrature::GaussLegendre::new(20);
        let integrand = |tau: f64| {
            let spec = NormSpec::new(4.0, nu, tau).unwrap();
            semigroup_apply(&g, tau).wiener_norm(spec, true)
        };
        let mut quad = gl.integrate(0.0, 1e-7, integrand);
        let mut left = 1e-7;
        while left < t_end {
            let right = (left * 2.0).min(t_end);
            quad += gl.integrate(left, right, integrand);
            left = right;
        }
        assert!((quad - exact).abs() < 1e-10 * exact, "{quad} {exact}");
        let c_nu = exact / g.norm_s(1.0);
        eprintln!("smoothing constant C(0.1) = {c_nu:.6}");
        assert!(c_nu.is_finite() && c_nu < 10.0);
    }

    #[test]
    fn weighted_norms_bounded() {
        for s in [0.0, 1.0, 4.0] {
            let spec = NormSpec::new(s, 0.1, 0.5).unwrap();
            let norms: Vec<f64> = [32, 64]
                .iter()
                .map(|&n| {
                    let pair = build_repaired_diagonalizer(&BidiagonalSystem::with_coupling(n, 2.0).unwrap());
                    weighted_l1_norm(&pair.s, spec).max(weighted_l1_norm(&pair.s_inv, spec))
                })
                .collect();
            assert!(norms[1] < 1.01 * norms[0] && norms[1] < 10.0, "s={s} {norms:?}");
        }
    }
}
