//! Periodic principal-value quadrature and the closed-form kernel integrals
//! used as golden values.
//!
//! The production rule is the half-shifted trapezoid: nodes never hit `β = 0`
//! and come in `±β` pairs, so odd principal-value singularities cancel exactly
//! and smooth periodic remainders converge spectrally. Integrands that are
//! only 4π-periodic (odd parity, see [`OracleIndex::is_periodic`]) are handled
//! by folding onto `[0, π]` and using Gauss–Legendre.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::{NormSpec, SpectralFunction};

/// Shifted trapezoid on `[-π, π)`: `β_j = 2π(j + 1/2)/m - π`, weights `2π/m`.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
}

impl QuadratureRule {
    pub fn new(m: usize) -> Result<Self> {
        if m == 0 || m % 2 != 0 {
            return Err(Error::InvalidArgument(format!(
                "quadrature size must be even and positive, got {m}"
            )));
        }
        // build the positive half and mirror it so ±β pairs are exact
        let mut nodes = vec![0.0; m];
        for j in 0..m / 2 {
            let b = PI * (2 * j + 1) as f64 / m as f64;
            nodes[m / 2 + j] = b;
            nodes[m / 2 - 1 - j] = -b;
        }
        Ok(Self { nodes })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weight(&self) -> f64 {
        2.0 * PI / self.nodes.len() as f64
    }

    pub fn sample(&self, kernel: impl Fn(f64) -> f64) -> Vec<f64> {
        self.nodes.iter().map(|&b| kernel(b)).collect()
    }

    /// `pv ∫_𝕋 h(β) dβ` for samples of `h` at the nodes.
    pub fn pv_integral(&self, samples: &[f64]) -> Result<f64> {
        if samples.len() != self.nodes.len() {
            return Err(Error::DimensionMismatch {
                expected: self.nodes.len(),
                found: samples.len(),
            });
        }
        pv_integral(samples)
    }
}

/// `(2π/m) Σ_j samples_j` over a shifted-trapezoid node set of size `m`.
pub fn pv_integral(samples: &[f64]) -> Result<f64> {
    if let Some(j) = samples.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(j));
    }
    // pair ±β so the odd part cancels before it meets round-off
    let m = samples.len();
    let half: f64 = (0..m / 2).map(|j| samples[j] + samples[m - 1 - j]).sum();
    let mid = if m % 2 == 1 { samples[m / 2] } else { 0.0 };
    Ok(2.0 * PI / m as f64 * (half + mid))
}

/// `Δ_β f(α) = (f(α-β) - f(α)) / (2 sin(β/2))`.
pub fn delta_beta(f: &SpectralFunction, alpha: f64, beta: f64) -> Result<f64> {
    let s = (0.5 * beta).sin();
    if s.abs() < 1e-300 {
        return Err(Error::SingularNode);
    }
    Ok((f.evaluate(alpha - beta) - f.evaluate(alpha)) / (2.0 * s))
}

/// Fourier symbol of `Δ_β`: `m(k,β) = -ik e^{-ikβ/2} sin(kβ/2) / (k sin(β/2))`,
/// so that `m(k,β) → -ik` as `β → 0`.
pub fn delta_beta_symbol(k: i64, beta: f64) -> Complex64 {
    if k == 0 {
        return Complex64::new(0.0, 0.0);
    }
    let kf = k as f64;
    let ratio = (0.5 * kf * beta).sin() / (kf * (0.5 * beta).sin());
    Complex64::new(0.0, -kf) * Complex64::from_polar(ratio, -0.5 * kf * beta)
}

/// Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..(n + 1) / 2 {
            let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn integrate(&self, a: f64, b: f64, h: impl Fn(f64) -> f64) -> f64 {
        let c = 0.5 * (b - a);
        let d = 0.5 * (b + a);
        c * self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * h(c * x + d))
            .sum::<f64>()
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// `pv ∫_{-π}^{π} h(β) dβ = ∫_0^π (h(β) + h(-β)) dβ`, folded so the odd
/// singular part cancels analytically; valid for integrands that are not
/// 2π-periodic.
pub fn pv_integral_folded(h: impl Fn(f64) -> f64, rule: &GaussLegendre) -> f64 {
    rule.integrate(0.0, PI, |b| h(b) + h(-b))
}

/// Which kernel of the closed-form family: `1/(2 sin(β/2))` or
/// `cos(β/2)/(2 sin(β/2))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleKernel {
    Sin,
    Cot,
}

/// Index `(k; k_1..k_n)` of `∫_𝕋 K(β) sin(kβ/2) Π_j sin(k_jβ/2)/(k_j sin(β/2)) dβ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleIndex {
    pub k: i64,
    pub ks: Vec<i64>,
}

impl OracleIndex {
    pub fn new(k: i64, ks: Vec<i64>) -> Result<Self> {
        if ks.contains(&0) {
            return Err(Error::InvalidArgument("oracle factor index k_j = 0".into()));
        }
        Ok(Self { k, ks })
    }

    /// Whether the integrand is 2π-periodic in `β` (otherwise it flips sign
    /// under `β → β + 2π`).
    pub fn is_periodic(&self, kernel: OracleKernel) -> bool {
        let mut odd = (self.k + 1).rem_euclid(2) == 1;
        for q in &self.ks {
            odd ^= (q.abs() + 1) % 2 == 1;
        }
        if kernel == OracleKernel::Cot {
            odd = !odd;
        }
        !odd
    }

    /// Largest half-frequency present, `|k| + Σ(|k_j| - 1)`.
    pub fn bandwidth(&self) -> i64 {
        self.k.abs() + self.ks.iter().map(|q| q.abs() - 1).sum::<i64>()
    }

    pub fn integrand(&self, kernel: OracleKernel, beta: f64) -> f64 {
        let s = (0.5 * beta).sin();
        let mut v = (0.5 * self.k as f64 * beta).sin() / (2.0 * s);
        for &q in &self.ks {
            let qf = q as f64;
            v *= (0.5 * qf * beta).sin() / (qf * s);
        }
        match kernel {
            OracleKernel::Sin => v,
            OracleKernel::Cot => v * (0.5 * beta).cos(),
        }
    }

    /// Multiplicities of `A` in `Π_j sin(q_jβ/2)/sin(β/2) = Σ_A c_A e^{iAβ/2}`,
    /// returned with the offset of `A = 0`.
    fn exponent_counts(&self) -> (Vec<f64>, i64) {
        let mut counts = vec![1.0];
        let mut offset = 0i64;
        for &q in &self.ks {
            let q = q.abs();
            // exponents q-1, q-3, ..., -(q-1)
            let mut next = vec![0.0; counts.len() + 2 * (q as usize - 1)];
            for (i, c) in counts.iter().enumerate() {
                for m in 0..q {
                    next[i + 2 * m as usize] += c;
                }
            }
            counts = next;
            offset += q - 1;
        }
        (counts, offset)
    }

    fn reduce(&self, kernel_value: impl Fn(i64, i64) -> f64) -> f64 {
        let (counts, offset) = self.exponent_counts();
        let denom: f64 = self.ks.iter().map(|q| q.abs() as f64).product();
        let total: f64 = counts
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0.0)
            .map(|(i, c)| c * kernel_value(self.k, i as i64 - offset))
            .sum();
        total / denom
    }
}

/// Closed form of the `1/(2 sin(β/2))` family.
pub fn oracle_i1(idx: &OracleIndex) -> f64 {
    idx.reduce(i1_reduced)
}

/// Closed form of the `cos(β/2)/(2 sin(β/2))` family.
pub fn oracle_i2(idx: &OracleIndex) -> f64 {
    idx.reduce(i2_reduced)
}

/// `I₁(k, 0) = 2∫_0^{π/2} sin(kx)/sin(x) dx`.
pub fn i1_base(k: i64) -> f64 {
    let sign = k.signum() as f64;
    let k = k.abs();
    if k == 0 {
        0.0
    } else if k % 2 == 1 {
        sign * PI
    } else {
        let l = k / 2;
        let s: f64 = (1..=l)
            .map(|j| if j % 2 == 1 { 1.0 } else { -1.0 } / (2 * j - 1) as f64)
            .sum();
        sign * 4.0 * s
    }
}

// sin(xπ/2)/x, continuous at x = 0
fn half_sinc(x: i64) -> f64 {
    if x == 0 {
        PI / 2.0
    } else {
        (x as f64 * PI / 2.0).sin() / x as f64
    }
}

/// `I₁(k, A) = 2∫_0^{π/2} sin(kx) cos(Ax)/sin(x) dx`, by shifting `A` into
/// `k` one unit at a time:
/// `I₁(k,A) = I₁(k+A,0) - 2 Σ_{n<A} sin((A-k-2n-1)π/2)/(A-k-2n-1)`.
pub fn i1_reduced(k: i64, a: i64) -> f64 {
    let a = a.abs();
    let tail: f64 = (0..a).map(|n| half_sinc(a - k - 2 * n - 1)).sum();
    i1_base(k + a) - 2.0 * tail
}

/// `I₂(k, A) = 2∫_0^{π/2} cos(x) sin(kx) cos(Ax)/sin(x) dx = (I₁(k+1,A) + I₁(k-1,A))/2`.
pub fn i2_reduced(k: i64, a: i64) -> f64 {
    0.5 * (i1_reduced(k + 1, a) + i1_reduced(k - 1, a))
}

/// Quadrature value of an oracle integrand: shifted trapezoid when the
/// integrand is 2π-periodic, folded Gauss–Legendre otherwise.
pub fn oracle_quadrature(idx: &OracleIndex, kernel: OracleKernel) -> Result<f64> {
    let band = idx.bandwidth().max(1) as usize;
    if idx.is_periodic(kernel) {
        let rule = QuadratureRule::new(2 * (band + 8))?;
        let samples = rule.sample(|b| idx.integrand(kernel, b));
        rule.pv_integral(&samples)
    } else {
        let gl = GaussLegendre::new(band + 48);
        Ok(pv_integral_folded(|b| idx.integrand(kernel, b), &gl))
    }
}

/// Kernel of the nonlinear model integrals `I` (`1/(2 sin(β/2))`) and `J` (`1/(2 tan(β/2))`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKernel {
    I,
    J,
}

impl ModelKernel {
    /// Constant in the per-mode bound.
    pub fn constant(self) -> f64 {
        match self {
            ModelKernel::I => 4.0,
            ModelKernel::J => 10.0 / 3.0,
        }
    }

    fn eval(self, beta: f64) -> f64 {
        match self {
            ModelKernel::I => 1.0 / (2.0 * (0.5 * beta).sin()),
            ModelKernel::J => 1.0 / (2.0 * (0.5 * beta).tan()),
        }
    }
}

/// Evaluates `pv∫ Π_{j<l} f_j(α-β) Π_{j>=l} Δ_β f_j(α) K(β) dβ` and returns
/// its Fourier coefficients.
pub fn model_integral(
    fs: &[SpectralFunction],
    l: usize,
    kernel: ModelKernel,
    nodes: usize,
) -> Result<SpectralFunction> {
    if l > fs.len() {
        return Err(Error::InvalidArgument(format!("split index {l} > {}", fs.len())));
    }
    let band: usize = fs.iter().map(|f| f.n_max()).sum::<usize>().max(1);
    if nodes < band + 16 {
        return Err(Error::InvalidArgument(format!(
            "{nodes} Gauss nodes cannot resolve bandwidth {band}"
        )));
    }
    let gl = GaussLegendre::new(nodes);
    let m = 2 * band + 2;
    let samples: Vec<f64> = (0..m)
        .map(|i| {
            let alpha = 2.0 * PI * i as f64 / m as f64;
            let at_alpha: Vec<f64> = fs.iter().map(|f| f.evaluate(alpha)).collect();
            let h = |beta: f64| {
                let s2 = 2.0 * (0.5 * beta).sin();
                let mut v = kernel.eval(beta);
                for (j, f) in fs.iter().enumerate() {
                    let shifted = f.evaluate(alpha - beta);
                    v *= if j < l { shifted } else { (shifted - at_alpha[j]) / s2 };
                }
                v
            };
            pv_integral_folded(h, &gl)
        })
        .collect();
    SpectralFunction::from_grid(&samples, band)
}

/// Per-mode majorant `(∗_{j<l}|f̂_j|) ∗ (∗_{j>=l}|k||f̂_j|)`, indexed by `k + B`
/// where `B` is the total bandwidth.
pub fn convolution_majorant(fs: &[SpectralFunction], l: usize) -> (Vec<f64>, usize) {
    let mut acc = vec![1.0];
    let mut offset = 0usize;
    for (j, f) in fs.iter().enumerate() {
        let n = f.n_max();
        let seq: Vec<f64> = (-(n as i64)..=n as i64)
            .map(|k| {
                let w = if j < l { 1.0 } else { k.abs() as f64 };
                w * f.coeff(k).norm()
            })
            .collect();
        let mut next = vec![0.0; acc.len() + seq.len() - 1];
        for (a, x) in acc.iter().enumerate() {
            for (b, y) in seq.iter().enumerate() {
                next[a + b] += x * y;
            }
        }
        acc = next;
        offset += n;
    }
    (acc, offset)
}

/// Returns `(‖I‖, Σ-of-products bound)` for the model integral of `fs` split at `l`.
/// The bound omits the kernel constant; callers compare `lhs <= C * rhs` with
/// `C = ModelKernel::constant()`. For `s = 0` the inhomogeneous `F^{0,1}_ν`
/// norm is used on both sides.
pub fn nonlinear_term_bound_check(
    fs: &[SpectralFunction],
    l: usize,
    kernel: ModelKernel,
    spec: NormSpec,
    nodes: usize,
) -> Result<(f64, f64)> {
    if spec.s > 1.0 {
        return Err(Error::InvalidArgument(format!("s = {} outside [0, 1]", spec.s)));
    }
    if fs.is_empty() {
        return Ok((0.0, 0.0));
    }
    let integral = model_integral(fs, l, kernel, nodes)?;
    let w = |s: f64| NormSpec { s, ..spec };
    let full0 = |f: &SpectralFunction| f.wiener_norm(w(0.0), false);
    let hom = |f: &SpectralFunction, s: f64| f.wiener_norm(w(s), true);
    let n = fs.len();
    if spec.s == 0.0 {
        let lhs = integral.wiener_norm(w(0.0), false);
        let rhs = fs[..l].iter().map(full0).product::<f64>() * fs[l..].iter().map(|f| hom(f, 1.0)).product::<f64>();
        return Ok((lhs, rhs));
    }
    let lhs = integral.wiener_norm(spec, true);
    let mut rhs = 0.0;
    for i in 0..n {
        let mut term = if i < l {
            hom(&fs[i], spec.s)
        } else {
            hom(&fs[i], spec.s + 1.0)
        };
        for (j, f) in fs.iter().enumerate() {
            if j == i {
                continue;
            }
            term *= if j < l { full0(f) } else { hom(f, 1.0) };
        }
        rhs += term;
    }
    Ok((lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn rule_layout() {
        let r = QuadratureRule::new(16).unwrap();
        assert!(r.nodes().iter().all(|b| b.abs() > 1e-3));
        for (a, b) in r.nodes().iter().zip(r.nodes().iter().rev()) {
            assert_abs_diff_eq!(*a, -*b, epsilon = 1e-15);
        }
        assert!(QuadratureRule::new(7).is_err());
    }

    #[test]
    fn pv_examples() {
        let r = QuadratureRule::new(32).unwrap();
        let v = r
            .pv_integral(&r.sample(|b| (0.5 * b).sin() / (2.0 * (0.5 * b).sin())))
            .unwrap();
        assert_abs_diff_eq!(v, PI, epsilon = 1e-14);
        let v = r.pv_integral(&r.sample(|b| 1.0 / (2.0 * (0.5 * b).tan()))).unwrap();
        assert_eq!(v, 0.0);
        // cos(β/2)sin(β)/(2 sin(β/2)) = cos²(β/2)
        let idx = OracleIndex::new(2, vec![]).unwrap();
        let v = r
            .pv_integral(&r.sample(|b| idx.integrand(OracleKernel::Cot, b)))
            .unwrap();
        assert_abs_diff_eq!(v, oracle_i2(&idx), epsilon = 1e-13);
        assert_abs_diff_eq!(v, PI, epsilon = 1e-13);
        assert!(matches!(pv_integral(&[1.0, f64::NAN]), Err(Error::NonFinite(1))));
    }

    #[test]
    fn hilbert_by_quadrature() {
        // H f(α) = (1/π) pv∫ f(α-β) / (2 tan(β/2)) dβ
        let r = QuadratureRule::new(64).unwrap();
        for alpha in [0.0, 0.4, 2.0] {
            let v = r
                .pv_integral(&r.sample(|b| (alpha - b).cos() / (2.0 * (0.5 * b).tan())))
                .unwrap()
                / PI;
            assert_abs_diff_eq!(v, alpha.sin(), epsilon = 1e-13);
        }
    }

    #[test]
    fn delta_beta_examples() {
        let c = SpectralFunction::constant(4, 2.0);
        assert_eq!(delta_beta(&c, 0.3, 0.7).unwrap(), 0.0);
        assert!(matches!(delta_beta(&c, 0.3, 0.0), Err(Error::SingularNode)));

        // single mode: Δ_β e^{ikα} = m(k,β) e^{ikα}; real part via cos(kα)
        for k in 1..5usize {
            let f = SpectralFunction::cosine(6, k, 2.0, 0.0); // e^{ikα} + c.c.
            for (alpha, beta) in [(0.3, 0.9), (1.7, -2.2), (4.0, 3.0)] {
                let expected =
                    2.0 * (delta_beta_symbol(k as i64, beta) * Complex64::from_polar(1.0, k as f64 * alpha)).re;
                assert_abs_diff_eq!(delta_beta(&f, alpha, beta).unwrap(), expected, epsilon = 1e-12);
            }
        }

        let f = SpectralFunction::cosine(6, 2, 1.0, 0.4).add(&SpectralFunction::sine(6, 3, 0.5));
        let alpha = 0.8;
        let deriv = f.derivative(1).evaluate(alpha);
        assert!((delta_beta(&f, alpha, 1e-6).unwrap() + deriv).abs() < 1e-5);
    }

    #[test]
    fn gauss_legendre_exact_on_polynomials() {
        let gl = GaussLegendre::new(12);
        assert_abs_diff_eq!(gl.weights.iter().sum::<f64>(), 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(gl.integrate(0.0, 1.0, |x| x.powi(23)), 1.0 / 24.0, epsilon = 1e-15);
        let gl = GaussLegendre::new(301);
        assert_abs_diff_eq!(gl.weights.iter().sum::<f64>(), 2.0, epsilon = 1e-13);
        assert_abs_diff_eq!(gl.integrate(0.0, PI, |x| x.sin()), 2.0, epsilon = 1e-13);
    }

    #[test]
    fn oracle_examples() {
        assert_abs_diff_eq!(i1_reduced(1, 0), PI);
        for a in 0..10 {
            assert_eq!(i1_reduced(0, a) == 0.0 || i1_reduced(0, a).abs() < 1e-14, true);
        }
        assert_abs_diff_eq!(i1_reduced(2, 0), 4.0);
        assert_abs_diff_eq!(i2_reduced(3, 0), 10.0 / 3.0, epsilon = 1e-15);
        let idx = OracleIndex::new(0, vec![3, -2]).unwrap();
        assert!(oracle_i1(&idx).abs() < 1e-14);
        assert!(OracleIndex::new(1, vec![0]).is_err());
    }

    // Independent reduction: product-to-sum and the Dirichlet integrals
    // J(p) = ∫_0^{π/2} sin(px)/sin(x) dx, J(p) - J(p-2) = 2 sin((p-1)π/2)/(p-1).
    fn dirichlet_j(p: i64) -> f64 {
        let sign = p.signum() as f64;
        let p = p.abs();
        if p == 0 {
            return 0.0;
        }
        let mut v = if p % 2 == 1 { PI / 2.0 } else { 0.0 };
        let mut q = if p % 2 == 1 { 3 } else { 2 };
        while q <= p {
            v += 2.0 * ((q - 1) as f64 * PI / 2.0).sin() / (q - 1) as f64;
            q += 2;
        }
        sign * v
    }

    #[test]
    fn recursion_matches_product_to_sum() {
        for k in -40..=40 {
            for a in -40..=40 {
                let direct = dirichlet_j(k + a) + dirichlet_j(k - a);
                assert_abs_diff_eq!(i1_reduced(k, a), direct, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn oracle_matches_high_resolution_quadrature() {
        let gl = GaussLegendre::new(4096);
        for (k, ks) in [
            (3, vec![]),
            (2, vec![2]),
            (5, vec![3, 4]),
            (-4, vec![1, 2, 7]),
            (7, vec![6, 5]),
        ] {
            let idx = OracleIndex::new(k, ks).unwrap();
            for kernel in [OracleKernel::Sin, OracleKernel::Cot] {
                let exact = match kernel {
                    OracleKernel::Sin => oracle_i1(&idx),
                    OracleKernel::Cot => oracle_i2(&idx),
                };
                let brute = pv_integral_folded(|b| idx.integrand(kernel, b), &gl);
                assert_abs_diff_eq!(exact, brute, epsilon = 1e-11);
                assert_abs_diff_eq!(exact, oracle_quadrature(&idx, kernel).unwrap(), epsilon = 1e-11);
            }
        }
    }

    #[test]
    fn periodic_parity_classification() {
        let idx = OracleIndex::new(3, vec![]).unwrap();
        assert!(idx.is_periodic(OracleKernel::Sin));
        assert!(!idx.is_periodic(OracleKernel::Cot));
        let idx = OracleIndex::new(2, vec![2]).unwrap();
        assert!(idx.is_periodic(OracleKernel::Sin));
        for b in [0.3, 1.1, 2.9] {
            let v = idx.integrand(OracleKernel::Sin, b);
            let w = idx.integrand(OracleKernel::Sin, b + 2.0 * PI);
            assert_abs_diff_eq!(v, w, epsilon = 1e-12);
        }
    }

    #[test]
    fn model_integral_single_cosine() {
        // pv∫ cos(α-β)/(2 sin(β/2)) dβ = 4 sin α
        let f = SpectralFunction::cosine(2, 1, 1.0, 0.0);
        let i = model_integral(std::slice::from_ref(&f), 1, ModelKernel::I, 64).unwrap();
        assert!(i.max_abs_coeff_diff(&SpectralFunction::sine(2, 1, 4.0)) < 1e-12);
        assert!(i.coeff(1).norm() <= 4.0 * f.coeff(1).norm() * (1.0 + 1e-12));
    }

    #[test]
    fn zero_inputs_give_zero_bound() {
        let z = SpectralFunction::zeros(4);
        let (l, r) =
            nonlinear_term_bound_check(&[z.clone(), z], 1, ModelKernel::I, NormSpec::sobolev(1.0), 64).unwrap();
        assert_eq!((l, r), (0.0, 0.0));
    }

    #[test]
    fn model_integral_two_mode_bound() {
        let f1 = SpectralFunction::cosine(3, 2, 0.7, 0.3).add(&SpectralFunction::sine(3, 1, 0.2));
        let f2 = SpectralFunction::cosine(3, 3, -0.4, 1.0);
        for kernel in [ModelKernel::I, ModelKernel::J] {
            let fs = [f1.clone(), f2.clone()];
            let integral = model_integral(&fs, 1, kernel, 96).unwrap();
            let (maj, off) = convolution_majorant(&fs, 1);
            for k in 0..=integral.n_max() {
                let bound = kernel.constant() * maj[k + off];
                assert!(integral.coeff(k as i64).norm() <= bound * (1.0 + 1e-10) + 1e-11);
            }
            for s in [0.0, 0.5, 1.0] {
                let (l, r) =
                    nonlinear_term_bound_check(&fs, 1, kernel, NormSpec::new(s, 0.1, 1.0).unwrap(), 96).unwrap();
                assert!(l <= kernel.constant() * r);
            }
        }
        assert!(model_integral(&[f1], 1, ModelKernel::I, 4).is_err());
    }
}
