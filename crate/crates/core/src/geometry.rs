//! Functionals of the polar curve `z(α) = (1 + f(α)) n(α) + c`, the
//! constraint set on the initial data, and reconstruction of the curve.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{dealiased_grid, SpectralFunction};

/// Minimum admissible `1 + f` for user-supplied shapes.
pub const MIN_RADIUS: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    pub a_mu: f64,
    pub a_rhosigma: f64,
}

impl PhysicalParams {
    pub fn new(a_mu: f64, a_rhosigma: f64) -> Result<Self> {
        if !(-1.0..=1.0).contains(&a_mu) {
            return Err(Error::InvalidArgument(format!("A_mu = {a_mu} outside [-1, 1]")));
        }
        if !a_rhosigma.is_finite() {
            return Err(Error::InvalidArgument("A_rhosigma must be finite".into()));
        }
        Ok(Self { a_mu, a_rhosigma })
    }

    /// `(1 - A_μ) A_ρσ`, the strength of the mode coupling in the linear system.
    pub fn coupling(&self) -> f64 {
        (1.0 - self.a_mu) * self.a_rhosigma
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BubbleState {
    pub f: SpectralFunction,
    pub c: [f64; 2],
    pub t: f64,
}

impl BubbleState {
    /// Unit circle at the origin.
    pub fn circle(n_max: usize) -> Self {
        Self {
            f: SpectralFunction::zeros(n_max),
            c: [0.0; 2],
            t: 0.0,
        }
    }

    /// Builds a state from a mean-zero part, filling the zero mode from the
    /// area constraint.
    pub fn from_projection(pf: &SpectralFunction, c: [f64; 2], t: f64) -> Result<Self> {
        let mut f = pf.project_mean_zero();
        f.set_coeff(0, zero_mode_from_projection(pf)?.into());
        Ok(Self { f, c, t })
    }

    pub fn n_max(&self) -> usize {
        self.f.n_max()
    }

    /// `|f̂(0) - (-1 + sqrt(1 - ‖ℙf‖²/(2π)))|`.
    pub fn zero_mode_residual(&self) -> Result<f64> {
        Ok((self.f.mean() - zero_mode_from_projection(&self.f)?).abs())
    }

    pub fn min_radius(&self) -> f64 {
        min_radius(&self.f)
    }

    pub fn validate(&self) -> Result<()> {
        let r = self.min_radius();
        if r <= 0.0 {
            return Err(Error::DegenerateCurve { min_radius: r });
        }
        let res = self.zero_mode_residual()?;
        if res >= 1e-10 {
            return Err(Error::ConstraintViolation(format!("zero-mode residual {res:.3e}")));
        }
        Ok(())
    }
}

/// Smallest value of `1 + f` on the dealiased grid.
pub fn min_radius(f: &SpectralFunction) -> f64 {
    f.to_grid(dealiased_grid(f.n_max()))
        .expect("dealiased grid")
        .into_iter()
        .map(|v| 1.0 + v)
        .fold(f64::INFINITY, f64::min)
}

/// `K(f) = [-(1+f)f'' + 2f'² + (1+f)²] / [f'² + (1+f)²]^{3/2}`.
pub fn curvature(f: &SpectralFunction) -> Result<SpectralFunction> {
    let n = f.n_max();
    let m = dealiased_grid(n);
    let r = f.to_grid(m)?;
    let d1 = f.derivative(1).to_grid(m)?;
    let d2 = f.derivative(2).to_grid(m)?;
    let mut k = Vec::with_capacity(m);
    for j in 0..m {
        let u = 1.0 + r[j];
        if u <= 0.0 {
            return Err(Error::DegenerateCurve { min_radius: u });
        }
        let den = d1[j] * d1[j] + u * u;
        if den < 1e-200 {
            return Err(Error::DegenerateCurve { min_radius: u });
        }
        k.push((-u * d2[j] + 2.0 * d1[j] * d1[j] + u * u) / (den * den.sqrt()));
    }
    SpectralFunction::from_grid(&k, n)
}

/// `(1/2)∫(1+f)² dα = π(1+f̂(0))² + (1/2)‖ℙf‖²_{L²}`.
pub fn area(f: &SpectralFunction) -> f64 {
    let m = 1.0 + f.mean();
    PI * m * m + PI * f.projected_energy()
}

/// `∫(1+f)³ (cos α, sin α) dα`.
pub fn centroid_moment(f: &SpectralFunction) -> [f64; 2] {
    let n = f.n_max();
    let m = dealiased_grid(n);
    let cube: Vec<f64> = f
        .to_grid(m)
        .expect("dealiased grid")
        .into_iter()
        .map(|v| (1.0 + v).powi(3))
        .collect();
    let g1 = SpectralFunction::from_grid(&cube, 1).expect("grid").coeff(1);
    [2.0 * PI * g1.re, -2.0 * PI * g1.im]
}

/// `-1 + sqrt(1 - ‖pf‖²_{L²}/(2π))`; the zero mode of `pf` is ignored.
pub fn zero_mode_from_projection(pf: &SpectralFunction) -> Result<f64> {
    let e = pf.projected_energy();
    if e >= 1.0 {
        return Err(Error::ConstraintViolation(format!(
            "‖ℙf‖²/(2π) = {e} leaves no admissible zero mode"
        )));
    }
    // -1 + sqrt(1 - e) without cancellation for small e
    Ok(-e / (1.0 + (1.0 - e).sqrt()))
}

/// Points `(1 + f(α_j)) n(α_j) + c` at `α_j = 2πj/m`.
pub fn reconstruct_curve(state: &BubbleState, m: usize) -> Vec<[f64; 2]> {
    (0..m)
        .map(|j| {
            let a = 2.0 * PI * j as f64 / m as f64;
            let r = 1.0 + state.f.evaluate(a);
            [r * a.cos() + state.c[0], r * a.sin() + state.c[1]]
        })
        .collect()
}

/// Shoelace area of a closed polygon.
pub fn polygon_area(points: &[[f64; 2]]) -> f64 {
    let n = points.len();
    0.5 * (0..n)
        .map(|i| {
            let (p, q) = (points[i], points[(i + 1) % n]);
            p[0] * q[1] - q[0] * p[1]
        })
        .sum::<f64>()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Normalized {
    pub f0: SpectralFunction,
    /// New pole relative to the old origin, in the input's units.
    pub shift: [f64; 2],
    /// Radius rescaling `λ = sqrt(area / π)`.
    pub scale: f64,
}

const NORMALIZE_TOL: f64 = 1e-13;
const NORMALIZE_MAX_ITERS: usize = 50;

/// Re-centres the polar parametrization at the centroid and rescales to unit
/// area, so the result satisfies `area = π` and `centroid_moment = 0`.
pub fn normalize_initial_data(shape: &SpectralFunction) -> Result<Normalized> {
    let r_min = min_radius(shape);
    if r_min <= MIN_RADIUS {
        return Err(Error::DegenerateCurve { min_radius: r_min });
    }
    let residual = |f: &SpectralFunction| {
        let mo = centroid_moment(f);
        [mo[0], mo[1], area(f) - PI]
    };
    let size = |r: &[f64; 3]| r.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if size(&residual(shape)) < NORMALIZE_TOL {
        return Ok(Normalized {
            f0: shape.clone(),
            shift: [0.0; 2],
            scale: 1.0,
        });
    }

    let n = shape.n_max();
    let m = dealiased_grid(n);
    // exact centroid and area of the region as a first guess
    let a0 = area(shape);
    let mo = centroid_moment(shape);
    let mut p = [mo[0] / (3.0 * a0), mo[1] / (3.0 * a0)];
    let mut lambda = (a0 / PI).sqrt();
    let mut f0 = reparametrize(shape, p, lambda, m)?;
    let mut res = residual(&f0);
    for _ in 0..NORMALIZE_MAX_ITERS {
        if size(&res) < NORMALIZE_TOL {
            return Ok(Normalized {
                f0,
                shift: p,
                scale: lambda,
            });
        }
        // first variations: δf = -δp·n/λ and δf = -(1+f)δλ/λ
        let u = f0.to_grid(m)?;
        let mut jac = nalgebra::Matrix3::<f64>::zeros();
        let h = 2.0 * PI / m as f64;
        for (j, fj) in u.iter().enumerate() {
            let a = 2.0 * PI * j as f64 / m as f64;
            let (c, s) = (a.cos(), a.sin());
            let w = 1.0 + fj;
            let dfs = [-c / lambda, -s / lambda, -w / lambda];
            for (col, df) in dfs.iter().enumerate() {
                jac[(0, col)] += h * 3.0 * w * w * df * c;
                jac[(1, col)] += h * 3.0 * w * w * df * s;
                jac[(2, col)] += h * w * df;
            }
        }
        let step = jac
            .lu()
            .solve(&nalgebra::Vector3::new(-res[0], -res[1], -res[2]))
            .ok_or(Error::SingularMatrix { pivot: 0.0 })?;
        // damped update: halve while the residual grows
        let mut t = 1.0;
        loop {
            let p_try = [p[0] + t * step[0], p[1] + t * step[1]];
            let l_try = lambda + t * step[2];
            let trial = reparametrize(shape, p_try, l_try, m).map(|f| {
                let r = residual(&f);
                (f, r)
            });
            if let Ok((f, r)) = trial {
                if size(&r) < size(&res) || t < 1e-3 {
                    p = p_try;
                    lambda = l_try;
                    f0 = f;
                    res = r;
                    break;
                }
            }
            t *= 0.5;
            if t < 1e-3 {
                return Err(Error::NewtonDiverged {
                    iterations: NORMALIZE_MAX_ITERS,
                    residual: size(&res),
                });
            }
        }
    }
    if size(&res) < NORMALIZE_TOL {
        return Ok(Normalized {
            f0,
            shift: p,
            scale: lambda,
        });
    }
    Err(Error::NewtonDiverged {
        iterations: NORMALIZE_MAX_ITERS,
        residual: size(&res),
    })
}

/// Polar radius of the curve `(1 + shape(α)) n(α)` about `pole`, divided by
/// `lambda`, minus one; sampled on `m` angles and truncated to `shape.n_max()`.
fn reparametrize(shape: &SpectralFunction, pole: [f64; 2], lambda: f64, m: usize) -> Result<SpectralFunction> {
    let d1 = shape.derivative(1);
    let mut samples = Vec::with_capacity(m);
    for j in 0..m {
        let theta = 2.0 * PI * j as f64 / m as f64;
        let (st, ct) = theta.sin_cos();
        // solve (z(α) - p) × n(θ) = 0 for α near θ
        let mut alpha = theta;
        let mut converged = false;
        for _ in 0..50 {
            let (sa, ca) = alpha.sin_cos();
            let r = 1.0 + shape.evaluate(alpha);
            let dr = d1.evaluate(alpha);
            let z = [r * ca - pole[0], r * sa - pole[1]];
            let dz = [dr * ca - r * sa, dr * sa + r * ca];
            let g = z[0] * st - z[1] * ct;
            let dg = dz[0] * st - dz[1] * ct;
            if dg.abs() < 1e-300 {
                break;
            }
            let delta = g / dg;
            alpha -= delta;
            if delta.abs() < 1e-15 {
                converged = true;
                break;
            }
        }
        let (sa, ca) = alpha.sin_cos();
        let r = 1.0 + shape.evaluate(alpha);
        let z = [r * ca - pole[0], r * sa - pole[1]];
        let rho = z[0] * ct + z[1] * st;
        if !converged || rho <= MIN_RADIUS * lambda {
            return Err(Error::DegenerateCurve {
                min_radius: rho / lambda,
            });
        }
        samples.push(rho / lambda - 1.0);
    }
    SpectralFunction::from_grid(&samples, shape.n_max())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn params_validation() {
        assert!(PhysicalParams::new(1.5, 1.0).is_err());
        assert!(PhysicalParams::new(-1.0, -3.0).is_ok());
        assert_eq!(PhysicalParams::new(0.5, 2.0).unwrap().coupling(), 1.0);
    }

    #[test]
    fn curvature_examples() {
        let k = curvature(&SpectralFunction::zeros(8)).unwrap();
        assert!(k.max_abs_coeff_diff(&SpectralFunction::constant(8, 1.0)) < 1e-15);
        let k = curvature(&SpectralFunction::constant(8, 0.25)).unwrap();
        assert!(k.max_abs_coeff_diff(&SpectralFunction::constant(8, 0.8)) < 1e-15);
        assert!(curvature(&SpectralFunction::constant(8, -1.5)).is_err());
    }

    #[test]
    fn curvature_linearization() {
        let f = SpectralFunction::cosine(16, 2, 1.0, 0.0);
        let eps = 1e-5;
        let fd = curvature(&f.scale(eps))
            .unwrap()
            .sub(&SpectralFunction::constant(16, 1.0))
            .scale(1.0 / eps);
        let lin = f.derivative(2).add(&f).scale(-1.0);
        assert!(fd.max_abs_coeff_diff(&lin) < 1e-4 * f.norm_s(0.0));
    }

    #[test]
    fn gauss_bonnet() {
        let f = SpectralFunction::cosine(32, 2, 0.1, 0.3).add(&SpectralFunction::sine(32, 5, 0.02));
        let m = 256;
        let k = curvature(&f).unwrap().to_grid(m).unwrap();
        let r = f.to_grid(m).unwrap();
        let d = f.derivative(1).to_grid(m).unwrap();
        let total: f64 = (0..m)
            .map(|j| k[j] * ((1.0 + r[j]).powi(2) + d[j] * d[j]).sqrt())
            .sum::<f64>()
            * 2.0
            * PI
            / m as f64;
        assert_abs_diff_eq!(total, 2.0 * PI, epsilon = 1e-10);
    }

    #[test]
    fn area_examples() {
        assert_abs_diff_eq!(area(&SpectralFunction::zeros(4)), PI);
        assert_abs_diff_eq!(
            area(&SpectralFunction::cosine(4, 1, 1.0, 0.0)),
            1.5 * PI,
            epsilon = 1e-14
        );
        let pf = SpectralFunction::cosine(8, 3, 0.2, 0.1).add(&SpectralFunction::sine(8, 2, 0.1));
        let s = BubbleState::from_projection(&pf, [0.0; 2], 0.0).unwrap();
        assert_abs_diff_eq!(area(&s.f), PI, epsilon = 1e-12);
    }

    #[test]
    fn centroid_examples() {
        let z = centroid_moment(&SpectralFunction::zeros(4));
        assert!(z[0].abs() < 1e-15 && z[1].abs() < 1e-15);
        let z = centroid_moment(&SpectralFunction::cosine(4, 2, 1.0, 0.0));
        assert!(z[0].abs() < 1e-13 && z[1].abs() < 1e-13);
        let eps = 1e-4;
        let z = centroid_moment(&SpectralFunction::cosine(4, 1, eps, 0.0));
        assert!((z[0] - 3.0 * PI * eps).abs() < 1e-6);
        assert!(z[1].abs() < 1e-15);
        // direct quadrature of the sine moment
        let f = SpectralFunction::sine(4, 1, 0.1).add(&SpectralFunction::cosine(4, 2, 0.05, 0.0));
        let m = 64;
        let direct: f64 = (0..m)
            .map(|j| {
                let a = 2.0 * PI * j as f64 / m as f64;
                (1.0 + f.evaluate(a)).powi(3) * a.sin()
            })
            .sum::<f64>()
            * 2.0
            * PI
            / m as f64;
        assert_abs_diff_eq!(centroid_moment(&f)[1], direct, epsilon = 1e-13);
    }

    #[test]
    fn zero_mode_examples() {
        assert_eq!(zero_mode_from_projection(&SpectralFunction::zeros(3)).unwrap(), 0.0);
        // ‖pf‖²/(2π) = 2·|a/2|² = 3/4 for a cos α with a² = 3/2
        let pf = SpectralFunction::cosine(3, 1, 1.5f64.sqrt(), 0.0);
        assert_abs_diff_eq!(zero_mode_from_projection(&pf).unwrap(), -0.5, epsilon = 1e-15);
        let pf = SpectralFunction::cosine(3, 2, 1e-3, 0.0);
        let e = pf.projected_energy() * 2.0 * PI;
        let v = zero_mode_from_projection(&pf).unwrap();
        assert!(((v + e / (4.0 * PI)) / v).abs() < e);
        assert!(zero_mode_from_projection(&SpectralFunction::cosine(3, 1, 2.0, 0.0)).is_err());
    }

    #[test]
    fn reconstruction() {
        let s = BubbleState::circle(4);
        for p in reconstruct_curve(&s, 16) {
            assert_abs_diff_eq!(p[0].hypot(p[1]), 1.0, epsilon = 1e-15);
        }
        let s = BubbleState {
            c: [0.0, 2.5],
            ..BubbleState::circle(4)
        };
        for p in reconstruct_curve(&s, 16) {
            assert_abs_diff_eq!(p[0].hypot(p[1] - 2.5), 1.0, epsilon = 1e-15);
        }
        let f = SpectralFunction::cosine(4, 2, 0.1, 0.0);
        let s = BubbleState {
            f: f.clone(),
            ..BubbleState::circle(4)
        };
        let e1 = (polygon_area(&reconstruct_curve(&s, 200)) - area(&f)).abs();
        let e2 = (polygon_area(&reconstruct_curve(&s, 400)) - area(&f)).abs();
        assert!(e1 < 1e-3 && e2 < e1 / 3.0);
    }

    #[test]
    fn normalize_fixed_point() {
        let n = normalize_initial_data(&SpectralFunction::zeros(8)).unwrap();
        assert_eq!(n.f0, SpectralFunction::zeros(8));
        assert_eq!((n.shift, n.scale), ([0.0; 2], 1.0));
    }

    #[test]
    fn normalize_translated_circle() {
        let eps = 1e-3;
        let n = normalize_initial_data(&SpectralFunction::cosine(32, 1, eps, 0.0)).unwrap();
        assert!(n.f0.norm_s(1.0) < 10.0 * eps * eps);
        assert!((n.shift[0] - eps).abs() < 10.0 * eps * eps);
    }

    #[test]
    fn normalize_mode_three() {
        let n = normalize_initial_data(&SpectralFunction::cosine(32, 3, 0.05, 0.0)).unwrap();
        let mo = centroid_moment(&n.f0);
        assert!(mo[0].abs() < 1e-12 && mo[1].abs() < 1e-12);
        assert_abs_diff_eq!(area(&n.f0), PI, epsilon = 1e-12);
        let again = normalize_initial_data(&n.f0).unwrap();
        assert!(again.f0.max_abs_coeff_diff(&n.f0) < 1e-12);
        let s = BubbleState {
            f: n.f0,
            ..BubbleState::circle(32)
        };
        s.validate().unwrap();
    }

    #[test]
    fn normalize_rejects_degenerate() {
        let shape = SpectralFunction::cosine(8, 2, 0.95, 0.0);
        assert!(matches!(
            normalize_initial_data(&shape),
            Err(Error::DegenerateCurve { .. })
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn normalize_hits_constraints(
            amps in proptest::collection::vec(-0.03f64..0.03, 6),
            phases in proptest::collection::vec(0.0f64..6.3, 6),
            offset in -0.2f64..0.2,
        ) {
            let mut shape = SpectralFunction::constant(24, offset);
            for (i, (a, p)) in amps.iter().zip(&phases).enumerate() {
                shape.add_cosine(i + 1, *a, *p);
            }
            let n = normalize_initial_data(&shape).unwrap();
            let mo = centroid_moment(&n.f0);
            prop_assert!(mo[0].abs() < 1e-12 && mo[1].abs() < 1e-12);
            prop_assert!((area(&n.f0) - PI).abs() < 1e-12);
            let s = BubbleState { f: n.f0, ..BubbleState::circle(24) };
            prop_assert!(s.zero_mode_residual().unwrap() < 1e-10);
        }
    }
}
