//! Post-processing of trajectories: decay rates, analyticity strip estimates,
//! conservation residuals and the asymptotic drift.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrator::Trajectory;
use crate::spectral::{NormSpec, SpectralFunction};

pub const ANALYTICITY_FLOOR: f64 = 1e-13;
const MIN_FIT_SAMPLES: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub rate: f64,
    pub r_squared: f64,
    pub window: [f64; 2],
    pub samples: usize,
}

/// Least-squares line `y ≈ a + b x`; returns `(a, b, R²)`.
fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my) * (v - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let r2 = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    (intercept, slope, r2)
}

/// Exponential fit of a norm series over `window`.
pub fn decay_fit_series(times: &[f64], norms: &[f64], window: [f64; 2]) -> Result<DecayFit> {
    if times.len() != norms.len() {
        return Err(Error::DimensionMismatch {
            expected: times.len(),
            found: norms.len(),
        });
    }
    let (mut x, mut y) = (Vec::new(), Vec::new());
    for (&t, &v) in times.iter().zip(norms) {
        if t < window[0] || t > window[1] {
            continue;
        }
        if !(v > 0.0) {
            return Err(Error::InvalidArgument(format!("non-positive norm {v} at t = {t}")));
        }
        x.push(t);
        y.push(v.ln());
    }
    if x.len() < MIN_FIT_SAMPLES {
        return Err(Error::InvalidArgument(format!(
            "decay fit needs at least {MIN_FIT_SAMPLES} samples in [{}, {}], found {}",
            window[0],
            window[1],
            x.len()
        )));
    }
    let (_, slope, r_squared) = linear_fit(&x, &y);
    Ok(DecayFit {
        rate: -slope,
        r_squared,
        window,
        samples: x.len(),
    })
}

/// Decay fit of `‖f(t)‖_{F^{s,1}_ν}` over the stored snapshots.
pub fn decay_fit(traj: &Trajectory, s: f64, nu: f64, window: [f64; 2]) -> Result<DecayFit> {
    let times: Vec<f64> = traj.snapshots.iter().map(|st| st.t).collect();
    let norms = traj
        .snapshots
        .iter()
        .map(|st| Ok(st.f.wiener_norm(NormSpec::new(s, nu, st.t)?, true)))
        .collect::<Result<Vec<_>>>()?;
    decay_fit_series(&times, &norms, window)
}

/// Decay fit of the recorded `‖f‖_{F^{1,1}}` (every accepted step).
pub fn decay_fit_records(traj: &Trajectory, window: [f64; 2]) -> Result<DecayFit> {
    let times: Vec<f64> = traj.records.iter().map(|r| r.t).collect();
    let norms: Vec<f64> = traj.records.iter().map(|r| r.norm_f11).collect();
    decay_fit_series(&times, &norms, window)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalyticitySample {
    pub t: f64,
    /// Fitted slope of `-log|f̂(k)|` in `k`; `None` when fewer than three
    /// modes are above the floor.
    pub rho: Option<f64>,
    pub active_modes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticityFit {
    pub floor: f64,
    pub samples: Vec<AnalyticitySample>,
}

/// Fits `log|f̂(k)| ≈ const - ρ k` over `k ≥ 2` with `|f̂(k)| > floor`.
pub fn fourier_decay_slope(f: &SpectralFunction, floor: f64) -> (Option<f64>, usize) {
    let (mut x, mut y) = (Vec::new(), Vec::new());
    for k in 2..=f.n_max() {
        let a = f.coeff(k as i64).norm();
        if a > floor {
            x.push(k as f64);
            y.push(a.ln());
        }
    }
    if x.len() < 3 {
        return (None, x.len());
    }
    let (_, slope, _) = linear_fit(&x, &y);
    (Some(-slope), x.len())
}

pub fn analyticity_fit(traj: &Trajectory, floor: f64) -> AnalyticityFit {
    let samples = traj
        .snapshots
        .par_iter()
        .map(|st| {
            let (rho, active_modes) = fourier_decay_slope(&st.f, floor);
            AnalyticitySample {
                t: st.t,
                rho,
                active_modes,
            }
        })
        .collect();
    AnalyticityFit { floor, samples }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConservationReport {
    pub max_area_drift: f64,
    pub max_omega_mean: f64,
    pub max_constraint_residual: f64,
    pub max_zero_mode_drift: f64,
    /// `(t, centroid - pole)` for every record; reported, not asserted.
    pub centroid_offset: Vec<(f64, [f64; 2])>,
}

pub fn conservation_report(traj: &Trajectory) -> ConservationReport {
    let max = |g: &dyn Fn(&crate::integrator::StepRecord) -> f64| traj.records.iter().map(g).fold(0.0, f64::max);
    ConservationReport {
        max_area_drift: max(&|r| r.area_residual),
        max_omega_mean: max(&|r| r.omega_mean),
        max_constraint_residual: max(&|r| r.constraint_residual),
        max_zero_mode_drift: max(&|r| r.zero_mode_drift),
        centroid_offset: traj.records.iter().map(|r| (r.t, r.centroid_offset)).collect(),
    }
}

/// Pole velocity from a finite difference over the last `tail` time units.
/// Every record in the tail must have `‖f‖_{F^{1,1}} < 1e-6`.
pub fn drift_velocity(traj: &Trajectory, tail: f64) -> Result<[f64; 2]> {
    let last = traj
        .records
        .last()
        .ok_or_else(|| Error::InvalidArgument("empty trajectory".into()))?;
    let start = last.t - tail;
    let window: Vec<_> = traj.records.iter().filter(|r| r.t >= start).collect();
    if window.len() < 2 || window[window.len() - 1].t - window[0].t <= 0.0 {
        return Err(Error::InvalidArgument("drift tail too short".into()));
    }
    if let Some(r) = window.iter().find(|r| r.norm_f11 >= 1e-6) {
        return Err(Error::InvalidArgument(format!(
            "tail not converged: ‖f‖_F11 = {:.3e} at t = {}",
            r.norm_f11, r.t
        )));
    }
    let (a, b) = (window[0], window[window.len() - 1]);
    let dt = b.t - a.t;
    Ok([(b.c[0] - a.c[0]) / dt, (b.c[1] - a.c[1]) / dt])
}

/// True when `‖f‖_{F^{1,1}}` strictly decreases on every record after `t0`.
pub fn strictly_decreasing_after(traj: &Trajectory, t0: f64) -> bool {
    traj.records
        .windows(2)
        .filter(|w| w[0].t >= t0)
        .all(|w| w[1].norm_f11 < w[0].norm_f11)
}
