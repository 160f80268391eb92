//! Time stepping: ETDRK2 in the eigenbasis of the linear operator, an
//! explicit RK4 reference scheme, and the literal Picard iteration of the mild
//! formulation.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::{c_dot, full_rhs, EvolutionRhs};
use crate::geometry::{area, centroid_moment, BubbleState, PhysicalParams};
use crate::linear::{phi12, to_modes, Propagator};
use crate::spectral::{NormSpec, SpectralFunction};
use crate::vorticity::{VorticitySolution, DEFAULT_TOL};

/// RK4 stability bound: `dt · n_max³ ≤ RK4_CFL`.
pub const RK4_CFL: f64 = 2.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Scheme {
    #[default]
    #[serde(rename = "etdrk2-diagonalized")]
    Etdrk2,
    #[serde(rename = "rk4-explicit")]
    Rk4,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorConfig {
    pub scheme: Scheme,
    pub dt: f64,
    pub t_end: f64,
    pub n_max: usize,
    pub tol_vorticity: f64,
    /// A step is rejected when `‖f‖_{F^{1,1}}` grows by more than this factor.
    pub safety: f64,
    /// Below this `‖f‖_{F^{1,1}}` the state is replaced by the exact
    /// translating circle; `0` disables.
    pub floor: f64,
    /// Abort threshold on `|area - π|` (tracked independently of the constraint).
    pub area_tol: f64,
    /// Admissibility gate on `‖f‖_{F^{1,1}}`.
    pub gate: f64,
    pub max_halvings: u32,
    /// Keep every n-th accepted state (the first and last are always kept).
    pub snapshot_stride: usize,
    /// Analyticity weight for the `F^{1,1}_ν` diagnostic.
    pub nu: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            scheme: Scheme::Etdrk2,
            dt: 1e-3,
            t_end: 5.0,
            n_max: 128,
            tol_vorticity: DEFAULT_TOL,
            safety: 2.0,
            floor: 1e-13,
            area_tol: 1e-8,
            gate: 1.0,
            max_halvings: 20,
            snapshot_stride: 1,
            nu: 0.1,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        let mut bad = Vec::new();
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            bad.push(format!("dt = {} must be positive", self.dt));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            bad.push(format!("t_end = {} must be non-negative", self.t_end));
        }
        if self.n_max < 2 {
            bad.push(format!("n_max = {} must be at least 2", self.n_max));
        }
        if !(self.tol_vorticity > 0.0) {
            bad.push("tol_vorticity must be positive".into());
        }
        if !(self.safety > 1.0) {
            bad.push("safety must exceed 1".into());
        }
        if !(self.floor >= 0.0 && self.area_tol > 0.0 && self.gate > 0.0 && self.nu >= 0.0) {
            bad.push("floor, area_tol, gate and nu must be non-negative (area_tol, gate positive)".into());
        }
        if self.snapshot_stride == 0 {
            bad.push("snapshot_stride must be at least 1".into());
        }
        if self.scheme == Scheme::Rk4 && self.dt * (self.n_max as f64).powi(3) > RK4_CFL {
            bad.push(format!(
                "rk4-explicit needs dt <= {RK4_CFL}/n_max^3 = {:.3e}",
                RK4_CFL / (self.n_max as f64).powi(3)
            ));
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(bad.join("; ")))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub t: f64,
    pub dt: f64,
    pub norm_f01: f64,
    pub norm_f11: f64,
    pub norm_f11_nu: f64,
    /// `|area(f) - π|` of the stored state.
    pub area_residual: f64,
    /// `|f̂(0) - ∫N̂(0)dt|`: the constraint-enforced zero mode against the one
    /// integrated from the velocity field (time-discretization error).
    pub zero_mode_drift: f64,
    /// Zero-mode constraint residual of the stored state.
    pub constraint_residual: f64,
    pub omega_mean: f64,
    pub omega_norm: f64,
    pub vorticity_iterations: usize,
    pub vorticity_residual: f64,
    pub c: [f64; 2],
    pub c_dot: [f64; 2],
    /// Region centroid minus pole.
    pub centroid_offset: [f64; 2],
    pub halvings: u32,
}

#[derive(Debug, Clone, Default)]
pub struct Trajectory {
    pub snapshots: Vec<BubbleState>,
    pub records: Vec<StepRecord>,
    /// Time at which the floor was reached, if it was.
    pub converged_at: Option<f64>,
}

impl Trajectory {
    pub fn last(&self) -> Option<&BubbleState> {
        self.snapshots.last()
    }
}

/// Right-hand side evaluated at one state.
#[derive(Debug, Clone)]
struct Eval {
    rhs: EvolutionRhs,
    vort: VorticitySolution,
}

fn evaluate(state: &BubbleState, params: &PhysicalParams, tol: f64) -> Result<Eval> {
    let (rhs, vort) = full_rhs(state, params, tol)?;
    Ok(Eval { rhs, vort })
}

fn norm11(f: &SpectralFunction) -> f64 {
    f.norm_s(1.0)
}

/// Stepper for one trajectory. Holds the eigenbasis and the right-hand side at
/// the current state so each ETDRK2 step costs two evaluations.
#[derive(Debug, Clone)]
pub struct Integrator {
    cfg: IntegratorConfig,
    params: PhysicalParams,
    prop: Propagator,
    state: BubbleState,
    eval: Eval,
    /// Zero mode integrated from `N̂(0)`, used for the area diagnostic.
    aux_zero: f64,
    circle: bool,
}

impl Integrator {
    pub fn new(initial: BubbleState, cfg: IntegratorConfig, params: PhysicalParams) -> Result<Self> {
        cfg.validate()?;
        if initial.n_max() != cfg.n_max {
            return Err(Error::DimensionMismatch {
                expected: cfg.n_max,
                found: initial.n_max(),
            });
        }
        initial.validate()?;
        let g = norm11(&initial.f);
        if g > cfg.gate {
            return Err(Error::ConstraintViolation(format!(
                "‖f‖_F11 = {g:.3e} above admissibility gate {}",
                cfg.gate
            )));
        }
        let prop = Propagator::new(cfg.n_max, &params)?;
        let eval = evaluate(&initial, &params, cfg.tol_vorticity)?;
        let aux_zero = initial.f.mean();
        Ok(Self {
            cfg,
            params,
            prop,
            state: initial,
            eval,
            aux_zero,
            circle: false,
        })
    }

    pub fn state(&self) -> &BubbleState {
        &self.state
    }

    pub fn config(&self) -> &IntegratorConfig {
        &self.cfg
    }

    fn nonlinear_diag(&self, rhs: &EvolutionRhs) -> Result<Vec<Complex64>> {
        self.prop.to_diag(&rhs.n_remainder.project_mean_zero())
    }

    /// One ETDRK2 attempt of size `h`: returns the new state, its evaluation
    /// and the updated auxiliary zero mode.
    fn try_etdrk2(&self, h: f64) -> Result<(BubbleState, Eval, f64)> {
        let s = &self.state;
        let y0 = self.prop.to_diag(&s.f.project_mean_zero())?;
        let n0 = self.nonlinear_diag(&self.eval.rhs)?;
        let ya = self.prop.duhamel_diag(&y0, std::slice::from_ref(&n0), h)?;
        let stage = BubbleState::from_projection(&self.prop.from_diag(&ya), s.c, s.t + h)?;
        let ea = evaluate(&stage, &self.params, self.cfg.tol_vorticity)?;
        let na = self.nonlinear_diag(&ea.rhs)?;
        let y1 = self.prop.duhamel_diag(&y0, &[n0, na], h)?;
        let pf = self.prop.from_diag(&y1);
        let cd0 = self.eval.rhs.c_dot;
        let cd1 = c_dot(&pf, &self.params);
        let c = [
            s.c[0] + 0.5 * h * (cd0[0] + cd1[0]),
            s.c[1] + 0.5 * h * (cd0[1] + cd1[1]),
        ];
        let next = BubbleState::from_projection(&pf, c, s.t + h)?;
        let aux = self.aux_zero + 0.5 * h * (self.eval.rhs.n_full.mean() + ea.rhs.n_full.mean());
        let e1 = evaluate(&next, &self.params, self.cfg.tol_vorticity)?;
        Ok((next, e1, aux))
    }

    /// Classical RK4 on `(ℙf, c, f̂(0))` with the full velocity.
    fn try_rk4(&self, h: f64) -> Result<(BubbleState, Eval, f64)> {
        let s = &self.state;
        let tol = self.cfg.tol_vorticity;
        let pf0 = s.f.project_mean_zero();
        let k1 = &self.eval.rhs;
        let advance = |dt: f64, k: &EvolutionRhs| -> Result<Eval> {
            let st = BubbleState::from_projection(&pf0.axpy(dt, &k.n_full.project_mean_zero()), s.c, s.t + dt)?;
            evaluate(&st, &self.params, tol)
        };
        let k2 = advance(0.5 * h, k1)?;
        let k3 = advance(0.5 * h, &k2.rhs)?;
        let k4 = advance(h, &k3.rhs)?;
        let ks = [k1, &k2.rhs, &k3.rhs, &k4.rhs];
        let w = [1.0, 2.0, 2.0, 1.0];
        let mut pf = pf0.clone();
        let mut c = s.c;
        let mut aux = self.aux_zero;
        for (k, wi) in ks.iter().zip(w) {
            let a = h * wi / 6.0;
            pf = pf.axpy(a, &k.n_full.project_mean_zero());
            c[0] += a * k.c_dot[0];
            c[1] += a * k.c_dot[1];
            aux += a * k.n_full.mean();
        }
        let next = BubbleState::from_projection(&pf, c, s.t + h)?;
        let e1 = evaluate(&next, &self.params, tol)?;
        Ok((next, e1, aux))
    }

    /// Advances by `h` (halving on rejection) and returns the number of halvings used.
    pub fn step(&mut self, h: f64) -> Result<u32> {
        if self.circle {
            self.state.t += h;
            self.state.c[1] += self.params.a_rhosigma * h;
            return Ok(0);
        }
        let old = norm11(&self.state.f);
        let mut halvings = 0;
        let mut sub = h;
        let mut done = 0.0;
        let mut last_err = None;
        while done < h {
            let piece = sub.min(h - done);
            let attempt = match self.cfg.scheme {
                Scheme::Etdrk2 => self.try_etdrk2(piece),
                Scheme::Rk4 => self.try_rk4(piece),
            };
            let accepted = match attempt {
                Ok((next, e, aux)) => {
                    let new = norm11(&next.f);
                    let area_res = (area(&next.f) - PI).abs();
                    if !new.is_finite() || new > self.cfg.safety * old + 1e-14 {
                        last_err = Some(Error::InvariantViolation(format!("norm growth {old:.3e} -> {new:.3e}")));
                        None
                    } else if area_res > self.cfg.area_tol {
                        last_err = Some(Error::InvariantViolation(format!("area drift {area_res:.3e}")));
                        None
                    } else if new > self.cfg.gate {
                        last_err = Some(Error::ConstraintViolation(format!("‖f‖_F11 = {new:.3e} left the gate")));
                        None
                    } else {
                        Some((next, e, aux))
                    }
                }
                Err(e) => {
                    last_err = Some(e);
                    None
                }
            };
            match accepted {
                Some((next, e, aux)) => {
                    done += piece;
                    self.state = next;
                    self.eval = e;
                    self.aux_zero = aux;
                }
                None => {
                    halvings += 1;
                    if halvings > self.cfg.max_halvings {
                        let reason = last_err.map(|e| e.to_string()).unwrap_or_default();
                        return Err(Error::StepRejected {
                            halvings,
                            t: self.state.t,
                            reason,
                        });
                    }
                    sub *= 0.5;
                }
            }
        }
        if self.cfg.floor > 0.0 && norm11(&self.state.f) < self.cfg.floor {
            self.enter_circle();
        }
        Ok(halvings)
    }

    fn enter_circle(&mut self) {
        let n = self.cfg.n_max;
        self.state.f = SpectralFunction::zeros(n);
        self.aux_zero = 0.0;
        self.circle = true;
        if let Ok(e) = evaluate(&self.state, &self.params, self.cfg.tol_vorticity) {
            self.eval = e;
        }
    }

    pub fn on_circle(&self) -> bool {
        self.circle
    }

    pub fn record(&self, dt: f64, halvings: u32) -> StepRecord {
        let f = &self.state.f;
        let spec_nu = NormSpec::new(1.0, self.cfg.nu, self.state.t).expect("valid weights");
        let moment = centroid_moment(f);
        let a = area(f);
        let omega = &self.eval.vort.omega;
        StepRecord {
            t: self.state.t,
            dt,
            norm_f01: f.wiener_norm(NormSpec::sobolev(0.0), false),
            norm_f11: norm11(f),
            norm_f11_nu: f.wiener_norm(spec_nu, true),
            area_residual: (area(f) - PI).abs(),
            zero_mode_drift: (f.mean() - self.aux_zero).abs(),
            constraint_residual: self.state.zero_mode_residual().unwrap_or(f64::INFINITY),
            omega_mean: omega.coeff(0).norm(),
            omega_norm: omega.wiener_norm(NormSpec::sobolev(0.0), false),
            vorticity_iterations: self.eval.vort.iterations,
            vorticity_residual: self.eval.vort.residual,
            c: self.state.c,
            c_dot: if self.circle {
                [0.0, self.params.a_rhosigma]
            } else {
                self.eval.rhs.c_dot
            },
            centroid_offset: [moment[0] / (3.0 * a), moment[1] / (3.0 * a)],
            halvings,
        }
    }
}

/// A single step of size `cfg.dt` from `state`.
pub fn step(state: &BubbleState, cfg: &IntegratorConfig, params: &PhysicalParams) -> Result<BubbleState> {
    let mut it = Integrator::new(state.clone(), cfg.clone(), *params)?;
    it.step(cfg.dt)?;
    Ok(it.state().clone())
}

/// Integrates from `initial` to `cfg.t_end`.
pub fn run(initial: &BubbleState, cfg: &IntegratorConfig, params: &PhysicalParams) -> Result<Trajectory> {
    run_with(initial, cfg, params, |_, _| {})
}

/// [`run`] with a callback on every accepted step.
pub fn run_with(
    initial: &BubbleState,
    cfg: &IntegratorConfig,
    params: &PhysicalParams,
    mut on_step: impl FnMut(&BubbleState, &StepRecord),
) -> Result<Trajectory> {
    let mut it = Integrator::new(initial.clone(), cfg.clone(), *params)?;
    let mut traj = Trajectory::default();
    if cfg.floor > 0.0 && norm11(&initial.f) < cfg.floor {
        it.enter_circle();
        traj.converged_at = Some(initial.t);
    }
    let first = it.record(0.0, 0);
    on_step(it.state(), &first);
    traj.records.push(first);
    traj.snapshots.push(it.state().clone());
    let slack = 1e-9 * cfg.dt;
    let mut count = 0usize;
    while it.state().t < cfg.t_end - slack {
        let remaining = cfg.t_end - it.state().t;
        let h = if remaining < cfg.dt + slack { remaining } else { cfg.dt };
        let halvings = it.step(h)?;
        if it.on_circle() && traj.converged_at.is_none() {
            traj.converged_at = Some(it.state().t);
        }
        count += 1;
        let rec = it.record(h, halvings);
        on_step(it.state(), &rec);
        traj.records.push(rec);
        let finished = it.state().t >= cfg.t_end - slack;
        if count % cfg.snapshot_stride == 0 || finished {
            traj.snapshots.push(it.state().clone());
        }
    }
    Ok(traj)
}

/// One Picard iterate: the state on each point of the uniform time grid.
#[derive(Debug, Clone)]
pub struct PicardIterate {
    pub times: Vec<f64>,
    pub states: Vec<BubbleState>,
}

/// Applies `u ↦ 𝒯(u)` on a grid of `steps` intervals over `[0, t_end]`,
/// starting from the linear evolution, and returns `k_iters` iterates.
/// The nonlinearity is linearly interpolated between grid points and the
/// exponential integrals are exact for that interpolant.
pub fn picard_iterate(
    initial: &BubbleState,
    cfg: &IntegratorConfig,
    params: &PhysicalParams,
    steps: usize,
    k_iters: usize,
) -> Result<Vec<PicardIterate>> {
    cfg.validate()?;
    if steps == 0 {
        return Err(Error::InvalidArgument("picard grid needs at least one interval".into()));
    }
    let prop = Propagator::new(initial.n_max(), params)?;
    let h = cfg.t_end / steps as f64;
    let times: Vec<f64> = (0..=steps).map(|i| initial.t + i as f64 * h).collect();
    let y0 = prop.to_diag(&initial.f.project_mean_zero())?;
    let n = prop.n();
    let a: Vec<f64> = (1..=n).map(|k| prop.system().a(k)).collect();
    let decay: Vec<f64> = a.iter().map(|ak| (-ak * h).exp()).collect();
    let weights: Vec<(f64, f64)> = a
        .iter()
        .map(|ak| {
            let (p1, p2) = phi12(-ak * h);
            (h * (p1 - p2), h * p2)
        })
        .collect();

    let build = |ys: &[Vec<Complex64>], samples: &[EvolutionRhs]| -> Result<Vec<BubbleState>> {
        let mut c = initial.c;
        let mut out = Vec::with_capacity(ys.len());
        for (i, y) in ys.iter().enumerate() {
            let pf = prop.from_diag(y);
            if i > 0 {
                let cd0 = samples
                    .get(i - 1)
                    .map_or_else(|| c_dot(&prop.from_diag(&ys[i - 1]), params), |r| r.c_dot);
                let cd1 = samples.get(i).map_or_else(|| c_dot(&pf, params), |r| r.c_dot);
                c[0] += 0.5 * h * (cd0[0] + cd1[0]);
                c[1] += 0.5 * h * (cd0[1] + cd1[1]);
            }
            out.push(BubbleState::from_projection(&pf, c, times[i])?);
        }
        Ok(out)
    };

    // u⁰: linear evolution
    let mut ys = vec![y0.clone()];
    for i in 0..steps {
        ys.push(ys[i].iter().zip(&decay).map(|(v, d)| v * d).collect());
    }
    let mut current = build(&ys, &[])?;
    let mut iterates = Vec::with_capacity(k_iters);
    for _ in 0..k_iters {
        let evals = current
            .iter()
            .map(|s| {
                let g = norm11(&s.f);
                if g > cfg.gate || !g.is_finite() {
                    return Err(Error::ConstraintViolation(format!(
                        "picard iterate left the admissibility ball (‖f‖_F11 = {g:.3e})"
                    )));
                }
                Ok(full_rhs(s, params, cfg.tol_vorticity)?.0)
            })
            .collect::<Result<Vec<_>>>()?;
        let nl = evals
            .iter()
            .map(|r| prop.to_diag(&r.n_remainder.project_mean_zero()))
            .collect::<Result<Vec<_>>>()?;
        let mut ys = vec![y0.clone()];
        for i in 0..steps {
            let next: Vec<Complex64> = (0..n)
                .map(|k| ys[i][k] * decay[k] + nl[i][k] * weights[k].0 + nl[i + 1][k] * weights[k].1)
                .collect();
            ys.push(next);
        }
        current = build(&ys, &evals)?;
        iterates.push(PicardIterate {
            times: times.clone(),
            states: current.clone(),
        });
    }
    Ok(iterates)
}

/// `sup_τ ‖u - v‖_{F^{0,1}} + ∫ ‖u - v‖_{F^{4,1}} dτ` on a shared grid
/// (trapezoid in τ).
pub fn x_norm_difference(u: &PicardIterate, v: &PicardIterate) -> Result<f64> {
    if u.times.len() != v.times.len() {
        return Err(Error::DimensionMismatch {
            expected: u.times.len(),
            found: v.times.len(),
        });
    }
    let mut sup = 0.0f64;
    let mut integral = 0.0;
    let mut prev: Option<f64> = None;
    for i in 0..u.times.len() {
        let d = u.states[i].f.sub(&v.states[i].f);
        sup = sup.max(d.wiener_norm(NormSpec::sobolev(0.0), false));
        let w4 = d.norm_s(4.0);
        if let Some(p) = prev {
            integral += 0.5 * (u.times[i] - u.times[i - 1]) * (p + w4);
        }
        prev = Some(w4);
    }
    Ok(sup + integral)
}

/// Modes of `ℙf` as a flat vector, for comparisons.
pub fn mode_vector(state: &BubbleState) -> Vec<Complex64> {
    to_modes(&state.f)
}
