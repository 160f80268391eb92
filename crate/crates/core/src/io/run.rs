use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde_json::json;

use super::config::{Emit, InitialData, RunConfig};
use super::snapshot::{read_last_snapshot, write_record};
use crate::diagnostics::{analyticity_fit, conservation_report, decay_fit_records, drift_velocity, ANALYTICITY_FLOOR};
use crate::error::{Error, Result};
use crate::geometry::{normalize_initial_data, reconstruct_curve, BubbleState, Normalized};
use crate::integrator::{run_with, StepRecord, Trajectory};
use crate::spectral::SpectralFunction;

pub const NORMS_FILE: &str = "norms.tsv";
pub const VORTICITY_FILE: &str = "vorticity.tsv";
pub const SPECTRUM_FILE: &str = "spectrum.jsonl";
pub const DIAGNOSTICS_FILE: &str = "diagnostics.json";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const CURVES_DIR: &str = "curves";

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub dir: PathBuf,
    pub steps: usize,
    pub final_state: BubbleState,
    pub files: Vec<PathBuf>,
}

fn g(x: f64) -> String {
    format!("{x:.16e}")
}

/// Initial state from the configured modes (normalized) or snapshot.
pub fn initial_state(cfg: &RunConfig) -> Result<(BubbleState, Option<Normalized>)> {
    let n = cfg.integrator.n_max;
    match &cfg.initial {
        InitialData::Modes(modes) => {
            let mut shape = SpectralFunction::zeros(n);
            for &(k, amp, phase) in modes {
                shape.add_cosine(k, amp, phase);
            }
            let norm = normalize_initial_data(&shape)?;
            let state = BubbleState::from_projection(&norm.f0, [0.0; 2], 0.0)?;
            Ok((state, Some(norm)))
        }
        InitialData::Snapshot { snapshot } => Ok((load_snapshot_state(snapshot, n)?, None)),
    }
}

fn load_snapshot_state(path: &Path, n_max: usize) -> Result<BubbleState> {
    let state = read_last_snapshot(path)?;
    if state.n_max() != n_max {
        return Err(Error::DimensionMismatch {
            expected: n_max,
            found: state.n_max(),
        });
    }
    state.validate()?;
    Ok(state)
}

struct Sinks {
    dir: PathBuf,
    norms: Option<BufWriter<File>>,
    vorticity: Option<BufWriter<File>>,
    spectrum: Option<BufWriter<File>>,
    curves: bool,
    files: Vec<PathBuf>,
    index: usize,
    last_spectrum: Option<usize>,
}

impl Sinks {
    fn open(dir: &Path, cfg: &RunConfig) -> Result<Self> {
        std::fs::create_dir_all(dir)?;
        let mut files = Vec::new();
        let mut open = |name: &str, header: Option<&str>| -> Result<BufWriter<File>> {
            let path = dir.join(name);
            let mut w = BufWriter::new(File::create(&path)?);
            if let Some(h) = header {
                writeln!(w, "{h}")?;
            }
            files.push(path);
            Ok(w)
        };
        let emit = &cfg.output.emit;
        let norms = if emit.contains(&Emit::Norms) {
            Some(open(
                NORMS_FILE,
                Some("t\tnorm_F01\tnorm_F11\tnorm_F11_nu\tarea_residual\tomega_mean\tcdot_x\tcdot_y\tc_x\tc_y\tdt"),
            )?)
        } else {
            None
        };
        let vorticity = if emit.contains(&Emit::Vorticity) {
            Some(open(
                VORTICITY_FILE,
                Some("t\tomega_mean\tomega_F01\titerations\tresidual"),
            )?)
        } else {
            None
        };
        let spectrum = if emit.contains(&Emit::Spectrum) {
            Some(open(SPECTRUM_FILE, None)?)
        } else {
            None
        };
        let curves = emit.contains(&Emit::Curves);
        if curves {
            std::fs::create_dir_all(dir.join(CURVES_DIR))?;
        }
        Ok(Self {
            dir: dir.to_path_buf(),
            norms,
            vorticity,
            spectrum,
            curves,
            files,
            index: 0,
            last_spectrum: None,
        })
    }

    fn write_curve(&mut self, state: &BubbleState, points: usize) -> Result<()> {
        let path = self.dir.join(CURVES_DIR).join(format!("curve_{:07}.tsv", self.index));
        let mut w = BufWriter::new(File::create(&path)?);
        writeln!(w, "# t = {}", g(state.t))?;
        writeln!(w, "x\ty")?;
        for p in reconstruct_curve(state, points) {
            writeln!(w, "{}\t{}", g(p[0]), g(p[1]))?;
        }
        w.flush()?;
        self.files.push(path);
        Ok(())
    }

    fn on_step(&mut self, state: &BubbleState, r: &StepRecord, cfg: &RunConfig) -> Result<()> {
        if let Some(w) = self.norms.as_mut() {
            let cols = [
                r.t,
                r.norm_f01,
                r.norm_f11,
                r.norm_f11_nu,
                r.area_residual,
                r.omega_mean,
                r.c_dot[0],
                r.c_dot[1],
                r.c[0],
                r.c[1],
                r.dt,
            ];
            writeln!(w, "{}", cols.map(g).join("\t"))?;
        }
        if let Some(w) = self.vorticity.as_mut() {
            writeln!(
                w,
                "{}\t{}\t{}\t{}\t{}",
                g(r.t),
                g(r.omega_mean),
                g(r.omega_norm),
                r.vorticity_iterations,
                g(r.vorticity_residual)
            )?;
        }
        if self.index % cfg.output.spectrum_stride == 0 {
            if let Some(w) = self.spectrum.as_mut() {
                write_record(w, state)?;
                self.last_spectrum = Some(self.index);
            }
        }
        if self.curves && self.index % cfg.output.curve_stride == 0 {
            self.write_curve(state, cfg.output.curve_points)?;
        }
        self.index += 1;
        Ok(())
    }

    fn finish(&mut self, last: &BubbleState, cfg: &RunConfig) -> Result<()> {
        let final_index = self.index.saturating_sub(1);
        if self.last_spectrum != Some(final_index) {
            if let Some(w) = self.spectrum.as_mut() {
                write_record(w, last)?;
            }
        }
        if self.curves && final_index % cfg.output.curve_stride != 0 {
            self.index = final_index;
            self.write_curve(last, cfg.output.curve_points)?;
        }
        for w in [&mut self.norms, &mut self.vorticity, &mut self.spectrum]
            .into_iter()
            .flatten()
        {
            w.flush()?;
        }
        Ok(())
    }
}

fn diagnostics_document(traj: &Trajectory, cfg: &RunConfig) -> serde_json::Value {
    let decay = match decay_fit_records(traj, cfg.output.decay_window) {
        Ok(f) => json!(f),
        Err(e) => json!({ "error": e.to_string() }),
    };
    let drift = match drift_velocity(traj, cfg.output.drift_tail) {
        Ok(v) => json!(v),
        Err(e) => json!({ "error": e.to_string() }),
    };
    let cons = conservation_report(traj);
    let stride = cfg.output.spectrum_stride;
    json!({
        "decay_fit": decay,
        "drift_velocity": drift,
        "converged_at": traj.converged_at,
        "conservation": {
            "max_area_drift": cons.max_area_drift,
            "max_omega_mean": cons.max_omega_mean,
            "max_constraint_residual": cons.max_constraint_residual,
            "max_zero_mode_drift": cons.max_zero_mode_drift,
            "centroid_offset": cons.centroid_offset.iter().step_by(stride).collect::<Vec<_>>(),
        },
        "analyticity": analyticity_fit(traj, ANALYTICITY_FLOOR),
    })
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn execute(
    cfg: &RunConfig,
    initial: BubbleState,
    normalization: Option<Normalized>,
    command: &str,
) -> Result<RunSummary> {
    let dir = cfg.output_dir();
    let mut sinks = Sinks::open(&dir, cfg)?;
    let mut sink_err: Option<Error> = None;
    let outcome = run_with(&initial, &cfg.integrator, &cfg.params, |s, r| {
        if sink_err.is_none() {
            if let Err(e) = sinks.on_step(s, r, cfg) {
                sink_err = Some(e);
            }
        }
    });
    let outcome = match (outcome, sink_err) {
        (Ok(t), None) => Ok(t),
        (Ok(_), Some(e)) | (Err(e), _) => Err(e),
    };
    let mut manifest = json!({
        "package": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "config": cfg.to_toml(),
        "initial_time": initial.t,
        "normalization": normalization.as_ref().map(|n| json!({ "shift": n.shift, "scale": n.scale })),
    });
    let manifest_path = dir.join(MANIFEST_FILE);
    match outcome {
        Ok(traj) => {
            let last = traj.last().cloned().unwrap_or(initial);
            sinks.finish(&last, cfg)?;
            if cfg.output.emit.contains(&Emit::Diagnostics) {
                let path = dir.join(DIAGNOSTICS_FILE);
                write_json(&path, &diagnostics_document(&traj, cfg))?;
                sinks.files.push(path);
            }
            manifest["status"] = json!("ok");
            manifest["final_time"] = json!(last.t);
            manifest["steps"] = json!(traj.records.len() - 1);
            write_json(&manifest_path, &manifest)?;
            sinks.files.push(manifest_path);
            Ok(RunSummary {
                dir,
                steps: traj.records.len() - 1,
                final_state: last,
                files: sinks.files,
            })
        }
        Err(e) => {
            let _ = sinks.finish(&initial, cfg);
            manifest["status"] = json!("aborted");
            manifest["reason"] = json!(e.to_string());
            write_json(&manifest_path, &manifest)?;
            Err(e)
        }
    }
}

/// Normalizes the initial data, integrates and writes the requested outputs.
pub fn run_command(cfg: &RunConfig) -> Result<RunSummary> {
    let (initial, norm) = initial_state(cfg)?;
    execute(cfg, initial, norm, "run")
}

/// Continues from the last record of `snapshot` up to the configured `t_end`.
pub fn resume_command(snapshot: &Path, cfg: &RunConfig) -> Result<RunSummary> {
    let initial = load_snapshot_state(snapshot, cfg.integrator.n_max)?;
    execute(cfg, initial, None, "resume")
}
