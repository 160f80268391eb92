use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::PhysicalParams;
use crate::integrator::IntegratorConfig;

/// Environment variable that relocates relative output directories.
pub const OUTPUT_ROOT_ENV: &str = "MUSKAT_OUTPUT_ROOT";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Emit {
    Norms,
    Curves,
    Spectrum,
    Vorticity,
    Diagnostics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitialData {
    /// `(k, amplitude, phase)`: `amplitude · cos(kα + phase)`.
    Modes(Vec<(usize, f64, f64)>),
    Snapshot {
        snapshot: PathBuf,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub emit: BTreeSet<Emit>,
    /// Accepted steps between curve dumps.
    pub curve_stride: usize,
    pub curve_points: usize,
    /// Accepted steps between spectrum records (the last state is always written).
    pub spectrum_stride: usize,
    /// Window of the exponential fit in the diagnostics summary.
    pub decay_window: [f64; 2],
    /// Tail length used for the drift velocity.
    pub drift_tail: f64,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("output"),
            emit: [
                Emit::Norms,
                Emit::Curves,
                Emit::Spectrum,
                Emit::Vorticity,
                Emit::Diagnostics,
            ]
            .into_iter()
            .collect(),
            curve_stride: 500,
            curve_points: 256,
            spectrum_stride: 500,
            decay_window: [0.5, 3.0],
            drift_tail: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub params: PhysicalParams,
    pub integrator: IntegratorConfig,
    pub initial: InitialData,
    pub output: OutputConfig,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(rename = "A_mu")]
    a_mu: f64,
    #[serde(rename = "A_rhosigma")]
    a_rhosigma: f64,
    initial: InitialData,
    #[serde(default)]
    integrator: IntegratorConfig,
    #[serde(default)]
    output: OutputConfig,
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    (line, col)
}

/// Parses and validates a TOML run configuration.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| {
        let msg = e.message().trim().to_string();
        match e.span() {
            Some(span) => {
                let (line, col) = line_col(text, span.start);
                Error::Config(format!("line {line}, column {col}: {msg}"))
            }
            None => Error::Config(msg),
        }
    })?;
    let mut problems = Vec::new();
    let params = PhysicalParams::new(raw.a_mu, raw.a_rhosigma).map_err(|e| problems.push(e.to_string()));
    if let Err(Error::Config(m)) = raw.integrator.validate() {
        problems.push(m);
    }
    if let InitialData::Modes(modes) = &raw.initial {
        for (k, amp, phase) in modes {
            if *k == 0 {
                problems.push("initial mode k must be >= 1".into());
            } else if *k > raw.integrator.n_max {
                problems.push(format!("initial mode k = {k} exceeds n_max = {}", raw.integrator.n_max));
            }
            if !amp.is_finite() || !phase.is_finite() {
                problems.push(format!("initial mode {k}: amplitude and phase must be finite"));
            }
        }
    }
    let out = &raw.output;
    if out.curve_stride == 0 || out.spectrum_stride == 0 || out.curve_points < 3 {
        problems.push("output strides must be >= 1 and curve_points >= 3".into());
    }
    if !(out.decay_window[0] < out.decay_window[1]) || !(out.drift_tail > 0.0) {
        problems.push("decay_window must be increasing and drift_tail positive".into());
    }
    match params {
        Ok(params) if problems.is_empty() => Ok(RunConfig {
            params,
            integrator: raw.integrator,
            initial: raw.initial,
            output: raw.output,
        }),
        _ => Err(Error::Config(problems.join("; "))),
    }
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    parse_config(&std::fs::read_to_string(path)?)
}

impl RunConfig {
    /// Output directory after applying the environment override.
    pub fn output_dir(&self) -> PathBuf {
        resolve_output(&self.output.dir, std::env::var_os(OUTPUT_ROOT_ENV).map(PathBuf::from))
    }

    /// Back to TOML in the input layout.
    pub fn to_toml(&self) -> String {
        #[derive(Serialize)]
        struct Out<'a> {
            #[serde(rename = "A_mu")]
            a_mu: f64,
            #[serde(rename = "A_rhosigma")]
            a_rhosigma: f64,
            initial: &'a InitialData,
            integrator: &'a IntegratorConfig,
            output: &'a OutputConfig,
        }
        toml::to_string(&Out {
            a_mu: self.params.a_mu,
            a_rhosigma: self.params.a_rhosigma,
            initial: &self.initial,
            integrator: &self.integrator,
            output: &self.output,
        })
        .expect("config serializes")
    }
}

pub fn resolve_output(dir: &Path, root: Option<PathBuf>) -> PathBuf {
    match root {
        Some(root) if dir.is_relative() => root.join(dir),
        _ => dir.to_path_buf(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "A_mu = 0\nA_rhosigma = 1\ninitial = [[2, 0.01, 0.0]]\n";

    #[test]
    fn minimal_defaults() {
        let cfg = parse_config(MINIMAL).unwrap();
        assert_eq!(cfg.integrator.n_max, 128);
        assert_eq!(cfg.integrator.dt, 1e-3);
        assert_eq!(cfg.integrator.t_end, 5.0);
        assert_eq!(cfg.initial, InitialData::Modes(vec![(2, 0.01, 0.0)]));
        assert_eq!(cfg.output.emit.len(), 5);
    }

    #[test]
    fn validation_errors() {
        let e = parse_config("A_mu = 1.5\nA_rhosigma = 1\ninitial = [[2, 0.01, 0.0]]\n").unwrap_err();
        assert!(e.to_string().contains("A_mu"), "{e}");
        let e = parse_config("A_mu = 0\nA_rhosigma = 1\ninitial = [[0, 0.01, 0.0]]\n").unwrap_err();
        assert!(e.to_string().contains("k must be"), "{e}");
        let e = parse_config(&format!("{MINIMAL}[integrator]\ndt = -1.0\n")).unwrap_err();
        assert!(e.to_string().contains("dt"), "{e}");
    }

    #[test]
    fn parse_errors_have_positions() {
        let e = parse_config("A_mu = 0\nA_mu = 0.5\nA_rhosigma = 1\ninitial = [[2, 0.01, 0.0]]\n").unwrap_err();
        assert!(e.to_string().contains("line 2"), "{e}");
        let e = parse_config(&format!("{MINIMAL}bogus = 3\n")).unwrap_err();
        assert!(e.to_string().contains("bogus"), "{e}");
        let e = parse_config(&format!("{MINIMAL}[integrator]\nstep = 3\n")).unwrap_err();
        assert!(e.to_string().contains("line 5"), "{e}");
    }

    #[test]
    fn snapshot_initial_and_roundtrip() {
        let text = "A_mu = -0.5\nA_rhosigma = 2\ninitial = { snapshot = \"state.jsonl\" }\n[integrator]\nscheme = \"rk4-explicit\"\nn_max = 8\ndt = 1e-3\n[output]\nemit = [\"norms\"]\n";
        let cfg = parse_config(text).unwrap();
        assert_eq!(
            cfg.initial,
            InitialData::Snapshot {
                snapshot: "state.jsonl".into()
            }
        );
        assert_eq!(parse_config(&cfg.to_toml()).unwrap(), cfg);
    }

    #[test]
    fn output_root_override() {
        let root = Some(PathBuf::from("/tmp/root"));
        assert_eq!(
            resolve_output(Path::new("out"), root.clone()),
            PathBuf::from("/tmp/root/out")
        );
        assert_eq!(resolve_output(Path::new("/abs"), root), PathBuf::from("/abs"));
        assert_eq!(resolve_output(Path::new("out"), None), PathBuf::from("out"));
    }
}
