//! Configuration, snapshot persistence, the `run`/`resume`/`verify` commands
//! and their output files.

pub mod config;
pub mod run;
pub mod snapshot;
pub mod verify;

pub use config::{parse_config, Emit, InitialData, OutputConfig, RunConfig, OUTPUT_ROOT_ENV};
pub use run::{resume_command, run_command, RunSummary};
pub use snapshot::SnapshotRecord;
pub use verify::{verify_command, CheckResult, Fault, Level};
