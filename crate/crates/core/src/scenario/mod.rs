//! Scenario runner: run configurations, the snapshot format, and the
//! orchestration that turns a configuration into CSV traces, snapshots and a
//! JSON summary.

mod config;
mod run;
mod snapshot;

pub use config::{parse_config, EngineSelect, RunConfig};
pub use run::{run_scenario, CheckResult, RunArtifacts};
pub use snapshot::{Snapshot, MAGIC};
