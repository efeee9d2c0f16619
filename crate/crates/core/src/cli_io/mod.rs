//! Run configuration, orchestration and on-disk formats.

pub mod config;
pub mod output;
pub mod run;
pub mod snapshot;

pub use config::{parse_config, serialize_config, RunConfig};
pub use output::{read_csv, write_csv, RunSummary, CSV_COLUMNS};
pub use run::{run_check_coeffs, run_identities, run_simulate, run_sweep, simulate, RunResult};
pub use snapshot::{read_snapshot, write_snapshot, Snapshot, SNAPSHOT_MAGIC};
