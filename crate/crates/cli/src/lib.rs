//! Library side of the `susyx` binary: run configuration, check suites and
//! report rendering.

pub mod config;
pub mod suites;

pub use config::{NRange, RunConfig};
pub use suites::{CliError, CliResult, Suite};

/// Caps the global worker pool from `SUSYX_THREADS`, if set.
pub fn init_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("SUSYX_THREADS") else { return Ok(()) };
    let k: usize = v.trim().parse().map_err(|_| format!("SUSYX_THREADS must be a positive integer, got {v:?}"))?;
    if k == 0 {
        return Err("SUSYX_THREADS must be at least 1".into());
    }
    rayon::ThreadPoolBuilder::new().num_threads(k).build_global().map_err(|e| e.to_string())
}
