//! Experiment runner: configuration, the full pipeline, sweeps and
//! verification suites.

pub mod config;
pub mod lists;
pub mod report;
mod simulate;
mod sweep;
pub mod verify;

use std::fs;
use std::path::Path;

use crate::error::Result;

pub use config::{ChannelConfig, ExperimentConfig, PathLossSpec, ReceiverConfig, TapSpec};
pub use lists::{parse_bw_list, parse_dbm_range};
pub use report::KeyValues;
pub use simulate::{run_simulate, write_simulation, DigitalSplit, Simulation, Stage};
pub use sweep::{
    bandwidth_csv, power_csv, run_sweep_bandwidth, run_sweep_power, write_bandwidth_csv, write_power_csv, BandwidthRow,
    PowerRow,
};
pub use verify::{run_verify, Check, Suite, Verdict};

/// Writes through a temporary sibling and renames it into place.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)?;
    Ok(())
}
