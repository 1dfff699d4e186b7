use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;

use super::{run_simulate, write_atomic, ExperimentConfig};
use crate::error::{Error, Result};
use crate::metrics::format_hz;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandwidthRow {
    pub bandwidth_hz: f64,
    pub rf_db: f64,
    pub digital_db: f64,
    pub total_db: f64,
    /// RF cancellation with the reflectors removed, when a circulator is configured.
    pub circulator_only_rf_db: Option<f64>,
}

/// One simulation per bandwidth, plus a circulator-only run. Points run in
/// parallel; rows come back in input order.
pub fn run_sweep_bandwidth(cfg: &ExperimentConfig, bandwidths_hz: &[f64]) -> Result<Vec<BandwidthRow>> {
    if bandwidths_hz.is_empty() {
        return Err(Error::invalid("bw", "empty bandwidth list"));
    }
    bandwidths_hz
        .par_iter()
        .map(|&bw| {
            let mut point = cfg.clone();
            point.signal.bandwidth_hz = bw;
            let sim = run_simulate(&point)?;
            let circulator_only_rf_db = match point.channel.circulator_only() {
                Some(channel) => {
                    let alone = ExperimentConfig {
                        channel,
                        ..point.clone()
                    };
                    Some(run_simulate(&alone)?.report.rf_cancellation_db)
                }
                None => None,
            };
            let r = sim.report;
            Ok(BandwidthRow {
                bandwidth_hz: bw,
                rf_db: r.rf_cancellation_db,
                digital_db: r.digital_cancellation_db,
                total_db: r.total_db,
                circulator_only_rf_db,
            })
        })
        .collect()
}

pub fn bandwidth_csv(rows: &[BandwidthRow]) -> String {
    let mut out = String::from("bw_hz,rf_db,digital_db,total_db,circulator_only_rf_db\n");
    for r in rows {
        let circ = r.circulator_only_rf_db.map_or(String::new(), |v| format!("{v:.2}"));
        let _ = writeln!(
            out,
            "{},{:.2},{:.2},{:.2},{circ}",
            format_hz(r.bandwidth_hz),
            r.rf_db,
            r.digital_db,
            r.total_db
        );
    }
    out
}

pub fn write_bandwidth_csv(rows: &[BandwidthRow], dir: &Path) -> Result<()> {
    write_atomic(&dir.join("sweep_bandwidth.csv"), &bandwidth_csv(rows))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerRow {
    pub tx_power_dbm: f64,
    pub rf_db: f64,
    /// Digital cancellation at the configured order.
    pub digital_db: f64,
    /// Digital cancellation of the signal-only fit.
    pub signal_db: f64,
    /// Extra cancellation from adding the first derivative.
    pub deriv1_db: f64,
    /// Extra cancellation from adding the second derivative.
    pub deriv2_db: f64,
    pub total_db: f64,
    pub total_order1_db: f64,
    pub total_order2_db: f64,
}

/// One simulation per transmit power with everything else fixed.
pub fn run_sweep_power(cfg: &ExperimentConfig, powers_dbm: &[f64]) -> Result<Vec<PowerRow>> {
    if powers_dbm.is_empty() {
        return Err(Error::invalid("dbm", "empty power list"));
    }
    powers_dbm
        .par_iter()
        .map(|&p| {
            let mut point = cfg.clone();
            point.channel.tx_power_dbm = p;
            let sim = run_simulate(&point)?;
            let (r, s) = (sim.report, sim.split);
            Ok(PowerRow {
                tx_power_dbm: p,
                rf_db: r.rf_cancellation_db,
                digital_db: r.digital_cancellation_db,
                signal_db: s.signal_only_db,
                deriv1_db: s.order1_db - s.signal_only_db,
                deriv2_db: s.order2_db - s.order1_db,
                total_db: r.total_db,
                total_order1_db: r.rf_cancellation_db + s.order1_db,
                total_order2_db: r.rf_cancellation_db + s.order2_db,
            })
        })
        .collect()
}

pub fn power_csv(rows: &[PowerRow]) -> String {
    let mut out = String::from(
        "tx_power_dbm,rf_db,digital_db,signal_db,deriv1_db,deriv2_db,total_db,total_order1_db,total_order2_db\n",
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{:.2},{:.2},{:.2},{:.2},{:.2},{:.2},{:.2},{:.2},{:.2}",
            r.tx_power_dbm,
            r.rf_db,
            r.digital_db,
            r.signal_db,
            r.deriv1_db,
            r.deriv2_db,
            r.total_db,
            r.total_order1_db,
            r.total_order2_db
        );
    }
    out
}

pub fn write_power_csv(rows: &[PowerRow], dir: &Path) -> Result<()> {
    write_atomic(&dir.join("sweep_power.csv"), &power_csv(rows))
}
