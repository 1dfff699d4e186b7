use std::ops::Range;
use std::path::Path;

use num_complex::Complex64;

use super::report::KeyValues;
use super::{write_atomic, ExperimentConfig};
use crate::channel::{apply_channel, impair, spectral_derivative};
use crate::digital::{cancel, fit_signal_only, ls_fit, LsEstimate};
use crate::error::{Error, Result};
use crate::linearize::{total_error_budget, ErrorBudget};
use crate::metrics::{psd, ratio_db, slope_diagnostic, CancellationReport, Psd, SlopeFit};
use crate::rf::{rf_stage, TuneResult};
use crate::signal::{generate, BasebandSignal};

/// Point in the chain a spectrum is taken at.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    /// Interference at the receiver before any cancellation.
    Pre,
    /// What the receiver digitizes after the RF stage.
    Rf,
    /// After the digital stage, on the evaluation window.
    Digital,
}

impl Stage {
    pub fn name(&self) -> &'static str {
        match self {
            Stage::Pre => "pre",
            Stage::Rf => "rf",
            Stage::Digital => "digital",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "pre" => Some(Stage::Pre),
            "rf" => Some(Stage::Rf),
            "digital" => Some(Stage::Digital),
            _ => None,
        }
    }

    pub const ALL: [Stage; 3] = [Stage::Pre, Stage::Rf, Stage::Digital];
}

/// Digital cancellation in dB reached by fits of increasing order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DigitalSplit {
    pub signal_only_db: f64,
    pub order1_db: f64,
    pub order2_db: f64,
}

#[derive(Debug, Clone)]
pub struct Simulation {
    pub report: CancellationReport,
    pub estimate: LsEstimate,
    pub tune: TuneResult,
    pub split: DigitalSplit,
    /// `None` when the band holds too few PSD bins.
    pub rf_slope: Option<SlopeFit>,
    pub budget_order1: ErrorBudget,
    pub budget_order2: ErrorBudget,
    /// Samples the digital figures are measured on.
    pub eval_window: Range<usize>,
    pub spectra: [Psd; 3],
}

impl Simulation {
    pub fn spectrum(&self, stage: Stage) -> &Psd {
        &self.spectra[stage as usize]
    }

    /// Final residual power relative to the transmit power.
    pub fn residual_over_tx_db(&self) -> f64 {
        self.report.digital_residual_db - self.report.tx_power_db
    }

    pub fn to_key_values(&self, cfg: &ExperimentConfig) -> KeyValues {
        let r = &self.report;
        let mut kv = KeyValues::new();
        kv.push("seed", cfg.seed);
        kv.push("bandwidth_hz", crate::metrics::format_hz(cfg.signal.bandwidth_hz));
        kv.push_db("tx_power_dbm", cfg.channel.tx_power_dbm);
        kv.push_db("tx_power_db", r.tx_power_db);
        kv.push_db("rf_residual_db", r.rf_residual_db);
        kv.push_db("digital_residual_db", r.digital_residual_db);
        kv.push_db("rf_cancellation_db", r.rf_cancellation_db);
        kv.push_db("digital_cancellation_db", r.digital_cancellation_db);
        kv.push_db("total_db", r.total_db);
        kv.push_db("residual_over_tx_db", self.residual_over_tx_db());
        kv.push("signal_power_e_s", format!("{:.6e}", r.signal_power_e_s));
        kv.push("derivative_power_e_d", format!("{:.6e}", r.derivative_power_e_d));
        kv.push("digital_order", self.estimate.order);
        let e = &self.estimate;
        push_complex(&mut kv, "ls_a0", e.a0);
        push_complex(&mut kv, "ls_c1", e.c1);
        if let Some(c2) = e.c2 {
            push_complex(&mut kv, "ls_c2", c2);
        }
        kv.push_db("ls_fit_residual_db", e.residual_power_db);
        kv.push_db("digital_signal_only_db", self.split.signal_only_db);
        kv.push_db("digital_order1_db", self.split.order1_db);
        kv.push_db("digital_order2_db", self.split.order2_db);
        let (k1, k2) = self.tune.state.codes();
        kv.push("vm_bits", self.tune.state.bits());
        kv.push("vm_code_g1", k1);
        kv.push("vm_code_g2", k2);
        kv.push_db("vm_beta_db", 20.0 * self.tune.state.beta().max(1e-15).log10());
        kv.push("vm_theta_rad", format!("{:.6}", self.tune.state.theta()));
        kv.push("tune_evaluations", self.tune.detector_readings.len());
        kv.push("tune_iterations", self.tune.iterations);
        kv.push("tune_converged", self.tune.converged);
        kv.push_db("detector_final_db", crate::rf::to_db(self.tune.final_reading()));
        match self.rf_slope {
            Some(s) => {
                kv.push("rf_slope_r2", format!("{:.4}", s.r2));
                kv.push("rf_slope_db_per_decade", format!("{:.2}", s.slope_db_per_decade));
                kv.push("rf_slope_bins", s.bins);
            }
            None => kv.push("rf_slope_r2", "none"),
        }
        kv.push_db("budget_order1_db", self.budget_order1.total_db());
        kv.push_db("budget_order2_db", self.budget_order2.total_db());
        kv.push("budget_guaranteed", self.budget_order1.guaranteed);
        kv.push("eval_start", self.eval_window.start);
        kv.push("eval_end", self.eval_window.end);
        kv
    }
}

fn push_complex(kv: &mut KeyValues, key: &str, v: Complex64) {
    kv.push(&format!("{key}_re"), format!("{:.9e}", v.re));
    kv.push(&format!("{key}_im"), format!("{:.9e}", v.im));
}

/// Welch segment for a record of `len` samples.
fn segment_for(len: usize) -> usize {
    let mut seg = 4096;
    while seg > 64 && seg * 32 > len {
        seg /= 2;
    }
    seg
}

fn spectrum_of(x: &BasebandSignal) -> Result<Psd> {
    let seg = segment_for(x.len());
    psd(x, seg, seg / 2)
}

fn power(x: &BasebandSignal, window: &Range<usize>) -> f64 {
    x.slice(window.clone()).mean_power()
}

/// Runs generate, channel, RF stage, receiver impairments and the digital
/// stage, then measures every stage.
pub fn run_simulate(cfg: &ExperimentConfig) -> Result<Simulation> {
    cfg.validate().map_err(|e| e.at_stage("config"))?;
    let x = generate(&cfg.signal).map_err(|e| e.at_stage("generate"))?;
    let channel = cfg.channel.build().map_err(|e| e.at_stage("channel"))?;
    let si = apply_channel(&channel, &x).map_err(|e| e.at_stage("channel"))?;

    let detector = cfg.detector().map_err(|e| e.at_stage("rf"))?;
    let (rf_residual, tune) =
        rf_stage(&x, &channel, cfg.vm_bits, &detector, cfg.tune_budget).map_err(|e| e.at_stage("rf"))?;

    let fs = x.sample_rate_hz();
    let rx = impair(&rf_residual, &cfg.receiver.impairments(fs), cfg.seed ^ 0x0005_EED0_FA0C)
        .map_err(|e| e.at_stage("impair"))?;

    let filters = cfg.filters();
    let guard = filters.guard();
    let train = 0..cfg.train_len;
    let eval_window = cfg.train_len + guard..x.len() - guard;
    let (y_t, x_t) = (rx.slice(train.clone()), x.slice(train));
    let digital = |e: Error| e.at_stage("digital");

    let fit_of = |order: usize| -> Result<(LsEstimate, BasebandSignal)> {
        let est = ls_fit(&y_t, &x_t, order, &filters)?;
        let out = cancel(&rx, &x, &est, &filters)?;
        Ok((est, out))
    };
    let (est1, out1) = fit_of(1).map_err(digital)?;
    let (est2, out2) = fit_of(2).map_err(digital)?;
    let (a0, db0) = fit_signal_only(&y_t, &x_t, &filters).map_err(digital)?;
    let est0 = LsEstimate {
        a0,
        residual_power_db: db0,
        ..LsEstimate::zero(1)
    };
    let out0 = cancel(&rx, &x, &est0, &filters).map_err(digital)?;

    let rx_power = power(&rx, &eval_window);
    let split = DigitalSplit {
        signal_only_db: ratio_db(rx_power, power(&out0, &eval_window)).map_err(digital)?,
        order1_db: ratio_db(rx_power, power(&out1, &eval_window)).map_err(digital)?,
        order2_db: ratio_db(rx_power, power(&out2, &eval_window)).map_err(digital)?,
    };
    let (estimate, out) = if cfg.digital_order == 1 {
        (est1, out1)
    } else {
        (est2, out2)
    };

    let g = cfg.channel.tx_gain();
    let e_s = power(&x, &eval_window);
    let e_d = power(&spectral_derivative(&x, 1), &eval_window);
    let report = CancellationReport::from_powers(g * e_s, rx_power, power(&out, &eval_window), e_s, e_d)
        .map_err(|e| e.at_stage("metrics"))?;

    let t = cfg.signal.symbol_period_s();
    let budget = |order| total_error_budget(&channel, t, order, cfg.signal.pulse).map_err(|e| e.at_stage("metrics"));
    let (budget_order1, budget_order2) = (budget(1)?, budget(2)?);

    let metrics = |e: Error| e.at_stage("metrics");
    let rf_psd = spectrum_of(&rx).map_err(metrics)?;
    let edge = cfg.signal.flat_edge_hz();
    let rf_slope = slope_diagnostic(&rf_psd, (0.1 * edge, 0.9 * edge)).ok();
    let spectra = [
        spectrum_of(&si).map_err(metrics)?,
        rf_psd,
        spectrum_of(&out.slice(eval_window.clone())).map_err(metrics)?,
    ];

    Ok(Simulation {
        report,
        estimate,
        tune,
        split,
        rf_slope,
        budget_order1,
        budget_order2,
        eval_window,
        spectra,
    })
}

/// Writes `pre.csv`, `rf.csv`, `digital.csv`, `tune.csv` and `report.txt`.
pub fn write_simulation(sim: &Simulation, cfg: &ExperimentConfig, dir: &Path) -> Result<()> {
    for stage in Stage::ALL {
        write_atomic(
            &dir.join(format!("{}.csv", stage.name())),
            &sim.spectrum(stage).to_csv(),
        )?;
    }
    write_atomic(&dir.join("tune.csv"), &sim.tune.to_csv())?;
    write_atomic(&dir.join("report.txt"), &sim.to_key_values(cfg).to_text())
}
