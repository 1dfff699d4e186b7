//! RF cancellation stage: a quantized I/Q vector modulator driven by a
//! coordinate-descent search on a true-RMS power detector reading.

use std::fmt::Write as _;

use num_complex::Complex64;

use crate::channel::{apply_channel, MultipathChannel};
use crate::error::{Error, Result};
use crate::signal::BasebandSignal;

pub const DEFAULT_VM_BITS: u32 = 16;
pub const MAX_VM_BITS: u32 = 30;

/// Detector windows shorter than this many symbols are rejected.
pub const MIN_WINDOW_SYMBOLS: usize = 64;

/// Vector-modulator setting `g1 + j g2`.
///
/// Each arm is an integer code in `[-(2^(bits-1) - 1), 2^(bits-1) - 1]`
/// scaled to `[-1, 1]`, so 0 and both rails are exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VmState {
    k1: i64,
    k2: i64,
    bits: u32,
}

impl VmState {
    /// Rounds `g1`, `g2` to the nearest level.
    pub fn new(g1: f64, g2: f64, bits: u32) -> Result<Self> {
        check_bits(bits)?;
        for (name, g) in [("g1", g1), ("g2", g2)] {
            if !(g.is_finite() && (-1.0..=1.0).contains(&g)) {
                return Err(Error::invalid(name, format!("must lie in [-1, 1], got {g}")));
            }
        }
        let top = Self::max_code(bits) as f64;
        Ok(VmState {
            k1: (g1 * top).round() as i64,
            k2: (g2 * top).round() as i64,
            bits,
        })
    }

    pub fn from_codes(k1: i64, k2: i64, bits: u32) -> Result<Self> {
        check_bits(bits)?;
        let top = Self::max_code(bits);
        if k1.abs() > top || k2.abs() > top {
            return Err(Error::invalid("codes", format!("codes must lie within +-{top}")));
        }
        Ok(VmState { k1, k2, bits })
    }

    pub fn zero(bits: u32) -> Result<Self> {
        Self::from_codes(0, 0, bits)
    }

    pub fn max_code(bits: u32) -> i64 {
        (1i64 << (bits - 1)) - 1
    }

    pub fn codes(&self) -> (i64, i64) {
        (self.k1, self.k2)
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    /// Spacing between adjacent levels.
    pub fn step(&self) -> f64 {
        1.0 / Self::max_code(self.bits) as f64
    }

    pub fn g1(&self) -> f64 {
        self.k1 as f64 * self.step()
    }

    pub fn g2(&self) -> f64 {
        self.k2 as f64 * self.step()
    }

    pub fn gain(&self) -> Complex64 {
        Complex64::new(self.g1(), self.g2())
    }

    pub fn beta(&self) -> f64 {
        self.gain().norm()
    }

    pub fn theta(&self) -> f64 {
        self.gain().arg()
    }
}

fn check_bits(bits: u32) -> Result<()> {
    if !(2..=MAX_VM_BITS).contains(&bits) {
        return Err(Error::invalid(
            "vm_bits",
            format!("must lie in 2..={MAX_VM_BITS}, got {bits}"),
        ));
    }
    Ok(())
}

pub fn vm_apply(state: &VmState, tapped: &BasebandSignal) -> BasebandSignal {
    tapped.scaled(state.gain())
}

pub fn combine(si: &BasebandSignal, vm_out: &BasebandSignal) -> Result<BasebandSignal> {
    if si.len() != vm_out.len() {
        return Err(Error::LengthMismatch {
            left: si.len(),
            right: vm_out.len(),
        });
    }
    if si.sample_rate_hz() != vm_out.sample_rate_hz() {
        return Err(Error::RateMismatch {
            left: si.sample_rate_hz(),
            right: vm_out.sample_rate_hz(),
        });
    }
    let out = si.samples().iter().zip(vm_out.samples()).map(|(a, b)| a + b).collect();
    Ok(BasebandSignal::new(out, si.sample_rate_hz()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DetectorConfig {
    /// Integration window in samples.
    pub window_samples: usize,
}

impl DetectorConfig {
    /// Checks the window against [`MIN_WINDOW_SYMBOLS`].
    pub fn new(window_samples: usize, samples_per_symbol: f64) -> Result<Self> {
        let min = (MIN_WINDOW_SYMBOLS as f64 * samples_per_symbol).ceil() as usize;
        if window_samples < min {
            return Err(Error::invalid(
                "window_samples",
                format!("{window_samples} is shorter than {MIN_WINDOW_SYMBOLS} symbols ({min} samples)"),
            ));
        }
        Ok(DetectorConfig { window_samples })
    }
}

/// `2 * mean|r|^2` over the last `window_samples` samples.
pub fn power_detect(residual: &BasebandSignal, cfg: &DetectorConfig) -> Result<f64> {
    let w = cfg.window_samples;
    if w == 0 {
        return Err(Error::invalid("window_samples", "must be positive"));
    }
    if residual.len() < w {
        return Err(Error::TooShort {
            needed: w,
            got: residual.len(),
        });
    }
    let tail = &residual.samples()[residual.len() - w..];
    Ok(2.0 * tail.iter().map(|v| v.norm_sqr()).sum::<f64>() / w as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TunePoint {
    /// Detector evaluations spent when this state was accepted.
    pub iteration: usize,
    pub g1: f64,
    pub g2: f64,
    pub detector_db: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TuneResult {
    pub state: VmState,
    /// Linear readings at the initial and every accepted state.
    pub detector_readings: Vec<f64>,
    pub trace: Vec<TunePoint>,
    /// Detector evaluations used.
    pub iterations: usize,
    /// True when the step fell below one level before the budget ran out.
    pub converged: bool,
}

impl TuneResult {
    pub fn final_reading(&self) -> f64 {
        *self
            .detector_readings
            .last()
            .expect("initial reading is always recorded")
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("iteration,g1,g2,detector_db\n");
        for p in &self.trace {
            let _ = writeln!(out, "{},{:.9},{:.9},{:.2}", p.iteration, p.g1, p.g2, p.detector_db);
        }
        out
    }
}

/// Floor applied when converting detector readings to dB.
pub const DB_FLOOR: f64 = -300.0;

pub fn to_db(p: f64) -> f64 {
    if p > 0.0 {
        (10.0 * p.log10()).max(DB_FLOOR)
    } else {
        DB_FLOOR
    }
}

/// Coordinate descent over the VM codes.
///
/// Each sweep tries `+step` then `-step` on g1 and then on g2, moving on the
/// first improvement. A sweep without improvement halves the step; the
/// search ends when the step drops below one code or after `budget`
/// detector evaluations, including the initial one.
pub fn tune(mut env: impl FnMut(&VmState) -> f64, init: VmState, budget: i64) -> Result<TuneResult> {
    if budget <= 0 {
        return Err(Error::invalid("budget", "must be positive"));
    }
    let budget = budget as usize;
    let bits = init.bits();
    let top = VmState::max_code(bits);
    let mut best = init;
    let mut best_reading = env(&best);
    let mut evals = 1;
    let mut readings = vec![best_reading];
    let mut trace = vec![point(0, &best, best_reading)];
    let mut step: i64 = 1i64 << bits.saturating_sub(2);
    let mut converged = false;
    'search: loop {
        let mut improved = false;
        for axis in 0..2 {
            for dir in [1i64, -1] {
                let (mut k1, mut k2) = best.codes();
                if axis == 0 {
                    k1 = (k1 + dir * step).clamp(-top, top);
                } else {
                    k2 = (k2 + dir * step).clamp(-top, top);
                }
                if (k1, k2) == best.codes() {
                    continue;
                }
                if evals >= budget {
                    break 'search;
                }
                let candidate = VmState::from_codes(k1, k2, bits)?;
                let reading = env(&candidate);
                evals += 1;
                if reading < best_reading {
                    best = candidate;
                    best_reading = reading;
                    readings.push(reading);
                    trace.push(point(evals, &best, reading));
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            step /= 2;
            if step < 1 {
                converged = true;
                break;
            }
        }
    }
    Ok(TuneResult {
        state: best,
        detector_readings: readings,
        trace,
        iterations: evals,
        converged,
    })
}

fn point(iteration: usize, s: &VmState, reading: f64) -> TunePoint {
    TunePoint {
        iteration,
        g1: s.g1(),
        g2: s.g2(),
        detector_db: to_db(reading),
    }
}

/// Tunes the VM against the channel output for training frame `x` and
/// returns the residual under the best state.
///
/// The VM is fed the noiseless transmit tap `sqrt(G_t) x`.
pub fn rf_stage(
    x: &BasebandSignal,
    channel: &MultipathChannel,
    vm_bits: u32,
    detector: &DetectorConfig,
    budget: i64,
) -> Result<(BasebandSignal, TuneResult)> {
    let si = apply_channel(channel, x)?;
    let tapped = x.scaled(Complex64::new(channel.tx_gain.sqrt(), 0.0));
    if si.len() < detector.window_samples {
        return Err(Error::TooShort {
            needed: detector.window_samples,
            got: si.len(),
        });
    }
    let env = |s: &VmState| {
        combine(&si, &vm_apply(s, &tapped))
            .and_then(|r| power_detect(&r, detector))
            .expect("lengths and window checked above")
    };
    let result = tune(env, VmState::zero(vm_bits)?, budget)?;
    let residual = combine(&si, &vm_apply(&result.state, &tapped))?;
    Ok((residual, result))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::ChannelTap;
    use crate::linearize::taylor_coeffs;
    use crate::signal::{gen_ofdm, SignalSpec};

    fn ofdm(bw: f64, symbols: usize) -> BasebandSignal {
        let mut spec = SignalSpec::ofdm(bw);
        spec.num_symbols = symbols;
        gen_ofdm(&spec).unwrap()
    }

    fn whole(x: &BasebandSignal) -> DetectorConfig {
        DetectorConfig {
            window_samples: x.len(),
        }
    }

    #[test]
    fn quantization_levels() {
        let s = VmState::new(1.0, -1.0, 16).unwrap();
        assert_eq!(s.g1(), 1.0);
        assert_eq!(s.g2(), -1.0);
        let z = VmState::new(0.0, 0.0, 16).unwrap();
        assert_eq!(z.gain(), Complex64::new(0.0, 0.0));
        let q = VmState::new(0.123456, 0.5, 8).unwrap();
        assert!((q.g1() - 0.123456).abs() <= q.step() / 2.0);
        assert!(VmState::new(1.2, 0.0, 16).is_err());
        assert!(VmState::new(0.0, 0.0, 1).is_err());
        assert!(VmState::from_codes(200, 0, 8).is_err());
    }

    #[test]
    fn polar_view() {
        let s = VmState::new(0.0, 0.5, 16).unwrap();
        assert!((s.theta() - std::f64::consts::FRAC_PI_2).abs() < 1e-4);
        assert!((s.beta() - 0.5).abs() <= s.step());
    }

    #[test]
    fn identity_and_quarter_turn() {
        let x = ofdm(1e6, 2);
        let id = vm_apply(&VmState::new(1.0, 0.0, 16).unwrap(), &x);
        assert_eq!(id.samples(), x.samples());
        let j = vm_apply(&VmState::new(0.0, 1.0, 16).unwrap(), &x);
        for (a, b) in j.samples().iter().zip(x.samples()) {
            assert!((a - b * Complex64::i()).norm() < 1e-15);
        }
    }

    #[test]
    fn negated_c0_nulls_single_tap() {
        let x = ofdm(1e6, 4);
        let ch = MultipathChannel::new(vec![ChannelTap::new(0.125, 0.2e-9)], 2.395e9, 1.0).unwrap();
        let si = apply_channel(&ch, &x).unwrap();
        let c0 = taylor_coeffs(&ch, 0).unwrap().c(0);
        let s = VmState::new(-c0.re, -c0.im, 16).unwrap();
        let r = combine(&si, &vm_apply(&s, &x)).unwrap();
        assert!(10.0 * (r.mean_power() / si.mean_power()).log10() <= -60.0);
    }

    #[test]
    fn combine_rules() {
        let x = ofdm(1e6, 2);
        let neg = x.scaled(Complex64::new(-1.0, 0.0));
        assert!(combine(&x, &neg).unwrap().mean_power() == 0.0);
        let zero = BasebandSignal::zeros(x.len(), x.sample_rate_hz());
        assert_eq!(combine(&x, &zero).unwrap().samples(), x.samples());
        assert!(combine(&x, &x.slice(0..10)).is_err());
    }

    #[test]
    fn independent_powers_add() {
        let a = ofdm(20e6, 32);
        let mut spec = SignalSpec::ofdm(20e6);
        spec.seed = 99;
        let b = gen_ofdm(&spec).unwrap().scaled(Complex64::new(0.5, 0.0));
        assert!(a.len() >= 100_000);
        let sum = combine(&a, &b).unwrap();
        let db = 10.0 * (sum.mean_power() / (a.mean_power() + b.mean_power())).log10();
        assert!(db.abs() <= 0.5, "{db}");
    }

    #[test]
    fn detector_conventions() {
        let x = ofdm(1e6, 4);
        let cfg = whole(&x);
        assert_eq!(power_detect(&BasebandSignal::zeros(x.len(), 1.0), &cfg).unwrap(), 0.0);
        assert!((power_detect(&x, &cfg).unwrap() - 2.0).abs() < 1e-12);
        let c0 = Complex64::new(0.1, -0.05);
        let s = VmState::new(-0.08, 0.01, 16).unwrap();
        let r = x.scaled(c0 + s.gain());
        let expected = 2.0 * (c0 + s.gain()).norm_sqr();
        assert!((power_detect(&r, &cfg).unwrap() / expected - 1.0).abs() <= 0.02);
        assert!(power_detect(&x.slice(0..10), &cfg).is_err());
    }

    #[test]
    fn window_must_span_64_symbols() {
        assert!(DetectorConfig::new(255, 4.0).is_err());
        assert!(DetectorConfig::new(256, 4.0).is_ok());
    }

    #[test]
    fn bowl_converges_to_grid_minimum() {
        let target = VmState::from_codes(1234, -777, 12).unwrap();
        let bowl = |s: &VmState| (s.gain() - target.gain()).norm_sqr();
        let r = tune(bowl, VmState::zero(12).unwrap(), 10_000).unwrap();
        assert_eq!(r.state, target);
        assert!(r.converged);
        for w in r.detector_readings.windows(2) {
            assert!(w[1] <= w[0]);
        }
    }

    #[test]
    fn constant_env_keeps_init() {
        let init = VmState::from_codes(5, -3, 10).unwrap();
        let r = tune(|_| 1.0, init, 1000).unwrap();
        assert_eq!(r.state, init);
        assert!(r.converged);
        assert_eq!(r.detector_readings, vec![1.0]);
        assert!(r.iterations <= 1 + 4 * 9);
    }

    #[test]
    fn budget_is_respected() {
        let target = VmState::from_codes(100, 100, 16).unwrap();
        let mut calls = 0;
        let r = tune(
            |s| {
                calls += 1;
                (s.gain() - target.gain()).norm_sqr()
            },
            VmState::zero(16).unwrap(),
            7,
        )
        .unwrap();
        assert_eq!(calls, 7);
        assert_eq!(r.iterations, 7);
        assert!(!r.converged);
        assert!(tune(|_| 0.0, VmState::zero(8).unwrap(), 0).is_err());
    }

    #[test]
    fn single_tap_stage_hits_quantization_floor() {
        let x = ofdm(1e6, 4);
        let ch = MultipathChannel::new(vec![ChannelTap::new(0.125, 0.2e-9)], 2.395e9, 1.0).unwrap();
        let (_, r) = rf_stage(&x, &ch, 16, &whole(&x), 2000).unwrap();
        let untuned = r.detector_readings[0];
        assert!(10.0 * (r.final_reading() / untuned).log10() <= -60.0);
    }

    #[test]
    fn csv_trace_format() {
        let r = tune(|s| s.g1().powi(2), VmState::from_codes(3, 0, 4).unwrap(), 50).unwrap();
        let csv = r.to_csv();
        assert!(csv.starts_with("iteration,g1,g2,detector_db\n0,"));
        assert_eq!(csv.lines().count(), r.trace.len() + 1);
    }
}
