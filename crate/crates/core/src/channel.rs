//! Ground-truth self-interference channel in the complex-baseband equivalent
//! domain.
//!
//! A tap with amplitude `a` and delay `tau` contributes
//! `a * exp(-j 2 pi f_c tau) * x(t - tau)`; the carrier only enters through
//! that per-tap phase. Delays are applied as frequency-domain phase ramps on
//! the periodic extension of the frame, which is exact for the periodic
//! band-limited frames produced by [`crate::signal`].

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::fft;
use crate::signal::BasebandSignal;

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// `l(x) = min(cap_delta, k_const * x^-alpha)` as a linear power gain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathLossModel {
    pub cap_delta: f64,
    pub k_const: f64,
    pub alpha: f64,
}

impl PathLossModel {
    /// Chooses `k_const` so that `path_loss(reference_m) == reference_db`.
    pub fn calibrated(reference_m: f64, reference_db: f64, alpha: f64, cap_delta: f64) -> Self {
        let k_const = 10f64.powf(reference_db / 10.0) * reference_m.powf(alpha);
        PathLossModel {
            cap_delta,
            k_const,
            alpha,
        }
    }

    pub fn path_loss(&self, distance_m: f64) -> f64 {
        path_loss(self, distance_m)
    }
}

impl Default for PathLossModel {
    /// Round-trip 25 cm (a reflector at 12.5 cm) at -30 dB, fourth-power law,
    /// capped at -20 dB.
    fn default() -> Self {
        PathLossModel::calibrated(0.25, -30.0, 4.0, 0.01)
    }
}

pub fn path_loss(model: &PathLossModel, distance_m: f64) -> f64 {
    if distance_m <= 0.0 {
        return model.cap_delta;
    }
    model.cap_delta.min(model.k_const * distance_m.powf(-model.alpha))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelTap {
    /// Linear amplitude `a_k`.
    pub gain: f64,
    pub delay_s: f64,
}

impl ChannelTap {
    pub fn new(gain: f64, delay_s: f64) -> Self {
        ChannelTap { gain, delay_s }
    }

    /// Tap from a power gain in dB and a delay in nanoseconds.
    pub fn from_db_ns(gain_db: f64, delay_ns: f64) -> Self {
        ChannelTap {
            gain: 10f64.powf(gain_db / 20.0),
            delay_s: delay_ns * 1e-9,
        }
    }

    /// Complex tap weight including the carrier phase.
    pub fn phasor(&self, carrier_hz: f64) -> Complex64 {
        Complex64::from_polar(self.gain, -2.0 * PI * carrier_hz * self.delay_s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultipathChannel {
    taps: Vec<ChannelTap>,
    pub carrier_hz: f64,
    /// Linear transmit power gain `G_t`.
    pub tx_gain: f64,
}

impl MultipathChannel {
    /// Validates the taps and sorts them by non-increasing gain (stable).
    pub fn new(mut taps: Vec<ChannelTap>, carrier_hz: f64, tx_gain: f64) -> Result<Self> {
        if taps.is_empty() {
            return Err(Error::invalid("taps", "channel needs at least one tap"));
        }
        for tap in &taps {
            if !(tap.gain.is_finite() && tap.gain > 0.0) {
                return Err(Error::invalid(
                    "gain",
                    format!("tap gain must be positive, got {}", tap.gain),
                ));
            }
            if !(tap.delay_s.is_finite() && tap.delay_s >= 0.0) {
                return Err(Error::invalid(
                    "delay_s",
                    format!("tap delay must be >= 0, got {}", tap.delay_s),
                ));
            }
        }
        if !(tx_gain.is_finite() && tx_gain > 0.0) {
            return Err(Error::invalid("tx_gain", "must be positive"));
        }
        if !carrier_hz.is_finite() {
            return Err(Error::invalid("carrier_hz", "must be finite"));
        }
        taps.sort_by(|a, b| b.gain.total_cmp(&a.gain));
        Ok(MultipathChannel {
            taps,
            carrier_hz,
            tx_gain,
        })
    }

    pub fn taps(&self) -> &[ChannelTap] {
        &self.taps
    }

    pub fn with_tx_gain(&self, tx_gain: f64) -> Result<Self> {
        Self::new(self.taps.clone(), self.carrier_hz, tx_gain)
    }

    /// Baseband frequency response `sqrt(G_t) * sum a_k e^{-j2pi(f_c+f)tau_k}`.
    pub fn response(&self, freq_hz: f64) -> Complex64 {
        let sum: Complex64 = self
            .taps
            .iter()
            .map(|t| Complex64::from_polar(t.gain, -2.0 * PI * (self.carrier_hz + freq_hz) * t.delay_s))
            .sum();
        sum * self.tx_gain.sqrt()
    }
}

/// Builds a channel from one-way reflector distances plus fixed extra taps
/// such as circulator leakage. Each reflector at `d` gets `tau = 2d/c` and
/// amplitude `sqrt(l(2d))`.
pub fn taps_from_geometry(
    distances_m: &[f64],
    model: &PathLossModel,
    carrier_hz: f64,
    extra_taps: &[ChannelTap],
) -> Result<MultipathChannel> {
    if distances_m.is_empty() && extra_taps.is_empty() {
        return Err(Error::invalid("distances_m", "no reflectors and no extra taps"));
    }
    let mut taps = extra_taps.to_vec();
    for &d in distances_m {
        if !(d.is_finite() && d >= 0.0) {
            return Err(Error::invalid("distances_m", format!("distance must be >= 0, got {d}")));
        }
        let round_trip = 2.0 * d;
        taps.push(ChannelTap::new(
            path_loss(model, round_trip).sqrt(),
            round_trip / SPEED_OF_LIGHT,
        ));
    }
    MultipathChannel::new(taps, carrier_hz, 1.0)
}

/// Largest delay `fractional_delay` accepts, as a fraction of the frame duration.
pub const MAX_DELAY_FRACTION: f64 = 0.1;

/// Delays a periodic frame by `delay_s` with a frequency-domain phase ramp.
pub fn fractional_delay(signal: &BasebandSignal, delay_s: f64) -> Result<BasebandSignal> {
    let limit_s = MAX_DELAY_FRACTION * signal.duration_s();
    if !delay_s.is_finite() || delay_s.abs() > limit_s {
        return Err(Error::DelayOutOfRange { delay_s, limit_s });
    }
    if delay_s == 0.0 {
        return Ok(signal.clone());
    }
    let delay_samples = delay_s * signal.sample_rate_hz();
    Ok(filter_periodic(signal, |f| {
        Complex64::from_polar(1.0, -2.0 * PI * f * delay_samples)
    }))
}

/// Applies a frequency response given in cycles per sample to a periodic frame.
fn filter_periodic(signal: &BasebandSignal, response: impl Fn(f64) -> Complex64) -> BasebandSignal {
    let len = signal.len();
    let mut spec = signal.samples().to_vec();
    fft::forward(&mut spec);
    for (k, v) in spec.iter_mut().enumerate() {
        *v *= response(fft::bin_freq(k, len));
    }
    fft::inverse(&mut spec);
    let scale = 1.0 / len as f64;
    spec.iter_mut().for_each(|v| *v *= scale);
    BasebandSignal::new(spec, signal.sample_rate_hz())
}

/// `order`-th time derivative (per second) of a periodic band-limited frame.
pub fn spectral_derivative(signal: &BasebandSignal, order: u32) -> BasebandSignal {
    if order == 0 || signal.is_empty() {
        return signal.clone();
    }
    let fs = signal.sample_rate_hz();
    filter_periodic(signal, |f| Complex64::new(0.0, 2.0 * PI * f * fs).powu(order))
}

/// The exact baseband self-interference `sqrt(G_t) sum_k a_k e^{-j2pi f_c tau_k} x(t - tau_k)`.
pub fn apply_channel(channel: &MultipathChannel, x: &BasebandSignal) -> Result<BasebandSignal> {
    let fs = x.sample_rate_hz();
    if channel.carrier_hz.abs() < 10.0 * fs {
        return Err(Error::invalid(
            "carrier_hz",
            format!("carrier {} Hz is not >> the {} Hz sample rate", channel.carrier_hz, fs),
        ));
    }
    let limit_s = MAX_DELAY_FRACTION * x.duration_s();
    if let Some(t) = channel.taps().iter().find(|t| t.delay_s > limit_s) {
        return Err(Error::DelayOutOfRange {
            delay_s: t.delay_s,
            limit_s,
        });
    }
    Ok(filter_periodic(x, |f| channel.response(f * fs)))
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ReceiverImpairments {
    /// Linear complex noise power; 0 disables noise.
    pub noise_power: f64,
    /// ADC resolution; 0 means ideal.
    pub adc_bits: u32,
    /// Sampling-phase offset in seconds, within one sample period.
    pub sample_offset: f64,
}

impl ReceiverImpairments {
    pub fn validate(&self, sample_period_s: f64) -> Result<()> {
        if !(self.noise_power.is_finite() && self.noise_power >= 0.0) {
            return Err(Error::invalid("noise_power", "must be >= 0"));
        }
        if self.adc_bits != 0 && !(4..=16).contains(&self.adc_bits) {
            return Err(Error::invalid("adc_bits", "must be 0 (ideal) or within 4..=16"));
        }
        if !(self.sample_offset >= 0.0 && self.sample_offset < sample_period_s) {
            return Err(Error::invalid("sample_offset", "must lie in [0, one sample period)"));
        }
        Ok(())
    }
}

/// ADC full scale as a multiple of the input RMS.
pub const ADC_FULL_SCALE_RMS: f64 = 4.0;

/// Applies sampling offset, then additive white Gaussian noise, then ADC
/// quantization of I and Q.
pub fn impair(rx: &BasebandSignal, imp: &ReceiverImpairments, seed: u64) -> Result<BasebandSignal> {
    imp.validate(rx.sample_period_s())?;
    let mut out = fractional_delay(rx, imp.sample_offset)?;
    if imp.noise_power > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normal = Normal::new(0.0, (imp.noise_power / 2.0).sqrt()).expect("finite sigma");
        out = out.map(|v| v + Complex64::new(normal.sample(&mut rng), normal.sample(&mut rng)));
    }
    if imp.adc_bits > 0 {
        out = quantize(&out, imp.adc_bits);
    }
    Ok(out)
}

fn quantize(signal: &BasebandSignal, bits: u32) -> BasebandSignal {
    let rms = signal.mean_power().sqrt();
    if rms == 0.0 {
        return signal.clone();
    }
    let full_scale = ADC_FULL_SCALE_RMS * rms;
    let step = 2.0 * full_scale / (1u64 << bits) as f64;
    let top = full_scale - step / 2.0;
    let rail = |v: f64| (((v / step).floor() + 0.5) * step).clamp(-top, top);
    signal.map(|v| Complex64::new(rail(v.re), rail(v.im)))
}
