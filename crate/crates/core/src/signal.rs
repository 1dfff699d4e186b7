//! Baseband transmit waveforms.
//!
//! Both generators return one period of a periodic, band-limited frame sampled
//! at `oversampling * bandwidth_hz` and normalized to unit mean power. The
//! symbol duration is exactly `1 / bandwidth_hz`. Periodicity lets the channel
//! simulator apply fractional delays exactly in the frequency domain.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fft;

/// Pulse-shaping filters are truncated to this many symbols on each side.
pub const PULSE_HALF_SPAN: usize = 16;

/// Zero sample used throughout the crate.
pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WaveformKind {
    SingleCarrier,
    Ofdm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Constellation {
    Qpsk4,
    Qam16,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Pulse {
    Sinc,
    Rrc { rolloff: f64 },
}

impl Pulse {
    /// Excess-bandwidth factor: 0 for sinc, the roll-off for RRC.
    pub fn rolloff(&self) -> f64 {
        match *self {
            Pulse::Sinc => 0.0,
            Pulse::Rrc { rolloff } => rolloff,
        }
    }

    /// Pulse value at `u` symbol durations from its center (peak value 1 for sinc).
    pub fn eval(&self, u: f64) -> f64 {
        match *self {
            Pulse::Sinc => sinc(u),
            Pulse::Rrc { rolloff } => rrc(u, rolloff),
        }
    }
}

/// Normalized sinc, `sin(pi u) / (pi u)`.
pub fn sinc(u: f64) -> f64 {
    if u.abs() < 1e-12 {
        1.0
    } else {
        let a = PI * u;
        a.sin() / a
    }
}

/// Root-raised-cosine impulse response with time in symbol durations.
pub fn rrc(u: f64, beta: f64) -> f64 {
    if beta <= 0.0 {
        return sinc(u);
    }
    if u.abs() < 1e-12 {
        return 1.0 - beta + 4.0 * beta / PI;
    }
    let edge = 1.0 / (4.0 * beta);
    if (u.abs() - edge).abs() < 1e-9 {
        let a = PI / (4.0 * beta);
        return beta / 2f64.sqrt() * ((1.0 + 2.0 / PI) * a.sin() + (1.0 - 2.0 / PI) * a.cos());
    }
    let num = (PI * u * (1.0 - beta)).sin() + 4.0 * beta * u * (PI * u * (1.0 + beta)).cos();
    let den = PI * u * (1.0 - (4.0 * beta * u).powi(2));
    num / den
}

/// Parameters of a generated transmit frame.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalSpec {
    pub kind: WaveformKind,
    pub bandwidth_hz: f64,
    pub oversampling: usize,
    /// Data symbols for single-carrier, OFDM symbols for OFDM.
    pub num_symbols: usize,
    pub constellation: Constellation,
    pub pulse: Pulse,
    pub ofdm_fft_size: usize,
    pub ofdm_used_carriers: usize,
    pub seed: u64,
}

impl SignalSpec {
    /// 1024-point OFDM with 620 used carriers, QPSK, 4x oversampling.
    pub fn ofdm(bandwidth_hz: f64) -> Self {
        SignalSpec {
            kind: WaveformKind::Ofdm,
            bandwidth_hz,
            oversampling: 4,
            num_symbols: 32,
            constellation: Constellation::Qpsk4,
            pulse: Pulse::Sinc,
            ofdm_fft_size: 1024,
            ofdm_used_carriers: 620,
            seed: 1,
        }
    }

    /// 4-QAM single carrier with an RRC(0.3) pulse, 4x oversampling.
    pub fn single_carrier(bandwidth_hz: f64) -> Self {
        SignalSpec {
            kind: WaveformKind::SingleCarrier,
            bandwidth_hz,
            oversampling: 4,
            num_symbols: 4096,
            constellation: Constellation::Qpsk4,
            pulse: Pulse::Rrc { rolloff: 0.3 },
            ofdm_fft_size: 1024,
            ofdm_used_carriers: 620,
            seed: 1,
        }
    }

    pub fn symbol_period_s(&self) -> f64 {
        1.0 / self.bandwidth_hz
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.oversampling as f64 * self.bandwidth_hz
    }

    /// One-sided edge of the occupied band in Hz.
    pub fn occupied_edge_hz(&self) -> f64 {
        match self.kind {
            WaveformKind::SingleCarrier => 0.5 * self.bandwidth_hz * (1.0 + self.pulse.rolloff()),
            WaveformKind::Ofdm => {
                let upper = self.ofdm_used_carriers.div_ceil(2);
                upper as f64 * self.bandwidth_hz / self.ofdm_fft_size as f64
            }
        }
    }

    /// One-sided edge of the part of the band where the spectrum is flat.
    pub fn flat_edge_hz(&self) -> f64 {
        match self.kind {
            WaveformKind::SingleCarrier => 0.5 * self.bandwidth_hz * (1.0 - self.pulse.rolloff()),
            WaveformKind::Ofdm => self.occupied_edge_hz(),
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.bandwidth_hz.is_finite() && self.bandwidth_hz > 0.0) {
            return Err(Error::invalid("bandwidth_hz", "must be positive"));
        }
        if self.oversampling == 0 {
            return Err(Error::invalid("oversampling", "must be at least 1"));
        }
        if self.num_symbols == 0 {
            return Err(Error::invalid("num_symbols", "must be at least 1"));
        }
        Ok(())
    }
}

/// Uniformly sampled complex baseband sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct BasebandSignal {
    samples: Vec<Complex64>,
    sample_rate_hz: f64,
    mean_power: f64,
}

impl BasebandSignal {
    pub fn new(samples: Vec<Complex64>, sample_rate_hz: f64) -> Self {
        let mean_power = mean_power(&samples);
        BasebandSignal {
            samples,
            sample_rate_hz,
            mean_power,
        }
    }

    pub fn zeros(len: usize, sample_rate_hz: f64) -> Self {
        Self::new(vec![ZERO; len], sample_rate_hz)
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn sample_period_s(&self) -> f64 {
        1.0 / self.sample_rate_hz
    }

    /// Linear `E|x|^2` over all samples.
    pub fn mean_power(&self) -> f64 {
        self.mean_power
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate_hz
    }

    pub fn scaled(&self, gain: Complex64) -> Self {
        self.map(|v| v * gain)
    }

    pub fn map(&self, mut f: impl FnMut(Complex64) -> Complex64) -> Self {
        Self::new(self.samples.iter().map(|&v| f(v)).collect(), self.sample_rate_hz)
    }

    /// Copy of samples `range`, keeping the rate.
    pub fn slice(&self, range: std::ops::Range<usize>) -> Self {
        Self::new(self.samples[range].to_vec(), self.sample_rate_hz)
    }

    /// Rescale to unit mean power. A zero signal is returned unchanged.
    pub fn normalized(self) -> Self {
        if self.mean_power <= 0.0 {
            return self;
        }
        let scale = 1.0 / self.mean_power.sqrt();
        let rate = self.sample_rate_hz;
        Self::new(self.samples.into_iter().map(|v| v * scale).collect(), rate)
    }
}

pub(crate) fn mean_power(samples: &[Complex64]) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    samples.iter().map(|v| v.norm_sqr()).sum::<f64>() / samples.len() as f64
}

/// Draws `count` unit-energy constellation points.
pub fn random_symbols(constellation: Constellation, count: usize, rng: &mut impl Rng) -> Vec<Complex64> {
    (0..count)
        .map(|_| match constellation {
            Constellation::Qpsk4 => {
                let i = if rng.random::<bool>() { 1.0 } else { -1.0 };
                let q = if rng.random::<bool>() { 1.0 } else { -1.0 };
                Complex64::new(i, q) * FRAC_1_SQRT_2
            }
            Constellation::Qam16 => {
                let level = |k: u32| 2.0 * k as f64 - 3.0;
                let i = level(rng.random_range(0..4));
                let q = level(rng.random_range(0..4));
                Complex64::new(i, q) / 10f64.sqrt()
            }
        })
        .collect()
}

/// Circularly pulse-shapes `symbols` at `oversampling` samples per symbol.
///
/// Symbol `m` is centered on sample `m * oversampling`; pulse tails wrap
/// around the frame so the output is one period of a periodic signal.
pub fn shape_symbols(symbols: &[Complex64], pulse: Pulse, oversampling: usize) -> Vec<Complex64> {
    let period = symbols.len() * oversampling;
    let mut out = vec![ZERO; period];
    if period == 0 {
        return out;
    }
    let span = (PULSE_HALF_SPAN * oversampling) as isize;
    let taps: Vec<f64> = (-span..=span)
        .map(|j| pulse.eval(j as f64 / oversampling as f64))
        .collect();
    for (m, &s) in symbols.iter().enumerate() {
        let center = (m * oversampling) as isize;
        for (j, &h) in (-span..=span).zip(&taps) {
            let n = (center + j).rem_euclid(period as isize) as usize;
            out[n] += s * h;
        }
    }
    out
}

pub fn gen_single_carrier(spec: &SignalSpec) -> Result<BasebandSignal> {
    if spec.kind != WaveformKind::SingleCarrier {
        return Err(Error::invalid("kind", "gen_single_carrier needs a single-carrier spec"));
    }
    spec.validate()?;
    match spec.pulse {
        Pulse::Sinc if spec.oversampling < 2 => {
            return Err(Error::invalid(
                "oversampling",
                "sinc pulses need at least 2 samples per symbol",
            ))
        }
        Pulse::Rrc { rolloff } if !(0.0..=1.0).contains(&rolloff) => {
            return Err(Error::invalid("rolloff", "must lie in [0, 1]"))
        }
        _ => {}
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let symbols = random_symbols(spec.constellation, spec.num_symbols, &mut rng);
    let samples = shape_symbols(&symbols, spec.pulse, spec.oversampling);
    Ok(BasebandSignal::new(samples, spec.sample_rate_hz()).normalized())
}

/// FFT bins carrying data: `1..=ceil(U/2)` and the `floor(U/2)` bins just below DC.
pub fn ofdm_used_bins(fft_size: usize, used: usize) -> Vec<usize> {
    let upper = used.div_ceil(2);
    let lower = used / 2;
    let mut bins: Vec<usize> = (1..=upper).collect();
    bins.extend((fft_size - lower)..fft_size);
    bins
}

/// Cyclic prefix length for a given FFT size.
pub fn ofdm_cp_len(fft_size: usize) -> usize {
    fft_size / 8
}

/// Modulates OFDM symbols given as full FFT-bin vectors, then interpolates the
/// whole frame by `oversampling`.
pub fn modulate_ofdm(bins_per_symbol: &[Vec<Complex64>], fft_size: usize, oversampling: usize) -> Vec<Complex64> {
    let cp = ofdm_cp_len(fft_size);
    let mut frame = Vec::with_capacity(bins_per_symbol.len() * (fft_size + cp));
    for bins in bins_per_symbol {
        let mut sym = bins.clone();
        sym.resize(fft_size, ZERO);
        fft::inverse(&mut sym);
        frame.extend_from_slice(&sym[fft_size - cp..]);
        frame.extend_from_slice(&sym);
    }
    fft::interpolate_periodic(&frame, oversampling)
}

pub fn gen_ofdm(spec: &SignalSpec) -> Result<BasebandSignal> {
    if spec.kind != WaveformKind::Ofdm {
        return Err(Error::invalid("kind", "gen_ofdm needs an OFDM spec"));
    }
    spec.validate()?;
    let n = spec.ofdm_fft_size;
    if n < 8 || !n.is_power_of_two() {
        return Err(Error::invalid("ofdm_fft_size", "must be a power of two >= 8"));
    }
    let used = spec.ofdm_used_carriers;
    if used == 0 || used >= n {
        return Err(Error::invalid("ofdm_used_carriers", "must satisfy 0 < used < fft_size"));
    }
    // Keep the Nyquist bin and at least one edge bin on each side empty.
    if used.div_ceil(2) >= n / 2 - 1 {
        return Err(Error::invalid(
            "ofdm_used_carriers",
            "leaves no null carriers at the band edge",
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let bins = ofdm_used_bins(n, used);
    let symbols: Vec<Vec<Complex64>> = (0..spec.num_symbols)
        .map(|_| {
            let data = random_symbols(spec.constellation, bins.len(), &mut rng);
            let mut full = vec![ZERO; n];
            for (&k, d) in bins.iter().zip(data) {
                full[k] = d;
            }
            full
        })
        .collect();
    let samples = modulate_ofdm(&symbols, n, spec.oversampling);
    Ok(BasebandSignal::new(samples, spec.sample_rate_hz()).normalized())
}

/// Dispatches on `spec.kind`.
pub fn generate(spec: &SignalSpec) -> Result<BasebandSignal> {
    match spec.kind {
        WaveformKind::SingleCarrier => gen_single_carrier(spec),
        WaveformKind::Ofdm => gen_ofdm(spec),
    }
}

/// Peak-to-average power ratio in dB.
pub fn papr_db(signal: &BasebandSignal) -> Result<f64> {
    if signal.is_empty() {
        return Err(Error::EmptySignal);
    }
    let peak = signal.samples().iter().map(|v| v.norm_sqr()).fold(0.0, f64::max);
    if signal.mean_power() == 0.0 {
        return Ok(0.0);
    }
    Ok(10.0 * (peak / signal.mean_power()).log10())
}
