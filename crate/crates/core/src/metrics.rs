//! Power ratios, Welch spectra and the residual-slope diagnostic.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft;
use crate::signal::BasebandSignal;

/// Cancellation reported when the residual is exactly zero.
pub const MAX_CANCELLATION_DB: f64 = 200.0;

/// `10 log10(P_before / P_after)`, capped at [`MAX_CANCELLATION_DB`].
pub fn cancellation_db(before: &BasebandSignal, after: &BasebandSignal) -> Result<f64> {
    if before.is_empty() || after.is_empty() {
        return Err(Error::EmptySignal);
    }
    ratio_db(before.mean_power(), after.mean_power())
}

/// Same as [`cancellation_db`] on linear powers.
pub fn ratio_db(before: f64, after: f64) -> Result<f64> {
    if !(before > 0.0 && before.is_finite()) {
        return Err(Error::invalid("before", "reference power must be positive"));
    }
    if after <= 0.0 {
        return Ok(MAX_CANCELLATION_DB);
    }
    Ok((10.0 * (before / after).log10()).min(MAX_CANCELLATION_DB))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Psd {
    pub freqs_hz: Vec<f64>,
    pub power_db: Vec<f64>,
    /// Equivalent noise bandwidth of one bin.
    pub rbw_hz: f64,
}

impl Psd {
    pub fn bin_width_hz(&self) -> f64 {
        if self.freqs_hz.len() < 2 {
            return 0.0;
        }
        self.freqs_hz[1] - self.freqs_hz[0]
    }

    /// `sum PSD * df`, the mean power the spectrum represents.
    pub fn total_power(&self) -> f64 {
        self.power_db.iter().map(|&d| 10f64.powf(d / 10.0)).sum::<f64>() * self.bin_width_hz()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("freq_hz,power_db\n");
        for (f, p) in self.freqs_hz.iter().zip(&self.power_db) {
            out.push_str(&format!("{},{:.2}\n", format_hz(*f), p));
        }
        out
    }
}

/// Hz as an integer when exact, else with enough digits to round-trip.
pub fn format_hz(f: f64) -> String {
    if f.fract() == 0.0 && f.abs() < 1e15 {
        format!("{}", f as i64)
    } else {
        format!("{f}")
    }
}

const PSD_FLOOR_DB: f64 = -300.0;

/// Welch PSD with a periodic Hann window, two-sided, in ascending frequency.
///
/// Normalized so that `sum PSD * fs / segment_len` equals the mean power.
pub fn psd(signal: &BasebandSignal, segment_len: usize, overlap: usize) -> Result<Psd> {
    if segment_len < 2 || !segment_len.is_power_of_two() {
        return Err(Error::invalid(
            "segment_len",
            format!("{segment_len} is not a power of two >= 2"),
        ));
    }
    if segment_len > signal.len() {
        return Err(Error::TooShort {
            needed: segment_len,
            got: signal.len(),
        });
    }
    if overlap >= segment_len {
        return Err(Error::invalid("overlap", "must be smaller than the segment"));
    }
    let n = segment_len;
    let window: Vec<f64> = (0..n)
        .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / n as f64).cos())
        .collect();
    let wpow: f64 = window.iter().map(|w| w * w).sum();
    let hop = n - overlap;
    let fs = signal.sample_rate_hz();
    let mut acc = vec![0.0; n];
    let mut segments = 0usize;
    let mut start = 0;
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    while start + n <= signal.len() {
        for (b, (&x, &w)) in buf
            .iter_mut()
            .zip(signal.samples()[start..start + n].iter().zip(&window))
        {
            *b = x * w;
        }
        fft::forward(&mut buf);
        for (a, v) in acc.iter_mut().zip(&buf) {
            *a += v.norm_sqr();
        }
        segments += 1;
        start += hop;
    }
    let scale = 1.0 / (segments as f64 * fs * wpow);
    let half = n / 2;
    let mut freqs_hz = Vec::with_capacity(n);
    let mut power_db = Vec::with_capacity(n);
    for i in 0..n {
        let k = (i + half) % n;
        freqs_hz.push((i as f64 - half as f64) * fs / n as f64);
        let p = acc[k] * scale;
        power_db.push(if p > 0.0 {
            (10.0 * p.log10()).max(PSD_FLOOR_DB)
        } else {
            PSD_FLOOR_DB
        });
    }
    Ok(Psd {
        freqs_hz,
        power_db,
        rbw_hz: 1.5 * fs / n as f64,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeFit {
    /// Goodness of the amplitude-versus-|f| line.
    pub r2: f64,
    /// Log-log slope of power against |f|.
    pub slope_db_per_decade: f64,
    pub bins: usize,
}

pub const MIN_SLOPE_BINS: usize = 8;

/// Fits PSD amplitude against `|f|` for `band.0 <= |f| <= band.1`.
pub fn slope_diagnostic(p: &Psd, band: (f64, f64)) -> Result<SlopeFit> {
    let (lo, hi) = band;
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::invalid("band", "need 0 < low < high (DC is excluded)"));
    }
    let max_f = p.freqs_hz.iter().fold(0.0f64, |m, f| m.max(f.abs()));
    if hi > max_f {
        return Err(Error::invalid(
            "band",
            format!("upper edge {hi} Hz is beyond the spectrum"),
        ));
    }
    let picked: Vec<(f64, f64)> = p
        .freqs_hz
        .iter()
        .zip(&p.power_db)
        .filter(|(f, _)| (lo..=hi).contains(&f.abs()))
        .map(|(f, d)| (f.abs(), *d))
        .collect();
    if picked.len() < MIN_SLOPE_BINS {
        return Err(Error::invalid(
            "band",
            format!("only {} bins in band, need {MIN_SLOPE_BINS}", picked.len()),
        ));
    }
    let amp: Vec<(f64, f64)> = picked.iter().map(|&(f, d)| (f, 10f64.powf(d / 20.0))).collect();
    let (_, _, r2) = linear_fit(&amp);
    let logs: Vec<(f64, f64)> = picked.iter().map(|&(f, d)| (f.log10(), d)).collect();
    let (slope, _, _) = linear_fit(&logs);
    Ok(SlopeFit {
        r2,
        slope_db_per_decade: slope,
        bins: picked.len(),
    })
}

/// Ordinary least squares `y = a x + b`; returns `(a, b, R^2)`.
fn linear_fit(points: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    let a = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let b = my - a * mx;
    let r2 = if syy > 0.0 && sxx > 0.0 {
        sxy * sxy / (sxx * syy)
    } else {
        0.0
    };
    (a, b, r2)
}

/// Per-stage powers of one run. Powers are in dB relative to 1 mW when the
/// transmit frame has unit power and `G_t` is in mW.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CancellationReport {
    pub tx_power_db: f64,
    pub rf_residual_db: f64,
    pub digital_residual_db: f64,
    pub rf_cancellation_db: f64,
    pub digital_cancellation_db: f64,
    pub total_db: f64,
    /// Mean power of the transmit frame.
    pub signal_power_e_s: f64,
    /// Mean power of its time derivative, in 1/s^2.
    pub derivative_power_e_d: f64,
}

impl CancellationReport {
    /// Builds the report from linear powers so the stage figures add up exactly.
    pub fn from_powers(tx: f64, rf_residual: f64, digital_residual: f64, e_s: f64, e_d: f64) -> Result<Self> {
        let rf_cancellation_db = ratio_db(tx, rf_residual)?;
        let tx_power_db = 10.0 * tx.log10();
        let rf_residual_db = tx_power_db - rf_cancellation_db;
        let digital_residual_db = if digital_residual > 0.0 {
            (10.0 * digital_residual.log10()).max(tx_power_db - MAX_CANCELLATION_DB)
        } else {
            tx_power_db - MAX_CANCELLATION_DB
        };
        let digital_cancellation_db = rf_residual_db - digital_residual_db;
        Ok(CancellationReport {
            tx_power_db,
            rf_residual_db,
            digital_residual_db,
            rf_cancellation_db,
            digital_cancellation_db,
            total_db: rf_cancellation_db + digital_cancellation_db,
            signal_power_e_s: e_s,
            derivative_power_e_d: e_d,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::spectral_derivative;
    use crate::signal::{gen_ofdm, SignalSpec};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn ofdm() -> BasebandSignal {
        gen_ofdm(&SignalSpec::ofdm(20e6)).unwrap()
    }

    fn noise(len: usize, power: f64, seed: u64) -> BasebandSignal {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = Normal::new(0.0, (power / 2.0).sqrt()).unwrap();
        BasebandSignal::new(
            (0..len)
                .map(|_| Complex64::new(d.sample(&mut rng), d.sample(&mut rng)))
                .collect(),
            1e6,
        )
    }

    #[test]
    fn cancellation_ratios() {
        let x = ofdm();
        assert_eq!(cancellation_db(&x, &x).unwrap(), 0.0);
        let tenth = x.scaled(Complex64::new(0.1, 0.0));
        assert!((cancellation_db(&x, &tenth).unwrap() - 20.0).abs() < 1e-9);
        for k in [0.0, 20.0, 40.0] {
            let y = x.scaled(Complex64::new(10f64.powf(-k / 20.0), 0.0));
            assert!((cancellation_db(&x, &y).unwrap() - k).abs() < 1e-9);
        }
        let z = BasebandSignal::zeros(x.len(), x.sample_rate_hz());
        assert_eq!(cancellation_db(&x, &z).unwrap(), MAX_CANCELLATION_DB);
        assert!(cancellation_db(&z, &x).is_err());
    }

    #[test]
    fn tone_is_a_single_peak() {
        let fs = 1e6;
        let f0 = 125e3;
        let x = BasebandSignal::new(
            (0..8192)
                .map(|n| Complex64::from_polar(1.0, 2.0 * PI * f0 * n as f64 / fs))
                .collect(),
            fs,
        );
        let p = psd(&x, 256, 128).unwrap();
        let (imax, _) = p
            .power_db
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |m, (i, &v)| if v > m.1 { (i, v) } else { m });
        assert_eq!(p.freqs_hz[imax], f0);
        let mut sorted = p.power_db.clone();
        sorted.sort_by(f64::total_cmp);
        assert!(p.power_db[imax] - sorted[sorted.len() / 2] >= 40.0);
    }

    #[test]
    fn white_noise_is_flat() {
        let x = noise(64 * 256, 0.3, 5);
        let p = psd(&x, 256, 0).unwrap();
        let level = 10.0 * (0.3 / 1e6f64).log10();
        // 64 averages leave a chi-square spread with sigma near 0.5 dB per bin,
        // so single bins past 1.5 dB are expected among 256.
        let outside = p.power_db.iter().filter(|&&d| (d - level).abs() > 1.5).count();
        assert!(outside * 100 <= p.power_db.len(), "{outside} bins outside 1.5 dB");
        for &d in &p.power_db {
            assert!((d - level).abs() <= 2.5, "{d} vs {level}");
        }
        let mean = p.power_db.iter().map(|d| 10f64.powf(d / 10.0)).sum::<f64>() / p.power_db.len() as f64;
        assert!((10.0 * mean.log10() - level).abs() < 0.1);
    }

    #[test]
    fn parseval_within_one_percent() {
        for x in [ofdm(), noise(50_000, 2.0, 9)] {
            let p = psd(&x, 1024, 512).unwrap();
            assert!((p.total_power() / x.mean_power() - 1.0).abs() <= 0.01);
        }
    }

    #[test]
    fn rotation_does_not_change_psd() {
        let x = ofdm();
        let a = psd(&x, 1024, 512).unwrap();
        let b = psd(&x.scaled(Complex64::from_polar(1.0, 1.1)), 1024, 512).unwrap();
        let peak = a.power_db.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
        for (u, v) in a.power_db.iter().zip(&b.power_db) {
            let (u, v) = (10f64.powf((u - peak) / 10.0), 10f64.powf((v - peak) / 10.0));
            assert!((u - v).abs() < 1e-9);
        }
    }

    #[test]
    fn psd_argument_checks() {
        let x = ofdm();
        assert!(psd(&x, 1000, 0).is_err());
        assert!(psd(&x, 1024, 1024).is_err());
        assert!(psd(&x.slice(0..100), 128, 0).is_err());
    }

    #[test]
    fn derivative_has_linear_amplitude() {
        let spec = SignalSpec::ofdm(20e6);
        let x = gen_ofdm(&spec).unwrap();
        let band = (1e6, 0.95 * spec.occupied_edge_hz());
        let d = psd(&spectral_derivative(&x, 1), 1024, 512).unwrap();
        let fit = slope_diagnostic(&d, band).unwrap();
        assert!(fit.r2 >= 0.95, "{fit:?}");
        assert!((fit.slope_db_per_decade - 20.0).abs() < 2.0, "{fit:?}");
        let flat = slope_diagnostic(&psd(&x, 1024, 512).unwrap(), band).unwrap();
        assert!(flat.slope_db_per_decade.abs() <= 2.0, "{flat:?}");
    }

    #[test]
    fn slope_fit_ignores_scale() {
        let x = ofdm();
        let d = spectral_derivative(&x, 1);
        let band = (1e6, 5e6);
        let a = slope_diagnostic(&psd(&d, 1024, 512).unwrap(), band).unwrap();
        let b = slope_diagnostic(&psd(&d.scaled(Complex64::new(1e-4, 0.0)), 1024, 512).unwrap(), band).unwrap();
        assert!((a.r2 - b.r2).abs() < 1e-9);
        assert!((a.slope_db_per_decade - b.slope_db_per_decade).abs() < 1e-9);
    }

    #[test]
    fn slope_band_checks() {
        let p = psd(&ofdm(), 1024, 512).unwrap();
        assert!(slope_diagnostic(&p, (0.0, 1e6)).is_err());
        assert!(slope_diagnostic(&p, (1e6, 1e9)).is_err());
        assert!(slope_diagnostic(&p, (1e6, 1.05e6)).is_err());
    }

    #[test]
    fn report_accounting_is_exact() {
        let r = CancellationReport::from_powers(10.0, 1e-5, 3e-8, 1.0, 2.0).unwrap();
        assert!(
            (r.tx_power_db - r.rf_cancellation_db - r.digital_cancellation_db - r.digital_residual_db).abs() < 1e-12
        );
        assert!((r.total_db - (r.rf_cancellation_db + r.digital_cancellation_db)).abs() < 1e-12);
        assert!((r.rf_cancellation_db - 60.0).abs() < 1e-9);
    }

    #[test]
    fn csv_uses_two_decimals() {
        let p = psd(&ofdm(), 16, 0).unwrap();
        let csv = p.to_csv();
        let line = csv.lines().nth(1).unwrap();
        let db = line.split(',').nth(1).unwrap();
        assert_eq!(db.split('.').nth(1).unwrap().len(), 2);
        assert!(line.starts_with("-40000000,"));
    }
}
