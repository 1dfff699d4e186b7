//! Thin helpers over `rustfft` shared by the frequency-domain operations.

use num_complex::Complex64;
use rustfft::FftPlanner;

pub(crate) fn forward(buf: &mut [Complex64]) {
    if buf.is_empty() {
        return;
    }
    FftPlanner::new().plan_fft_forward(buf.len()).process(buf);
}

/// Unnormalized inverse transform (caller divides by the length).
pub(crate) fn inverse(buf: &mut [Complex64]) {
    if buf.is_empty() {
        return;
    }
    FftPlanner::new().plan_fft_inverse(buf.len()).process(buf);
}

/// Signed frequency of bin `k` in cycles per sample, in `[-1/2, 1/2)`.
pub(crate) fn bin_freq(k: usize, len: usize) -> f64 {
    if 2 * k < len {
        k as f64 / len as f64
    } else {
        k as f64 / len as f64 - 1.0
    }
}

/// Ideal band-limited interpolation of a periodic sequence by an integer factor.
///
/// The Nyquist bin of an even-length input is split evenly between the
/// positive and negative halves so a real input stays real.
pub(crate) fn interpolate_periodic(x: &[Complex64], factor: usize) -> Vec<Complex64> {
    let len = x.len();
    if factor == 1 || len == 0 {
        return x.to_vec();
    }
    let mut spec = x.to_vec();
    forward(&mut spec);
    let out_len = len * factor;
    let mut padded = vec![Complex64::new(0.0, 0.0); out_len];
    let half = len / 2;
    if len.is_multiple_of(2) {
        padded[..half].copy_from_slice(&spec[..half]);
        padded[out_len - half + 1..].copy_from_slice(&spec[half + 1..]);
        padded[half] = spec[half] * 0.5;
        padded[out_len - half] = spec[half] * 0.5;
    } else {
        padded[..=half].copy_from_slice(&spec[..=half]);
        padded[out_len - half..].copy_from_slice(&spec[half + 1..]);
    }
    inverse(&mut padded);
    let scale = 1.0 / len as f64;
    padded.iter_mut().for_each(|v| *v *= scale);
    padded
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolation_keeps_original_samples() {
        let x: Vec<Complex64> = (0..16)
            .map(|n| Complex64::new((n as f64 * 0.7).sin(), (n as f64 * 0.3).cos()))
            .collect();
        let up = interpolate_periodic(&x, 4);
        assert_eq!(up.len(), 64);
        for (n, v) in x.iter().enumerate() {
            assert!((up[4 * n] - v).norm() < 1e-12);
        }
    }

    #[test]
    fn bin_frequencies_wrap_to_negative_half() {
        assert_eq!(bin_freq(0, 8), 0.0);
        assert_eq!(bin_freq(3, 8), 0.375);
        assert_eq!(bin_freq(4, 8), -0.5);
        assert_eq!(bin_freq(7, 8), -0.125);
    }
}
