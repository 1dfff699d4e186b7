//! Brute-force references for checking the main path.
//!
//! Nothing here calls into the FFT helpers, the channel simulator or the
//! derivative filters. Pulse derivatives come from closed forms, delays from a
//! direct time-domain periodic-sinc sum.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::signal::{random_symbols, BasebandSignal, Pulse, SignalSpec};

/// Symbols on each side of the evaluation instant.
pub const ORACLE_HALF_SPAN: usize = 200;

/// Trials per rayon work item. Fixed so results do not depend on thread count.
const CHUNK: usize = 1000;

/// Fine-grid factor of [`resample_delay_reference`].
pub const RESAMPLE_FACTOR: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelayOracleRecord {
    /// `E|x(t - tau) - x(t) + tau x'(t)|^2`.
    pub err_power: f64,
    /// `E|tau x'(t)|^2`.
    pub deriv_power: f64,
}

/// Monte Carlo first-order Taylor remainder of a delayed pulse train.
///
/// Each trial draws `2 * ORACLE_HALF_SPAN + 1` symbols and a uniform instant
/// within one symbol period, then evaluates the train analytically.
pub fn exact_delay_oracle(spec: &SignalSpec, tau_over_t: f64, trials: usize) -> Result<DelayOracleRecord> {
    let (err_power, deriv_power) = remainder_monte_carlo(spec, tau_over_t, trials, 1)?;
    Ok(DelayOracleRecord { err_power, deriv_power })
}

/// Monte Carlo power of the order-`order` Taylor remainder
/// `x(t - tau) - sum_{n <= order} (-tau)^n / n! x^(n)(t)`.
///
/// Order 2 needs second derivatives and is only available for sinc pulses.
pub fn taylor_remainder_oracle(spec: &SignalSpec, tau_over_t: f64, trials: usize, order: usize) -> Result<f64> {
    Ok(remainder_monte_carlo(spec, tau_over_t, trials, order)?.0)
}

fn remainder_monte_carlo(spec: &SignalSpec, tau: f64, trials: usize, order: usize) -> Result<(f64, f64)> {
    if !(1..=2).contains(&order) {
        return Err(Error::invalid("order", "oracle supports orders 1 and 2"));
    }
    if order == 2 && !matches!(spec.pulse, Pulse::Sinc) {
        return Err(Error::invalid("pulse", "second-order oracle needs a sinc pulse"));
    }
    if trials == 0 {
        return Err(Error::invalid("trials", "must be at least 1"));
    }
    if !tau.is_finite() {
        return Err(Error::invalid("tau_over_t", "must be finite"));
    }
    let chunks = trials.div_ceil(CHUNK);
    let partial: Vec<(f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let n = CHUNK.min(trials - c * CHUNK);
            let mut rng =
                ChaCha8Rng::seed_from_u64(spec.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(c as u64));
            let mut err = 0.0;
            let mut der = 0.0;
            for _ in 0..n {
                let symbols = random_symbols(spec.constellation, 2 * ORACLE_HALF_SPAN + 1, &mut rng);
                let t: f64 = rng.random();
                let (e, d) = trial(spec.pulse, &symbols, t, tau, order);
                err += e;
                der += d;
            }
            (err, der)
        })
        .collect();
    let (err, der) = partial.iter().fold((0.0, 0.0), |acc, p| (acc.0 + p.0, acc.1 + p.1));
    Ok((err / trials as f64, der / trials as f64))
}

/// One evaluation at instant `t` (in symbol periods) with symbols centred on index 0.
fn trial(pulse: Pulse, symbols: &[Complex64], t: f64, tau: f64, order: usize) -> (f64, f64) {
    let half = ORACLE_HALF_SPAN as i64;
    let mut delayed = Complex64::new(0.0, 0.0);
    let mut now = [Complex64::new(0.0, 0.0); 3];
    match pulse {
        Pulse::Sinc => {
            let (sd, cd) = (PI * (t - tau)).sin_cos();
            let (s0, c0) = (PI * t).sin_cos();
            for (i, &s) in symbols.iter().enumerate() {
                let n = i as i64 - half;
                let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                delayed += s * sinc_derivs(PI * (t - tau - n as f64), sign * sd, sign * cd)[0];
                let g = sinc_derivs(PI * (t - n as f64), sign * s0, sign * c0);
                for k in 0..=order {
                    now[k] += s * g[k];
                }
            }
        }
        Pulse::Rrc { rolloff } => {
            for (i, &s) in symbols.iter().enumerate() {
                let u = t - (i as i64 - half) as f64;
                delayed += s * rrc_value(u - tau, rolloff);
                now[0] += s * rrc_value(u, rolloff);
                now[1] += s * rrc_slope(u, rolloff);
            }
        }
    }
    let mut model = now[0] - now[1] * tau;
    if order == 2 {
        model += now[2] * (tau * tau / 2.0);
    }
    ((delayed - model).norm_sqr(), (now[1] * tau).norm_sqr())
}

/// `[g, g', g'']` of `g(u) = sin(pi u)/(pi u)` with respect to `u`, given
/// `a = pi u` and its sine and cosine.
fn sinc_derivs(a: f64, sin_a: f64, cos_a: f64) -> [f64; 3] {
    if a.abs() < 0.5 {
        // Series of sin(a)/a and its first two a-derivatives.
        let a2 = a * a;
        let (mut g, mut d1, mut d2) = (1.0, 0.0, 0.0);
        let mut prev = 1.0; // a^(2k-2)
        let mut fact = 1.0; // (2k+1)!
        for k in 1..12 {
            let kk = k as f64;
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            fact *= (2.0 * kk) * (2.0 * kk + 1.0);
            g += sign * prev * a2 / fact;
            d1 += sign * 2.0 * kk * prev * a / fact;
            d2 += sign * 2.0 * kk * (2.0 * kk - 1.0) * prev / fact;
            prev *= a2;
        }
        return [g, PI * d1, PI * PI * d2];
    }
    let g = sin_a / a;
    let d1 = cos_a / a - sin_a / (a * a);
    let d2 = -sin_a / a - 2.0 * cos_a / (a * a) + 2.0 * sin_a / (a * a * a);
    [g, PI * d1, PI * PI * d2]
}

fn rrc_complex(u: Complex64, beta: f64) -> Complex64 {
    let num = (u * (PI * (1.0 - beta))).sin() + u * (4.0 * beta) * (u * (PI * (1.0 + beta))).cos();
    let den = u * PI * (Complex64::new(1.0, 0.0) - (u * (4.0 * beta)).powi(2));
    num / den
}

fn rrc_near_singular(u: f64, beta: f64) -> bool {
    u.abs() < 1e-4 || (beta > 0.0 && (u.abs() - 0.25 / beta).abs() < 1e-4)
}

fn rrc_value(u: f64, beta: f64) -> f64 {
    if rrc_near_singular(u, beta) {
        return 0.5 * (rrc_value(u - 2e-4, beta) + rrc_value(u + 2e-4, beta));
    }
    rrc_complex(Complex64::new(u, 0.0), beta).re
}

/// Complex-step derivative of the RRC closed form.
fn rrc_slope(u: f64, beta: f64) -> f64 {
    const H: f64 = 1e-30;
    if rrc_near_singular(u, beta) {
        return 0.5 * (rrc_slope(u - 2e-4, beta) + rrc_slope(u + 2e-4, beta));
    }
    rrc_complex(Complex64::new(u, H), beta).im / H
}

/// `f(x) = (2 sin x / x^3 - sin x / x - 2 cos x / x^2)^2`, with `f(0) = 1/9`.
pub fn lemma_kernel(x: f64) -> f64 {
    let h = if x.abs() < 0.5 {
        // h(x) = sum_k (-1)^(k+1) x^(2k) [2/(2k+3)! - 2/(2k+2)! + 1/(2k+1)!]
        let x2 = x * x;
        let mut sum = 0.0;
        let mut pow = 1.0;
        let mut f1 = 1.0; // (2k+1)!
        for k in 0..12 {
            let kk = k as f64;
            if k > 0 {
                f1 *= (2.0 * kk) * (2.0 * kk + 1.0);
            }
            let f2 = f1 * (2.0 * kk + 2.0);
            let f3 = f2 * (2.0 * kk + 3.0);
            let sign = if k % 2 == 0 { -1.0 } else { 1.0 };
            sum += sign * pow * (2.0 / f3 - 2.0 / f2 + 1.0 / f1);
            pow *= x2;
        }
        sum
    } else {
        let (s, c) = x.sin_cos();
        2.0 * s / x.powi(3) - s / x - 2.0 * c / (x * x)
    };
    h * h
}

/// The same kernel as `((2 - x^2) sin x - 2 x cos x)^2 / x^6`.
pub fn lemma_kernel_expanded(x: f64) -> f64 {
    let (s, c) = x.sin_cos();
    ((2.0 - x * x) * s - 2.0 * x * c).powi(2) / x.powi(6)
}

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut rule = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        rule.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    rule
}

/// Composite Gauss-Legendre integral of `f` over `[0, upper]` in panels of width `panel`.
fn integrate(f: impl Fn(f64) -> f64 + Sync, upper: f64, panel: f64) -> f64 {
    let rule = gauss_legendre(16);
    let panels = (upper / panel).ceil() as usize;
    let width = upper / panels as f64;
    let sums: Vec<f64> = (0..panels)
        .into_par_iter()
        .map(|p| {
            let mid = (p as f64 + 0.5) * width;
            rule.iter().map(|&(x, w)| w * f(mid + 0.5 * width * x)).sum::<f64>() * 0.5 * width
        })
        .collect();
    sums.iter().sum()
}

const KERNEL_CUTOFF: f64 = 1000.0 * PI;

/// `integral of f over the real line`, by quadrature up to `1000 pi` and the
/// `sin^2 x / x^2` tail beyond.
pub fn kernel_integral() -> f64 {
    2.0 * (integrate(lemma_kernel, KERNEL_CUTOFF, PI / 4.0) + 0.5 / KERNEL_CUTOFF)
}

/// Unitary angular Fourier transform `(2 pi)^-1/2 int f(x) e^{-i w x} dx`.
///
/// `f` is the square of the second derivative of `sin x / x`, whose transform
/// is `-pi w^2` on `|w| <= 1`, so this is a closed-form polynomial supported on `|w| <= 2`.
pub fn kernel_transform_unitary(omega: f64) -> f64 {
    let w = omega.abs();
    if w >= 2.0 {
        return 0.0;
    }
    let antiderivative = |v: f64| w * w * v.powi(3) / 3.0 - w * v.powi(4) / 2.0 + v.powi(5) / 5.0;
    let conv = antiderivative(1.0) - antiderivative(w - 1.0);
    PI / 2.0 * conv / (2.0 * PI).sqrt()
}

/// Numerically evaluated counterpart of [`kernel_transform_unitary`].
pub fn kernel_transform_numeric(omega: f64) -> f64 {
    let body = integrate(|x| lemma_kernel(x) * (omega * x).cos(), KERNEL_CUTOFF, PI / 4.0);
    // sin^2 x cos(w x) / x^2 averages to 1/(2x^2) only when w = 0.
    let tail = if omega == 0.0 { 0.5 / KERNEL_CUTOFF } else { 0.0 };
    2.0 * (body + tail) / (2.0 * PI).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoissonCheck {
    pub delta_over_t: f64,
    pub direct_sum: f64,
    /// `(1/5) sqrt(pi/2) + (2/60) sqrt(pi/2) cos(2 pi delta/T)`.
    pub closed_form: f64,
    pub matches: bool,
}

pub const POISSON_TOLERANCE: f64 = 1e-6;

/// `sum_n f(delta/T - n)` against the periodic closed form.
///
/// Terms with `|n| <= 1000` are summed directly, terms up to `1e6` too, and the
/// rest through their mean `1 / (2 n^2)`.
pub fn poisson_check(delta_over_t: f64) -> PoissonCheck {
    const FAR: i64 = 1_000_000;
    let direct_sum: f64 = (-FAR..=FAR).map(|n| lemma_kernel(delta_over_t - n as f64)).sum::<f64>() + 1.0 / FAR as f64;
    let root = (PI / 2.0).sqrt();
    let closed_form = root / 5.0 + 2.0 / 60.0 * root * (2.0 * PI * delta_over_t).cos();
    PoissonCheck {
        delta_over_t,
        direct_sum,
        closed_form,
        matches: (direct_sum - closed_form).abs() <= POISSON_TOLERANCE,
    }
}

/// Delays a periodic frame by `delay_s` with a direct periodic-sinc sum.
///
/// The interpolation kernel is tabulated on a 64x fine grid, so the delay
/// must be a multiple of `1/64` sample.
pub fn resample_delay_reference(signal: &BasebandSignal, delay_s: f64) -> Result<BasebandSignal> {
    if signal.is_empty() {
        return Err(Error::EmptySignal);
    }
    let fine = delay_s * signal.sample_rate_hz() * RESAMPLE_FACTOR as f64;
    let steps = fine.round();
    if !fine.is_finite() || (fine - steps).abs() > 1e-6 {
        return Err(Error::OffGrid {
            delay_s,
            factor: RESAMPLE_FACTOR,
        });
    }
    let len = signal.len();
    let period = (len * RESAMPLE_FACTOR) as i64;
    let table: Vec<Complex64> = (0..period)
        .map(|i| periodic_sinc(i as f64 / RESAMPLE_FACTOR as f64, len))
        .collect();
    let shift = (steps as i64).rem_euclid(period);
    let x = signal.samples();
    let out: Vec<Complex64> = (0..len)
        .into_par_iter()
        .map(|n| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (m, &v) in x.iter().enumerate() {
                let idx = ((n as i64 - m as i64) * RESAMPLE_FACTOR as i64 - shift).rem_euclid(period);
                acc += v * table[idx as usize];
            }
            acc
        })
        .collect();
    Ok(BasebandSignal::new(out, signal.sample_rate_hz()))
}

/// `(1/L) sum_k e^{j 2 pi k t / L}` over the `L` bins centred on DC, with the
/// extra bin of an even length on the negative side.
fn periodic_sinc(t: f64, len: usize) -> Complex64 {
    let l = len as f64;
    let den = (PI * t / l).sin();
    let mag = if den.abs() < 1e-12 {
        1.0
    } else {
        (PI * t).sin() / (l * den)
    };
    if len.is_multiple_of(2) {
        Complex64::from_polar(mag, -PI * t / l)
    } else {
        Complex64::new(mag, 0.0)
    }
}

/// Re-sums `C_n` tap by tap with an explicit factorial.
pub fn taylor_coeffs_reference(taps: &[(f64, f64)], carrier_hz: f64, order: usize) -> Vec<Complex64> {
    (0..=order)
        .map(|n| {
            let fact: f64 = (1..=n).map(|k| k as f64).product();
            taps.iter()
                .map(|&(a, tau)| {
                    let phase = -2.0 * PI * carrier_hz * tau;
                    Complex64::new(phase.cos(), phase.sin()) * (a * tau.powi(n as i32) / fact)
                })
                .sum()
        })
        .collect()
}

/// Draws a random grid-aligned delay in `[0, max_samples)` samples.
pub fn random_grid_delay(rng: &mut impl Rng, sample_rate_hz: f64, max_samples: usize) -> f64 {
    let steps = rng.random_range(0..max_samples * RESAMPLE_FACTOR);
    steps as f64 / RESAMPLE_FACTOR as f64 / sample_rate_hz
}

/// Text fixture of the oracle's reference numbers.
pub fn fixture_text(trials: usize) -> Result<String> {
    let mut spec = SignalSpec::single_carrier(1.0);
    spec.pulse = Pulse::Sinc;
    spec.seed = 2024;
    let mut out = String::from("# oracle fixture v1\n");
    out.push_str(&format!("trials={trials}\nseed={}\n", spec.seed));
    for &r in TAU_GRID {
        let rec = exact_delay_oracle(&spec, r, trials)?;
        let e2 = taylor_remainder_oracle(&spec, r, trials, 2)?;
        out.push_str(&format!(
            "tau_over_t={r} err_power={:.6e} deriv_power={:.6e} order2_err_power={:.6e}\n",
            rec.err_power, rec.deriv_power, e2
        ));
    }
    out.push_str(&format!("kernel_integral={:.12}\n", kernel_integral()));
    out.push_str(&format!("kernel_transform_0={:.12}\n", kernel_transform_unitary(0.0)));
    out.push_str(&format!("kernel_transform_1={:.12}\n", kernel_transform_unitary(1.0)));
    Ok(out)
}

/// Normalized delays at which the remainder is measured.
pub const TAU_GRID: &[f64] = &[0.001, 0.005, 0.01, 0.05, 0.1];

#[cfg(test)]
mod tests {
    use super::*;

    fn sinc_spec() -> SignalSpec {
        let mut spec = SignalSpec::single_carrier(1.0);
        spec.pulse = Pulse::Sinc;
        spec
    }

    #[test]
    fn sinc_derivatives_match_finite_differences() {
        for &u in &[-3.3, -0.7, -0.1, 0.0, 0.05, 0.2, 0.9, 2.5] {
            let eval = |v: f64| {
                let a = PI * v;
                sinc_derivs(a, a.sin(), a.cos())
            };
            let g = eval(u);
            let h = 1e-5;
            let fd1 = (eval(u + h)[0] - eval(u - h)[0]) / (2.0 * h);
            let fd2 = (eval(u + h)[1] - eval(u - h)[1]) / (2.0 * h);
            assert!((g[1] - fd1).abs() < 1e-7, "u {u}: {} vs {fd1}", g[1]);
            assert!((g[2] - fd2).abs() < 1e-6, "u {u}: {} vs {fd2}", g[2]);
        }
    }

    #[test]
    fn sinc_series_and_closed_form_agree_at_switch() {
        for &a in &[0.499_999_999, -0.499_999_999] {
            let series = sinc_derivs(a, a.sin(), a.cos());
            let b: f64 = a * 1.000_000_01;
            let closed = sinc_derivs(b, b.sin(), b.cos());
            for k in 0..3 {
                assert!((series[k] - closed[k]).abs() < 1e-7);
            }
        }
    }

    #[test]
    fn rrc_slope_matches_finite_difference() {
        for &u in &[-2.1, -0.5, 0.13, 0.83, 1.7] {
            let h = 1e-6;
            let fd = (rrc_value(u + h, 0.3) - rrc_value(u - h, 0.3)) / (2.0 * h);
            assert!((rrc_slope(u, 0.3) - fd).abs() < 1e-7);
        }
    }

    #[test]
    fn zero_delay_has_no_error() {
        let rec = exact_delay_oracle(&sinc_spec(), 0.0, 2000).unwrap();
        assert!(rec.err_power <= 1e-20);
        assert_eq!(rec.deriv_power, 0.0);
    }

    #[test]
    fn oracle_is_reproducible() {
        let a = exact_delay_oracle(&sinc_spec(), 0.05, 3000).unwrap();
        let b = exact_delay_oracle(&sinc_spec(), 0.05, 3000).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn order_two_needs_sinc() {
        let spec = SignalSpec::single_carrier(1.0);
        assert!(taylor_remainder_oracle(&spec, 0.01, 10, 2).is_err());
        assert!(taylor_remainder_oracle(&sinc_spec(), 0.01, 10, 3).is_err());
    }

    #[test]
    fn kernel_limit_at_zero() {
        assert!((lemma_kernel(0.0) - 1.0 / 9.0).abs() < 1e-15);
        assert!((lemma_kernel(1e-3) - lemma_kernel(0.0)).abs() < 1e-6);
    }

    #[test]
    fn kernel_series_matches_closed_form_at_switch() {
        let x: f64 = 0.5;
        let (s, c) = x.sin_cos();
        let direct = (2.0 * s / x.powi(3) - s / x - 2.0 * c / (x * x)).powi(2);
        assert!((lemma_kernel(0.499_999_999_999) - direct).abs() < 1e-12);
    }

    #[test]
    fn kernel_below_inverse_square() {
        for &x in &[1.0, 2.0, 5.0, 10.0] {
            assert!(lemma_kernel(x) <= 1.0 / (x * x));
        }
    }

    #[test]
    fn kernel_two_ways_at_pi() {
        let a = lemma_kernel(PI);
        let b = lemma_kernel_expanded(PI);
        assert!((a - b).abs() <= 1e-14);
        assert!((a - 4.0 / PI.powi(4)).abs() < 1e-14);
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let rule = gauss_legendre(16);
        let w: f64 = rule.iter().map(|p| p.1).sum();
        assert!((w - 2.0).abs() < 1e-14);
        let x30: f64 = rule.iter().map(|&(x, w)| w * x.powi(30)).sum();
        assert!((x30 - 2.0 / 31.0).abs() < 1e-14);
    }

    #[test]
    fn kernel_integral_is_pi_over_five() {
        assert!((kernel_integral() - PI / 5.0).abs() < 1e-6);
    }

    #[test]
    fn unitary_transform_closed_form_matches_quadrature() {
        for &w in &[0.0, 0.5, 1.0, 1.5] {
            let closed = kernel_transform_unitary(w);
            let numeric = kernel_transform_numeric(w);
            assert!((closed - numeric).abs() < 2e-6, "w {w}: {closed} vs {numeric}");
        }
        let root = (PI / 2.0).sqrt();
        assert!((kernel_transform_unitary(0.0) - root / 5.0).abs() < 1e-15);
        assert!((kernel_transform_unitary(1.0) - root / 60.0).abs() < 1e-15);
        assert_eq!(kernel_transform_unitary(2.5), 0.0);
    }

    #[test]
    fn periodic_sum_is_constant() {
        for &d in &[0.0, 0.13, 0.25, 0.5] {
            let check = poisson_check(d);
            assert!((check.direct_sum - PI / 5.0).abs() < 1e-6, "{check:?}");
        }
    }

    #[test]
    fn periodic_sinc_is_a_delta_on_integers() {
        assert!((periodic_sinc(0.0, 16) - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        for k in 1..15 {
            assert!(periodic_sinc(k as f64, 16).norm() < 1e-14);
            assert!(periodic_sinc(k as f64, 15).norm() < 1e-14);
        }
        assert!((periodic_sinc(15.0, 15) - Complex64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn resample_identity_and_integer_shift() {
        let x: Vec<Complex64> = (0..40)
            .map(|n| Complex64::new((0.3 * n as f64).sin(), (0.11 * n as f64).cos()))
            .collect();
        let sig = BasebandSignal::new(x.clone(), 1.0);
        let same = resample_delay_reference(&sig, 0.0).unwrap();
        for (a, b) in same.samples().iter().zip(&x) {
            assert!((a - b).norm() < 1e-12);
        }
        let shifted = resample_delay_reference(&sig, 3.0).unwrap();
        for n in 0..40 {
            assert!((shifted.samples()[n] - x[(n + 37) % 40]).norm() < 1e-12);
        }
    }

    #[test]
    fn resample_rejects_off_grid() {
        let sig = BasebandSignal::new(vec![Complex64::new(1.0, 0.0); 8], 1.0);
        assert!(matches!(
            resample_delay_reference(&sig, 0.3 / 64.0 + 1.0 / 64.0),
            Err(Error::OffGrid { .. })
        ));
    }

    #[test]
    fn reference_coefficients_single_tap() {
        let c = taylor_coeffs_reference(&[(0.5, 2e-9)], 2.4e9, 2);
        assert!((c[1].norm() - 1e-9).abs() < 1e-24);
        assert!((c[2].norm() - 1e-18).abs() < 1e-33);
    }
}
