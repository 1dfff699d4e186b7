//! Digital-domain derivative cancellation.
//!
//! The received residual is modeled as `a0 x - c1 x' + c2 x''` where the
//! derivatives come from short FIR differentiators, and the coefficients are
//! estimated by least squares over a training window.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::signal::{BasebandSignal, ZERO};

/// Condition number above which the normal equations are refused.
pub const MAX_CONDITION: f64 = 1e12;

/// Minimum number of fit samples.
pub const MIN_FIT_LEN: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FilterKind {
    D1Tap3,
    D1Tap9,
    D2Tap9,
}

impl FilterKind {
    pub fn name(&self) -> &'static str {
        match self {
            FilterKind::D1Tap3 => "d1_3tap",
            FilterKind::D1Tap9 => "d1_9tap",
            FilterKind::D2Tap9 => "d2_9tap",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "d1_3tap" => Some(FilterKind::D1Tap3),
            "d1_9tap" => Some(FilterKind::D1Tap9),
            "d2_9tap" => Some(FilterKind::D2Tap9),
            _ => None,
        }
    }
}

/// FIR differentiator stored as integer numerators over a common denominator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DerivativeFilter {
    kind: FilterKind,
    numerators: &'static [i64],
    denominator: i64,
}

const D1_3: [i64; 3] = [-1, 0, 1];
const D1_9: [i64; 9] = [3, -32, 168, -672, 0, 672, -168, 32, -3];
const D2_9: [i64; 9] = [1, 4, 4, -4, 10, -4, 4, 4, 1];

impl DerivativeFilter {
    pub fn new(kind: FilterKind) -> Self {
        let (numerators, denominator): (&'static [i64], i64) = match kind {
            FilterKind::D1Tap3 => (&D1_3, 1),
            FilterKind::D1Tap9 => (&D1_9, 840),
            FilterKind::D2Tap9 => (&D2_9, 64),
        };
        DerivativeFilter {
            kind,
            numerators,
            denominator,
        }
    }

    pub fn kind(&self) -> FilterKind {
        self.kind
    }

    pub fn numerators(&self) -> &'static [i64] {
        self.numerators
    }

    pub fn denominator(&self) -> i64 {
        self.denominator
    }

    pub fn taps(&self) -> Vec<f64> {
        self.numerators
            .iter()
            .map(|&n| n as f64 / self.denominator as f64)
            .collect()
    }

    pub fn len(&self) -> usize {
        self.numerators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.numerators.is_empty()
    }

    pub fn half_len(&self) -> usize {
        self.numerators.len() / 2
    }

    /// 1 for the first-derivative kinds, 2 for `d2_9tap`.
    pub fn derivative_order(&self) -> usize {
        match self.kind {
            FilterKind::D1Tap3 | FilterKind::D1Tap9 => 1,
            FilterKind::D2Tap9 => 2,
        }
    }
}

/// `y[n] = sum_m h[m] x[n + m]` with `m` centred on the middle tap and zeros
/// outside the signal. Tap order follows the forward-difference convention,
/// so `[-1, 0, 1]` maps a ramp to `+2`.
pub fn deriv_filter(x: &BasebandSignal, f: &DerivativeFilter) -> Result<BasebandSignal> {
    if x.len() <= f.len() {
        return Err(Error::TooShort {
            needed: f.len() + 1,
            got: x.len(),
        });
    }
    let taps = f.taps();
    let half = f.half_len() as isize;
    let samples = x.samples();
    let len = samples.len() as isize;
    let out = (0..len)
        .map(|n| {
            let mut acc = ZERO;
            for (i, &h) in taps.iter().enumerate() {
                let k = n + i as isize - half;
                if h != 0.0 && (0..len).contains(&k) {
                    acc += samples[k as usize] * h;
                }
            }
            acc
        })
        .collect();
    Ok(BasebandSignal::new(out, x.sample_rate_hz()))
}

/// Complex gain of [`deriv_filter`] on `e^{j 2 pi f n}`, with `f` in cycles per sample.
pub fn filter_response(f: &DerivativeFilter, freqs: &[f64]) -> Result<Vec<Complex64>> {
    let taps = f.taps();
    let half = f.half_len() as f64;
    freqs
        .iter()
        .map(|&nu| {
            if !(0.0..=0.5).contains(&nu) {
                return Err(Error::invalid("freqs", format!("{nu} is outside [0, 0.5]")));
            }
            Ok(taps
                .iter()
                .enumerate()
                .map(|(i, &h)| Complex64::from_polar(h, 2.0 * PI * nu * (i as f64 - half)))
                .sum())
        })
        .collect()
}

/// Worst relative deviation of a first-derivative filter from `j 2 pi f` on
/// `(0, f_max]`, sampled on `points` evenly spaced frequencies.
pub fn max_relative_deviation(f: &DerivativeFilter, f_max: f64, points: usize) -> Result<f64> {
    let grid: Vec<f64> = (1..=points).map(|i| f_max * i as f64 / points as f64).collect();
    let resp = filter_response(f, &grid)?;
    Ok(grid
        .iter()
        .zip(&resp)
        .map(|(&nu, r)| {
            let ideal = Complex64::new(0.0, 2.0 * PI * nu);
            (r - ideal).norm() / ideal.norm()
        })
        .fold(0.0, f64::max))
}

/// Filters used by the digital stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FilterSet {
    pub first: DerivativeFilter,
    pub second: DerivativeFilter,
}

impl Default for FilterSet {
    fn default() -> Self {
        FilterSet {
            first: DerivativeFilter::new(FilterKind::D1Tap9),
            second: DerivativeFilter::new(FilterKind::D2Tap9),
        }
    }
}

impl FilterSet {
    pub fn new(first: FilterKind) -> Result<Self> {
        let first = DerivativeFilter::new(first);
        if first.derivative_order() != 1 {
            return Err(Error::invalid("first", "needs a first-derivative filter"));
        }
        Ok(FilterSet {
            first,
            second: DerivativeFilter::new(FilterKind::D2Tap9),
        })
    }

    /// Samples at each end of a window affected by filter edges.
    pub fn guard(&self) -> usize {
        self.first.half_len().max(self.second.half_len())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LsEstimate {
    pub a0: Complex64,
    pub c1: Complex64,
    pub c2: Option<Complex64>,
    /// Mean residual power on the fit window, in dB.
    pub residual_power_db: f64,
    pub order: usize,
}

impl LsEstimate {
    pub fn zero(order: usize) -> Self {
        LsEstimate {
            a0: ZERO,
            c1: ZERO,
            c2: (order == 2).then_some(ZERO),
            residual_power_db: f64::NEG_INFINITY,
            order,
        }
    }
}

/// Regressors `[x, -x', x'']` up to `order`.
fn basis(x: &BasebandSignal, order: usize, filters: &FilterSet) -> Result<Vec<Vec<Complex64>>> {
    let mut cols = vec![x.samples().to_vec()];
    if order >= 1 {
        let d1 = deriv_filter(x, &filters.first)?;
        cols.push(d1.samples().iter().map(|&v| -v).collect());
    }
    if order >= 2 {
        cols.push(deriv_filter(x, &filters.second)?.into_samples());
    }
    Ok(cols)
}

fn check_pair(y: &BasebandSignal, x: &BasebandSignal) -> Result<()> {
    if y.len() != x.len() {
        return Err(Error::LengthMismatch {
            left: y.len(),
            right: x.len(),
        });
    }
    if y.sample_rate_hz() != x.sample_rate_hz() {
        return Err(Error::RateMismatch {
            left: y.sample_rate_hz(),
            right: x.sample_rate_hz(),
        });
    }
    Ok(())
}

/// Least-squares fit of `y ~ a0 x - c1 x' (+ c2 x'')`.
///
/// Samples within [`FilterSet::guard`] of either end are left out of the fit.
pub fn ls_fit(y: &BasebandSignal, x: &BasebandSignal, order: usize, filters: &FilterSet) -> Result<LsEstimate> {
    if !(1..=2).contains(&order) {
        return Err(Error::invalid(
            "order",
            format!("digital stage supports orders 1 and 2, got {order}"),
        ));
    }
    let (coef, residual_power_db) = fit(y, x, order, filters)?;
    Ok(LsEstimate {
        a0: coef[0],
        c1: coef[1],
        c2: (order == 2).then(|| coef[2]),
        residual_power_db,
        order,
    })
}

/// One-term fit `y ~ a0 x`, used to split the digital gain by term.
pub fn fit_signal_only(y: &BasebandSignal, x: &BasebandSignal, filters: &FilterSet) -> Result<(Complex64, f64)> {
    let (coef, db) = fit(y, x, 0, filters)?;
    Ok((coef[0], db))
}

fn fit(y: &BasebandSignal, x: &BasebandSignal, order: usize, filters: &FilterSet) -> Result<(Vec<Complex64>, f64)> {
    check_pair(y, x)?;
    let guard = filters.guard();
    let needed = MIN_FIT_LEN + 2 * guard;
    if x.len() < needed {
        return Err(Error::TooShort { needed, got: x.len() });
    }
    if x.mean_power() == 0.0 {
        return Err(Error::invalid("x", "reference has zero power"));
    }
    let cols = basis(x, order, filters)?;
    let window = guard..x.len() - guard;
    let p = cols.len();
    let mut gram = vec![vec![ZERO; p]; p];
    let mut rhs = vec![ZERO; p];
    let yv = &y.samples()[window.clone()];
    for i in 0..p {
        let ci = &cols[i][window.clone()];
        rhs[i] = ci.iter().zip(yv).map(|(a, b)| a.conj() * b).sum();
        for j in i..p {
            let cj = &cols[j][window.clone()];
            let g: Complex64 = ci.iter().zip(cj).map(|(a, b)| a.conj() * b).sum();
            gram[i][j] = g;
            gram[j][i] = g.conj();
        }
    }
    let inv = invert_small(&gram)?;
    let coef: Vec<Complex64> = (0..p).map(|i| (0..p).map(|j| inv[i][j] * rhs[j]).sum()).collect();
    let mut err = 0.0;
    for (k, &v) in yv.iter().enumerate() {
        let n = guard + k;
        let model: Complex64 = (0..p).map(|i| coef[i] * cols[i][n]).sum();
        err += (v - model).norm_sqr();
    }
    let residual = err / yv.len() as f64;
    Ok((coef, power_db(residual)))
}

fn power_db(p: f64) -> f64 {
    10.0 * p.log10()
}

/// Adjugate inverse of a 1x1, 2x2 or 3x3 Gram matrix with a 1-norm condition check.
fn invert_small(g: &[Vec<Complex64>]) -> Result<Vec<Vec<Complex64>>> {
    let n = g.len();
    let inv = match n {
        1 => {
            if g[0][0].norm() == 0.0 {
                return Err(Error::IllConditioned { cond: f64::INFINITY });
            }
            vec![vec![g[0][0].inv()]]
        }
        2 => {
            let det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
            if det.norm() == 0.0 {
                return Err(Error::IllConditioned { cond: f64::INFINITY });
            }
            vec![vec![g[1][1] / det, -g[0][1] / det], vec![-g[1][0] / det, g[0][0] / det]]
        }
        3 => {
            let m = |r: usize, c: usize| g[r][c];
            let cof = |r: usize, c: usize| {
                let (r1, r2) = ((r + 1) % 3, (r + 2) % 3);
                let (c1, c2) = ((c + 1) % 3, (c + 2) % 3);
                m(r1, c1) * m(r2, c2) - m(r1, c2) * m(r2, c1)
            };
            let det = m(0, 0) * cof(0, 0) + m(0, 1) * cof(0, 1) + m(0, 2) * cof(0, 2);
            if det.norm() == 0.0 {
                return Err(Error::IllConditioned { cond: f64::INFINITY });
            }
            (0..3).map(|r| (0..3).map(|c| cof(c, r) / det).collect()).collect()
        }
        _ => return Err(Error::invalid("order", "unsupported system size")),
    };
    let cond = norm1(g) * norm1(&inv);
    if !cond.is_finite() || cond > MAX_CONDITION {
        return Err(Error::IllConditioned { cond });
    }
    Ok(inv)
}

fn norm1(m: &[Vec<Complex64>]) -> f64 {
    (0..m.len())
        .map(|c| m.iter().map(|row| row[c].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Model output `a0 x - c1 x' (+ c2 x'')` for an estimate.
pub fn synthesize(x: &BasebandSignal, est: &LsEstimate, filters: &FilterSet) -> Result<BasebandSignal> {
    let order = if est.c2.is_some() { 2 } else { 1 };
    let cols = basis(x, order, filters)?;
    let coef = [est.a0, est.c1, est.c2.unwrap_or(ZERO)];
    let out = (0..x.len())
        .map(|n| (0..cols.len()).map(|i| coef[i] * cols[i][n]).sum())
        .collect();
    Ok(BasebandSignal::new(out, x.sample_rate_hz()))
}

/// `y` minus the reconstructed interference over the whole frame. Callers
/// measure it away from the training window and the filter edges.
pub fn cancel(y: &BasebandSignal, x: &BasebandSignal, est: &LsEstimate, filters: &FilterSet) -> Result<BasebandSignal> {
    check_pair(y, x)?;
    let model = synthesize(x, est, filters)?;
    let out = y.samples().iter().zip(model.samples()).map(|(a, b)| a - b).collect();
    Ok(BasebandSignal::new(out, y.sample_rate_hz()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Complexity {
    /// `4N + 8`
    pub proposed_ops: u64,
    /// `(2L + 4)N + 8`
    pub proposed_with_filter: u64,
    /// `2KN + 2K^2`
    pub tapline_ops: u64,
}

/// Complex operation counts for `N` training samples, an `L`-tap
/// differentiator and a `K`-tap conventional canceller.
pub fn complexity(n: u64, l: u64, k: u64) -> Result<Complexity> {
    if n == 0 || l == 0 || k == 0 {
        return Err(Error::invalid("complexity", "N, L and K must be positive"));
    }
    Ok(Complexity {
        proposed_ops: 4 * n + 8,
        proposed_with_filter: (2 * l + 4) * n + 8,
        tapline_ops: 2 * k * n + 2 * k * k,
    })
}
