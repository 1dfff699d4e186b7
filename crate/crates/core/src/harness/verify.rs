//! Named invariant suites with a flat text verdict.

use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::channel::{fractional_delay, ChannelTap};
use crate::digital::{filter_response, max_relative_deviation, DerivativeFilter, FilterKind};
use crate::error::{Error, Result};
use crate::linearize::lemma_bound;
use crate::oracle::{
    exact_delay_oracle, kernel_integral, poisson_check, random_grid_delay, resample_delay_reference, TAU_GRID,
};
use crate::signal::{generate, Pulse, SignalSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Lemma,
    Filters,
    OracleDelay,
    Poisson,
}

impl Suite {
    pub const ALL: [Suite; 4] = [Suite::Lemma, Suite::Filters, Suite::OracleDelay, Suite::Poisson];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::Lemma => "lemma",
            Suite::Filters => "filters",
            Suite::OracleDelay => "oracle-delay",
            Suite::Poisson => "poisson",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Suite::ALL.into_iter().find(|x| x.name() == s)
    }
}

/// One measured quantity against its limit.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub limit: String,
    pub pass: bool,
}

impl Check {
    fn at_most(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Check {
            name: name.into(),
            value,
            limit: format!("<= {limit:e}"),
            pass: value <= limit,
        }
    }

    fn within(name: impl Into<String>, value: f64, target: f64, tol: f64) -> Self {
        Check {
            name: name.into(),
            value,
            limit: format!("{target} +- {tol:e}"),
            pass: (value - target).abs() <= tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub suite: Suite,
    pub checks: Vec<Check>,
}

impl Verdict {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    /// `key=value` lines: one `check.<name>` verdict, value and limit per check.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "suite={}", self.suite.name());
        let _ = writeln!(out, "overall={}", pass_word(self.passed()));
        let _ = writeln!(out, "checks={}", self.checks.len());
        let _ = writeln!(out, "failed={}", self.checks.iter().filter(|c| !c.pass).count());
        for c in &self.checks {
            let _ = writeln!(out, "check.{}={}", c.name, pass_word(c.pass));
            let _ = writeln!(out, "value.{}={:.6e}", c.name, c.value);
            let _ = writeln!(out, "limit.{}={}", c.name, c.limit);
        }
        out
    }
}

fn pass_word(p: bool) -> &'static str {
    if p {
        "PASS"
    } else {
        "FAIL"
    }
}

pub const LEMMA_TRIALS: usize = 100_000;
pub const LEMMA_SEED: u64 = 2024;
pub const ORACLE_DELAY_FRAMES: usize = 10;
pub const ORACLE_DELAY_LIMIT_DB: f64 = -100.0;
pub const POISSON_GRID: usize = 100;

pub fn run_verify(suite: Suite) -> Result<Verdict> {
    let checks = match suite {
        Suite::Lemma => lemma_checks(LEMMA_TRIALS)?,
        Suite::Filters => filter_checks()?,
        Suite::OracleDelay => oracle_delay_checks()?,
        Suite::Poisson => poisson_checks(),
    };
    Ok(Verdict { suite, checks })
}

/// Sinc pulse train used by the lemma suite.
pub fn lemma_spec() -> SignalSpec {
    let mut spec = SignalSpec::single_carrier(1.0);
    spec.pulse = Pulse::Sinc;
    spec.seed = LEMMA_SEED;
    spec
}

/// Least-squares slope of `log10 y` against `log10 x`.
pub fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let lx: Vec<f64> = points.iter().map(|p| p.0.log10()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.log10()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

pub fn lemma_checks(trials: usize) -> Result<Vec<Check>> {
    let spec = lemma_spec();
    let measured: Vec<(f64, f64)> = TAU_GRID
        .par_iter()
        .map(|&r| Ok((r, exact_delay_oracle(&spec, r, trials)?.err_power)))
        .collect::<Result<_>>()?;
    let mut checks = Vec::new();
    for &(r, err) in &measured {
        let bound = lemma_bound(&ChannelTap::new(1.0, r), 1.0)?;
        checks.push(Check::at_most(format!("bound_tau_{r}"), err, bound));
    }
    checks.push(Check::within("quartic_slope", log_log_slope(&measured), 4.0, 0.2));
    Ok(checks)
}

/// Band edge, in cycles per sample, of the filter fidelity check.
pub const FILTER_BAND_EDGE: f64 = 0.3;
pub const FILTER_MAX_DEVIATION: f64 = 0.02;

pub fn filter_checks() -> Result<Vec<Check>> {
    let d9 = DerivativeFilter::new(FilterKind::D1Tap9);
    let dev = max_relative_deviation(&d9, FILTER_BAND_EDGE, 600)?;
    let d3 = DerivativeFilter::new(FilterKind::D1Tap3);
    let freqs: Vec<f64> = (0..=500).map(|i| i as f64 * 0.001).collect();
    let resp = filter_response(&d3, &freqs)?;
    let err3 = freqs
        .iter()
        .zip(&resp)
        .map(|(&f, r)| (r - num_complex::Complex64::new(0.0, 2.0 * (2.0 * std::f64::consts::PI * f).sin())).norm())
        .fold(0.0, f64::max);
    Ok(vec![
        Check::at_most("d1_9tap_deviation", dev, FILTER_MAX_DEVIATION),
        Check::at_most("d1_3tap_closed_form", err3, 1e-12),
    ])
}

/// Random frames delayed by the FFT phase ramp and by direct periodic-sinc
/// resampling on the fine grid.
pub fn oracle_delay_checks() -> Result<Vec<Check>> {
    (0..ORACLE_DELAY_FRAMES as u64)
        .into_par_iter()
        .map(|i| {
            let mut spec = SignalSpec::single_carrier(1e6);
            spec.num_symbols = 256;
            spec.seed = 100 + i;
            let x = generate(&spec)?;
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            let max = (x.len() as f64 * crate::channel::MAX_DELAY_FRACTION) as usize;
            let delay = random_grid_delay(&mut rng, x.sample_rate_hz(), max);
            let fast = fractional_delay(&x, delay)?;
            let slow = resample_delay_reference(&x, delay)?;
            let diff: f64 = fast
                .samples()
                .iter()
                .zip(slow.samples())
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                / x.len() as f64;
            let db = 10.0 * (diff / x.mean_power()).max(1e-30).log10();
            Ok(Check::at_most(
                format!("frame_{i}_residual_db"),
                db,
                ORACLE_DELAY_LIMIT_DB,
            ))
        })
        .collect()
}

pub const KERNEL_INTEGRAL_TARGET: f64 = 0.25066;
pub const KERNEL_SUPREMUM_LIMIT: f64 = 0.3;

pub fn poisson_checks() -> Vec<Check> {
    let mut checks = vec![Check::within(
        "kernel_integral",
        kernel_integral(),
        KERNEL_INTEGRAL_TARGET,
        1e-6,
    )];
    let grid: Vec<_> = (0..POISSON_GRID)
        .into_par_iter()
        .map(|i| poisson_check(i as f64 / POISSON_GRID as f64))
        .collect();
    let worst = grid
        .iter()
        .map(|c| (c.direct_sum - c.closed_form).abs())
        .fold(0.0, f64::max);
    checks.push(Check::at_most(
        "closed_form_max_abs_error",
        worst,
        crate::oracle::POISSON_TOLERANCE,
    ));
    let sup = grid.iter().map(|c| c.direct_sum).fold(f64::NEG_INFINITY, f64::max);
    checks.push(Check::at_most("periodic_sum_supremum", sup, KERNEL_SUPREMUM_LIMIT));
    checks
}

impl std::str::FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::parse(s).ok_or_else(|| Error::invalid("suite", format!("unknown suite `{s}`")))
    }
}
