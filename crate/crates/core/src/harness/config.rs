//! Experiment configuration and its `[section]` / `key = value` text form.

use std::fmt::Write as _;
use std::path::PathBuf;

use crate::channel::{taps_from_geometry, ChannelTap, MultipathChannel, PathLossModel, ReceiverImpairments};
use crate::digital::{FilterKind, FilterSet};
use crate::error::{Error, Result};
use crate::rf::{DetectorConfig, DEFAULT_VM_BITS};
use crate::signal::{Constellation, Pulse, SignalSpec, WaveformKind};

/// Tap given as power gain in dB and delay in ns.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TapSpec {
    pub gain_db: f64,
    pub delay_ns: f64,
}

impl TapSpec {
    pub fn to_tap(self) -> ChannelTap {
        ChannelTap::from_db_ns(self.gain_db, self.delay_ns)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathLossSpec {
    pub reference_m: f64,
    pub reference_db: f64,
    pub alpha: f64,
    pub cap_db: f64,
}

impl Default for PathLossSpec {
    fn default() -> Self {
        PathLossSpec {
            reference_m: 0.25,
            reference_db: -30.0,
            alpha: 4.0,
            cap_db: -20.0,
        }
    }
}

impl PathLossSpec {
    pub fn model(&self) -> PathLossModel {
        PathLossModel::calibrated(
            self.reference_m,
            self.reference_db,
            self.alpha,
            10f64.powf(self.cap_db / 10.0),
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelConfig {
    pub carrier_hz: f64,
    pub tx_power_dbm: f64,
    pub circulator: Option<TapSpec>,
    pub taps: Vec<TapSpec>,
    /// One-way reflector distances.
    pub reflectors_m: Vec<f64>,
    pub pathloss: PathLossSpec,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        ChannelConfig {
            carrier_hz: 2.395e9,
            tx_power_dbm: 0.0,
            circulator: Some(TapSpec {
                gain_db: -18.0,
                delay_ns: 0.5,
            }),
            taps: Vec::new(),
            reflectors_m: vec![0.125, 0.3],
            pathloss: PathLossSpec::default(),
        }
    }
}

impl ChannelConfig {
    /// Linear `G_t` in mW.
    pub fn tx_gain(&self) -> f64 {
        10f64.powf(self.tx_power_dbm / 10.0)
    }

    pub fn build(&self) -> Result<MultipathChannel> {
        let mut fixed: Vec<ChannelTap> = self.circulator.iter().map(|t| t.to_tap()).collect();
        fixed.extend(self.taps.iter().map(|t| t.to_tap()));
        let ch = taps_from_geometry(&self.reflectors_m, &self.pathloss.model(), self.carrier_hz, &fixed)?;
        ch.with_tx_gain(self.tx_gain())
    }

    /// The same channel with only the circulator leakage.
    pub fn circulator_only(&self) -> Option<ChannelConfig> {
        self.circulator.map(|c| ChannelConfig {
            circulator: Some(c),
            taps: Vec::new(),
            reflectors_m: Vec::new(),
            ..self.clone()
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ReceiverConfig {
    /// Thermal noise in dBm; `None` is noiseless.
    pub noise_dbm: Option<f64>,
    pub adc_bits: u32,
    /// Sampling offset as a fraction of one sample period.
    pub sample_offset: f64,
}

impl ReceiverConfig {
    pub fn impairments(&self, sample_rate_hz: f64) -> ReceiverImpairments {
        ReceiverImpairments {
            noise_power: self.noise_dbm.map_or(0.0, |d| 10f64.powf(d / 10.0)),
            adc_bits: self.adc_bits,
            sample_offset: self.sample_offset / sample_rate_hz,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub signal: SignalSpec,
    pub channel: ChannelConfig,
    pub receiver: ReceiverConfig,
    pub vm_bits: u32,
    pub tune_budget: i64,
    /// Detector window in samples; 0 integrates over the whole frame.
    pub detector_window: usize,
    pub digital_order: usize,
    pub train_len: usize,
    pub filter: FilterKind,
    pub output_dir: PathBuf,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            signal: SignalSpec::ofdm(20e6),
            channel: ChannelConfig::default(),
            receiver: ReceiverConfig::default(),
            vm_bits: DEFAULT_VM_BITS,
            tune_budget: 2000,
            detector_window: 0,
            digital_order: 2,
            train_len: 4096,
            filter: FilterKind::D1Tap9,
            output_dir: PathBuf::from("out"),
            seed: 1,
        }
    }
}

/// Smallest oversampling factor the digital differentiators accept.
pub const MIN_DIGITAL_OVERSAMPLING: usize = 4;

impl ExperimentConfig {
    /// Default 10 MHz single-carrier scenario.
    pub fn single_carrier() -> Self {
        ExperimentConfig {
            signal: SignalSpec::single_carrier(10e6),
            ..Default::default()
        }
    }

    pub fn filters(&self) -> FilterSet {
        FilterSet::new(self.filter).expect("filter kind checked at parse time")
    }

    /// Samples in one generated frame.
    pub fn frame_len(&self) -> usize {
        let s = &self.signal;
        match s.kind {
            WaveformKind::SingleCarrier => s.num_symbols * s.oversampling,
            WaveformKind::Ofdm => {
                s.num_symbols * (s.ofdm_fft_size + crate::signal::ofdm_cp_len(s.ofdm_fft_size)) * s.oversampling
            }
        }
    }

    pub fn detector(&self) -> Result<DetectorConfig> {
        let window = if self.detector_window == 0 {
            self.frame_len()
        } else {
            self.detector_window
        };
        if window > self.frame_len() {
            return Err(Error::invalid("window", "detector window is longer than the frame"));
        }
        DetectorConfig::new(window, self.signal.oversampling as f64)
    }

    pub fn validate(&self) -> Result<()> {
        if self.signal.oversampling < MIN_DIGITAL_OVERSAMPLING {
            return Err(Error::invalid(
                "oversampling",
                format!("digital differentiation needs at least {MIN_DIGITAL_OVERSAMPLING}x"),
            ));
        }
        if !(1..=2).contains(&self.digital_order) {
            return Err(Error::invalid("order", "must be 1 or 2"));
        }
        if self.tune_budget <= 0 {
            return Err(Error::invalid("budget", "must be positive"));
        }
        self.detector()?;
        let guard = self.filters().guard();
        let min_train = crate::digital::MIN_FIT_LEN + 2 * guard;
        if self.train_len < min_train {
            return Err(Error::invalid("train_len", format!("must be at least {min_train}")));
        }
        if self.train_len + 2 * guard + crate::digital::MIN_FIT_LEN > self.frame_len() {
            return Err(Error::invalid("train_len", "leaves too few samples to evaluate on"));
        }
        let fs = self.signal.sample_rate_hz();
        self.receiver.impairments(fs).validate(1.0 / fs)?;
        crate::rf::VmState::zero(self.vm_bits)?;
        self.channel.build()?;
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        let mut parser = Parser::default();
        for (idx, raw) in text.lines().enumerate() {
            parser.line = idx + 1;
            parser.feed(&mut cfg, raw)?;
        }
        parser.finish(&mut cfg);
        Ok(cfg)
    }

    pub fn to_text(&self) -> String {
        let s = &self.signal;
        let mut out = String::new();
        let _ = writeln!(
            out,
            "[run]\nseed = {}\noutput_dir = {}\n",
            self.seed,
            self.output_dir.display()
        );
        let _ = writeln!(out, "[signal]");
        let _ = writeln!(out, "kind = {}", kind_name(s.kind));
        let _ = writeln!(out, "bandwidth_hz = {}", s.bandwidth_hz);
        let _ = writeln!(out, "oversampling = {}", s.oversampling);
        let _ = writeln!(out, "num_symbols = {}", s.num_symbols);
        let _ = writeln!(out, "constellation = {}", constellation_name(s.constellation));
        match s.pulse {
            Pulse::Sinc => {
                let _ = writeln!(out, "pulse = sinc");
            }
            Pulse::Rrc { rolloff } => {
                let _ = writeln!(out, "pulse = rrc\nrolloff = {rolloff}");
            }
        }
        let _ = writeln!(
            out,
            "fft_size = {}\nused_carriers = {}\n",
            s.ofdm_fft_size, s.ofdm_used_carriers
        );
        let c = &self.channel;
        let _ = writeln!(
            out,
            "[channel]\ncarrier_hz = {}\ntx_power_dbm = {}",
            c.carrier_hz, c.tx_power_dbm
        );
        match c.circulator {
            Some(t) => {
                let _ = writeln!(out, "circulator = {} {}", t.gain_db, t.delay_ns);
            }
            None => {
                let _ = writeln!(out, "circulator = none");
            }
        }
        for t in &c.taps {
            let _ = writeln!(out, "tap = {} {}", t.gain_db, t.delay_ns);
        }
        for d in &c.reflectors_m {
            let _ = writeln!(out, "reflector_m = {d}");
        }
        if c.reflectors_m.is_empty() {
            let _ = writeln!(out, "reflector_m = none");
        }
        let p = &c.pathloss;
        let _ = writeln!(
            out,
            "\n[pathloss]\nreference_m = {}\nreference_db = {}\nalpha = {}\ncap_db = {}\n",
            p.reference_m, p.reference_db, p.alpha, p.cap_db
        );
        let r = &self.receiver;
        let noise = r.noise_dbm.map_or("none".to_string(), |d| d.to_string());
        let _ = writeln!(
            out,
            "[receiver]\nnoise_dbm = {noise}\nadc_bits = {}\nsample_offset = {}\n",
            r.adc_bits, r.sample_offset
        );
        let _ = writeln!(
            out,
            "[rf]\nvm_bits = {}\nbudget = {}\nwindow = {}\n",
            self.vm_bits, self.tune_budget, self.detector_window
        );
        let _ = writeln!(
            out,
            "[digital]\norder = {}\ntrain_len = {}\nfilter = {}",
            self.digital_order,
            self.train_len,
            self.filter.name()
        );
        out
    }
}

fn kind_name(k: WaveformKind) -> &'static str {
    match k {
        WaveformKind::Ofdm => "ofdm",
        WaveformKind::SingleCarrier => "single-carrier",
    }
}

fn constellation_name(c: Constellation) -> &'static str {
    match c {
        Constellation::Qpsk4 => "qpsk4",
        Constellation::Qam16 => "qam16",
    }
}

#[derive(Default)]
struct Parser {
    line: usize,
    section: Option<String>,
    seen: Vec<(String, String)>,
    taps: Option<Vec<TapSpec>>,
    reflectors: Option<Vec<f64>>,
    pulse: Option<String>,
    rolloff: Option<f64>,
}

impl Parser {
    fn err(&self, reason: impl Into<String>) -> Error {
        Error::Config {
            line: self.line,
            reason: reason.into(),
        }
    }

    fn feed(&mut self, cfg: &mut ExperimentConfig, raw: &str) -> Result<()> {
        let text = raw.split('#').next().unwrap_or("").trim();
        if text.is_empty() {
            return Ok(());
        }
        if let Some(rest) = text.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| self.err("section header is missing `]`"))?
                .trim();
            if !["run", "signal", "channel", "pathloss", "receiver", "rf", "digital"].contains(&name) {
                return Err(self.err(format!("unknown section `{name}`")));
            }
            self.section = Some(name.to_string());
            return Ok(());
        }
        let (key, value) = text.split_once('=').ok_or_else(|| self.err("expected `key = value`"))?;
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() {
            return Err(self.err("empty key"));
        }
        let section = self
            .section
            .clone()
            .ok_or_else(|| self.err("key outside of any section"))?;
        let repeatable = section == "channel" && (key == "tap" || key == "reflector_m");
        if !repeatable {
            let id = (section.clone(), key.to_string());
            if self.seen.contains(&id) {
                return Err(self.err(format!("duplicate key `{key}` in [{section}]")));
            }
            self.seen.push(id);
        }
        self.assign(cfg, &section, key, value)
    }

    fn assign(&mut self, cfg: &mut ExperimentConfig, section: &str, key: &str, value: &str) -> Result<()> {
        let s = &mut cfg.signal;
        match (section, key) {
            ("run", "seed") => {
                cfg.seed = self.int(value)?;
            }
            ("run", "output_dir") => {
                if value.is_empty() {
                    return Err(self.err("output_dir is empty"));
                }
                cfg.output_dir = PathBuf::from(value);
            }
            ("signal", "kind") => {
                s.kind = match value {
                    "ofdm" => WaveformKind::Ofdm,
                    "single-carrier" => WaveformKind::SingleCarrier,
                    _ => return Err(self.err(format!("unknown signal kind `{value}`"))),
                }
            }
            ("signal", "bandwidth_hz") => s.bandwidth_hz = self.positive(value)?,
            ("signal", "oversampling") => s.oversampling = self.count(value)?,
            ("signal", "num_symbols") => s.num_symbols = self.count(value)?,
            ("signal", "constellation") => {
                s.constellation = match value {
                    "qpsk4" => Constellation::Qpsk4,
                    "qam16" => Constellation::Qam16,
                    _ => return Err(self.err(format!("unknown constellation `{value}`"))),
                }
            }
            ("signal", "pulse") => {
                if value != "sinc" && value != "rrc" {
                    return Err(self.err(format!("unknown pulse `{value}`")));
                }
                self.pulse = Some(value.to_string());
            }
            ("signal", "rolloff") => {
                let r = self.real(value)?;
                if !(0.0..=1.0).contains(&r) {
                    return Err(self.err("rolloff must lie in [0, 1]"));
                }
                self.rolloff = Some(r);
            }
            ("signal", "fft_size") => s.ofdm_fft_size = self.count(value)?,
            ("signal", "used_carriers") => s.ofdm_used_carriers = self.count(value)?,
            ("channel", "carrier_hz") => cfg.channel.carrier_hz = self.positive(value)?,
            ("channel", "tx_power_dbm") => cfg.channel.tx_power_dbm = self.real(value)?,
            ("channel", "circulator") => {
                cfg.channel.circulator = if value == "none" { None } else { Some(self.tap(value)?) };
            }
            ("channel", "tap") => {
                let t = if value == "none" { None } else { Some(self.tap(value)?) };
                self.taps.get_or_insert_with(Vec::new).extend(t);
            }
            ("channel", "reflector_m") => {
                let d = if value == "none" {
                    None
                } else {
                    Some(self.positive(value)?)
                };
                self.reflectors.get_or_insert_with(Vec::new).extend(d);
            }
            ("pathloss", "reference_m") => cfg.channel.pathloss.reference_m = self.positive(value)?,
            ("pathloss", "reference_db") => cfg.channel.pathloss.reference_db = self.real(value)?,
            ("pathloss", "alpha") => cfg.channel.pathloss.alpha = self.positive(value)?,
            ("pathloss", "cap_db") => cfg.channel.pathloss.cap_db = self.real(value)?,
            ("receiver", "noise_dbm") => {
                cfg.receiver.noise_dbm = if value == "none" { None } else { Some(self.real(value)?) };
            }
            ("receiver", "adc_bits") => cfg.receiver.adc_bits = self.int(value)?,
            ("receiver", "sample_offset") => {
                let v = self.real(value)?;
                if !(0.0..1.0).contains(&v) {
                    return Err(self.err("sample_offset is a fraction of a sample in [0, 1)"));
                }
                cfg.receiver.sample_offset = v;
            }
            ("rf", "vm_bits") => cfg.vm_bits = self.int(value)?,
            ("rf", "budget") => {
                let b: i64 = self.int(value)?;
                if b <= 0 {
                    return Err(self.err("budget must be positive"));
                }
                cfg.tune_budget = b;
            }
            ("rf", "window") => cfg.detector_window = self.int(value)?,
            ("digital", "order") => {
                let o = self.int(value)?;
                if !(1..=2).contains(&o) {
                    return Err(self.err("order must be 1 or 2"));
                }
                cfg.digital_order = o;
            }
            ("digital", "train_len") => cfg.train_len = self.count(value)?,
            ("digital", "filter") => {
                let kind = FilterKind::parse(value).ok_or_else(|| self.err(format!("unknown filter `{value}`")))?;
                if kind == FilterKind::D2Tap9 {
                    return Err(self.err("filter must be a first-derivative kind"));
                }
                cfg.filter = kind;
            }
            _ => return Err(self.err(format!("unknown key `{key}` in [{section}]"))),
        }
        Ok(())
    }

    fn finish(self, cfg: &mut ExperimentConfig) {
        if let Some(t) = self.taps {
            cfg.channel.taps = t;
        }
        if let Some(r) = self.reflectors {
            cfg.channel.reflectors_m = r;
        }
        let given = |key: &str| self.seen.iter().any(|(s, k)| s == "signal" && k == key);
        let kind_given = given("kind");
        if kind_given && !given("num_symbols") {
            cfg.signal.num_symbols = match cfg.signal.kind {
                WaveformKind::SingleCarrier => SignalSpec::single_carrier(1.0).num_symbols,
                WaveformKind::Ofdm => SignalSpec::ofdm(1.0).num_symbols,
            };
        }
        let rolloff = self.rolloff.unwrap_or(match cfg.signal.pulse {
            Pulse::Rrc { rolloff } => rolloff,
            Pulse::Sinc => 0.3,
        });
        cfg.signal.pulse = match (self.pulse.as_deref(), kind_given, cfg.signal.kind) {
            (Some("sinc"), _, _) => Pulse::Sinc,
            (Some(_), _, _) => Pulse::Rrc { rolloff },
            (None, true, WaveformKind::SingleCarrier) => Pulse::Rrc { rolloff },
            (None, true, WaveformKind::Ofdm) => Pulse::Sinc,
            (None, false, _) => match cfg.signal.pulse {
                Pulse::Rrc { .. } => Pulse::Rrc { rolloff },
                Pulse::Sinc => Pulse::Sinc,
            },
        };
        cfg.signal.seed = cfg.seed;
    }

    fn real(&self, v: &str) -> Result<f64> {
        let x: f64 = v.parse().map_err(|_| self.err(format!("`{v}` is not a number")))?;
        if !x.is_finite() {
            return Err(self.err(format!("`{v}` is not finite")));
        }
        Ok(x)
    }

    fn positive(&self, v: &str) -> Result<f64> {
        let x = self.real(v)?;
        if x <= 0.0 {
            return Err(self.err(format!("`{v}` must be positive")));
        }
        Ok(x)
    }

    fn int<T: std::str::FromStr>(&self, v: &str) -> Result<T> {
        v.parse().map_err(|_| self.err(format!("`{v}` is not a valid integer")))
    }

    fn count(&self, v: &str) -> Result<usize> {
        let n: usize = self.int(v)?;
        if n == 0 {
            return Err(self.err("must be at least 1"));
        }
        Ok(n)
    }

    fn tap(&self, v: &str) -> Result<TapSpec> {
        let mut parts = v.split_whitespace();
        let (Some(g), Some(d), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(self.err("tap needs `gain_db delay_ns`"));
        };
        let gain_db = self.real(g)?;
        let delay_ns = self.real(d)?;
        if delay_ns < 0.0 {
            return Err(self.err("tap delay must be >= 0"));
        }
        Ok(TapSpec { gain_db, delay_ns })
    }
}
