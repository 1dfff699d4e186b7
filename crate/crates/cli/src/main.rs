use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use linsic::harness::{
    parse_bw_list, parse_dbm_range, run_simulate, run_sweep_bandwidth, run_sweep_power, run_verify, write_atomic,
    write_bandwidth_csv, write_power_csv, write_simulation, ExperimentConfig, Stage, Suite,
};

#[derive(Parser)]
#[command(
    name = "linsic",
    version,
    about = "Full-duplex self-interference cancellation simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full pipeline once and write spectra, tune trace and report.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `output_dir` from the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// RF and digital cancellation against transmit bandwidth.
    SweepBandwidth {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated bandwidths in Hz.
        #[arg(long, default_value = "5e6,10e6,15e6,20e6")]
        bw: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// RF and digital cancellation against transmit power.
    SweepPower {
        #[arg(long)]
        config: PathBuf,
        /// `lo..hi[:step]` in dBm, or a comma-separated list.
        #[arg(long, default_value = "-10..19", allow_hyphen_values = true)]
        dbm: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run an invariant suite and write `verdict.txt`.
    Verify {
        #[arg(long, value_parser = parse_suite)]
        suite: Suite,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Write the PSD at one point of the chain.
    Spectrum {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_parser = parse_stage)]
        stage: Stage,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_suite(s: &str) -> std::result::Result<Suite, String> {
    Suite::parse(s).ok_or_else(|| "expected one of lemma, filters, oracle-delay, poisson".to_string())
}

fn parse_stage(s: &str) -> std::result::Result<Stage, String> {
    Stage::parse(s).ok_or_else(|| "expected one of pre, rf, digital".to_string())
}

fn load(path: &Path, out: Option<PathBuf>) -> Result<ExperimentConfig> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut cfg = ExperimentConfig::parse(&text).with_context(|| format!("parsing {}", path.display()))?;
    if let Some(dir) = out {
        cfg.output_dir = dir;
    }
    cfg.validate().with_context(|| format!("checking {}", path.display()))?;
    Ok(cfg)
}

/// Returns whether every check passed.
fn run(command: Command) -> Result<bool> {
    match command {
        Command::Simulate { config, out } => {
            let cfg = load(&config, out)?;
            let sim = run_simulate(&cfg)?;
            write_simulation(&sim, &cfg, &cfg.output_dir)?;
            print!("{}", sim.to_key_values(&cfg).to_text());
            Ok(true)
        }
        Command::SweepBandwidth { config, bw, out } => {
            let cfg = load(&config, out)?;
            let bws = parse_bw_list(&bw)?;
            let rows = run_sweep_bandwidth(&cfg, &bws)?;
            write_bandwidth_csv(&rows, &cfg.output_dir)?;
            print!("{}", linsic::harness::bandwidth_csv(&rows));
            Ok(true)
        }
        Command::SweepPower { config, dbm, out } => {
            let cfg = load(&config, out)?;
            let powers = parse_dbm_range(&dbm)?;
            let rows = run_sweep_power(&cfg, &powers)?;
            write_power_csv(&rows, &cfg.output_dir)?;
            print!("{}", linsic::harness::power_csv(&rows));
            Ok(true)
        }
        Command::Verify { suite, out } => {
            let verdict = run_verify(suite)?;
            let text = verdict.to_text();
            write_atomic(&out.join("verdict.txt"), &text)?;
            print!("{text}");
            Ok(verdict.passed())
        }
        Command::Spectrum { config, stage, out } => {
            let cfg = load(&config, out)?;
            let sim = run_simulate(&cfg)?;
            let p = sim.spectrum(stage);
            let path = cfg.output_dir.join(format!("{}.csv", stage.name()));
            write_atomic(&path, &p.to_csv())?;
            println!("stage={}", stage.name());
            println!("bins={}", p.freqs_hz.len());
            println!("rbw_hz={:.0}", p.rbw_hz);
            println!("total_power_db={:.2}", 10.0 * p.total_power().max(1e-30).log10());
            println!("path={}", path.display());
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
