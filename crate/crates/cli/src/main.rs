//! `isac-sim`: command-line driver for the DMRS sensing simulator.

mod config;

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use isac_core::bench::{
    compare_signals, manifest, run_sweep, simulate_once, trial_seeds, SignalKind,
};
use isac_core::channel::ChannelOptions;
use isac_core::crlb::{crlb_closed_form, crlb_for_layout, CrlbInputs, CrlbMethod};
use isac_core::estimator::{EstimatorOptions, SensingBounds};
use isac_core::refsig::{build_data_grid, build_dmrs_grid};
use isac_core::report::{
    write_compare_csv, write_crlb_csv, write_grid_csv, write_profile_csv, write_sweep_csv, CrlbRow,
    EstimateRecord,
};
use isac_core::{IsacError, OfdmParams, ResourceGrid};

use config::RunConfig;

#[derive(Parser, Debug)]
#[command(name = "isac-sim", version, about = "DMRS-based OFDM sensing simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Flat key = value configuration file.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Master seed; overrides `seed` in the config.
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR", default_value = ".")]
    out: PathBuf,
    /// Trials per sweep point.
    #[arg(long, global = true, value_name = "N")]
    trials: Option<usize>,
    /// Transmit signal.
    #[arg(long, global = true, value_parser = ["dmrs", "data"])]
    signal: Option<String>,
    /// Disable AWGN.
    #[arg(long, global = true)]
    no_noise: bool,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Write the transmit resource grid as CSV.
    Grid,
    /// Run one end-to-end trial and print the estimate.
    Simulate,
    /// Print the unambiguous window and resolution.
    Bounds,
    /// Closed-form and numeric CRLB curves over `snr_values`.
    Crlb,
    /// Monte Carlo RMSE sweep.
    Sweep {
        /// Run DMRS and data signal with identical seeds.
        #[arg(long)]
        compare: bool,
    },
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Self::Grid => "grid",
            Self::Simulate => "simulate",
            Self::Bounds => "bounds",
            Self::Crlb => "crlb",
            Self::Sweep { .. } => "sweep",
        }
    }
}

enum CliError {
    Usage(String),
    Validation(String),
    Runtime(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            Self::Usage(_) => 2,
            Self::Validation(_) => 3,
            Self::Runtime(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Self::Usage(m) | Self::Validation(m) | Self::Runtime(m) => m,
        }
    }
}

impl From<IsacError> for CliError {
    fn from(e: IsacError) -> Self {
        match e {
            IsacError::Config(_)
            | IsacError::Shape(_)
            | IsacError::EmptyRequest(_)
            | IsacError::Degenerate { .. }
            | IsacError::OutOfWindow { .. } => Self::Validation(e.to_string()),
            IsacError::NoPeak(_) | IsacError::Io(_) | IsacError::Csv(_) => {
                Self::Runtime(e.to_string())
            }
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Runtime(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        Self::Runtime(e.to_string())
    }
}

type CliResult<T> = Result<T, CliError>;

/// Line to stdout; a closed pipe is not an error.
fn emit_line(args: std::fmt::Arguments) -> CliResult<()> {
    match writeln!(io::stdout().lock(), "{args}") {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

macro_rules! emit {
    ($($arg:tt)*) => {
        emit_line(format_args!($($arg)*))?
    };
}

fn load_config(cli: &Cli) -> CliResult<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| {
                CliError::Usage(format!("cannot read config {}: {e}", path.display()))
            })?;
            RunConfig::parse(&text).map_err(CliError::Usage)?
        }
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(trials) = cli.trials {
        cfg.trials = trials;
    }
    if let Some(signal) = &cli.signal {
        cfg.signal = signal.parse().map_err(CliError::Usage)?;
    }
    if cli.no_noise {
        cfg.noise = false;
    }
    Ok(cfg)
}

fn create(dir: &Path, name: &str) -> CliResult<BufWriter<File>> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn write_json(dir: &Path, name: &str, value: &serde_json::Value) -> CliResult<()> {
    fs::write(dir.join(name), serde_json::to_string_pretty(value)? + "\n")?;
    Ok(())
}

fn write_manifest(dir: &Path, stem: &str, cfg: &RunConfig, command: Command) -> CliResult<()> {
    let value = match command {
        Command::Sweep { .. } => {
            let mut m = manifest(&cfg.sweep_spec()?, command.name());
            m["config"] = serde_json::to_value(cfg)?;
            m
        }
        _ => serde_json::json!({
            "tool": env!("CARGO_PKG_NAME"),
            "version": env!("CARGO_PKG_VERSION"),
            "command": command.name(),
            "config": cfg,
        }),
    };
    write_json(dir, &format!("{stem}.manifest.json"), &value)
}

fn transmit_grid(cfg: &RunConfig, params: &OfdmParams, data_seed: u64) -> CliResult<ResourceGrid> {
    Ok(match cfg.signal {
        SignalKind::Dmrs => build_dmrs_grid(params, &cfg.dmrs())?,
        SignalKind::Data => build_data_grid(params, data_seed)?,
    })
}

fn cmd_grid(cfg: &RunConfig, out: &Path) -> CliResult<()> {
    let params = cfg.params()?;
    let grid = transmit_grid(cfg, &params, cfg.seed)?;
    write_grid_csv(&grid, create(out, "grid.csv")?)?;
    emit!(
        "grid {}x{} occupied {} -> {}",
        grid.n_subcarriers(),
        grid.m_symbols(),
        grid.occupied_count(),
        out.join("grid.csv").display()
    );
    Ok(())
}

fn cmd_simulate(cfg: &RunConfig, out: &Path) -> CliResult<()> {
    let params = cfg.params()?;
    let target = cfg.target();
    target.validate()?;
    if cfg.fft_padding == 0 {
        return Err(CliError::Validation("fft_padding must be >= 1".into()));
    }
    let (noise_seed, data_seed) = trial_seeds(cfg.seed, 0, 0);
    let tx = transmit_grid(cfg, &params, data_seed)?;
    let channel =
        ChannelOptions { timing: cfg.timing, noise: cfg.noise, noise_on_unoccupied: false };
    let mut opts = EstimatorOptions {
        timing: cfg.timing,
        combining: cfg.combining,
        signed_velocity: cfg.signed_velocity,
        interpolate: cfg.interpolate,
        ..Default::default()
    };
    if cfg.fft_padding > 1 {
        opts.range_fft_len = Some(tx.layout.n_j() * cfg.fft_padding);
        let natural = match cfg.timing {
            isac_core::SymbolTiming::CombUniform => tx.layout.m_j(),
            isac_core::SymbolTiming::Physical => params.m_symbols,
        };
        opts.doppler_fft_len = Some(natural * cfg.fft_padding);
    }
    let est = simulate_once(&params, &tx, &target, &channel, &opts, noise_seed)?;
    let record = EstimateRecord {
        true_range: target.range_m,
        est_range: est.range_m,
        range_index: est.range_index,
        true_velocity: target.velocity_mps,
        est_velocity: est.velocity_mps,
        velocity_index: est.velocity_index,
        snr_db: target.snr_db,
        seed: cfg.seed,
    };
    write_profile_csv(&est.range_profile, create(out, "range_profile.csv")?)?;
    write_profile_csv(&est.doppler_profile, create(out, "doppler_profile.csv")?)?;
    let value = serde_json::to_value(&record)?;
    write_json(out, "estimate.json", &value)?;
    write_manifest(out, "simulate", cfg, Command::Simulate)?;
    emit!("{}", serde_json::to_string_pretty(&value)?);
    emit!("est_range {:.2} m, est_velocity {:.2} m/s", est.range_m, est.velocity_mps);
    Ok(())
}

fn cmd_bounds(cfg: &RunConfig, out: &Path) -> CliResult<()> {
    let params = cfg.params()?;
    let tx = transmit_grid(cfg, &params, cfg.seed)?;
    let b = SensingBounds::for_layout(&params, &tx.layout, cfg.timing);
    let value = serde_json::json!({
        "r_max_m": b.r_max,
        "delta_r_m": b.delta_r,
        "v_max_mps": b.v_max,
        "delta_v_mps": b.delta_v,
        "n_j": tx.layout.n_j(),
        "m_j": tx.layout.m_j(),
    });
    write_json(out, "bounds.json", &value)?;
    emit!("{}", serde_json::to_string_pretty(&value)?);
    Ok(())
}

fn cmd_crlb(cfg: &RunConfig, out: &Path) -> CliResult<()> {
    let params = cfg.params()?;
    let tx = transmit_grid(cfg, &params, cfg.seed)?;
    let mut rows = Vec::with_capacity(2 * cfg.snr_values.len());
    for &snr_db in &cfg.snr_values {
        let inputs = CrlbInputs::new(&params, &tx.layout, 1.0, cfg.attenuation).with_snr_db(snr_db);
        let closed = crlb_closed_form(&inputs, cfg.crlb_bare)?;
        let numeric =
            crlb_for_layout(&params, &tx.layout, cfg.timing, inputs.snr_linear, cfg.attenuation)?;
        for r in [closed, numeric] {
            rows.push(CrlbRow {
                snr_db,
                root_crlb_range_m: r.root_crlb_range_m,
                root_crlb_velocity_mps: r.root_crlb_velocity_mps,
                method: r.method.as_str().to_string(),
            });
        }
    }
    write_crlb_csv(&rows, create(out, "crlb.csv")?)?;
    write_manifest(out, "crlb", cfg, Command::Crlb)?;
    emit!(
        "{} rows ({} and {}) -> {}",
        rows.len(),
        CrlbMethod::ClosedForm.as_str(),
        CrlbMethod::NumericFisher.as_str(),
        out.join("crlb.csv").display()
    );
    Ok(())
}

fn cmd_sweep(cfg: &RunConfig, out: &Path, compare: bool) -> CliResult<()> {
    let spec = cfg.sweep_spec()?;
    let command = Command::Sweep { compare };
    if compare {
        let (dmrs, data) = compare_signals(&spec)?;
        write_compare_csv(&dmrs, &data, create(out, "compare.csv")?)?;
        write_manifest(out, "compare", cfg, command)?;
        emit!("{} points x 2 signals -> {}", dmrs.points.len(), out.join("compare.csv").display());
    } else {
        let result = run_sweep(&spec)?;
        write_sweep_csv(&result, create(out, "sweep.csv")?)?;
        write_manifest(out, "sweep", cfg, command)?;
        emit!("{} points -> {}", result.points.len(), out.join("sweep.csv").display());
    }
    Ok(())
}

fn run(cli: &Cli) -> CliResult<()> {
    let cfg = load_config(cli)?;
    fs::create_dir_all(&cli.out)?;
    let out = cli.out.as_path();
    match cli.command {
        Command::Grid => cmd_grid(&cfg, out),
        Command::Simulate => cmd_simulate(&cfg, out),
        Command::Bounds => cmd_bounds(&cfg, out),
        Command::Crlb => cmd_crlb(&cfg, out),
        Command::Sweep { compare } => cmd_sweep(&cfg, out, compare),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
