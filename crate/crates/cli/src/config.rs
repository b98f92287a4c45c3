//! Flat `key = value` run configuration.
//!
//! One entry per line, `#` starts a comment, blank lines are ignored.
//! Every key is optional; omitted keys keep the reference defaults. Units
//! are SI (Hz, s, m, m/s) except `snr_db`. Lists are comma separated;
//! numeric lists also accept `start:step:stop`.

use std::collections::HashSet;
use std::str::FromStr;

use isac_core::bench::{OutlierPolicy, SignalKind, SweepAxis, SweepSpec};
use isac_core::channel::TargetScenario;
use isac_core::crlb::BareDimension;
use isac_core::estimator::Combining;
use isac_core::refsig::{params::TYPE_A_ADDITIONAL_3, slot_pattern};
use isac_core::{DmrsConfig, OfdmParams, SymbolTiming, SPEED_OF_LIGHT_NOMINAL};
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    /// Subcarrier spacing, Hz.
    pub delta_f: f64,
    pub n_subcarriers: usize,
    pub m_symbols: usize,
    /// Requested cyclic prefix, s.
    pub t_cp: f64,
    /// Carrier frequency, Hz.
    pub f_c: f64,
    /// m/s.
    pub speed_of_light: f64,

    pub comb_carrier: usize,
    pub comb_symbol: usize,
    /// DMRS symbols within one 14-symbol slot, repeated every slot.
    pub dmrs_positions: Vec<usize>,
    pub carrier_offset: usize,
    pub dmrs_seed: u32,

    pub range_m: f64,
    pub velocity_mps: f64,
    pub attenuation: f64,
    pub snr_db: f64,

    pub timing: SymbolTiming,
    pub combining: Combining,
    /// Zero-padding factor of both FFTs.
    pub fft_padding: usize,
    pub signed_velocity: bool,
    pub interpolate: bool,

    pub sweep_axis: SweepAxis,
    pub sweep_values: Vec<f64>,
    /// SNR points of the `crlb` curves, dB.
    pub snr_values: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub signal: SignalKind,
    pub outliers: OutlierPolicy,
    pub noise: bool,
    pub crlb_bare: BareDimension,
}

impl Default for RunConfig {
    fn default() -> Self {
        let snr: Vec<f64> = (-15..=10).map(f64::from).collect();
        Self {
            delta_f: 120e3,
            n_subcarriers: 256,
            m_symbols: 140,
            t_cp: 0.57e-6,
            f_c: 24e9,
            speed_of_light: SPEED_OF_LIGHT_NOMINAL,
            comb_carrier: 2,
            comb_symbol: 3,
            dmrs_positions: TYPE_A_ADDITIONAL_3.to_vec(),
            carrier_offset: 0,
            dmrs_seed: 0,
            range_m: 48.0,
            velocity_mps: 18.0,
            attenuation: 1.0,
            snr_db: 10.0,
            timing: SymbolTiming::CombUniform,
            combining: Combining::default(),
            fft_padding: 1,
            signed_velocity: false,
            interpolate: false,
            sweep_axis: SweepAxis::SnrDb,
            sweep_values: snr.clone(),
            snr_values: snr,
            trials: 1000,
            seed: 0,
            signal: SignalKind::Dmrs,
            outliers: OutlierPolicy::Include,
            noise: true,
            crlb_bare: BareDimension::Total,
        }
    }
}

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T, String> {
    value.parse().map_err(|_| format!("`{key}`: cannot parse `{value}`"))
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>, String> {
    value.split(',').map(str::trim).filter(|s| !s.is_empty()).map(|s| parse_num(key, s)).collect()
}

/// Comma list, or `start:step:stop` inclusive of `stop`.
fn parse_values(key: &str, value: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = value.split(':').map(str::trim).collect();
    match parts.as_slice() {
        [start, step, stop] => {
            let (start, step, stop): (f64, f64, f64) =
                (parse_num(key, start)?, parse_num(key, step)?, parse_num(key, stop)?);
            if step.is_nan() || step <= 0.0 || stop < start {
                return Err(format!("`{key}`: empty range `{value}`"));
            }
            let n = ((stop - start) / step + 1e-9).floor() as usize;
            Ok((0..=n).map(|i| start + i as f64 * step).collect())
        }
        [_] => parse_list(key, value),
        _ => Err(format!("`{key}`: expected a list or start:step:stop, got `{value}`")),
    }
}

fn parse_bool(key: &str, value: &str) -> Result<bool, String> {
    match value {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        _ => Err(format!("`{key}`: expected true/false, got `{value}`")),
    }
}

fn parse_combining(value: &str) -> Result<Combining, String> {
    match value {
        "single_line" => Ok(Combining::default()),
        "incoherent_sum" => Ok(Combining::IncoherentSum),
        other => Err(format!("`combining`: unknown `{other}` (single_line|incoherent_sum)")),
    }
}

fn parse_outliers(value: &str) -> Result<OutlierPolicy, String> {
    match value {
        "include" => Ok(OutlierPolicy::Include),
        "exclude" => Ok(OutlierPolicy::Exclude),
        other => Err(format!("`outliers`: unknown `{other}` (include|exclude)")),
    }
}

fn parse_bare(value: &str) -> Result<BareDimension, String> {
    match value {
        "total" => Ok(BareDimension::Total),
        "extracted" => Ok(BareDimension::Extracted),
        other => Err(format!("`crlb_bare`: unknown `{other}` (total|extracted)")),
    }
}

fn with_key<T>(key: &str, r: Result<T, String>) -> Result<T, String> {
    r.map_err(|e| if e.contains(key) { e } else { format!("`{key}`: {e}") })
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut cfg = Self::default();
        let mut seen = HashSet::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected key = value", lineno + 1))?;
            let (key, value) = (key.trim(), value.trim());
            if !seen.insert(key.to_string()) {
                return Err(format!("line {}: duplicate key `{key}`", lineno + 1));
            }
            cfg.set(key, value).map_err(|e| format!("line {}: {e}", lineno + 1))?;
        }
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        match key {
            "delta_f" => self.delta_f = parse_num(key, value)?,
            "n_subcarriers" => self.n_subcarriers = parse_num(key, value)?,
            "m_symbols" => self.m_symbols = parse_num(key, value)?,
            "t_cp" => self.t_cp = parse_num(key, value)?,
            "f_c" => self.f_c = parse_num(key, value)?,
            "speed_of_light" => self.speed_of_light = parse_num(key, value)?,
            "comb_carrier" => self.comb_carrier = parse_num(key, value)?,
            "comb_symbol" => self.comb_symbol = parse_num(key, value)?,
            "dmrs_positions" => self.dmrs_positions = parse_list(key, value)?,
            "carrier_offset" => self.carrier_offset = parse_num(key, value)?,
            "dmrs_seed" => self.dmrs_seed = parse_num(key, value)?,
            "range_m" => self.range_m = parse_num(key, value)?,
            "velocity_mps" => self.velocity_mps = parse_num(key, value)?,
            "attenuation" => self.attenuation = parse_num(key, value)?,
            "snr_db" => self.snr_db = parse_num(key, value)?,
            "timing" => self.timing = with_key(key, value.parse())?,
            "combining" => self.combining = parse_combining(value)?,
            "fft_padding" => self.fft_padding = parse_num(key, value)?,
            "signed_velocity" => self.signed_velocity = parse_bool(key, value)?,
            "interpolate" => self.interpolate = parse_bool(key, value)?,
            "sweep_axis" => self.sweep_axis = with_key(key, value.parse())?,
            "sweep_values" => self.sweep_values = parse_values(key, value)?,
            "snr_values" => self.snr_values = parse_values(key, value)?,
            "trials" => self.trials = parse_num(key, value)?,
            "seed" => self.seed = parse_num(key, value)?,
            "signal" => self.signal = with_key(key, value.parse())?,
            "outliers" => self.outliers = parse_outliers(value)?,
            "noise" => self.noise = parse_bool(key, value)?,
            "crlb_bare" => self.crlb_bare = parse_bare(value)?,
            other => return Err(format!("unknown key `{other}`")),
        }
        Ok(())
    }

    pub fn params(&self) -> isac_core::Result<OfdmParams> {
        let mut p = OfdmParams::from_durations(
            self.delta_f,
            self.n_subcarriers,
            self.m_symbols,
            self.t_cp,
            self.f_c,
        )?;
        p.speed_of_light = self.speed_of_light;
        p.validate()?;
        Ok(p)
    }

    pub fn dmrs(&self) -> DmrsConfig {
        DmrsConfig {
            comb_carrier: self.comb_carrier,
            comb_symbol: self.comb_symbol,
            symbol_positions: slot_pattern(&self.dmrs_positions, self.m_symbols),
            carrier_offset: self.carrier_offset,
            seed: self.dmrs_seed,
        }
    }

    pub fn target(&self) -> TargetScenario {
        TargetScenario {
            range_m: self.range_m,
            velocity_mps: self.velocity_mps,
            attenuation: self.attenuation,
            snr_db: self.snr_db,
        }
    }

    pub fn sweep_spec(&self) -> isac_core::Result<SweepSpec> {
        Ok(SweepSpec {
            params: self.params()?,
            dmrs: self.dmrs(),
            target: self.target(),
            axis: self.sweep_axis,
            values: self.sweep_values.clone(),
            trials: self.trials,
            master_seed: self.seed,
            signal: self.signal,
            timing: self.timing,
            combining: self.combining,
            outliers: self.outliers,
            noise: self.noise,
        })
    }
}
