use serde::{Deserialize, Serialize};

use crate::error::{config_err, Result};
use crate::SPEED_OF_LIGHT_NOMINAL;

/// Symbols per slot with normal cyclic prefix.
pub const SYMBOLS_PER_SLOT: usize = 14;

/// Mapping type A with one front-loaded and three additional DMRS symbols.
pub const TYPE_A_ADDITIONAL_3: [usize; 4] = [2, 5, 8, 11];

/// OFDM numerology.
///
/// Time quantities are derived from the integer sample grid so that
/// `sample_interval * n_ifft == t_symbol` and
/// `t_total == t_symbol + t_cp` hold by construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OfdmParams {
    /// Subcarrier spacing Δf, Hz.
    pub delta_f: f64,
    /// Grid height N.
    pub n_subcarriers: usize,
    /// Grid width M.
    pub m_symbols: usize,
    /// IFFT length, at least `n_subcarriers`.
    pub n_ifft: usize,
    /// Cyclic prefix length in samples.
    pub n_cp: usize,
    /// Carrier frequency, Hz.
    pub f_c: f64,
    /// Propagation speed used for delay/Doppler conversions, m/s.
    pub speed_of_light: f64,
}

impl OfdmParams {
    /// Builds a numerology from physical durations. The IFFT length is the
    /// next power of two at or above `n_subcarriers` and the cyclic prefix
    /// is `round(t_cp / sample_interval)` samples.
    pub fn from_durations(
        delta_f: f64,
        n_subcarriers: usize,
        m_symbols: usize,
        t_cp: f64,
        f_c: f64,
    ) -> Result<Self> {
        if !(t_cp.is_finite() && t_cp >= 0.0) {
            return Err(config_err(format!("t_cp must be finite and >= 0, got {t_cp}")));
        }
        let n_ifft = n_subcarriers.max(1).next_power_of_two();
        let dt = 1.0 / (delta_f * n_ifft as f64);
        let n_cp = (t_cp / dt).round() as usize;
        let params = Self {
            delta_f,
            n_subcarriers,
            m_symbols,
            n_ifft,
            n_cp,
            f_c,
            speed_of_light: SPEED_OF_LIGHT_NOMINAL,
        };
        params.validate()?;
        Ok(params)
    }

    /// Simulation parameters of the reference 24 GHz / 120 kHz setup with
    /// 256 subcarriers and 140 symbols.
    pub fn reference() -> Self {
        Self::from_durations(120e3, 256, 140, 0.57e-6, 24e9).expect("static parameters")
    }

    /// Short-frame preset (28 symbols).
    pub fn reference_short() -> Self {
        Self { m_symbols: 28, ..Self::reference() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta_f.is_finite() && self.delta_f > 0.0) {
            return Err(config_err(format!("delta_f must be > 0, got {}", self.delta_f)));
        }
        if self.n_subcarriers == 0 || self.m_symbols == 0 {
            return Err(config_err("grid dimensions must be nonzero"));
        }
        if self.n_ifft < self.n_subcarriers {
            return Err(config_err(format!(
                "n_ifft ({}) < n_subcarriers ({})",
                self.n_ifft, self.n_subcarriers
            )));
        }
        if !(self.f_c.is_finite() && self.f_c > 0.0) {
            return Err(config_err(format!("f_c must be > 0, got {}", self.f_c)));
        }
        if !(self.speed_of_light.is_finite() && self.speed_of_light > 0.0) {
            return Err(config_err("speed_of_light must be > 0"));
        }
        Ok(())
    }

    /// Useful symbol duration T = 1/Δf.
    pub fn t_symbol(&self) -> f64 {
        1.0 / self.delta_f
    }

    pub fn sample_interval(&self) -> f64 {
        self.t_symbol() / self.n_ifft as f64
    }

    pub fn t_cp(&self) -> f64 {
        self.n_cp as f64 * self.sample_interval()
    }

    /// Total symbol duration T_s = T + T_cp.
    pub fn t_total(&self) -> f64 {
        (self.n_ifft + self.n_cp) as f64 * self.sample_interval()
    }

    /// Samples per symbol including the cyclic prefix.
    pub fn symbol_stride(&self) -> usize {
        self.n_ifft + self.n_cp
    }

    /// Two-way delay for a target at `range_m`.
    pub fn delay_of(&self, range_m: f64) -> f64 {
        2.0 * range_m / self.speed_of_light
    }

    /// Two-way Doppler shift for radial velocity `velocity_mps`.
    pub fn doppler_of(&self, velocity_mps: f64) -> f64 {
        2.0 * velocity_mps * self.f_c / self.speed_of_light
    }

    /// Same numerology at a new subcarrier spacing, keeping the sample
    /// counts (and so the CP fraction) fixed.
    pub fn with_delta_f(&self, delta_f: f64) -> Self {
        Self { delta_f, ..self.clone() }
    }

    /// Rescales Δf so the total symbol duration becomes `t_total`.
    pub fn with_t_total(&self, t_total: f64) -> Self {
        let ratio = self.symbol_stride() as f64 / self.n_ifft as f64;
        self.with_delta_f(ratio / t_total)
    }

    /// Changes N, re-deriving the IFFT length and CP sample count for the
    /// same physical CP duration.
    pub fn with_subcarriers(&self, n_subcarriers: usize) -> Result<Self> {
        let mut p = Self::from_durations(
            self.delta_f,
            n_subcarriers,
            self.m_symbols,
            self.t_cp(),
            self.f_c,
        )?;
        p.speed_of_light = self.speed_of_light;
        Ok(p)
    }
}

/// How the slow-time position of an extracted DMRS symbol is interpreted.
///
/// Shared by the channel, the estimator and the Fisher lattice so that the
/// simulated echo and its processing always agree.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SymbolTiming {
    /// The j-th DMRS-bearing symbol sits at `j * comb_symbol * T_s`; the
    /// Doppler FFT runs over the extracted columns directly.
    #[default]
    CombUniform,
    /// Each DMRS symbol sits at its true index `m * T_s`; the Doppler FFT
    /// runs over a zero-filled grid of length M.
    Physical,
}

impl std::str::FromStr for SymbolTiming {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "comb_uniform" => Ok(Self::CombUniform),
            "physical" => Ok(Self::Physical),
            other => Err(format!("unknown timing `{other}` (comb_uniform|physical)")),
        }
    }
}

/// DMRS placement: type-1 frequency comb plus an explicit list of
/// DMRS-bearing symbols.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DmrsConfig {
    /// Frequency comb period, 2 or 4.
    pub comb_carrier: usize,
    /// Nominal time comb period, one of 3, 4, 6, 12.
    pub comb_symbol: usize,
    /// DMRS-bearing symbol indices, strictly increasing.
    pub symbol_positions: Vec<usize>,
    /// First DMRS subcarrier within each comb group.
    pub carrier_offset: usize,
    /// Gold sequence seed; symbol `m` uses `seed + m`.
    pub seed: u32,
}

impl DmrsConfig {
    /// Mapping type A, comb 2, single front-loaded symbol plus three
    /// additional ones in every slot of an `m_symbols` frame.
    pub fn type_a(m_symbols: usize) -> Self {
        Self {
            comb_carrier: 2,
            comb_symbol: 3,
            symbol_positions: slot_pattern(&TYPE_A_ADDITIONAL_3, m_symbols),
            carrier_offset: 0,
            seed: 0,
        }
    }

    pub fn validate(&self, params: &OfdmParams) -> Result<()> {
        if !matches!(self.comb_carrier, 2 | 4) {
            return Err(config_err(format!(
                "comb_carrier must be 2 or 4, got {}",
                self.comb_carrier
            )));
        }
        if !matches!(self.comb_symbol, 3 | 4 | 6 | 12) {
            return Err(config_err(format!(
                "comb_symbol must be one of 3, 4, 6, 12, got {}",
                self.comb_symbol
            )));
        }
        if self.carrier_offset >= self.comb_carrier {
            return Err(config_err(format!(
                "carrier_offset {} outside [0, {})",
                self.carrier_offset, self.comb_carrier
            )));
        }
        if self.carrier_offset >= params.n_subcarriers {
            return Err(config_err("carrier_offset beyond the grid"));
        }
        if let Some(&m) = self.symbol_positions.iter().find(|&&m| m >= params.m_symbols) {
            return Err(config_err(format!(
                "DMRS symbol position {m} out of range for {} symbols",
                params.m_symbols
            )));
        }
        if self.symbol_positions.windows(2).any(|w| w[0] >= w[1]) {
            return Err(config_err("symbol_positions must be strictly increasing"));
        }
        Ok(())
    }

    /// Occupied subcarrier indices.
    pub fn subcarriers(&self, n_subcarriers: usize) -> Vec<usize> {
        (self.carrier_offset..n_subcarriers).step_by(self.comb_carrier).collect()
    }

    /// N_J, the number of DMRS subcarriers.
    pub fn n_j(&self, n_subcarriers: usize) -> usize {
        n_subcarriers.saturating_sub(self.carrier_offset).div_ceil(self.comb_carrier)
    }

    /// M_J, the number of DMRS symbols.
    pub fn m_j(&self) -> usize {
        self.symbol_positions.len()
    }

    /// Same configuration for a frame of `m_symbols`, repeating the
    /// first-slot template.
    pub fn resized(&self, m_symbols: usize) -> Self {
        let template: Vec<usize> =
            self.symbol_positions.iter().copied().filter(|&m| m < SYMBOLS_PER_SLOT).collect();
        Self { symbol_positions: slot_pattern(&template, m_symbols), ..self.clone() }
    }
}

/// Repeats an in-slot pattern over every slot, keeping positions < `m_symbols`.
pub fn slot_pattern(template: &[usize], m_symbols: usize) -> Vec<usize> {
    (0..m_symbols.div_ceil(SYMBOLS_PER_SLOT))
        .flat_map(|slot| template.iter().map(move |&p| slot * SYMBOLS_PER_SLOT + p))
        .filter(|&m| m < m_symbols)
        .collect()
}
