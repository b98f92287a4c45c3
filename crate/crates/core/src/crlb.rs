//! Cramér-Rao lower bounds for joint delay/Doppler estimation.
//!
//! Two independent paths:
//!
//! * [`crlb_closed_form`] evaluates the printed closed-form bounds as they
//!   stand, comb factors and the unsquared `f_c` included.
//! * [`crlb_numeric_fisher`] builds the 2×2 Fisher matrix of the single
//!   target model `s = xi * exp(j 2 pi (f_d t - f tau))` in complex white
//!   noise of variance `sigma^2 = 1/gamma`, summed over an explicit lattice
//!   of (frequency, time) points, and inverts it.
//!
//! Delay and Doppler bounds convert to distance and velocity with
//! `CRLB(R) = c^2/4 CRLB(tau)` and `CRLB(v) = c^2/(4 f_c^2) CRLB(f_d)`.
//! The two paths differ by a constant factor; the numeric one is the
//! reference.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{IsacError, Result};
use crate::refsig::{GridLayout, OfdmParams, SymbolTiming};

/// Reading of the bare `N` and `M` in the closed form.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BareDimension {
    /// Total subcarriers / symbols of the frame.
    #[default]
    Total,
    /// Extracted lattice size N_J / M_J.
    Extracted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CrlbMethod {
    ClosedForm,
    NumericFisher,
}

impl CrlbMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::ClosedForm => "closed_form",
            Self::NumericFisher => "numeric_fisher",
        }
    }
}

/// Everything the closed form depends on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrlbInputs {
    /// Linear SNR.
    pub snr_linear: f64,
    pub attenuation: f64,
    pub delta_f: f64,
    /// Symbol duration including CP.
    pub t_total: f64,
    pub f_c: f64,
    pub speed_of_light: f64,
    pub n_j: usize,
    pub m_j: usize,
    pub n_total: usize,
    pub m_total: usize,
    pub comb_carrier: usize,
    pub comb_symbol: usize,
}

impl CrlbInputs {
    pub fn new(
        params: &OfdmParams,
        layout: &GridLayout,
        snr_linear: f64,
        attenuation: f64,
    ) -> Self {
        Self {
            snr_linear,
            attenuation,
            delta_f: params.delta_f,
            t_total: params.t_total(),
            f_c: params.f_c,
            speed_of_light: params.speed_of_light,
            n_j: layout.n_j(),
            m_j: layout.m_j(),
            n_total: params.n_subcarriers,
            m_total: params.m_symbols,
            comb_carrier: layout.carrier_stride,
            comb_symbol: layout.symbol_stride,
        }
    }

    pub fn with_snr_db(self, snr_db: f64) -> Self {
        Self { snr_linear: 10f64.powf(snr_db / 10.0), ..self }
    }

    fn check(&self) -> Result<()> {
        if !positive(self.snr_linear) || !positive(self.attenuation) {
            return Err(IsacError::Config(format!(
                "SNR {} and attenuation {} must be positive",
                self.snr_linear, self.attenuation
            )));
        }
        if self.n_j < 2 || self.m_j < 2 {
            return Err(IsacError::Degenerate {
                reason: format!("lattice {}x{} needs at least 2x2 points", self.n_j, self.m_j),
                condition: f64::INFINITY,
            });
        }
        Ok(())
    }
}

/// False for NaN.
fn positive(x: f64) -> bool {
    x > 0.0
}

/// 2×2 Fisher information for (tau, f_d), row-major.
pub type FisherMatrix = [[f64; 2]; 2];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrlbReport {
    pub crlb_range_m2: f64,
    pub crlb_velocity_mps2: f64,
    pub root_crlb_range_m: f64,
    pub root_crlb_velocity_mps: f64,
    pub method: CrlbMethod,
    /// Present for the numeric path.
    pub fisher: Option<FisherMatrix>,
}

impl CrlbReport {
    fn new(range: f64, velocity: f64, method: CrlbMethod, fisher: Option<FisherMatrix>) -> Self {
        Self {
            crlb_range_m2: range,
            crlb_velocity_mps2: velocity,
            root_crlb_range_m: range.sqrt(),
            root_crlb_velocity_mps: velocity.sqrt(),
            method,
            fisher,
        }
    }
}

/// ```text
/// CRLB(R) = c^2 / (xi^2 gamma (2 pi df)^2  K_s) * 12 / (M_J N (N_J-1)(7N_J+1))
/// CRLB(v) = c^2 / (xi^2 gamma (2 pi T_s)^2 f_c K_c) * 12 / (N_J M (M_J-1)(7M_J+1))
/// ```
pub fn crlb_closed_form(inputs: &CrlbInputs, bare: BareDimension) -> Result<CrlbReport> {
    inputs.check()?;
    let (n_bare, m_bare) = match bare {
        BareDimension::Total => (inputs.n_total, inputs.m_total),
        BareDimension::Extracted => (inputs.n_j, inputs.m_j),
    };
    let c2 = inputs.speed_of_light * inputs.speed_of_light;
    let xi2 = inputs.attenuation * inputs.attenuation;
    let (nj, mj) = (inputs.n_j as f64, inputs.m_j as f64);

    let range_rest = xi2
        * (2.0 * PI * inputs.delta_f).powi(2)
        * inputs.comb_symbol as f64
        * mj
        * n_bare as f64
        * (nj - 1.0)
        * (7.0 * nj + 1.0);
    let velocity_rest = xi2
        * (2.0 * PI * inputs.t_total).powi(2)
        * inputs.f_c
        * inputs.comb_carrier as f64
        * nj
        * m_bare as f64
        * (mj - 1.0)
        * (7.0 * mj + 1.0);
    let range = 12.0 * c2 / (inputs.snr_linear * range_rest);
    let velocity = 12.0 * c2 / (inputs.snr_linear * velocity_rest);
    Ok(CrlbReport::new(range, velocity, CrlbMethod::ClosedForm, None))
}

/// Observation points as (frequency in Hz, time in s).
#[derive(Debug, Clone, PartialEq)]
pub struct FisherLattice {
    pub points: Vec<(f64, f64)>,
}

impl FisherLattice {
    pub fn product(freqs: &[f64], times: &[f64]) -> Self {
        let points = times.iter().flat_map(|&t| freqs.iter().map(move |&f| (f, t))).collect();
        Self { points }
    }

    /// Occupied lattice of a grid: `f = k df` for each occupied subcarrier;
    /// `t` per the symbol timing model.
    pub fn from_layout(params: &OfdmParams, layout: &GridLayout, timing: SymbolTiming) -> Self {
        let freqs: Vec<f64> =
            layout.subcarriers.iter().map(|&k| k as f64 * params.delta_f).collect();
        let t_s = params.t_total();
        let times: Vec<f64> = match timing {
            SymbolTiming::CombUniform => {
                (0..layout.m_j()).map(|j| (j * layout.symbol_stride) as f64 * t_s).collect()
            }
            SymbolTiming::Physical => layout.symbols.iter().map(|&m| m as f64 * t_s).collect(),
        };
        Self::product(&freqs, &times)
    }

    /// Shifts both coordinates to zero mean.
    pub fn centered(&self) -> Self {
        let n = self.points.len().max(1) as f64;
        let fm = self.points.iter().map(|p| p.0).sum::<f64>() / n;
        let tm = self.points.iter().map(|p| p.1).sum::<f64>() / n;
        Self { points: self.points.iter().map(|&(f, t)| (f - fm, t - tm)).collect() }
    }
}

/// Condition number of the unit-diagonal rescaling of `f`, so the
/// delay and Doppler units cancel.
fn condition_number(f: &FisherMatrix) -> f64 {
    let (a, b, d) = (f[0][0], f[0][1], f[1][1]);
    if !(a > 0.0 && d > 0.0) {
        return f64::INFINITY;
    }
    let rho = (b / (a * d).sqrt()).abs();
    if rho >= 1.0 {
        f64::INFINITY
    } else {
        (1.0 + rho) / (1.0 - rho)
    }
}

/// Fisher matrix and its inverse for the given lattice.
///
/// `F = (2/sigma^2) sum Re(ds* ds)` with unit-magnitude transmit symbols,
/// so `F_tt = k sum f^2`, `F_ff = k sum t^2`, `F_tf = -k sum f t`,
/// `k = 2 gamma xi^2 (2 pi)^2`.
pub fn crlb_numeric_fisher(
    lattice: &FisherLattice,
    snr_linear: f64,
    attenuation: f64,
    f_c: f64,
    speed_of_light: f64,
) -> Result<CrlbReport> {
    if !positive(snr_linear) || !positive(attenuation) {
        return Err(IsacError::Config(format!(
            "SNR {snr_linear} and attenuation {attenuation} must be positive"
        )));
    }
    if lattice.points.is_empty() {
        return Err(IsacError::EmptyRequest("Fisher lattice has no points"));
    }
    let (mut sff, mut stt, mut sft) = (0.0, 0.0, 0.0);
    for &(f, t) in &lattice.points {
        sff += f * f;
        stt += t * t;
        sft += f * t;
    }
    let k = 2.0 * snr_linear * attenuation * attenuation * (2.0 * PI).powi(2);
    let fisher = [[k * sff, -k * sft], [-k * sft, k * stt]];
    let det = fisher[0][0] * fisher[1][1] - fisher[0][1] * fisher[1][0];
    let cond = condition_number(&fisher);
    if !positive(det) || cond > 1e14 {
        return Err(IsacError::Degenerate {
            reason: "singular Fisher matrix".into(),
            condition: cond,
        });
    }
    let crlb_tau = fisher[1][1] / det;
    let crlb_fd = fisher[0][0] / det;
    let c2 = speed_of_light * speed_of_light;
    Ok(CrlbReport::new(
        c2 / 4.0 * crlb_tau,
        c2 / (4.0 * f_c * f_c) * crlb_fd,
        CrlbMethod::NumericFisher,
        Some(fisher),
    ))
}

/// Numeric bound for the occupied lattice of `layout`.
pub fn crlb_for_layout(
    params: &OfdmParams,
    layout: &GridLayout,
    timing: SymbolTiming,
    snr_linear: f64,
    attenuation: f64,
) -> Result<CrlbReport> {
    CrlbInputs::new(params, layout, snr_linear, attenuation).check()?;
    let lattice = FisherLattice::from_layout(params, layout, timing);
    crlb_numeric_fisher(&lattice, snr_linear, attenuation, params.f_c, params.speed_of_light)
}
