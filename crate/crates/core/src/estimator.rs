//! 2D-FFT range/velocity estimation on the DMRS quotient grid.
//!
//! The received lattice is divided element-wise by the known transmit
//! symbols. An IFFT down a column turns the delay phase ramp into a peak at
//! `N_fft * K_carrier * df * tau`; an FFT along a row turns the Doppler ramp
//! into a peak at `M_fft * K_symbol * T_s * f_d`. Peak indices convert back
//! with
//!
//! ```text
//! R = ind * c / (2 N_fft K_carrier df)
//! v = ind * c / (2 M_fft K_symbol T_s f_c)
//! ```
//!
//! Under [`SymbolTiming::Physical`] the Doppler FFT runs over a zero-filled
//! length-M grid with stride `T_s`, so `K_symbol` drops out.

use ndarray::Array2;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{IsacError, Result};
use crate::refsig::{DmrsConfig, GridLayout, OfdmParams, ResourceGrid, SymbolTiming};
use crate::Cf64;

/// How the quotient is formed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuotientMode {
    /// rx / tx
    #[default]
    Divide,
    /// rx · conj(tx)
    ConjugateMultiply,
}

/// Element-wise ratio of received to transmitted symbols on the occupied
/// lattice, `N_J` rows by `M_J` columns.
#[derive(Debug, Clone, PartialEq)]
pub struct QuotientGrid {
    pub cells: Array2<Cf64>,
    pub layout: GridLayout,
    /// Frame length M of the grids this came from.
    pub m_symbols: usize,
}

pub fn extract_quotient(
    rx: &ResourceGrid,
    tx: &ResourceGrid,
    mode: QuotientMode,
) -> Result<QuotientGrid> {
    if rx.cells.dim() != tx.cells.dim() {
        return Err(IsacError::Shape(format!(
            "rx {:?} vs tx {:?}",
            rx.cells.dim(),
            tx.cells.dim()
        )));
    }
    if rx.occupancy != tx.occupancy || rx.layout != tx.layout {
        return Err(IsacError::Shape("rx and tx occupancy differ".into()));
    }
    let layout = tx.layout.clone();
    let mut cells = Array2::zeros((layout.n_j(), layout.m_j()));
    for (i, &k) in layout.subcarriers.iter().enumerate() {
        for (j, &m) in layout.symbols.iter().enumerate() {
            let (r, t) = (rx.cells[[k, m]], tx.cells[[k, m]]);
            if t.norm_sqr() == 0.0 {
                return Err(IsacError::Shape(format!("zero transmit symbol at ({k}, {m})")));
            }
            cells[[i, j]] = match mode {
                QuotientMode::Divide => r / t,
                QuotientMode::ConjugateMultiply => r * t.conj(),
            };
        }
    }
    Ok(QuotientGrid { cells, layout, m_symbols: tx.m_symbols() })
}

/// Which quotient lines feed the range and Doppler profiles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Combining {
    /// IFFT of one extracted column, FFT of one extracted row.
    SingleLine { column: usize, row: usize },
    /// Magnitude sum over all columns / all rows.
    IncoherentSum,
}

impl Default for Combining {
    fn default() -> Self {
        Self::SingleLine { column: 0, row: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatorOptions {
    pub timing: SymbolTiming,
    pub combining: Combining,
    /// Range IFFT length; defaults to N_J.
    pub range_fft_len: Option<usize>,
    /// Doppler FFT length; defaults to M_J (comb-uniform) or M (physical).
    pub doppler_fft_len: Option<usize>,
    /// Map Doppler bins above the midpoint to negative velocities.
    pub signed_velocity: bool,
    /// Parabolic refinement of both peaks.
    pub interpolate: bool,
}

impl Default for EstimatorOptions {
    fn default() -> Self {
        Self {
            timing: SymbolTiming::CombUniform,
            combining: Combining::default(),
            range_fft_len: None,
            doppler_fft_len: None,
            signed_velocity: false,
            interpolate: false,
        }
    }
}

impl EstimatorOptions {
    /// Zero-pads both transforms by `factor` relative to their natural
    /// lengths for `q`.
    pub fn padded(mut self, q: &QuotientGrid, factor: usize) -> Self {
        self.range_fft_len = Some(q.layout.n_j() * factor);
        self.doppler_fft_len = Some(natural_doppler_len(q, self.timing) * factor);
        self
    }
}

fn natural_doppler_len(q: &QuotientGrid, timing: SymbolTiming) -> usize {
    match timing {
        SymbolTiming::CombUniform => q.layout.m_j(),
        SymbolTiming::Physical => q.m_symbols,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensingEstimate {
    pub range_index: usize,
    pub velocity_index: usize,
    pub range_m: f64,
    pub velocity_mps: f64,
    /// Height of the range-profile peak.
    pub peak_magnitude: f64,
    pub range_bin_m: f64,
    pub velocity_bin_mps: f64,
    pub range_profile: Vec<f64>,
    pub doppler_profile: Vec<f64>,
}

pub fn estimate(
    q: &QuotientGrid,
    params: &OfdmParams,
    opts: &EstimatorOptions,
) -> Result<SensingEstimate> {
    let (n_j, m_j) = q.cells.dim();
    if n_j == 0 || m_j == 0 {
        return Err(IsacError::EmptyRequest("quotient grid has no occupied cells"));
    }
    let n_fft = opts.range_fft_len.unwrap_or(n_j);
    let natural = natural_doppler_len(q, opts.timing);
    let m_fft = opts.doppler_fft_len.unwrap_or(natural);
    if n_fft < n_j || m_fft < natural {
        return Err(IsacError::Config(format!(
            "FFT lengths ({n_fft}, {m_fft}) shorter than the lattice ({n_j}, {natural})"
        )));
    }
    let slots: Vec<usize> = match opts.timing {
        SymbolTiming::CombUniform => (0..m_j).collect(),
        SymbolTiming::Physical => q.layout.symbols.clone(),
    };
    let (columns, rows): (Vec<usize>, Vec<usize>) = match opts.combining {
        Combining::SingleLine { column, row } => {
            if column >= m_j || row >= n_j {
                return Err(IsacError::Config(format!(
                    "line ({column}, {row}) outside the {n_j}x{m_j} lattice"
                )));
            }
            (vec![column], vec![row])
        }
        Combining::IncoherentSum => ((0..m_j).collect(), (0..n_j).collect()),
    };

    let mut planner = FftPlanner::new();
    let ifft = planner.plan_fft_inverse(n_fft);
    let fft = planner.plan_fft_forward(m_fft);

    let mut range_profile = vec![0.0; n_fft];
    let mut buf = vec![Cf64::new(0.0, 0.0); n_fft];
    for &j in &columns {
        buf.fill(Cf64::new(0.0, 0.0));
        for (b, z) in buf.iter_mut().zip(q.cells.column(j)) {
            *b = *z;
        }
        ifft.process(&mut buf);
        for (acc, z) in range_profile.iter_mut().zip(&buf) {
            *acc += z.norm();
        }
    }

    let mut doppler_profile = vec![0.0; m_fft];
    let mut buf = vec![Cf64::new(0.0, 0.0); m_fft];
    for &i in &rows {
        buf.fill(Cf64::new(0.0, 0.0));
        for (&slot, z) in slots.iter().zip(q.cells.row(i)) {
            buf[slot] = *z;
        }
        fft.process(&mut buf);
        for (acc, z) in doppler_profile.iter_mut().zip(&buf) {
            *acc += z.norm();
        }
    }

    let range_index = argmax(&range_profile).ok_or(IsacError::NoPeak("range profile is zero"))?;
    let velocity_index =
        argmax(&doppler_profile).ok_or(IsacError::NoPeak("Doppler profile is zero"))?;

    let c = params.speed_of_light;
    let k_sym = match opts.timing {
        SymbolTiming::CombUniform => q.layout.symbol_stride,
        SymbolTiming::Physical => 1,
    };
    let range_bin_m = c / (2.0 * n_fft as f64 * q.layout.carrier_stride as f64 * params.delta_f);
    let velocity_bin_mps = c / (2.0 * m_fft as f64 * k_sym as f64 * params.t_total() * params.f_c);

    let refine = |profile: &[f64], idx: usize| {
        if opts.interpolate {
            idx as f64 + parabolic_offset(profile, idx)
        } else {
            idx as f64
        }
    };
    let range_pos = refine(&range_profile, range_index);
    let mut velocity_pos = refine(&doppler_profile, velocity_index);
    if opts.signed_velocity && velocity_pos > m_fft as f64 / 2.0 {
        velocity_pos -= m_fft as f64;
    }

    Ok(SensingEstimate {
        range_index,
        velocity_index,
        range_m: range_pos * range_bin_m,
        velocity_mps: velocity_pos * velocity_bin_mps,
        peak_magnitude: range_profile[range_index],
        range_bin_m,
        velocity_bin_mps,
        range_profile,
        doppler_profile,
    })
}

/// Index of the first maximum; `None` when the profile is identically zero.
fn argmax(profile: &[f64]) -> Option<usize> {
    let (idx, &best) = profile.iter().enumerate().fold((0, &f64::NEG_INFINITY), |acc, (i, v)| {
        if *v > *acc.1 {
            (i, v)
        } else {
            acc
        }
    });
    (best > 0.0).then_some(idx)
}

/// Vertex of the parabola through the peak and its circular neighbours.
fn parabolic_offset(profile: &[f64], idx: usize) -> f64 {
    let n = profile.len();
    if n < 3 {
        return 0.0;
    }
    let left = profile[(idx + n - 1) % n];
    let right = profile[(idx + 1) % n];
    let denom = left - 2.0 * profile[idx] + right;
    if denom == 0.0 {
        0.0
    } else {
        (0.5 * (left - right) / denom).clamp(-0.5, 0.5)
    }
}

/// Unambiguous window and resolution of the sensing lattice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensingBounds {
    pub r_max: f64,
    pub v_max: f64,
    pub delta_r: f64,
    pub delta_v: f64,
}

impl SensingBounds {
    /// Direct evaluation of
    ///
    /// ```text
    /// R_max = c / (2 K_c df)          dR = c / (2 N K_c df)
    /// v_max = c / (2 K_s T_s f_c)     dv = c / (2 M K_s T_s f_c)
    /// ```
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        speed_of_light: f64,
        delta_f: f64,
        t_total: f64,
        f_c: f64,
        n: usize,
        m: usize,
        comb_carrier: usize,
        comb_symbol: usize,
    ) -> Self {
        let c = speed_of_light;
        let kc = comb_carrier as f64;
        let ks = comb_symbol as f64;
        Self {
            r_max: c / (2.0 * kc * delta_f),
            delta_r: c / (2.0 * n as f64 * kc * delta_f),
            v_max: c / (2.0 * ks * t_total * f_c),
            delta_v: c / (2.0 * m as f64 * ks * t_total * f_c),
        }
    }

    /// Bounds of an extracted lattice, unpadded.
    pub fn for_layout(params: &OfdmParams, layout: &GridLayout, timing: SymbolTiming) -> Self {
        let (m, k_sym) = match timing {
            SymbolTiming::CombUniform => (layout.m_j(), layout.symbol_stride),
            SymbolTiming::Physical => (params.m_symbols, 1),
        };
        Self::from_parts(
            params.speed_of_light,
            params.delta_f,
            params.t_total(),
            params.f_c,
            layout.n_j(),
            m,
            layout.carrier_stride,
            k_sym,
        )
    }

    /// Whether a target lies in the unambiguous window.
    pub fn contains(&self, range_m: f64, velocity_mps: f64, signed_velocity: bool) -> bool {
        let v_ok = if signed_velocity {
            velocity_mps.abs() < self.v_max / 2.0
        } else {
            (0.0..self.v_max).contains(&velocity_mps)
        };
        (0.0..self.r_max).contains(&range_m) && v_ok
    }
}

/// Bounds for a DMRS configuration.
pub fn bounds(params: &OfdmParams, cfg: &DmrsConfig, timing: SymbolTiming) -> SensingBounds {
    let layout = GridLayout {
        subcarriers: cfg.subcarriers(params.n_subcarriers),
        symbols: cfg.symbol_positions.clone(),
        carrier_stride: cfg.comb_carrier,
        symbol_stride: cfg.comb_symbol,
    };
    SensingBounds::for_layout(params, &layout, timing)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{apply_symbol_domain, ChannelOptions, TargetScenario};
    use crate::refsig::{build_dmrs_grid, DmrsConfig};
    use proptest::prelude::*;

    fn noiseless(timing: SymbolTiming) -> ChannelOptions {
        ChannelOptions { timing, noise: false, noise_on_unoccupied: false }
    }

    fn target(range_m: f64, velocity_mps: f64) -> TargetScenario {
        TargetScenario { range_m, velocity_mps, attenuation: 1.0, snr_db: 10.0 }
    }

    fn quotient_for(
        params: &OfdmParams,
        cfg: &DmrsConfig,
        tgt: &TargetScenario,
        timing: SymbolTiming,
    ) -> QuotientGrid {
        let tx = build_dmrs_grid(params, cfg).unwrap();
        let rx = apply_symbol_domain(&tx, params, tgt, &noiseless(timing), 0).unwrap();
        extract_quotient(&rx, &tx, QuotientMode::Divide).unwrap()
    }

    #[test]
    fn identity_quotient() {
        let p = OfdmParams::reference();
        let cfg = DmrsConfig::type_a(140);
        let tx = build_dmrs_grid(&p, &cfg).unwrap();
        let q = extract_quotient(&tx, &tx, QuotientMode::Divide).unwrap();
        assert_eq!(q.cells.dim(), (128, 40));
        assert!(q.cells.iter().all(|z| (z - Cf64::new(1.0, 0.0)).norm() < 1e-12));
        let est = estimate(&q, &p, &EstimatorOptions::default()).unwrap();
        assert_eq!((est.range_index, est.velocity_index), (0, 0));
        assert_eq!((est.range_m, est.velocity_mps), (0.0, 0.0));

        let q = extract_quotient(&tx, &tx, QuotientMode::ConjugateMultiply).unwrap();
        assert!(q.cells.iter().all(|z| (z - Cf64::new(1.0, 0.0)).norm() < 1e-12));
    }

    #[test]
    fn scalar_attenuation() {
        let p = OfdmParams::reference();
        let cfg = DmrsConfig::type_a(140);
        let tgt = TargetScenario { attenuation: 0.5, ..target(0.0, 0.0) };
        let q = quotient_for(&p, &cfg, &tgt, SymbolTiming::CombUniform);
        assert!(q.cells.iter().all(|z| (z - Cf64::new(0.5, 0.0)).norm() < 1e-12));
    }

    #[test]
    fn noiseless_quotient_is_rank_one() {
        let p = OfdmParams::reference();
        let cfg = DmrsConfig::type_a(140);
        let q = quotient_for(&p, &cfg, &target(48.0, 18.0), SymbolTiming::CombUniform);
        // largest singular value by power iteration on q^H q
        let a = &q.cells;
        let mut v = vec![Cf64::new(1.0, 0.0); a.ncols()];
        let mut sigma1_sq = 0.0;
        for _ in 0..30 {
            let u: Vec<Cf64> =
                (0..a.nrows()).map(|i| (0..a.ncols()).map(|j| a[[i, j]] * v[j]).sum()).collect();
            let w: Vec<Cf64> = (0..a.ncols())
                .map(|j| (0..a.nrows()).map(|i| a[[i, j]].conj() * u[i]).sum())
                .collect();
            let norm = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            sigma1_sq = norm / v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            v = w.into_iter().map(|z| z / norm).collect();
        }
        let frob_sq: f64 = a.iter().map(|z| z.norm_sqr()).sum();
        // rank one: all energy in the leading singular value
        assert!((sigma1_sq / frob_sq - 1.0).abs() < 1e-10);
    }

    #[test]
    fn range_48m_with_512_subcarriers() {
        let p = OfdmParams::from_durations(120e3, 512, 14, 0.57e-6, 24e9).unwrap();
        let cfg = DmrsConfig::type_a(14);
        let q = quotient_for(&p, &cfg, &target(48.0, 0.0), SymbolTiming::CombUniform);
        let est = estimate(&q, &p, &EstimatorOptions::default()).unwrap();
        assert_eq!(est.range_index, 20);
        assert!((est.range_bin_m - 2.44140625).abs() < 1e-12);
        assert!((est.range_m - 48.828125).abs() < 1e-9);
        assert_eq!(format!("{:.2}", est.range_m), "48.83");
    }

    #[test]
    fn velocity_18_both_layouts() {
        let p = OfdmParams::reference();
        let cfg = DmrsConfig::type_a(140);
        let tgt = target(0.0, 18.0);

        let q = quotient_for(&p, &cfg, &tgt, SymbolTiming::Physical);
        let opts = EstimatorOptions { timing: SymbolTiming::Physical, ..Default::default() };
        let est = estimate(&q, &p, &opts).unwrap();
        assert!((est.velocity_bin_mps - 5.00521376434).abs() < 1e-9);
        assert_eq!(est.velocity_index, 4);
        assert!((est.velocity_mps - 20.0208550574).abs() < 1e-8);

        let q = quotient_for(&p, &cfg, &tgt, SymbolTiming::CombUniform);
        let opts = EstimatorOptions { doppler_fft_len: Some(140), ..Default::default() };
        let est = estimate(&q, &p, &opts).unwrap();
        assert!((est.velocity_bin_mps - 1.66840458811).abs() < 1e-9);
        assert_eq!(est.velocity_index, 11);
        assert!((est.velocity_mps - 18.3524504692).abs() < 1e-8);
    }

    #[test]
    fn bounds_from_equations() {
        // 3e8 / (2 * 2 * 1.2e5) = 625
        let b = SensingBounds::from_parts(3e8, 120e3, 8.92e-6, 24e9, 256, 140, 2, 3);
        assert!((b.r_max - 625.0).abs() < 1e-9);
        assert!((b.delta_r - 2.44140625).abs() < 1e-12);
        assert!((b.delta_v - 1.6683).abs() < 5e-5);
        assert!((b.v_max - 233.5).abs() < 0.1);
        assert!((b.r_max - 256.0 * b.delta_r).abs() < 1e-9);
        assert!((b.v_max - 140.0 * b.delta_v).abs() < 1e-9);

        let p = OfdmParams::reference();
        let b = bounds(&p, &DmrsConfig::type_a(140), SymbolTiming::CombUniform);
        assert!((b.delta_r - 4.8828125).abs() < 1e-12);
        assert!((b.delta_v - 5.83941605839).abs() < 1e-9);
        assert!(b.contains(48.0, 18.0, false));
        assert!(!b.contains(700.0, 18.0, false));
        assert!(b.contains(48.0, -18.0, true));
        assert!(!b.contains(48.0, -18.0, false));
    }

    #[test]
    fn parameter_trends() {
        let b = |df: f64, n: usize, fc: f64| {
            SensingBounds::from_parts(3e8, df, 8.92e-6, fc, n, 140, 2, 3)
        };
        assert!((b(120e3, 512, 24e9).delta_r - b(120e3, 256, 24e9).delta_r / 2.0).abs() < 1e-12);
        assert!((b(240e3, 256, 24e9).r_max - b(120e3, 256, 24e9).r_max / 2.0).abs() < 1e-12);
        assert!(b(120e3, 256, 24e9).delta_v < b(120e3, 256, 5.9e9).delta_v);
        assert!(b(120e3, 256, 24e9).v_max < b(120e3, 256, 5.9e9).v_max);
    }

    #[test]
    fn zero_quotient_has_no_peak() {
        let p = OfdmParams::reference();
        let cfg = DmrsConfig::type_a(140);
        let mut q = quotient_for(&p, &cfg, &target(0.0, 0.0), SymbolTiming::CombUniform);
        q.cells.fill(Cf64::new(0.0, 0.0));
        assert!(matches!(
            estimate(&q, &p, &EstimatorOptions::default()),
            Err(IsacError::NoPeak(_))
        ));
    }

    #[test]
    fn occupancy_mismatch() {
        let p = OfdmParams::reference();
        let a = build_dmrs_grid(&p, &DmrsConfig::type_a(140)).unwrap();
        let b = build_dmrs_grid(&p, &DmrsConfig { carrier_offset: 1, ..DmrsConfig::type_a(140) })
            .unwrap();
        assert!(matches!(extract_quotient(&a, &b, QuotientMode::Divide), Err(IsacError::Shape(_))));
    }

    #[test]
    fn signed_and_interpolated() {
        let p = OfdmParams::reference();
        let cfg = DmrsConfig::type_a(140);
        let b = bounds(&p, &cfg, SymbolTiming::CombUniform);
        let v = -5.0 * b.delta_v;
        let q = quotient_for(&p, &cfg, &target(0.0, v), SymbolTiming::CombUniform);
        let opts = EstimatorOptions { signed_velocity: true, ..Default::default() };
        let est = estimate(&q, &p, &opts).unwrap();
        assert_eq!(est.velocity_index, 35);
        assert!((est.velocity_mps - v).abs() < 1e-9);

        let r = 10.3 * b.delta_r;
        let q = quotient_for(&p, &cfg, &target(r, 0.0), SymbolTiming::CombUniform);
        let coarse = estimate(&q, &p, &EstimatorOptions::default()).unwrap();
        let fine = estimate(&q, &p, &EstimatorOptions { interpolate: true, ..Default::default() })
            .unwrap();
        assert!((fine.range_m - r).abs() < (coarse.range_m - r).abs());
    }

    #[test]
    fn padding_changes_bin_width() {
        let p = OfdmParams::reference();
        let cfg = DmrsConfig::type_a(140);
        let q = quotient_for(&p, &cfg, &target(48.0, 18.0), SymbolTiming::CombUniform);
        let base = estimate(&q, &p, &EstimatorOptions::default()).unwrap();
        let padded = estimate(&q, &p, &EstimatorOptions::default().padded(&q, 4)).unwrap();
        assert!((padded.range_bin_m - base.range_bin_m / 4.0).abs() < 1e-12);
        assert!((padded.range_m - 48.0).abs() <= padded.range_bin_m / 2.0 + 1e-9);
        let short = EstimatorOptions { range_fft_len: Some(64), ..Default::default() };
        assert!(estimate(&q, &p, &short).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn scale_invariance(
            r in 0.0f64..600.0,
            v in 0.0f64..230.0,
            mag in 1e-3f64..1e3,
            phase in 0.0f64..std::f64::consts::TAU,
            sum in any::<bool>(),
        ) {
            let p = OfdmParams::reference();
            let cfg = DmrsConfig::type_a(140);
            let q = quotient_for(&p, &cfg, &target(r, v), SymbolTiming::CombUniform);
            let opts = EstimatorOptions {
                combining: if sum { Combining::IncoherentSum } else { Combining::default() },
                ..Default::default()
            };
            let a = estimate(&q, &p, &opts).unwrap();
            let mut scaled = q.clone();
            scaled.cells.mapv_inplace(|z| z * Cf64::from_polar(mag, phase));
            let b = estimate(&scaled, &p, &opts).unwrap();
            prop_assert_eq!((a.range_index, a.velocity_index), (b.range_index, b.velocity_index));
        }

        #[test]
        fn off_grid_within_half_bin(fr in 0.0f64..0.999, fv in 0.0f64..0.999, ir in 0usize..127, iv in 0usize..39) {
            let p = OfdmParams::reference();
            let cfg = DmrsConfig::type_a(140);
            let b = bounds(&p, &cfg, SymbolTiming::CombUniform);
            let (r, v) = ((ir as f64 + fr) * b.delta_r, (iv as f64 + fv) * b.delta_v);
            let q = quotient_for(&p, &cfg, &target(r, v), SymbolTiming::CombUniform);
            let est = estimate(&q, &p, &EstimatorOptions::default()).unwrap();
            let eps = 1e-9;
            // circular distance: a target just below R_max may land on bin 0
            let dr = (est.range_m - r).abs().min(b.r_max - (est.range_m - r).abs());
            let dv = (est.velocity_mps - v).abs().min(b.v_max - (est.velocity_mps - v).abs());
            prop_assert!(dr <= b.delta_r / 2.0 + eps, "range err {} bin {}", dr, b.delta_r);
            prop_assert!(dv <= b.delta_v / 2.0 + eps, "velocity err {} bin {}", dv, b.delta_v);
        }
    }
}
