//! Single point-target echo: attenuation, two-way delay, Doppler and
//! complex AWGN.
//!
//! The symbol-domain model multiplies every occupied cell `(k, m)` by
//!
//! ```text
//! xi * exp(j 2pi f_d t_m) * exp(-j 2pi k df tau)
//! ```
//!
//! where `t_m` is the slow-time position of the column under the
//! configured [`SymbolTiming`]. With `CombUniform`, the j-th DMRS symbol
//! sits at `j * K_symbol * T_s`; with `Physical`, at `m * T_s`.
//! The time-domain path delays and Doppler-rotates the sample stream
//! directly and serves as an independent oracle for on-grid targets.
//!
//! Noise is circular complex Gaussian with total variance
//! `sigma^2 = A^2 / gamma`, `A = 1` for unit-magnitude symbols.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{config_err, IsacError, Result};
use crate::ofdm::SampleStream;
use crate::refsig::{OfdmParams, ResourceGrid, SymbolTiming};
use crate::Cf64;

/// The single reflecting target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetScenario {
    /// Range R, meters.
    pub range_m: f64,
    /// Radial velocity v, m/s.
    pub velocity_mps: f64,
    /// Attenuation factor ξ.
    pub attenuation: f64,
    /// γ = A²/σ² in dB.
    pub snr_db: f64,
}

impl Default for TargetScenario {
    fn default() -> Self {
        Self { range_m: 48.0, velocity_mps: 18.0, attenuation: 1.0, snr_db: 10.0 }
    }
}

impl TargetScenario {
    pub fn snr_linear(&self) -> f64 {
        10f64.powf(self.snr_db / 10.0)
    }

    /// Complex noise variance σ² for unit symbol amplitude.
    pub fn noise_variance(&self) -> f64 {
        1.0 / self.snr_linear()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.range_m.is_finite() && self.range_m >= 0.0) {
            return Err(config_err(format!(
                "range_m must be finite and >= 0, got {}",
                self.range_m
            )));
        }
        if !self.velocity_mps.is_finite() {
            return Err(config_err("velocity_mps must be finite"));
        }
        if !(self.attenuation.is_finite() && self.attenuation > 0.0) {
            return Err(config_err(format!("attenuation must be > 0, got {}", self.attenuation)));
        }
        let g = self.snr_linear();
        if !(g.is_finite() && g > 0.0) && self.snr_db != f64::INFINITY {
            return Err(config_err(format!("SNR must be > 0 (linear), got {} dB", self.snr_db)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelOptions {
    pub timing: SymbolTiming,
    /// Add AWGN. Off gives the noiseless echo.
    pub noise: bool,
    /// Also put noise on unoccupied cells.
    pub noise_on_unoccupied: bool,
}

impl Default for ChannelOptions {
    fn default() -> Self {
        Self { timing: SymbolTiming::CombUniform, noise: true, noise_on_unoccupied: false }
    }
}

/// Slow-time position (seconds) of every grid column that carries an
/// occupied lattice symbol.
pub(crate) fn column_times(
    grid: &ResourceGrid,
    params: &OfdmParams,
    timing: SymbolTiming,
) -> Vec<Option<f64>> {
    let t_s = params.t_total();
    let mut times = vec![None; grid.m_symbols()];
    for (j, &m) in grid.layout.symbols.iter().enumerate() {
        times[m] = Some(match timing {
            SymbolTiming::CombUniform => (j * grid.layout.symbol_stride) as f64 * t_s,
            SymbolTiming::Physical => m as f64 * t_s,
        });
    }
    times
}

/// Noiseless echo of `grid`.
pub fn echo(
    grid: &ResourceGrid,
    params: &OfdmParams,
    target: &TargetScenario,
    timing: SymbolTiming,
) -> Result<ResourceGrid> {
    params.validate()?;
    grid.check_params(params)?;
    target.validate()?;
    let tau = params.delay_of(target.range_m);
    let f_d = params.doppler_of(target.velocity_mps);
    let times = column_times(grid, params, timing);

    let mut out = grid.clone();
    for ((k, m), z) in out.cells.indexed_iter_mut() {
        if !grid.occupancy[[k, m]] {
            continue;
        }
        let t = times[m].ok_or_else(|| {
            IsacError::Shape(format!("occupied cell ({k}, {m}) outside the grid layout"))
        })?;
        let phase = TAU * (f_d * t - k as f64 * params.delta_f * tau);
        *z *= Cf64::from_polar(target.attenuation, phase);
    }
    Ok(out)
}

/// Adds circular complex Gaussian noise of total variance `variance`,
/// visiting cells symbol by symbol.
pub fn add_awgn<R: Rng + ?Sized>(
    grid: &mut ResourceGrid,
    variance: f64,
    on_unoccupied: bool,
    rng: &mut R,
) {
    let sigma = (variance / 2.0).sqrt();
    for m in 0..grid.m_symbols() {
        for k in 0..grid.n_subcarriers() {
            if on_unoccupied || grid.occupancy[[k, m]] {
                grid.cells[[k, m]] += complex_normal(rng, sigma);
            }
        }
    }
}

fn complex_normal<R: Rng + ?Sized>(rng: &mut R, sigma: f64) -> Cf64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Cf64::new(re * sigma, im * sigma)
}

/// Symbol-domain echo channel.
pub fn apply_symbol_domain(
    grid: &ResourceGrid,
    params: &OfdmParams,
    target: &TargetScenario,
    opts: &ChannelOptions,
    noise_seed: u64,
) -> Result<ResourceGrid> {
    let mut rx = echo(grid, params, target, opts.timing)?;
    if opts.noise {
        let mut rng = ChaCha8Rng::seed_from_u64(noise_seed);
        add_awgn(&mut rx, target.noise_variance(), opts.noise_on_unoccupied, &mut rng);
    }
    Ok(rx)
}

/// Output of the time-domain oracle.
#[derive(Debug, Clone)]
pub struct TimeDomainEcho {
    pub stream: SampleStream,
    /// Applied delay, samples.
    pub delay_samples: usize,
    /// Applied minus requested delay, seconds.
    pub delay_rounding_s: f64,
}

/// Integer-sample time-domain echo: delays the stream by
/// `round(tau / dt)` samples (zero-filled head), rotates sample `i` by
/// `exp(j 2pi f_d i dt)`, scales by ξ and optionally adds AWGN of variance
/// σ² per sample.
pub fn apply_time_domain_oracle(
    stream: &SampleStream,
    params: &OfdmParams,
    target: &TargetScenario,
    noise_seed: Option<u64>,
) -> Result<TimeDomainEcho> {
    target.validate()?;
    let dt = stream.sample_interval;
    let tau = params.delay_of(target.range_m);
    let delay = (tau / dt).round() as usize;
    let len = stream.samples.len();
    if delay >= len {
        return Err(IsacError::OutOfWindow { delay, len });
    }
    let f_d = params.doppler_of(target.velocity_mps);

    let mut samples = vec![Cf64::new(0.0, 0.0); len];
    for (i, out) in samples.iter_mut().enumerate().skip(delay) {
        let rot = Cf64::from_polar(target.attenuation, TAU * f_d * i as f64 * dt);
        *out = stream.samples[i - delay] * rot;
    }
    if let Some(seed) = noise_seed {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sigma = (target.noise_variance() / 2.0).sqrt();
        samples.iter_mut().for_each(|z| *z += complex_normal(&mut rng, sigma));
    }
    Ok(TimeDomainEcho {
        stream: SampleStream { samples, ..stream.clone() },
        delay_samples: delay,
        delay_rounding_s: delay as f64 * dt - tau,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ofdm::modulate;
    use crate::refsig::{build_data_grid, build_dmrs_grid, DmrsConfig};

    fn quiet(range_m: f64, velocity_mps: f64) -> TargetScenario {
        TargetScenario { range_m, velocity_mps, attenuation: 1.0, snr_db: 10.0 }
    }

    const NOISELESS: ChannelOptions = ChannelOptions {
        timing: SymbolTiming::CombUniform,
        noise: false,
        noise_on_unoccupied: false,
    };

    #[test]
    fn identity_channel() {
        let p = OfdmParams::reference();
        let g = build_dmrs_grid(&p, &DmrsConfig::type_a(140)).unwrap();
        let rx = apply_symbol_domain(&g, &p, &quiet(0.0, 0.0), &NOISELESS, 0).unwrap();
        assert_eq!(rx, g);
    }

    #[test]
    fn one_range_bin_phase_step() {
        let p = OfdmParams::reference();
        let g = build_dmrs_grid(&p, &DmrsConfig::type_a(140)).unwrap();
        let n_ext = g.layout.n_j() as f64;
        let bin = p.speed_of_light / (2.0 * n_ext * 2.0 * p.delta_f);
        let rx = apply_symbol_domain(&g, &p, &quiet(bin, 0.0), &NOISELESS, 0).unwrap();
        let m = g.layout.symbols[0];
        let ratio = |k: usize| rx.cells[[k, m]] / g.cells[[k, m]];
        for w in g.layout.subcarriers.windows(2) {
            let step = (ratio(w[1]) / ratio(w[0])).arg();
            assert!((step + TAU / n_ext).abs() < 1e-9, "step {step}");
        }
    }

    #[test]
    fn magnitude_scales_with_attenuation() {
        let p = OfdmParams::reference();
        let g = build_data_grid(&p, 4).unwrap();
        let tgt = TargetScenario { attenuation: 0.3, ..quiet(77.0, -12.0) };
        let rx = apply_symbol_domain(&g, &p, &tgt, &NOISELESS, 0).unwrap();
        for (a, b) in rx.cells.iter().zip(g.cells.iter()) {
            assert!((a.norm() - 0.3 * b.norm()).abs() < 1e-12);
        }
    }

    #[test]
    fn timing_models_differ_only_in_doppler() {
        let p = OfdmParams::reference();
        let g = build_dmrs_grid(&p, &DmrsConfig::type_a(140)).unwrap();
        let phys = ChannelOptions { timing: SymbolTiming::Physical, ..NOISELESS };
        let a = apply_symbol_domain(&g, &p, &quiet(30.0, 0.0), &NOISELESS, 0).unwrap();
        let b = apply_symbol_domain(&g, &p, &quiet(30.0, 0.0), &phys, 0).unwrap();
        assert_eq!(a, b);
        let a = apply_symbol_domain(&g, &p, &quiet(30.0, 10.0), &NOISELESS, 0).unwrap();
        let b = apply_symbol_domain(&g, &p, &quiet(30.0, 10.0), &phys, 0).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn noise_statistics_and_reproducibility() {
        let p = OfdmParams::from_durations(120e3, 1024, 140, 0.57e-6, 24e9).unwrap();
        let g = build_data_grid(&p, 2).unwrap();
        let tgt = TargetScenario { snr_db: 3.0, ..quiet(0.0, 0.0) };
        let opts = ChannelOptions { noise: true, ..NOISELESS };
        let a = apply_symbol_domain(&g, &p, &tgt, &opts, 11).unwrap();
        let b = apply_symbol_domain(&g, &p, &tgt, &opts, 11).unwrap();
        assert_eq!(a, b);
        let c = apply_symbol_domain(&g, &p, &tgt, &opts, 12).unwrap();
        assert_ne!(a, c);

        let cells = g.cells.len() as f64;
        assert!(cells >= 1e5);
        let var: f64 =
            a.cells.iter().zip(g.cells.iter()).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>()
                / cells;
        let sigma2 = tgt.noise_variance();
        assert!((var - sigma2).abs() / sigma2 < 0.02, "var {var} vs {sigma2}");
    }

    #[test]
    fn unoccupied_noise_toggle() {
        let p = OfdmParams::from_durations(120e3, 24, 14, 0.57e-6, 24e9).unwrap();
        let g = build_dmrs_grid(&p, &DmrsConfig::type_a(14)).unwrap();
        let opts = ChannelOptions { noise: true, ..NOISELESS };
        let rx = apply_symbol_domain(&g, &p, &quiet(0.0, 0.0), &opts, 1).unwrap();
        assert_eq!(rx.cells[[1, 0]], Cf64::new(0.0, 0.0));
        let opts = ChannelOptions { noise_on_unoccupied: true, ..opts };
        let rx = apply_symbol_domain(&g, &p, &quiet(0.0, 0.0), &opts, 1).unwrap();
        assert_ne!(rx.cells[[1, 0]], Cf64::new(0.0, 0.0));
    }

    #[test]
    fn rejects_bad_target() {
        let p = OfdmParams::reference();
        let g = build_dmrs_grid(&p, &DmrsConfig::type_a(140)).unwrap();
        for tgt in [
            TargetScenario { snr_db: f64::NEG_INFINITY, ..quiet(1.0, 0.0) },
            TargetScenario { snr_db: f64::NAN, ..quiet(1.0, 0.0) },
            TargetScenario { attenuation: 0.0, ..quiet(1.0, 0.0) },
            quiet(-1.0, 0.0),
        ] {
            assert!(matches!(
                apply_symbol_domain(&g, &p, &tgt, &NOISELESS, 0),
                Err(IsacError::Config(_))
            ));
        }
    }

    #[test]
    fn time_domain_identity_and_delay() {
        let p = OfdmParams::from_durations(120e3, 64, 4, 0.57e-6, 24e9).unwrap();
        let g = build_data_grid(&p, 8).unwrap();
        let s = modulate(&g, &p).unwrap();
        let out = apply_time_domain_oracle(&s, &p, &quiet(0.0, 0.0), None).unwrap();
        assert_eq!(out.stream, s);

        let delay = 7;
        let range = delay as f64 * p.sample_interval() * p.speed_of_light / 2.0;
        let out = apply_time_domain_oracle(&s, &p, &quiet(range, 0.0), None).unwrap();
        assert_eq!(out.delay_samples, delay);
        assert!(out.delay_rounding_s.abs() < 1e-15);
        let xcorr = |lag: usize| -> f64 {
            (lag..s.len())
                .map(|i| out.stream.samples[i] * s.samples[i - lag].conj())
                .sum::<Cf64>()
                .norm()
        };
        let best = (0..40).max_by(|&a, &b| xcorr(a).total_cmp(&xcorr(b))).unwrap();
        assert_eq!(best, delay);
    }

    #[test]
    fn time_domain_out_of_window() {
        let p = OfdmParams::from_durations(120e3, 16, 1, 0.0, 24e9).unwrap();
        let s = modulate(&ResourceGrid::zeros(&p), &p).unwrap();
        let r = apply_time_domain_oracle(&s, &p, &quiet(1e4, 0.0), None);
        assert!(matches!(r, Err(IsacError::OutOfWindow { .. })));
    }
}
