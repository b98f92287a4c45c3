//! Monte Carlo RMSE sweeps.
//!
//! Each sweep point runs `trials` independent end-to-end trials (grid,
//! echo, quotient, 2D-FFT) and compares the RMSE with the numeric-Fisher
//! root CRLB of the same lattice. Trial `t` of point `p` draws its noise
//! (and, for the data signal, its payload) from a ChaCha8 generator seeded
//! with `master_seed` on stream `p << 32 | t`, so results do not depend on
//! scheduling. Squared errors are summed in trial order with compensated
//! summation; parallel and serial runs are bitwise identical.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{apply_symbol_domain, ChannelOptions, TargetScenario};
use crate::crlb::crlb_for_layout;
use crate::error::{config_err, Result};
use crate::estimator::{
    estimate, extract_quotient, Combining, EstimatorOptions, QuotientMode, SensingBounds,
    SensingEstimate,
};
use crate::refsig::{build_data_grid, build_dmrs_grid, DmrsConfig, OfdmParams, ResourceGrid};
use crate::SymbolTiming;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignalKind {
    #[default]
    Dmrs,
    /// Random QPSK on every resource element.
    Data,
}

impl std::str::FromStr for SignalKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "dmrs" => Ok(Self::Dmrs),
            "data" => Ok(Self::Data),
            other => Err(format!("unknown signal `{other}` (dmrs|data)")),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    #[default]
    SnrDb,
    DeltaF,
    TTotal,
    NSubcarriers,
    MSymbols,
}

impl std::str::FromStr for SweepAxis {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "snr_db" => Ok(Self::SnrDb),
            "delta_f" => Ok(Self::DeltaF),
            "t_total" => Ok(Self::TTotal),
            "n_subcarriers" => Ok(Self::NSubcarriers),
            "m_symbols" => Ok(Self::MSymbols),
            other => Err(format!(
                "unknown sweep axis `{other}` (snr_db|delta_f|t_total|n_subcarriers|m_symbols)"
            )),
        }
    }
}

/// Treatment of gross outliers (|error| beyond a quarter of the
/// unambiguous window) in the RMSE.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutlierPolicy {
    #[default]
    Include,
    Exclude,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub params: OfdmParams,
    pub dmrs: DmrsConfig,
    pub target: TargetScenario,
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    pub trials: usize,
    pub master_seed: u64,
    pub signal: SignalKind,
    pub timing: SymbolTiming,
    pub combining: Combining,
    pub outliers: OutlierPolicy,
    /// Off runs every trial noiseless.
    pub noise: bool,
}

impl SweepSpec {
    /// Reference numerology, 48 m / 18 m/s target, SNR from -15 to 10 dB in
    /// 1 dB steps, 1000 trials per point.
    pub fn reference() -> Self {
        let params = OfdmParams::reference();
        Self {
            dmrs: DmrsConfig::type_a(params.m_symbols),
            params,
            target: TargetScenario::default(),
            axis: SweepAxis::SnrDb,
            values: (-15..=10).map(f64::from).collect(),
            trials: 1000,
            master_seed: 0,
            signal: SignalKind::Dmrs,
            timing: SymbolTiming::CombUniform,
            combining: Combining::default(),
            outliers: OutlierPolicy::Include,
            noise: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(config_err("trials must be >= 1"));
        }
        if self.values.is_empty() {
            return Err(config_err("sweep needs at least one value"));
        }
        if let Some(v) = self.values.iter().find(|v| !v.is_finite()) {
            return Err(config_err(format!("sweep value {v} is not finite")));
        }
        self.params.validate()?;
        self.dmrs.validate(&self.params)?;
        self.target.validate()
    }

    /// Numerology, DMRS placement and target at one sweep value.
    pub fn point(&self, value: f64) -> Result<(OfdmParams, DmrsConfig, TargetScenario)> {
        let mut params = self.params.clone();
        let mut dmrs = self.dmrs.clone();
        let mut target = self.target.clone();
        let count = |v: f64| -> Result<usize> {
            if v >= 1.0 && v.fract() == 0.0 {
                Ok(v as usize)
            } else {
                Err(config_err(format!("{v} is not a positive integer")))
            }
        };
        match self.axis {
            SweepAxis::SnrDb => target.snr_db = value,
            SweepAxis::DeltaF => params = params.with_delta_f(value),
            SweepAxis::TTotal => params = params.with_t_total(value),
            SweepAxis::NSubcarriers => params = params.with_subcarriers(count(value)?)?,
            SweepAxis::MSymbols => {
                params.m_symbols = count(value)?;
                dmrs = dmrs.resized(params.m_symbols);
            }
        }
        params.validate()?;
        dmrs.validate(&params)?;
        target.validate()?;
        Ok((params, dmrs, target))
    }

    fn estimator_options(&self) -> EstimatorOptions {
        EstimatorOptions { timing: self.timing, combining: self.combining, ..Default::default() }
    }

    fn channel_options(&self) -> ChannelOptions {
        ChannelOptions { timing: self.timing, noise: self.noise, noise_on_unoccupied: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub axis_value: f64,
    pub rmse_range_m: f64,
    pub rmse_velocity_mps: f64,
    pub root_crlb_range_m: f64,
    pub root_crlb_velocity_mps: f64,
    /// Fraction of trials flagged as gross outliers.
    pub fail_fraction: f64,
    /// Trials entering the RMSE.
    pub trials_used: usize,
    pub range_bin_m: f64,
    pub velocity_bin_mps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub axis: SweepAxis,
    pub signal: SignalKind,
    pub points: Vec<SweepPoint>,
}

/// Per-trial generator: `master_seed` on stream `point << 32 | trial`.
pub fn trial_rng(master_seed: u64, point: usize, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(((point as u64) << 32) | trial as u64);
    rng
}

/// (noise seed, payload seed) of one trial.
pub fn trial_seeds(master_seed: u64, point: usize, trial: usize) -> (u64, u64) {
    let mut rng = trial_rng(master_seed, point, trial);
    (rng.next_u64(), rng.next_u64())
}

/// One end-to-end trial: echo, quotient, 2D-FFT.
pub fn simulate_once(
    params: &OfdmParams,
    tx: &ResourceGrid,
    target: &TargetScenario,
    channel: &ChannelOptions,
    estimator: &EstimatorOptions,
    noise_seed: u64,
) -> Result<SensingEstimate> {
    let rx = apply_symbol_domain(tx, params, target, channel, noise_seed)?;
    let q = extract_quotient(&rx, tx, QuotientMode::Divide)?;
    estimate(&q, params, estimator)
}

struct Outcome {
    err_range: f64,
    err_velocity: f64,
    fail: bool,
}

/// Compensated (Neumaier) sum.
fn neumaier<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

fn run_point(spec: &SweepSpec, index: usize, value: f64, parallel: bool) -> Result<SweepPoint> {
    let (params, dmrs, target) = spec.point(value)?;
    let channel = spec.channel_options();
    let est_opts = spec.estimator_options();
    let dmrs_grid = match spec.signal {
        SignalKind::Dmrs => Some(build_dmrs_grid(&params, &dmrs)?),
        SignalKind::Data => None,
    };
    // the lattice of the data grid does not depend on its payload
    let layout = match &dmrs_grid {
        Some(g) => g.layout.clone(),
        None => build_data_grid(&params, 0)?.layout,
    };
    let bounds = SensingBounds::for_layout(&params, &layout, spec.timing);

    let trial = |t: usize| -> Result<Outcome> {
        let (noise_seed, data_seed) = trial_seeds(spec.master_seed, index, t);
        let owned;
        let tx = match &dmrs_grid {
            Some(g) => g,
            None => {
                owned = build_data_grid(&params, data_seed)?;
                &owned
            }
        };
        let est = simulate_once(&params, tx, &target, &channel, &est_opts, noise_seed)?;
        let err_range = est.range_m - target.range_m;
        let err_velocity = est.velocity_mps - target.velocity_mps;
        let fail = err_range.abs() > bounds.r_max / 4.0 || err_velocity.abs() > bounds.v_max / 4.0;
        Ok(Outcome { err_range, err_velocity, fail })
    };
    let outcomes: Vec<Outcome> = if parallel {
        (0..spec.trials).into_par_iter().map(trial).collect::<Result<_>>()?
    } else {
        (0..spec.trials).map(trial).collect::<Result<_>>()?
    };

    let used: Vec<&Outcome> =
        outcomes.iter().filter(|o| spec.outliers == OutlierPolicy::Include || !o.fail).collect();
    let n = used.len() as f64;
    let rmse_range_m = (neumaier(used.iter().map(|o| o.err_range.powi(2))) / n).sqrt();
    let rmse_velocity_mps = (neumaier(used.iter().map(|o| o.err_velocity.powi(2))) / n).sqrt();
    let fails = outcomes.iter().filter(|o| o.fail).count();

    let (root_crlb_range_m, root_crlb_velocity_mps) =
        if !spec.noise || target.snr_db == f64::INFINITY {
            (0.0, 0.0)
        } else {
            let c = crlb_for_layout(
                &params,
                &layout,
                spec.timing,
                target.snr_linear(),
                target.attenuation,
            )?;
            (c.root_crlb_range_m, c.root_crlb_velocity_mps)
        };
    Ok(SweepPoint {
        axis_value: value,
        rmse_range_m,
        rmse_velocity_mps,
        root_crlb_range_m,
        root_crlb_velocity_mps,
        fail_fraction: fails as f64 / spec.trials as f64,
        trials_used: used.len(),
        range_bin_m: bounds.delta_r,
        velocity_bin_mps: bounds.delta_v,
    })
}

fn sweep(spec: &SweepSpec, parallel: bool) -> Result<SweepResult> {
    spec.validate()?;
    let points = spec
        .values
        .iter()
        .enumerate()
        .map(|(i, &v)| run_point(spec, i, v, parallel))
        .collect::<Result<_>>()?;
    Ok(SweepResult { axis: spec.axis, signal: spec.signal, points })
}

/// Runs the sweep with trials spread over the rayon pool.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    sweep(spec, true)
}

/// Same as [`run_sweep`] on the calling thread only.
pub fn run_sweep_serial(spec: &SweepSpec) -> Result<SweepResult> {
    sweep(spec, false)
}

/// DMRS and data-signal sweeps with identical seeds.
pub fn compare_signals(spec: &SweepSpec) -> Result<(SweepResult, SweepResult)> {
    let dmrs = run_sweep(&SweepSpec { signal: SignalKind::Dmrs, ..spec.clone() })?;
    let data = run_sweep(&SweepSpec { signal: SignalKind::Data, ..spec.clone() })?;
    Ok((dmrs, data))
}

/// Everything needed to reproduce a run.
pub fn manifest(spec: &SweepSpec, command: &str) -> serde_json::Value {
    serde_json::json!({
        "tool": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "spec": spec,
        "effective": {
            "t_symbol_s": spec.params.t_symbol(),
            "t_cp_s": spec.params.t_cp(),
            "t_total_s": spec.params.t_total(),
            "sample_interval_s": spec.params.sample_interval(),
        },
        "seed_derivation": "ChaCha8Rng::seed_from_u64(master_seed), stream = point << 32 | trial",
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimator::SensingBounds;

    fn small_spec() -> SweepSpec {
        SweepSpec { trials: 40, values: vec![-12.0, 0.0, 10.0], ..SweepSpec::reference() }
    }

    #[test]
    fn noiseless_on_grid_is_exact() {
        let mut spec = small_spec();
        let b = SensingBounds::for_layout(
            &spec.params,
            &build_dmrs_grid(&spec.params, &spec.dmrs).unwrap().layout,
            spec.timing,
        );
        spec.target.range_m = 9.0 * b.delta_r;
        spec.target.velocity_mps = 3.0 * b.delta_v;
        spec.noise = false;
        spec.trials = 3;
        let r = run_sweep(&spec).unwrap();
        for p in &r.points {
            assert!(p.rmse_range_m < 1e-9 && p.rmse_velocity_mps < 1e-9, "{p:?}");
            assert_eq!(p.fail_fraction, 0.0);
            assert_eq!((p.root_crlb_range_m, p.root_crlb_velocity_mps), (0.0, 0.0));
        }
    }

    #[test]
    fn serial_and_parallel_bitwise_equal() {
        let spec = small_spec();
        let a = run_sweep(&spec).unwrap();
        let b = run_sweep_serial(&spec).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, run_sweep(&spec).unwrap());
        let other = run_sweep(&SweepSpec { master_seed: 1, ..spec }).unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn invariants_hold() {
        let spec = small_spec();
        let r = run_sweep(&spec).unwrap();
        assert_eq!(r.points.len(), 3);
        for p in &r.points {
            assert!(p.rmse_range_m >= 0.0 && p.rmse_velocity_mps >= 0.0);
            assert!((0.0..=1.0).contains(&p.fail_fraction));
            assert_eq!(p.trials_used, 40);
        }
        assert!(r.points[0].fail_fraction > r.points[2].fail_fraction);
        let excl = run_sweep(&SweepSpec { outliers: OutlierPolicy::Exclude, ..spec }).unwrap();
        let p = &excl.points[0];
        assert_eq!(p.trials_used, 40 - (p.fail_fraction * 40.0).round() as usize);
        assert!(p.rmse_range_m <= r.points[0].rmse_range_m);
    }

    #[test]
    fn compare_uses_both_signals() {
        let spec = SweepSpec { trials: 8, values: vec![10.0], ..SweepSpec::reference() };
        let (d, x) = compare_signals(&spec).unwrap();
        assert_eq!((d.signal, x.signal), (SignalKind::Dmrs, SignalKind::Data));
        assert!(x.points[0].root_crlb_range_m < d.points[0].root_crlb_range_m);
    }

    #[test]
    fn axis_points() {
        let spec = SweepSpec { axis: SweepAxis::MSymbols, ..SweepSpec::reference() };
        let (p, d, _) = spec.point(28.0).unwrap();
        assert_eq!(p.m_symbols, 28);
        assert_eq!(d.symbol_positions, vec![2, 5, 8, 11, 16, 19, 22, 25]);
        assert!(spec.point(27.5).is_err());

        let spec = SweepSpec { axis: SweepAxis::NSubcarriers, ..SweepSpec::reference() };
        assert_eq!(spec.point(512.0).unwrap().0.n_ifft, 512);

        let spec = SweepSpec { axis: SweepAxis::TTotal, ..SweepSpec::reference() };
        assert!((spec.point(16e-6).unwrap().0.t_total() - 16e-6).abs() < 1e-18);

        let bad = SweepSpec { trials: 0, ..SweepSpec::reference() };
        assert!(run_sweep(&bad).is_err());
        let bad = SweepSpec { values: vec![f64::NAN], ..SweepSpec::reference() };
        assert!(run_sweep(&bad).is_err());
    }

    #[test]
    fn neumaier_recovers_cancellation() {
        assert_eq!(neumaier([1.0, 1e100, 1.0, -1e100]), 2.0);
    }

    #[test]
    fn manifest_records_seed() {
        let m = manifest(&small_spec(), "sweep");
        assert_eq!(m["spec"]["master_seed"], 0);
        assert_eq!(m["spec"]["trials"], 40);
    }
}
