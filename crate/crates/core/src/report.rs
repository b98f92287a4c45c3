//! CSV and JSON output formats.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::bench::{SignalKind, SweepResult};
use crate::error::Result;
use crate::refsig::ResourceGrid;

pub const GRID_HEADER: &str = "k,m,re,im,occupied";
pub const PROFILE_HEADER: &str = "bin,magnitude";
pub const CRLB_HEADER: &str = "snr_db,root_crlb_range_m,root_crlb_velocity_mps,method";
pub const SWEEP_HEADER: &str =
    "axis_value,rmse_range_m,rmse_velocity_mps,root_crlb_range_m,root_crlb_velocity_mps,fail_fraction,trials";

#[derive(Serialize)]
struct GridRow {
    k: usize,
    m: usize,
    re: f64,
    im: f64,
    occupied: u8,
}

/// One row per resource element, symbol-major.
pub fn write_grid_csv<W: Write>(grid: &ResourceGrid, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for m in 0..grid.m_symbols() {
        for k in 0..grid.n_subcarriers() {
            let z = grid.cells[[k, m]];
            out.serialize(GridRow {
                k,
                m,
                re: z.re,
                im: z.im,
                occupied: grid.occupancy[[k, m]] as u8,
            })?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn write_profile_csv<W: Write>(profile: &[f64], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(PROFILE_HEADER.split(','))?;
    for (bin, mag) in profile.iter().enumerate() {
        out.write_record([bin.to_string(), mag.to_string()])?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrlbRow {
    pub snr_db: f64,
    pub root_crlb_range_m: f64,
    pub root_crlb_velocity_mps: f64,
    pub method: String,
}

pub fn write_crlb_csv<W: Write>(rows: &[CrlbRow], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    if rows.is_empty() {
        out.write_record(CRLB_HEADER.split(','))?;
    }
    for row in rows {
        out.serialize(row)?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub axis_value: f64,
    pub rmse_range_m: f64,
    pub rmse_velocity_mps: f64,
    pub root_crlb_range_m: f64,
    pub root_crlb_velocity_mps: f64,
    pub fail_fraction: f64,
    pub trials: usize,
}

impl SweepRow {
    fn from_result(result: &SweepResult) -> impl Iterator<Item = SweepRow> + '_ {
        result.points.iter().map(|p| SweepRow {
            axis_value: p.axis_value,
            rmse_range_m: p.rmse_range_m,
            rmse_velocity_mps: p.rmse_velocity_mps,
            root_crlb_range_m: p.root_crlb_range_m,
            root_crlb_velocity_mps: p.root_crlb_velocity_mps,
            fail_fraction: p.fail_fraction,
            trials: p.trials_used,
        })
    }
}

pub fn write_sweep_csv<W: Write>(result: &SweepResult, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    if result.points.is_empty() {
        out.write_record(SWEEP_HEADER.split(','))?;
    }
    for row in SweepRow::from_result(result) {
        out.serialize(row)?;
    }
    out.flush()?;
    Ok(())
}

/// Both curves of a signal comparison, interleaved point by point, with a
/// leading `signal` column.
pub fn write_compare_csv<W: Write>(dmrs: &SweepResult, data: &SweepResult, w: W) -> Result<()> {
    let mut out = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    out.write_record(std::iter::once("signal").chain(SWEEP_HEADER.split(',')))?;
    let tag = |r: &SweepResult| match r.signal {
        SignalKind::Dmrs => "dmrs",
        SignalKind::Data => "data",
    };
    for (a, b) in SweepRow::from_result(dmrs).zip(SweepRow::from_result(data)) {
        for (signal, row) in [(tag(dmrs), a), (tag(data), b)] {
            out.write_record([
                signal.to_string(),
                row.axis_value.to_string(),
                row.rmse_range_m.to_string(),
                row.rmse_velocity_mps.to_string(),
                row.root_crlb_range_m.to_string(),
                row.root_crlb_velocity_mps.to_string(),
                row.fail_fraction.to_string(),
                row.trials.to_string(),
            ])?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Summary of a single simulated trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateRecord {
    pub true_range: f64,
    pub est_range: f64,
    pub range_index: usize,
    pub true_velocity: f64,
    pub est_velocity: f64,
    pub velocity_index: usize,
    pub snr_db: f64,
    pub seed: u64,
}
