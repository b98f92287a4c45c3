use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::gold::{gold_sequence, qpsk_map};
use super::params::{DmrsConfig, OfdmParams};
use crate::error::{IsacError, Result};
use crate::Cf64;

/// Rectangular lattice of occupied resource elements.
///
/// Rows of the extracted grid are `subcarriers`, columns are `symbols`.
/// The strides are the comb periods used to convert FFT bins into
/// physical units (1 for a fully occupied data grid).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridLayout {
    pub subcarriers: Vec<usize>,
    pub symbols: Vec<usize>,
    pub carrier_stride: usize,
    pub symbol_stride: usize,
}

impl GridLayout {
    /// N_J.
    pub fn n_j(&self) -> usize {
        self.subcarriers.len()
    }

    /// M_J.
    pub fn m_j(&self) -> usize {
        self.symbols.len()
    }

    pub fn len(&self) -> usize {
        self.n_j() * self.m_j()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// N × M grid of modulation symbols with its occupancy mask.
#[derive(Debug, Clone, PartialEq)]
pub struct ResourceGrid {
    /// Entry `(k, m)` is s(k, m).
    pub cells: Array2<Cf64>,
    pub occupancy: Array2<bool>,
    pub layout: GridLayout,
}

impl ResourceGrid {
    pub fn zeros(params: &OfdmParams) -> Self {
        let shape = (params.n_subcarriers, params.m_symbols);
        Self {
            cells: Array2::zeros(shape),
            occupancy: Array2::from_elem(shape, false),
            layout: GridLayout {
                subcarriers: Vec::new(),
                symbols: Vec::new(),
                carrier_stride: 1,
                symbol_stride: 1,
            },
        }
    }

    pub fn n_subcarriers(&self) -> usize {
        self.cells.nrows()
    }

    pub fn m_symbols(&self) -> usize {
        self.cells.ncols()
    }

    pub fn occupied_count(&self) -> usize {
        self.occupancy.iter().filter(|&&o| o).count()
    }

    /// Occupied fraction of column `m`.
    pub fn symbol_density(&self, m: usize) -> f64 {
        let col = self.occupancy.column(m);
        col.iter().filter(|&&o| o).count() as f64 / col.len() as f64
    }

    /// Replaces the cells, keeping occupancy and layout.
    pub fn with_cells(&self, cells: Array2<Cf64>) -> Result<Self> {
        if cells.dim() != self.cells.dim() {
            return Err(IsacError::Shape(format!(
                "cells {:?} vs grid {:?}",
                cells.dim(),
                self.cells.dim()
            )));
        }
        Ok(Self { cells, occupancy: self.occupancy.clone(), layout: self.layout.clone() })
    }

    pub(crate) fn check_params(&self, params: &OfdmParams) -> Result<()> {
        if self.cells.dim() != (params.n_subcarriers, params.m_symbols) {
            return Err(IsacError::Shape(format!(
                "grid {:?} does not match numerology {}x{}",
                self.cells.dim(),
                params.n_subcarriers,
                params.m_symbols
            )));
        }
        Ok(())
    }
}

/// Places QPSK-modulated Gold sequences on the DMRS comb.
///
/// Symbol `m` carries its own sequence seeded with `cfg.seed + m`
/// (wrapping), one QPSK symbol per occupied subcarrier.
pub fn build_dmrs_grid(params: &OfdmParams, cfg: &DmrsConfig) -> Result<ResourceGrid> {
    params.validate()?;
    cfg.validate(params)?;
    let mut grid = ResourceGrid::zeros(params);
    let subcarriers = cfg.subcarriers(params.n_subcarriers);
    for &m in &cfg.symbol_positions {
        let bits = gold_sequence(cfg.seed.wrapping_add(m as u32), 2 * subcarriers.len())?;
        for (&k, s) in subcarriers.iter().zip(qpsk_map(&bits)?) {
            grid.cells[[k, m]] = s;
            grid.occupancy[[k, m]] = true;
        }
    }
    grid.layout = GridLayout {
        subcarriers,
        symbols: cfg.symbol_positions.clone(),
        carrier_stride: cfg.comb_carrier,
        symbol_stride: cfg.comb_symbol,
    };
    Ok(grid)
}

/// Independent random QPSK on every resource element.
pub fn build_data_grid(params: &OfdmParams, seed: u64) -> Result<ResourceGrid> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (n, m) = (params.n_subcarriers, params.m_symbols);
    let bits: Vec<u8> = (0..2 * n * m).map(|_| rng.random::<bool>() as u8).collect();
    let symbols = qpsk_map(&bits)?;
    // column-major fill so symbol m occupies a contiguous run of the stream
    let cells = Array2::from_shape_fn((n, m), |(k, col)| symbols[col * n + k]);
    Ok(ResourceGrid {
        cells,
        occupancy: Array2::from_elem((n, m), true),
        layout: GridLayout {
            subcarriers: (0..n).collect(),
            symbols: (0..m).collect(),
            carrier_stride: 1,
            symbol_stride: 1,
        },
    })
}
