//! Reference-signal generation: Gold sequences, QPSK, and DMRS / data
//! resource grids.

pub mod gold;
pub mod grid;
pub mod params;

pub use gold::{gold_sequence, qpsk_map, GoldSequence};
pub use grid::{build_data_grid, build_dmrs_grid, GridLayout, ResourceGrid};
pub use params::{slot_pattern, DmrsConfig, OfdmParams, SymbolTiming};
