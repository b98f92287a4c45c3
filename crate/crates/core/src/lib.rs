//! DMRS-based integrated sensing and communication simulator.
//!
//! The pipeline mirrors a 5G NR transmitter whose demodulation reference
//! signal doubles as a radar waveform:
//!
//! 1. [`refsig`] builds the DMRS (or full random data) resource grid.
//! 2. [`ofdm`] converts grids to cyclic-prefixed sample streams and back.
//! 3. [`channel`] applies a single point-target echo with delay, Doppler,
//!    attenuation and complex AWGN.
//! 4. [`estimator`] divides by the known transmit symbols and runs the
//!    range IFFT / Doppler FFT peak search.
//! 5. [`crlb`] evaluates the closed-form bounds and a numeric Fisher
//!    inversion on the occupied lattice.
//! 6. [`bench`] runs Monte Carlo RMSE sweeps against those bounds.

pub mod bench;
pub mod channel;
pub mod crlb;
pub mod error;
pub mod estimator;
pub mod ofdm;
pub mod refsig;
pub mod report;

pub use error::{IsacError, Result};
pub use refsig::{DmrsConfig, GridLayout, OfdmParams, ResourceGrid, SymbolTiming};

/// Complex sample type used throughout.
pub type Cf64 = num_complex::Complex64;

/// Exact speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT_EXACT: f64 = 299_792_458.0;

/// Rounded propagation speed, m/s. Default for [`OfdmParams`]; the
/// reference range/velocity figures (48.83 m, 1.668 m/s bins) are computed
/// with it.
pub const SPEED_OF_LIGHT_NOMINAL: f64 = 3.0e8;
