//! OFDM modulation with cyclic prefix, and the matching receiver.
//!
//! Both directions use the unitary DFT (scale `1/sqrt(n_ifft)`), so
//! `demodulate(modulate(g)) == g` and the energy of the grid equals the
//! energy of the useful (CP-free) part of the stream. Subcarrier `k` maps
//! to IFFT bin `k`; bins `n_subcarriers..n_ifft` stay zero.

use std::io::{Read, Write};

use ndarray::Array2;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::error::{IsacError, Result};
use crate::refsig::{GridLayout, OfdmParams, ResourceGrid};
use crate::Cf64;

/// Time-domain baseband samples of a frame.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleStream {
    pub samples: Vec<Cf64>,
    /// Seconds between samples.
    pub sample_interval: f64,
    /// Index of the first sample (CP included) of each symbol.
    pub symbol_boundaries: Vec<usize>,
}

impl SampleStream {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|z| z.norm_sqr()).sum()
    }
}

pub fn modulate(grid: &ResourceGrid, params: &OfdmParams) -> Result<SampleStream> {
    params.validate()?;
    grid.check_params(params)?;
    let n_ifft = params.n_ifft;
    let n_cp = params.n_cp;
    let stride = params.symbol_stride();
    let scale = 1.0 / (n_ifft as f64).sqrt();
    let ifft = FftPlanner::new().plan_fft_inverse(n_ifft);

    let mut samples = vec![Cf64::new(0.0, 0.0); stride * params.m_symbols];
    samples.par_chunks_mut(stride).enumerate().for_each(|(m, out)| {
        let (cp, body) = out.split_at_mut(n_cp);
        for (k, z) in grid.cells.column(m).iter().enumerate() {
            body[k] = *z;
        }
        ifft.process(body);
        body.iter_mut().for_each(|z| *z *= scale);
        cp.copy_from_slice(&body[n_ifft - n_cp..]);
    });

    Ok(SampleStream {
        samples,
        sample_interval: params.sample_interval(),
        symbol_boundaries: (0..params.m_symbols).map(|m| m * stride).collect(),
    })
}

/// Drops each cyclic prefix and returns the first `n_subcarriers` DFT bins
/// of every symbol. Occupancy and layout come from `reference` when given,
/// otherwise every cell is marked occupied.
pub fn demodulate(
    stream: &SampleStream,
    params: &OfdmParams,
    reference: Option<&ResourceGrid>,
) -> Result<ResourceGrid> {
    params.validate()?;
    let stride = params.symbol_stride();
    let expected = stride * params.m_symbols;
    if stream.samples.len() != expected {
        return Err(IsacError::Shape(format!(
            "stream has {} samples, numerology expects {expected}",
            stream.samples.len()
        )));
    }
    if let Some(r) = reference {
        r.check_params(params)?;
    }
    let n_ifft = params.n_ifft;
    let n_sc = params.n_subcarriers;
    let scale = 1.0 / (n_ifft as f64).sqrt();
    let fft = FftPlanner::new().plan_fft_forward(n_ifft);

    let columns: Vec<Vec<Cf64>> = stream
        .samples
        .par_chunks(stride)
        .map(|sym| {
            let mut buf = sym[params.n_cp..].to_vec();
            fft.process(&mut buf);
            buf.truncate(n_sc);
            buf.iter_mut().for_each(|z| *z *= scale);
            buf
        })
        .collect();
    let cells = Array2::from_shape_fn((n_sc, params.m_symbols), |(k, m)| columns[m][k]);

    Ok(match reference {
        Some(r) => ResourceGrid { cells, occupancy: r.occupancy.clone(), layout: r.layout.clone() },
        None => ResourceGrid {
            cells,
            occupancy: Array2::from_elem((n_sc, params.m_symbols), true),
            layout: GridLayout {
                subcarriers: (0..n_sc).collect(),
                symbols: (0..params.m_symbols).collect(),
                carrier_stride: 1,
                symbol_stride: 1,
            },
        },
    })
}

const DUMP_MAGIC: [u8; 4] = *b"ISQ1";

/// Header of a raw sample dump: 4-byte magic followed by `n_ifft`, `n_cp`
/// and `m_symbols` as little-endian u32 (16 bytes). Samples follow as
/// interleaved little-endian f64 re/im pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DumpHeader {
    pub n_ifft: u32,
    pub n_cp: u32,
    pub m_symbols: u32,
}

pub fn write_raw_samples<W: Write>(
    stream: &SampleStream,
    params: &OfdmParams,
    mut w: W,
) -> Result<()> {
    let field = |v: usize| -> Result<[u8; 4]> {
        u32::try_from(v)
            .map(u32::to_le_bytes)
            .map_err(|_| IsacError::Shape(format!("{v} does not fit the dump header")))
    };
    w.write_all(&DUMP_MAGIC)?;
    w.write_all(&field(params.n_ifft)?)?;
    w.write_all(&field(params.n_cp)?)?;
    w.write_all(&field(params.m_symbols)?)?;
    for z in &stream.samples {
        w.write_all(&z.re.to_le_bytes())?;
        w.write_all(&z.im.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_raw_samples<R: Read>(mut r: R) -> Result<(DumpHeader, Vec<Cf64>)> {
    let mut head = [0u8; 16];
    r.read_exact(&mut head)?;
    if head[..4] != DUMP_MAGIC {
        return Err(IsacError::Shape("bad sample dump magic".into()));
    }
    let word = |i: usize| u32::from_le_bytes(head[i..i + 4].try_into().unwrap());
    let header = DumpHeader { n_ifft: word(4), n_cp: word(8), m_symbols: word(12) };
    let mut body = Vec::new();
    r.read_to_end(&mut body)?;
    if body.len() % 16 != 0 {
        return Err(IsacError::Shape("truncated sample dump".into()));
    }
    let samples = body
        .chunks_exact(16)
        .map(|c| {
            Cf64::new(
                f64::from_le_bytes(c[..8].try_into().unwrap()),
                f64::from_le_bytes(c[8..].try_into().unwrap()),
            )
        })
        .collect();
    Ok((header, samples))
}
