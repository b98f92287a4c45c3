//! Length-31 Gold sequence and QPSK mapping.
//!
//! Construction follows the NR pseudo-random sequence generator:
//!
//! ```text
//! x1(n+31) = (x1(n+3) + x1(n)) mod 2          x1(0) = 1, x1(1..=30) = 0
//! x2(n+31) = (x2(n+3) + x2(n+2) + x2(n+1) + x2(n)) mod 2
//!                                              x2(i) = bit i of the seed
//! c(n)     = (x1(n + 1600) + x2(n + 1600)) mod 2
//! ```
//!
//! Seed bits above bit 30 are ignored.

use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{IsacError, Result};
use crate::Cf64;

const WARM_UP: usize = 1600;
const MASK_31: u32 = 0x7fff_ffff;

/// Two-register Gold sequence generator.
#[derive(Debug, Clone)]
pub struct GoldSequence {
    x1: u32,
    x2: u32,
}

impl GoldSequence {
    pub fn new(seed: u32) -> Self {
        let mut g = Self { x1: 1, x2: seed & MASK_31 };
        for _ in 0..WARM_UP {
            g.step();
        }
        g
    }

    fn step(&mut self) {
        // bit 0 holds x(n), bit 30 receives x(n+31)
        let f1 = (self.x1 ^ (self.x1 >> 3)) & 1;
        let f2 = (self.x2 ^ (self.x2 >> 1) ^ (self.x2 >> 2) ^ (self.x2 >> 3)) & 1;
        self.x1 = (self.x1 >> 1) | (f1 << 30);
        self.x2 = (self.x2 >> 1) | (f2 << 30);
    }

    pub fn next_bit(&mut self) -> u8 {
        let c = ((self.x1 ^ self.x2) & 1) as u8;
        self.step();
        c
    }
}

impl Iterator for GoldSequence {
    type Item = u8;

    fn next(&mut self) -> Option<u8> {
        Some(self.next_bit())
    }
}

/// First `length` bits of the Gold sequence for `seed`.
pub fn gold_sequence(seed: u32, length: usize) -> Result<Vec<u8>> {
    if length == 0 {
        return Err(IsacError::EmptyRequest("gold sequence length must be positive"));
    }
    Ok(GoldSequence::new(seed).take(length).collect())
}

/// Maps bit pairs to unit-energy QPSK: `((1 - 2 b0) + j (1 - 2 b1)) / sqrt(2)`.
pub fn qpsk_map(bits: &[u8]) -> Result<Vec<Cf64>> {
    if !bits.len().is_multiple_of(2) {
        return Err(IsacError::Shape(format!("QPSK needs an even bit count, got {}", bits.len())));
    }
    Ok(bits
        .chunks_exact(2)
        .map(|b| {
            let re = 1.0 - 2.0 * f64::from(b[0] & 1);
            let im = 1.0 - 2.0 * f64::from(b[1] & 1);
            Cf64::new(re * FRAC_1_SQRT_2, im * FRAC_1_SQRT_2)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bits(s: &str) -> Vec<u8> {
        s.bytes().map(|b| b - b'0').collect()
    }

    // Golden vectors from an independent list-based evaluation of the
    // recurrences above.
    #[test]
    fn golden_vectors() {
        let cases: [(u32, &str); 4] = [
            (0, "00000010000110100001001001111010"),
            (1, "00000010100000110000001101110100"),
            (0x12345, "11010110010101110111101001111011"),
            (0x7fff_ffff, "11111101000010111111001110001110"),
        ];
        for (seed, expected) in cases {
            assert_eq!(gold_sequence(seed, 32).unwrap(), bits(expected), "seed {seed}");
        }
        assert_eq!(gold_sequence(0, 8).unwrap(), bits("00000010"));
    }

    #[test]
    fn deterministic() {
        assert_eq!(gold_sequence(77, 500).unwrap(), gold_sequence(77, 500).unwrap());
        assert_ne!(gold_sequence(77, 500).unwrap(), gold_sequence(78, 500).unwrap());
    }

    #[test]
    fn empty_request() {
        assert!(matches!(gold_sequence(0, 0), Err(IsacError::EmptyRequest(_))));
    }

    #[test]
    fn bit_balance() {
        let seq = gold_sequence(0, 1_000_000).unwrap();
        let ones = seq.iter().filter(|&&b| b == 1).count();
        assert_eq!(ones, 496_273);
        assert!((ones as f64 / 1e6 - 0.5).abs() < 0.01);
    }

    #[test]
    fn autocorrelation() {
        let n = 2047;
        let s: Vec<f64> = gold_sequence(0x5a5a, n)
            .unwrap()
            .into_iter()
            .map(|b| 1.0 - 2.0 * f64::from(b))
            .collect();
        let acf = |lag: usize| -> f64 { (0..n).map(|i| s[i] * s[(i + lag) % n]).sum() };
        assert_eq!(acf(0), n as f64);
        for lag in [1, 2, 7, 100, 511, 1000] {
            assert!(acf(lag).abs() / (n as f64) < 0.1, "lag {lag}");
        }
    }

    #[test]
    fn qpsk_points() {
        let s = qpsk_map(&[0, 0, 1, 1, 0, 1, 1, 0]).unwrap();
        let h = FRAC_1_SQRT_2;
        assert_eq!(s[0], Cf64::new(h, h));
        assert_eq!(s[1], Cf64::new(-h, -h));
        assert_eq!(s[2], Cf64::new(h, -h));
        assert_eq!(s[3], Cf64::new(-h, h));
        for z in &s {
            assert!((z.norm() - 1.0).abs() < 1e-12);
        }
        assert!(matches!(qpsk_map(&[0, 1, 1]), Err(IsacError::Shape(_))));
    }
}
