//! Gray-coded PAM-N and QAM-N symbol mapping.
//!
//! PAM constellations are equally spaced, zero-mean, unit peak:
//! {-1, -1/3, +1/3, +1} for PAM-4. Square QAM constellations are
//! normalized to unit average power; each axis carries an independent
//! Gray code, so decision neighbors differ in exactly one bit. Bit
//! groups are MSB-first; for QAM the first half of a group selects the
//! in-phase axis, the second half the quadrature axis, with bit pattern
//! zero on the most positive level (QPSK `00` maps to (1+j)/sqrt(2)).

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use num_complex::Complex32;

use crate::buffer::Samples;
use crate::error::DspError;

/// Modulation family and order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModulationFormat {
    Pam(u32),
    Qam(u32),
}

impl ModulationFormat {
    pub fn validate(&self) -> Result<(), DspError> {
        match *self {
            ModulationFormat::Pam(n) if matches!(n, 2 | 4 | 8 | 16) => Ok(()),
            ModulationFormat::Qam(n) if matches!(n, 4 | 16 | 64) => Ok(()),
            other => Err(DspError::Config(alloc::format!(
                "unsupported modulation format {other:?}"
            ))),
        }
    }

    pub fn order(&self) -> u32 {
        match *self {
            ModulationFormat::Pam(n) | ModulationFormat::Qam(n) => n,
        }
    }

    pub fn bits_per_symbol(&self) -> u32 {
        self.order().trailing_zeros()
    }

    pub fn is_qam(&self) -> bool {
        matches!(self, ModulationFormat::Qam(_))
    }

    /// Ideal mean magnitude of the constellation, used to normalize
    /// received amplitude estimates. PAM-N unit-peak levels have mean
    /// |level| = N / (2(N-1)).
    pub fn mean_abs_level(&self) -> f64 {
        match *self {
            ModulationFormat::Pam(n) => n as f64 / (2.0 * (n as f64 - 1.0)),
            ModulationFormat::Qam(n) => {
                let pts = qam_points(n);
                pts.iter().map(|p| p.norm() as f64).sum::<f64>() / n as f64
            }
        }
    }
}

/// Gray code of an index: adjacent indices differ in one bit.
pub fn gray_encode(k: u32) -> u32 {
    k ^ (k >> 1)
}

/// Inverse Gray code.
pub fn gray_decode(g: u32) -> u32 {
    let mut k = g;
    let mut shift = 1;
    while (g >> shift) != 0 {
        k ^= g >> shift;
        shift += 1;
    }
    k
}

/// Ascending unit-peak PAM levels: (2k - (N-1)) / (N-1).
pub fn pam_levels(n: u32) -> Vec<f32> {
    (0..n)
        .map(|k| (2.0 * k as f64 - (n as f64 - 1.0)) as f32 / (n - 1) as f32)
        .collect()
}

/// Gray bits carried by ascending PAM level index `k`, MSB first.
pub fn pam_bits_of_level(k: u32, bits_per_symbol: u32, out: &mut Vec<u8>) {
    let g = gray_encode(k);
    for b in (0..bits_per_symbol).rev() {
        out.push(((g >> b) & 1) as u8);
    }
}

fn bits_to_value(bits: &[u8]) -> u32 {
    bits.iter().fold(0u32, |acc, &b| (acc << 1) | b as u32)
}

/// Descending per-axis QAM levels (most positive first) scaled to unit
/// average symbol power for the full square constellation.
pub fn qam_axis_levels_f64(order: u32) -> Vec<f64> {
    let m = (order as f64).sqrt().round() as u32;
    debug_assert_eq!(m * m, order);
    let raw: Vec<f64> = (0..m).map(|k| (m as f64 - 1.0) - 2.0 * k as f64).collect();
    let power: f64 = raw.iter().map(|l| l * l).sum::<f64>() / m as f64;
    let norm = (2.0 * power).sqrt(); // two axes per symbol
    raw.iter().map(|&l| l / norm).collect()
}

/// Single-precision view of [`qam_axis_levels_f64`].
pub fn qam_axis_levels(order: u32) -> Vec<f32> {
    qam_axis_levels_f64(order).iter().map(|&l| l as f32).collect()
}

/// Full square-QAM constellation indexed by the bit-group value
/// (I bits high, Q bits low).
pub fn qam_points(order: u32) -> Vec<Complex32> {
    let bits = order.trailing_zeros();
    let half = bits / 2;
    let levels = qam_axis_levels(order);
    (0..order)
        .map(|v| {
            let i_bits = v >> half;
            let q_bits = v & ((1 << half) - 1);
            let i = levels[gray_decode(i_bits) as usize];
            let q = levels[gray_decode(q_bits) as usize];
            Complex32::new(i, q)
        })
        .collect()
}

/// Map a bit stream onto symbols: real for PAM, complex for QAM.
pub fn map_symbols(bits: &[u8], format: ModulationFormat) -> Result<Samples, DspError> {
    format.validate()?;
    let bps = format.bits_per_symbol() as usize;
    if bits.len() % bps != 0 {
        return Err(DspError::BitAlignment {
            bits: bits.len(),
            bits_per_symbol: bps,
        });
    }
    match format {
        ModulationFormat::Pam(n) => {
            let levels = pam_levels(n);
            let syms = bits
                .chunks_exact(bps)
                .map(|g| levels[gray_decode(bits_to_value(g)) as usize])
                .collect();
            Ok(Samples::Real(syms))
        }
        ModulationFormat::Qam(n) => {
            let points = qam_points(n);
            let syms = bits
                .chunks_exact(bps)
                .map(|g| points[bits_to_value(g) as usize])
                .collect();
            Ok(Samples::Complex(syms))
        }
    }
}

/// Nearest-level decision on one QAM axis over descending levels,
/// returning the Gray bit pattern of the decided level.
fn qam_axis_decide(value: f32, levels: &[f32]) -> u32 {
    let m = levels.len();
    let step = levels[0] - levels[1];
    let mut k = ((levels[0] - value) / step + 0.5).floor() as i64;
    if k < 0 {
        k = 0;
    }
    if k as usize >= m {
        k = m as i64 - 1;
    }
    gray_encode(k as u32)
}

/// Decide the nearest constellation point for an equalized QAM sample,
/// returning the point and appending its Gray bits.
pub fn qam_decide(sample: Complex32, order: u32, bits_out: &mut Vec<u8>) -> Complex32 {
    let bits = order.trailing_zeros();
    let half = bits / 2;
    let levels = qam_axis_levels(order);
    let gi = qam_axis_decide(sample.re, &levels);
    let gq = qam_axis_decide(sample.im, &levels);
    for b in (0..half).rev() {
        bits_out.push(((gi >> b) & 1) as u8);
    }
    for b in (0..half).rev() {
        bits_out.push(((gq >> b) & 1) as u8);
    }
    Complex32::new(
        levels[gray_decode(gi) as usize],
        levels[gray_decode(gq) as usize],
    )
}
