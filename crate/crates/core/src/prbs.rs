//! Maximal-length LFSR pseudorandom bit generation for test data.

use alloc::vec::Vec;

use crate::error::DspError;

/// Fibonacci LFSR state. The feedback polynomial is given as a tap mask:
/// bit i set means x^(i+1) feeds back. A maximal polynomial of degree k
/// yields period 2^k - 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrbsState {
    taps: u32,
    degree: u32,
    state: u32,
}

/// Degree-15 maximal polynomial x^15 + x^14 + 1, the default data source.
/// Period 32767, longer than any equalizer or filter memory in the chains.
/// Right-shift recurrence a[n] = a[n-1] ^ a[n-15]: taps at bits 14 and 0.
pub const PRBS15_TAPS: u32 = (1 << 14) | 1;
/// Degree-7 maximal polynomial x^7 + x^6 + 1.
pub const PRBS7_TAPS: u32 = (1 << 6) | 1;

impl PrbsState {
    pub fn new(taps: u32, degree: u32, seed: u32) -> Result<Self, DspError> {
        let mask = (1u32 << degree) - 1;
        let state = seed & mask;
        if state == 0 {
            return Err(DspError::ZeroState);
        }
        Ok(Self { taps, degree, state })
    }

    /// Default generator: PRBS-15 seeded from the run seed.
    pub fn prbs15(seed: u32) -> Result<Self, DspError> {
        Self::new(PRBS15_TAPS, 15, seed)
    }

    pub fn prbs7(seed: u32) -> Result<Self, DspError> {
        Self::new(PRBS7_TAPS, 7, seed)
    }

    /// Sequence period for a maximal polynomial.
    pub fn period(&self) -> usize {
        (1usize << self.degree) - 1
    }

    fn step(&mut self) -> u8 {
        let out = (self.state & 1) as u8;
        let fb = ((self.state & self.taps).count_ones() & 1) as u32;
        self.state = (self.state >> 1) | (fb << (self.degree - 1));
        out
    }
}

/// Produce `n` bits and the advanced state.
pub fn prbs_bits(mut state: PrbsState, n: usize) -> (Vec<u8>, PrbsState) {
    let mut bits = Vec::with_capacity(n);
    for _ in 0..n {
        bits.push(state.step());
    }
    (bits, state)
}
