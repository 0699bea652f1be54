use alloc::string::String;
use core::fmt;

/// Errors raised by the signal-processing chains.
#[derive(Debug, Clone, PartialEq)]
pub enum DspError {
    /// Input slice length does not match what the operation requires.
    SizeMismatch { expected: usize, got: usize },
    /// Inverse transform size other than 1024 or 512.
    UnsupportedOutputSize(usize),
    /// Pipeline buffer is not exactly 2^22 samples.
    BufferLength { expected: usize, got: usize },
    /// Sample rate too low for the requested bandwidth.
    NyquistViolation { required_hz: f64, got_hz: f64 },
    /// LFSR register is all-zero and would never leave that state.
    ZeroState,
    /// Bit count not divisible by bits-per-symbol.
    BitAlignment { bits: usize, bits_per_symbol: usize },
    /// Carrier tone falls inside the signal band.
    CarrierInBand { carrier_hz: f64, band_edge_hz: f64 },
    /// Noise requested with a non-finite OSNR.
    NonFiniteOsnr,
    /// Normalization found a zero-amplitude buffer.
    ZeroAmplitude,
    /// KK front-end hit a non-positive intensity sample; the DC offset is
    /// miscalibrated.
    NonPositiveIntensity { index: usize },
    /// Too few symbols for a per-buffer estimate.
    TooFewSymbols { needed: usize, got: usize },
    /// Cross-buffer carried state was not supplied in sequence order.
    SequencingViolation { expected: u64, got: u64 },
    /// Unwrapped clock phase jumped more than one symbol between blocks.
    PhaseJump { block: usize, symbols: f64 },
    /// Adaptive equalizer tap norm exploded.
    Divergence { tap_norm: f32 },
    /// Bit synchronization never exceeded the agreement floor.
    SyncFailure { agreement: f64 },
    /// Calibration search failed everywhere on its grid.
    CalibrationFailure(String),
    /// Invalid configuration value.
    Config(String),
}

impl fmt::Display for DspError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::SizeMismatch { expected, got } => {
                write!(f, "input length {got}, expected {expected}")
            }
            Self::UnsupportedOutputSize(n) => {
                write!(f, "unsupported inverse transform size {n} (need 1024 or 512)")
            }
            Self::BufferLength { expected, got } => {
                write!(f, "buffer length {got}, pipeline buffers must hold {expected} samples")
            }
            Self::NyquistViolation { required_hz, got_hz } => {
                write!(f, "sample rate {got_hz} Hz below required {required_hz} Hz")
            }
            Self::ZeroState => write!(f, "LFSR state is all-zero"),
            Self::BitAlignment { bits, bits_per_symbol } => {
                write!(f, "{bits} bits not divisible by {bits_per_symbol} bits/symbol")
            }
            Self::CarrierInBand { carrier_hz, band_edge_hz } => write!(
                f,
                "carrier at {carrier_hz} Hz inside signal band (edge {band_edge_hz} Hz)"
            ),
            Self::NonFiniteOsnr => write!(f, "noise loading requested with non-finite OSNR"),
            Self::ZeroAmplitude => write!(f, "buffer has zero amplitude"),
            Self::NonPositiveIntensity { index } => write!(
                f,
                "non-positive intensity at sample {index}; DC offset too small"
            ),
            Self::TooFewSymbols { needed, got } => {
                write!(f, "{got} symbols in buffer, need at least {needed}")
            }
            Self::SequencingViolation { expected, got } => {
                write!(f, "buffer {got} processed out of order, expected {expected}")
            }
            Self::PhaseJump { block, symbols } => {
                write!(f, "clock phase jumped {symbols} symbols at block {block}")
            }
            Self::Divergence { tap_norm } => {
                write!(f, "equalizer diverged, tap norm {tap_norm}")
            }
            Self::SyncFailure { agreement } => {
                write!(f, "bit sync failed, best agreement {agreement:.3} < 0.7")
            }
            Self::CalibrationFailure(why) => write!(f, "calibration failed: {why}"),
            Self::Config(why) => write!(f, "invalid configuration: {why}"),
        }
    }
}

impl core::error::Error for DspError {}
