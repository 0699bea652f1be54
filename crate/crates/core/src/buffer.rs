use alloc::vec::Vec;
use num_complex::Complex32;

use crate::error::DspError;

/// Samples per acquisition buffer (2^22).
pub const BUFFER_LEN: usize = 1 << 22;
/// FFT block length for overlap-save processing.
pub const BLOCK_LEN: usize = 1024;
/// Valid samples per block under 100% overlap-save.
pub const BLOCK_HOP: usize = 512;
/// Blocks per buffer: 2^22 / 512 = 8192.
pub const BLOCKS_PER_BUFFER: usize = BUFFER_LEN / BLOCK_HOP;

/// Sample payload of a buffer. Real for electrical signals, complex for
/// optical fields.
#[derive(Debug, Clone, PartialEq)]
pub enum Samples {
    Real(Vec<f32>),
    Complex(Vec<Complex32>),
}

impl Samples {
    pub fn len(&self) -> usize {
        match self {
            Samples::Real(v) => v.len(),
            Samples::Complex(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Signal domain carried by a buffer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainTag {
    /// Real electrical waveform (photodiode output, ADC codes as floats).
    RealElectrical,
    /// Complex optical field envelope.
    ComplexField,
}

/// Rational samples-per-symbol ratio.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SamplesPerSymbol {
    pub num: u32,
    pub den: u32,
}

impl SamplesPerSymbol {
    pub fn new(num: u32, den: u32) -> Self {
        Self { num, den }
    }

    pub fn as_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

/// One acquisition unit of samples with format metadata.
///
/// Pipeline buffers hold exactly [`BUFFER_LEN`] samples; intermediate
/// signals produced by the transmitter or channel may be any length.
/// `sequence_index` increases by one per buffer; a gap means data loss.
#[derive(Debug, Clone)]
pub struct SampleBuffer {
    pub samples: Samples,
    pub sample_rate: f64,
    pub samples_per_symbol: SamplesPerSymbol,
    pub sequence_index: u64,
}

impl SampleBuffer {
    pub fn real(samples: Vec<f32>, sample_rate: f64, sps: SamplesPerSymbol, seq: u64) -> Self {
        Self {
            samples: Samples::Real(samples),
            sample_rate,
            samples_per_symbol: sps,
            sequence_index: seq,
        }
    }

    pub fn complex(
        samples: Vec<Complex32>,
        sample_rate: f64,
        sps: SamplesPerSymbol,
        seq: u64,
    ) -> Self {
        Self {
            samples: Samples::Complex(samples),
            sample_rate,
            samples_per_symbol: sps,
            sequence_index: seq,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn domain_tag(&self) -> DomainTag {
        match self.samples {
            Samples::Real(_) => DomainTag::RealElectrical,
            Samples::Complex(_) => DomainTag::ComplexField,
        }
    }

    /// Duration of the buffer in seconds.
    pub fn duration(&self) -> f64 {
        self.len() as f64 / self.sample_rate
    }

    pub fn real_samples(&self) -> Result<&[f32], DspError> {
        match &self.samples {
            Samples::Real(v) => Ok(v),
            Samples::Complex(_) => Err(DspError::Config(alloc::string::String::from(
                "expected real samples, got complex field",
            ))),
        }
    }

    pub fn complex_samples(&self) -> Result<&[Complex32], DspError> {
        match &self.samples {
            Samples::Complex(v) => Ok(v),
            Samples::Real(_) => Err(DspError::Config(alloc::string::String::from(
                "expected complex field, got real samples",
            ))),
        }
    }

    /// Enforce the pipeline buffer length contract.
    pub fn check_pipeline_len(&self) -> Result<(), DspError> {
        if self.len() != BUFFER_LEN {
            return Err(DspError::BufferLength {
                expected: BUFFER_LEN,
                got: self.len(),
            });
        }
        Ok(())
    }
}

/// Decoded output of one buffer with per-buffer diagnostics. Produced by
/// both receiver chains; QAM-only fields stay `None` on the PAM path.
#[derive(Debug, Clone)]
pub struct SymbolFrame {
    pub sequence_index: u64,
    /// Start-of-stream frames use shortened averaging windows and are
    /// excluded from error counting by default.
    pub warmup: bool,
    /// Demapped bits, one byte per bit.
    pub bits: Vec<u8>,
    pub n_symbols: u64,
    pub dc_offset: f64,
    pub amplitude: f64,
    /// Error-vector magnitude against decided symbols, dB (QAM).
    pub evm_db: Option<f64>,
    /// Pre-decision equalized symbols (constellation dumps).
    pub decided: Option<Vec<Complex32>>,
    /// Clock-corrected 2-samples/symbol stream (eye diagrams).
    pub halfsym_samples: Option<Vec<f32>>,
    /// Unwrapped clock phase in symbols, decimated.
    pub clock_phase_trace: Vec<f32>,
    pub emitted_255: u64,
    pub emitted_256: u64,
    pub emitted_257: u64,
    /// Per-level decision occupancy (PAM).
    pub level_counts: Vec<u64>,
}
