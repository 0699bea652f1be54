//! DSP core for a software-defined multi-format optical receiver.
//!
//! Implements the full back-to-back signal path in plain Rust:
//!
//! * transmitter: Gray-mapped PAM-N / QAM-N symbols, RRC pulse shaping,
//!   carrier-tone insertion for Kramers-Kronig detection ([`tx`])
//! * channel: OSNR noise loading, optical band-pass, square-law
//!   photodetection, receiver bandwidth limits, clock offset, 12-bit
//!   quantization ([`channel`])
//! * receivers: the nine-step PAM-N direct-detection chain ([`imdd`]) and
//!   the nine-step Kramers-Kronig QAM-N chain ([`kk`]), both built on
//!   100% overlap-save 1024-point frequency-domain processing
//! * metrics: BER/Q-factor/EVM/OSNR measurement and diagnostics ([`metrics`])
//!
//! The crate is `no_std`-compatible (requires `alloc`); all signal
//! processing is pure computation over in-memory sample buffers. File I/O,
//! the stream-parallel pipeline scheduler, and the CLI live in the
//! companion `srx` crate.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod buffer;
pub mod channel;
pub mod error;
pub mod fft;
pub mod imdd;
pub mod kk;
pub mod metrics;
pub mod modulation;
pub mod overlap;
pub mod prbs;
pub mod rrc;
pub mod tx;

pub use buffer::{SampleBuffer, Samples, BLOCKS_PER_BUFFER, BLOCK_HOP, BLOCK_LEN, BUFFER_LEN};
pub use error::DspError;
