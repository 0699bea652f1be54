//! PAM-N and QAM-N waveform generation.
//!
//! PAM maps Gray-coded levels onto equally spaced intensities with a
//! configurable bias so the RRC-shaped intensity stays positive, then
//! takes the square root as an ideal chirp-free intensity modulator.
//! QAM is shaped at complex baseband and a carrier tone is added above
//! the signal band at the configured carrier-to-signal power ratio; the
//! single-photodiode receiver reconstructs the field from the resulting
//! single-sideband intensity.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use num_complex::{Complex32, Complex64};

use crate::buffer::{SampleBuffer, Samples, SamplesPerSymbol};
use crate::error::DspError;
use crate::modulation::{map_symbols, ModulationFormat};
use crate::overlap::FdConvolver;
use crate::rrc::{rrc_filter_taps, RrcSpec};

/// Transmitter parameterization.
#[derive(Debug, Clone)]
pub struct TxConfig {
    pub format: ModulationFormat,
    /// Symbol rate. 2 GBaud for PAM, 1 GBaud for QAM by default.
    pub baud: f64,
    /// RRC roll-off: 0.5 for PAM, 0.01 for QAM by default.
    pub rolloff: f64,
    /// DAC rendering rate; must be an integer multiple of the baud rate.
    pub dac_rate: f64,
    /// Carrier tone frequency above baseband (QAM only).
    pub carrier_offset: f64,
    /// Carrier-to-signal power ratio in dB (QAM only).
    pub cspr_db: f64,
    /// RRC span in symbols (odd tap count span*sps+1).
    pub shaping_span: usize,
    /// PAM intensity headroom: levels map to [bias, 1] so shaping
    /// undershoot keeps the intensity positive.
    pub pam_bias: f64,
}

impl TxConfig {
    pub fn pam_defaults(order: u32) -> Self {
        Self {
            format: ModulationFormat::Pam(order),
            baud: 2e9,
            rolloff: 0.5,
            dac_rate: 4e9,
            carrier_offset: 0.0,
            cspr_db: 0.0,
            shaping_span: 32,
            pam_bias: 0.15,
        }
    }

    pub fn qam_defaults(order: u32) -> Self {
        Self {
            format: ModulationFormat::Qam(order),
            baud: 1e9,
            rolloff: 0.01,
            dac_rate: 4e9,
            carrier_offset: 0.547e9,
            // CSPR operating points: 6 dB for QAM-4, 11 dB for QAM-16/64.
            cspr_db: if order == 4 { 6.0 } else { 11.0 },
            shaping_span: 257,
            pam_bias: 0.0,
        }
    }

    pub fn samples_per_symbol(&self) -> Result<usize, DspError> {
        let sps = self.dac_rate / self.baud;
        if (sps - sps.round()).abs() > 1e-9 || sps < 1.0 {
            return Err(DspError::Config(alloc::format!(
                "dac_rate/baud = {sps} must be a positive integer"
            )));
        }
        Ok(sps.round() as usize)
    }

    pub fn rrc(&self) -> RrcSpec {
        RrcSpec::new(self.rolloff, self.baud)
    }

    pub fn validate(&self) -> Result<(), DspError> {
        self.format.validate()?;
        let required = (1.0 + self.rolloff) * self.baud;
        if self.dac_rate < required {
            return Err(DspError::NyquistViolation {
                required_hz: required,
                got_hz: self.dac_rate,
            });
        }
        self.samples_per_symbol()?;
        if self.format.is_qam() {
            let edge = self.rrc().band_edge();
            if self.carrier_offset <= edge {
                return Err(DspError::CarrierInBand {
                    carrier_hz: self.carrier_offset,
                    band_edge_hz: edge,
                });
            }
        }
        Ok(())
    }
}

/// Streaming RRC pulse shaper: zero-stuffs symbols to the DAC rate and
/// convolves with the unit-energy RRC scaled by sqrt(sps), so the
/// waveform average power equals the constellation average power.
pub struct PulseShaper {
    conv: FdConvolver,
    sps: usize,
    n_taps: usize,
}

impl PulseShaper {
    pub fn new(cfg: &TxConfig) -> Result<Self, DspError> {
        let sps = cfg.samples_per_symbol()?;
        let span = cfg.shaping_span.max(2);
        let n_taps = span * sps + 1;
        let mut taps = rrc_filter_taps(&cfg.rrc(), cfg.dac_rate, n_taps)?;
        let gain = (sps as f64).sqrt();
        for t in taps.iter_mut() {
            *t *= gain;
        }
        let fft_size = (4 * n_taps.next_power_of_two()).max(8192);
        Ok(Self {
            conv: FdConvolver::new(&taps, fft_size)?,
            sps,
            n_taps,
        })
    }

    /// Group delay of the shaper in output samples.
    pub fn delay(&self) -> usize {
        (self.n_taps - 1) / 2
    }

    pub fn sps(&self) -> usize {
        self.sps
    }

    /// Shape the next chunk of complex symbols into sps*len output
    /// samples (causal; first call starts from zero history).
    pub fn shape(&mut self, symbols: &[Complex64]) -> Vec<Complex64> {
        let mut stuffed = vec![Complex64::new(0.0, 0.0); symbols.len() * self.sps];
        for (m, &s) in symbols.iter().enumerate() {
            stuffed[m * self.sps] = s;
        }
        self.conv.process(&stuffed)
    }
}

fn symbols_to_complex(symbols: &Samples) -> Vec<Complex64> {
    match symbols {
        Samples::Real(v) => v.iter().map(|&s| Complex64::new(s as f64, 0.0)).collect(),
        Samples::Complex(v) => v.iter().map(|&s| Complex64::new(s.re as f64, s.im as f64)).collect(),
    }
}

/// RRC-shape a symbol sequence at the DAC rate. Real symbols yield a
/// real buffer, complex symbols a complex one.
pub fn shape_waveform(symbols: &Samples, cfg: &TxConfig) -> Result<SampleBuffer, DspError> {
    cfg.validate()?;
    let mut shaper = PulseShaper::new(cfg)?;
    let cx = symbols_to_complex(symbols);
    let out = shaper.shape(&cx);
    let sps = SamplesPerSymbol::new(shaper.sps() as u32, 1);
    Ok(match symbols {
        Samples::Real(_) => SampleBuffer::real(
            out.iter().map(|v| v.re as f32).collect(),
            cfg.dac_rate,
            sps,
            0,
        ),
        Samples::Complex(_) => SampleBuffer::complex(
            out.iter().map(|v| Complex32::new(v.re as f32, v.im as f32)).collect(),
            cfg.dac_rate,
            sps,
            0,
        ),
    })
}

/// Carrier amplitude for a signal power and CSPR.
pub fn carrier_amplitude(signal_power: f64, cspr_db: f64) -> f64 {
    (signal_power * libm::pow(10.0, cspr_db / 10.0)).sqrt()
}

/// Add the carrier tone A*exp(j2pi*fc*t) to a complex waveform, with A
/// set from the measured signal power so the carrier-to-signal power
/// ratio equals `cspr_db`. `start_sample` fixes the tone phase for
/// streaming continuity.
pub fn add_carrier_tone(
    waveform: &SampleBuffer,
    cfg: &TxConfig,
    start_sample: u64,
) -> Result<SampleBuffer, DspError> {
    let edge = cfg.rrc().band_edge();
    if cfg.carrier_offset <= edge {
        return Err(DspError::CarrierInBand {
            carrier_hz: cfg.carrier_offset,
            band_edge_hz: edge,
        });
    }
    let samples = waveform.complex_samples()?;
    let p_sig: f64 =
        samples.iter().map(|s| s.norm_sqr() as f64).sum::<f64>() / samples.len() as f64;
    let a = carrier_amplitude(p_sig, cfg.cspr_db);
    let out = add_tone(samples, a, cfg.carrier_offset / waveform.sample_rate, start_sample);
    Ok(SampleBuffer::complex(
        out,
        waveform.sample_rate,
        waveform.samples_per_symbol,
        waveform.sequence_index,
    ))
}

fn add_tone(samples: &[Complex32], amp: f64, freq_per_sample: f64, start: u64) -> Vec<Complex32> {
    samples
        .iter()
        .enumerate()
        .map(|(i, &s)| {
            let cycles = freq_per_sample * (start + i as u64) as f64;
            let theta = 2.0 * core::f64::consts::PI * (cycles - cycles.floor());
            let tone = Complex64::new(theta.cos() * amp, theta.sin() * amp);
            Complex32::new(s.re + tone.re as f32, s.im + tone.im as f32)
        })
        .collect()
}

/// Streaming transmitter: renders the optical field buffer by buffer
/// from a cyclic bit source, carrying shaper history, tone phase, and
/// the gain settings fixed on the first buffer.
pub struct TxStream {
    cfg: TxConfig,
    shaper: PulseShaper,
    ref_bits: Vec<u8>,
    bit_pos: usize,
    sample_pos: u64,
    symbol_pos: u64,
    pending: Vec<Complex64>,
    carrier_amp: f64,
    output_gain: f64,
    calibrated: bool,
}

impl TxStream {
    /// `ref_bits` is the transmitted bit sequence, repeated cyclically.
    pub fn new(cfg: TxConfig, ref_bits: Vec<u8>) -> Result<Self, DspError> {
        cfg.validate()?;
        if ref_bits.is_empty() {
            return Err(DspError::Config(alloc::string::String::from(
                "reference bit sequence is empty",
            )));
        }
        let shaper = PulseShaper::new(&cfg)?;
        Ok(Self {
            cfg,
            shaper,
            ref_bits,
            bit_pos: 0,
            sample_pos: 0,
            symbol_pos: 0,
            pending: Vec::new(),
            carrier_amp: 0.0,
            output_gain: 1.0,
            calibrated: false,
        })
    }

    pub fn config(&self) -> &TxConfig {
        &self.cfg
    }

    /// Bits consumed per symbol period, for aligning reference data.
    pub fn ref_bits(&self) -> &[u8] {
        &self.ref_bits
    }

    fn next_bits(&mut self, n: usize) -> Vec<u8> {
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            out.push(self.ref_bits[self.bit_pos]);
            self.bit_pos = (self.bit_pos + 1) % self.ref_bits.len();
        }
        out
    }

    /// Reference symbol at absolute symbol index (for QAM training).
    pub fn symbol_at(&self, index: u64) -> Complex32 {
        let bps = self.cfg.format.bits_per_symbol() as usize;
        let start = (index as usize * bps) % self.ref_bits.len();
        let mut group = Vec::with_capacity(bps);
        for k in 0..bps {
            group.push(self.ref_bits[(start + k) % self.ref_bits.len()]);
        }
        match map_symbols(&group, self.cfg.format).unwrap() {
            Samples::Complex(v) => v[0],
            Samples::Real(v) => Complex32::new(v[0], 0.0),
        }
    }

    /// Render the next field buffer of `len` samples.
    pub fn next_buffer(&mut self, len: usize) -> Result<SampleBuffer, DspError> {
        let bps = self.cfg.format.bits_per_symbol() as usize;
        let sps = self.shaper.sps();
        let is_qam = self.cfg.format.is_qam();
        while self.pending.len() < len {
            let n_sym = 1 << 14;
            let bits = self.next_bits(n_sym * bps);
            let symbols = map_symbols(&bits, self.cfg.format)?;
            let cx: Vec<Complex64> = match &symbols {
                Samples::Real(v) => v
                    .iter()
                    .map(|&l| {
                        // Intensity-domain symbol in [bias, 1].
                        let i = self.cfg.pam_bias
                            + (1.0 - self.cfg.pam_bias) * (l as f64 + 1.0) / 2.0;
                        Complex64::new(i, 0.0)
                    })
                    .collect(),
                Samples::Complex(v) => {
                    v.iter().map(|&s| Complex64::new(s.re as f64, s.im as f64)).collect()
                }
            };
            self.symbol_pos += n_sym as u64;
            self.pending.extend(self.shaper.shape(&cx));
        }
        let chunk: Vec<Complex64> = self.pending.drain(..len).collect();

        if !self.calibrated {
            if is_qam {
                let p_sig: f64 =
                    chunk.iter().map(|s| s.norm_sqr()).sum::<f64>() / chunk.len() as f64;
                self.carrier_amp = carrier_amplitude(p_sig, self.cfg.cspr_db);
                // Normalize signal + tone to unit average power.
                self.output_gain = 1.0 / (p_sig + self.carrier_amp * self.carrier_amp).sqrt();
            }
            self.calibrated = true;
        }

        let seq = self.sample_pos / len as u64;
        let sps_ratio = SamplesPerSymbol::new(sps as u32, 1);
        let buf = if is_qam {
            let fc = self.cfg.carrier_offset / self.cfg.dac_rate;
            let start = self.sample_pos;
            let g = self.output_gain;
            let field: Vec<Complex32> = chunk
                .iter()
                .enumerate()
                .map(|(i, s)| {
                    let cycles = fc * (start + i as u64) as f64;
                    let theta = 2.0 * core::f64::consts::PI * (cycles - cycles.floor());
                    let v = (s + Complex64::new(
                        theta.cos() * self.carrier_amp,
                        theta.sin() * self.carrier_amp,
                    )) * g;
                    Complex32::new(v.re as f32, v.im as f32)
                })
                .collect();
            SampleBuffer::complex(field, self.cfg.dac_rate, sps_ratio, seq)
        } else {
            // Ideal intensity modulation: field = sqrt(intensity).
            let field: Vec<f32> = chunk
                .iter()
                .map(|s| {
                    let i = s.re.max(0.0);
                    i.sqrt() as f32
                })
                .collect();
            SampleBuffer::real(field, self.cfg.dac_rate, sps_ratio, seq)
        };
        self.sample_pos += len as u64;
        Ok(buf)
    }
}

/// One-shot field rendering for a complete bit sequence (padded with
/// cyclic repetition to fill the shaper tail).
pub fn tx_field(cfg: &TxConfig, bits: &[u8]) -> Result<SampleBuffer, DspError> {
    cfg.validate()?;
    let bps = cfg.format.bits_per_symbol() as usize;
    if bits.len() % bps != 0 {
        return Err(DspError::BitAlignment {
            bits: bits.len(),
            bits_per_symbol: bps,
        });
    }
    let sps = cfg.samples_per_symbol()?;
    let len = (bits.len() / bps) * sps;
    let mut stream = TxStream::new(cfg.clone(), bits.to_vec())?;
    stream.next_buffer(len)
}
