//! Back-to-back channel model: ASE noise loading at a target OSNR,
//! optical band-pass, square-law photodetection with a band-limited
//! front end, AC coupling, transmitter/receiver clock offset, and 12-bit
//! quantization.
//!
//! The electrical bandwidth limits are modeled as one 2nd-order
//! Butterworth low-pass section each for the photodiode and the ADC
//! (3 dB points from the config); their discretized responses are also
//! exported so the static equalizer can be designed against the exact
//! response the simulation applies.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use num_complex::{Complex32, Complex64};
use rand_core::{RngCore, SeedableRng};

use crate::buffer::{SampleBuffer, Samples, SamplesPerSymbol};
use crate::error::DspError;
use crate::fft::FftPlan;

/// OSNR reference bandwidth: 0.1 nm at 1550 nm, 12.5 GHz.
pub const OSNR_REF_BW: f64 = 12.5e9;

/// Clock-frequency offset profile of the receiver ADC.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClockProfile {
    /// Constant offset in parts per million.
    Static(f64),
    /// Symmetric triangle sweep between -amplitude and +amplitude.
    Triangle { amplitude_ppm: f64, period_s: f64 },
}

impl ClockProfile {
    pub fn ppm_at(&self, t: f64) -> f64 {
        match *self {
            ClockProfile::Static(ppm) => ppm,
            ClockProfile::Triangle { amplitude_ppm, period_s } => {
                let phase = (t / period_s).rem_euclid(1.0);
                let tri = if phase < 0.5 { 4.0 * phase - 1.0 } else { 3.0 - 4.0 * phase };
                amplitude_ppm * tri
            }
        }
    }

    pub fn max_abs_ppm(&self) -> f64 {
        match *self {
            ClockProfile::Static(ppm) => ppm.abs(),
            ClockProfile::Triangle { amplitude_ppm, .. } => amplitude_ppm.abs(),
        }
    }
}

/// Full channel parameterization.
#[derive(Debug, Clone)]
pub struct ChannelConfig {
    /// OSNR in dB over the 12.5 GHz reference bandwidth; +inf = noiseless.
    pub osnr_db: f64,
    /// Optical band-pass width (None = bypass). 5 GHz (0.04 nm) default.
    pub obpf_bw: Option<f64>,
    /// Optical band-pass center relative to the field's baseband.
    pub obpf_center: f64,
    /// Photodiode 3 dB cutoff (None = bypass).
    pub pd_bw: Option<f64>,
    /// ADC front-end 3 dB cutoff (None = bypass).
    pub adc_bw: Option<f64>,
    /// Receiver clock offset profile.
    pub clock: ClockProfile,
    /// ADC resolution in bits.
    pub adc_bits: u32,
    /// ADC sample rate.
    pub adc_rate: f64,
    /// AC-coupled digitizer (KK path).
    pub ac_coupled: bool,
    /// AC-coupling corner frequency.
    pub ac_corner: f64,
    /// Noise generator seed.
    pub seed: u64,
    /// Fraction of full scale the calibrated peak maps to.
    pub headroom: f64,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        Self {
            osnr_db: f64::INFINITY,
            obpf_bw: Some(5e9),
            obpf_center: 0.0,
            pd_bw: Some(1e9),
            adc_bw: Some(1e9),
            clock: ClockProfile::Static(0.0),
            adc_bits: 12,
            adc_rate: 4e9,
            ac_coupled: false,
            ac_corner: 1e6,
            seed: 1,
            headroom: 0.95,
        }
    }
}

impl ChannelConfig {
    pub fn validate(&self) -> Result<(), DspError> {
        if self.clock.max_abs_ppm() >= 1000.0 {
            return Err(DspError::Config(alloc::format!(
                "clock offset {} ppm out of range (|ppm| < 1000)",
                self.clock.max_abs_ppm()
            )));
        }
        if self.adc_bits == 0 || self.adc_bits > 16 {
            return Err(DspError::Config(alloc::format!(
                "adc_bits {} out of range",
                self.adc_bits
            )));
        }
        Ok(())
    }

    /// Discretized electrical response (photodiode section, ADC section,
    /// AC coupling if enabled) at frequency `f`. This is exactly the
    /// response the per-sample filters apply.
    pub fn electrical_response(&self, f: f64) -> Complex64 {
        let mut h = Complex64::new(1.0, 0.0);
        if let Some(bw) = self.pd_bw {
            h *= Biquad::lowpass(bw, self.adc_rate).response(f, self.adc_rate);
        }
        if let Some(bw) = self.adc_bw {
            h *= Biquad::lowpass(bw, self.adc_rate).response(f, self.adc_rate);
        }
        if self.ac_coupled {
            h *= OnePoleHighpass::new(self.ac_corner, self.adc_rate).response(f, self.adc_rate);
        }
        h
    }
}

/// Seeded noise generator state; runs are bit-reproducible.
pub struct NoiseState {
    rng: rand_chacha::ChaCha8Rng,
}

impl NoiseState {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: rand_chacha::ChaCha8Rng::seed_from_u64(seed),
        }
    }

    fn uniform(&mut self) -> f64 {
        // (0, 1]: never zero, so ln() is finite.
        ((self.rng.next_u64() >> 11) as f64 + 1.0) / (1u64 << 53) as f64
    }

    /// Standard circularly-symmetric complex Gaussian (unit variance per
    /// complex sample) via Box-Muller.
    pub fn complex_gaussian(&mut self) -> Complex64 {
        let r = (-2.0 * self.uniform().ln()).sqrt() * core::f64::consts::FRAC_1_SQRT_2;
        let theta = 2.0 * core::f64::consts::PI * self.uniform();
        Complex64::new(r * theta.cos(), r * theta.sin())
    }
}

/// Add circularly-symmetric white Gaussian noise so that
/// P_signal / (PSD * 12.5 GHz) matches the configured OSNR. The PSD is
/// taken from `signal_power` (single polarization); pass the measured or
/// frozen signal power explicitly so streams stay stationary.
pub fn load_noise(
    field: &[Complex32],
    signal_power: f64,
    osnr_db: f64,
    sample_rate: f64,
    noise: &mut NoiseState,
) -> Result<Vec<Complex32>, DspError> {
    if osnr_db.is_infinite() && osnr_db > 0.0 {
        return Ok(field.to_vec());
    }
    if !osnr_db.is_finite() {
        return Err(DspError::NonFiniteOsnr);
    }
    let psd = signal_power / (libm::pow(10.0, osnr_db / 10.0) * OSNR_REF_BW);
    let sigma = (psd * sample_rate).sqrt();
    Ok(field
        .iter()
        .map(|&s| {
            let n = noise.complex_gaussian() * sigma;
            Complex32::new(s.re + n.re as f32, s.im + n.im as f32)
        })
        .collect())
}

/// Streaming brick-wall optical band-pass as a frequency-domain mask.
///
/// Long overlapping chunks are masked on a 2^18-bin grid and only the
/// central window of each chunk is emitted, keeping the infinite mask
/// kernel's circular wrap at least 2^15 samples away: residuals stay
/// below -100 dBc. Pass-band ripple is exactly zero. Emission lags the
/// input until `flush`.
pub struct ObpfStream {
    center: f64,
    bw: f64,
    sample_rate: f64,
    plan: FftPlan<f64>,
    buf: Vec<Complex64>,
    emitted_any: bool,
}

const OBPF_FFT: usize = 1 << 18;
const OBPF_MARGIN: usize = 1 << 15;
const OBPF_KEEP: usize = OBPF_FFT - 2 * OBPF_MARGIN;

impl ObpfStream {
    pub fn new(center: f64, bw: f64, sample_rate: f64) -> Self {
        Self {
            center,
            bw,
            sample_rate,
            plan: FftPlan::<f64>::new(OBPF_FFT),
            // Zero history ahead of the stream start.
            buf: vec![Complex64::new(0.0, 0.0); OBPF_MARGIN],
            emitted_any: false,
        }
    }

    fn mask_chunk(&self, data: &mut [Complex64], scratch: &mut [Complex64]) {
        self.plan.forward(data, scratch);
        for (k, v) in data.iter_mut().enumerate() {
            let f = crate::fft::signed_bin(k, OBPF_FFT) as f64 / OBPF_FFT as f64 * self.sample_rate;
            if (f - self.center).abs() > self.bw / 2.0 {
                *v = Complex64::new(0.0, 0.0);
            }
        }
        self.plan.inverse(data, scratch);
    }

    fn drain_ready(&mut self, out: &mut Vec<Complex32>) {
        let mut scratch = vec![Complex64::new(0.0, 0.0); OBPF_FFT];
        while self.buf.len() >= OBPF_FFT {
            let mut data = self.buf[..OBPF_FFT].to_vec();
            self.mask_chunk(&mut data, &mut scratch);
            for v in &data[OBPF_MARGIN..OBPF_MARGIN + OBPF_KEEP] {
                out.push(Complex32::new(v.re as f32, v.im as f32));
            }
            self.buf.drain(..OBPF_KEEP);
            self.emitted_any = true;
        }
    }

    pub fn push(&mut self, field: &[Complex32]) -> Vec<Complex32> {
        self.buf
            .extend(field.iter().map(|s| Complex64::new(s.re as f64, s.im as f64)));
        let mut out = Vec::new();
        self.drain_ready(&mut out);
        out
    }

    /// Emit everything still pending (end of stream), zero-padding the
    /// final chunk.
    pub fn flush(&mut self) -> Vec<Complex32> {
        let pending = self.buf.len().saturating_sub(OBPF_MARGIN);
        let mut out = Vec::new();
        if pending == 0 {
            return out;
        }
        let mut scratch = vec![Complex64::new(0.0, 0.0); OBPF_FFT];
        while self.buf.len() > OBPF_MARGIN {
            let mut data = vec![Complex64::new(0.0, 0.0); OBPF_FFT];
            let take = self.buf.len().min(OBPF_FFT);
            data[..take].copy_from_slice(&self.buf[..take]);
            self.mask_chunk(&mut data, &mut scratch);
            let emit = (self.buf.len() - OBPF_MARGIN).min(OBPF_KEEP);
            for v in &data[OBPF_MARGIN..OBPF_MARGIN + emit] {
                out.push(Complex32::new(v.re as f32, v.im as f32));
            }
            self.buf.drain(..emit.min(self.buf.len()));
        }
        self.buf.clear();
        out
    }
}

/// One-shot band-pass over a complete signal: push + flush. The leading
/// and trailing ~2^15 samples see the stream-edge transient of the
/// brick-wall kernel.
pub fn optical_bpf(field: &[Complex32], center: f64, bw: f64, sample_rate: f64) -> Vec<Complex32> {
    if bw >= sample_rate {
        return field.to_vec();
    }
    let mut stream = ObpfStream::new(center, bw, sample_rate);
    let mut out = stream.push(field);
    out.extend(stream.flush());
    out
}

/// 2nd-order Butterworth low-pass (bilinear transform, prewarped 3 dB
/// point).
#[derive(Debug, Clone, Copy)]
pub struct Biquad {
    b0: f64,
    b1: f64,
    b2: f64,
    a1: f64,
    a2: f64,
}

/// Streaming state for one biquad section.
#[derive(Debug, Clone, Copy, Default)]
pub struct BiquadState {
    x1: f64,
    x2: f64,
    y1: f64,
    y2: f64,
}

impl Biquad {
    pub fn lowpass(cutoff: f64, sample_rate: f64) -> Self {
        let w0 = 2.0 * core::f64::consts::PI * cutoff / sample_rate;
        let q = core::f64::consts::FRAC_1_SQRT_2;
        let alpha = w0.sin() / (2.0 * q);
        let cw = w0.cos();
        let a0 = 1.0 + alpha;
        Self {
            b0: (1.0 - cw) / 2.0 / a0,
            b1: (1.0 - cw) / a0,
            b2: (1.0 - cw) / 2.0 / a0,
            a1: -2.0 * cw / a0,
            a2: (1.0 - alpha) / a0,
        }
    }

    pub fn step(&self, x: f64, s: &mut BiquadState) -> f64 {
        let y = self.b0 * x + self.b1 * s.x1 + self.b2 * s.x2 - self.a1 * s.y1 - self.a2 * s.y2;
        s.x2 = s.x1;
        s.x1 = x;
        s.y2 = s.y1;
        s.y1 = y;
        y
    }

    pub fn process(&self, signal: &mut [f64], state: &mut BiquadState) {
        for v in signal.iter_mut() {
            *v = self.step(*v, state);
        }
    }

    /// Response at frequency `f` for the discretized filter.
    pub fn response(&self, f: f64, sample_rate: f64) -> Complex64 {
        let w = 2.0 * core::f64::consts::PI * f / sample_rate;
        let z1 = Complex64::new(w.cos(), -w.sin());
        let z2 = z1 * z1;
        let num = Complex64::new(self.b0, 0.0) + z1 * self.b1 + z2 * self.b2;
        let den = Complex64::new(1.0, 0.0) + z1 * self.a1 + z2 * self.a2;
        num / den
    }
}

/// One-pole bilinear high-pass for AC coupling.
#[derive(Debug, Clone, Copy)]
pub struct OnePoleHighpass {
    a: f64,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct HighpassState {
    x1: f64,
    y1: f64,
}

impl OnePoleHighpass {
    pub fn new(corner: f64, sample_rate: f64) -> Self {
        let t = (core::f64::consts::PI * corner / sample_rate).tan();
        Self { a: (1.0 - t) / (1.0 + t) }
    }

    pub fn step(&self, x: f64, s: &mut HighpassState) -> f64 {
        let y = (1.0 + self.a) / 2.0 * (x - s.x1) + self.a * s.y1;
        s.x1 = x;
        s.y1 = y;
        y
    }

    pub fn response(&self, f: f64, sample_rate: f64) -> Complex64 {
        let w = 2.0 * core::f64::consts::PI * f / sample_rate;
        let z1 = Complex64::new(w.cos(), -w.sin());
        let num = (Complex64::new(1.0, 0.0) - z1) * ((1.0 + self.a) / 2.0);
        let den = Complex64::new(1.0, 0.0) - z1 * self.a;
        num / den
    }
}

/// Square-law photodetection followed by the photodiode's low-pass
/// section: lowpass(|E|^2). Output is real and insensitive to global
/// field phase by construction.
pub fn photodiode(
    field: &[Complex32],
    cfg: &ChannelConfig,
    state: &mut BiquadState,
) -> Vec<f64> {
    let mut out: Vec<f64> = field.iter().map(|e| e.norm_sqr() as f64).collect();
    if let Some(bw) = cfg.pd_bw {
        Biquad::lowpass(bw, cfg.adc_rate).process(&mut out, state);
    }
    out
}

/// AC coupling: removes the DC term, returns the running mean removed so
/// the KK chain can restore it. Tracks (sum, count) in `removed`.
pub fn ac_couple(
    signal: &mut [f64],
    cfg: &ChannelConfig,
    state: &mut HighpassState,
    removed: &mut (f64, u64),
) {
    let hp = OnePoleHighpass::new(cfg.ac_corner, cfg.adc_rate);
    for v in signal.iter_mut() {
        removed.0 += *v;
        removed.1 += 1;
        *v = hp.step(*v, state);
    }
}

const RESAMPLER_TAPS: usize = 33;
const RESAMPLER_HALF: usize = RESAMPLER_TAPS / 2;
const RESAMPLER_PHASES: usize = 256;

fn bessel_i0(x: f64) -> f64 {
    let mut sum = 1.0;
    let mut term = 1.0;
    let half = x / 2.0;
    for k in 1..30 {
        term *= (half / k as f64) * (half / k as f64);
        sum += term;
        if term < 1e-18 * sum {
            break;
        }
    }
    sum
}

/// Band-limited fractional resampler: 33-tap Kaiser-windowed sinc with a
/// 256-phase polyphase table and linear interpolation between phases
/// (>60 dB image rejection). Models the receiver clock running at
/// (1 + ppm*1e-6) times the nominal rate.
pub struct ClockResampler {
    profile: ClockProfile,
    sample_rate: f64,
    table: Vec<f64>, // (PHASES+1) x TAPS
    history: Vec<f64>,
    /// Position of the next output sample on the input grid, relative to
    /// the first sample of the *current* chunk, offset by the history.
    frac_pos: f64,
    /// Output samples emitted so far (drives the time-varying profile).
    emitted: u64,
}

impl ClockResampler {
    pub fn new(profile: ClockProfile, sample_rate: f64) -> Self {
        let beta = 8.0;
        let denom = bessel_i0(beta);
        let mut table = Vec::with_capacity((RESAMPLER_PHASES + 1) * RESAMPLER_TAPS);
        for p in 0..=RESAMPLER_PHASES {
            let mu = p as f64 / RESAMPLER_PHASES as f64;
            for t in 0..RESAMPLER_TAPS {
                let x = t as f64 - RESAMPLER_HALF as f64 - mu;
                let sinc = if x.abs() < 1e-12 {
                    1.0
                } else {
                    (core::f64::consts::PI * x).sin() / (core::f64::consts::PI * x)
                };
                let u = x / (RESAMPLER_HALF as f64 + 1.0);
                let w = if u.abs() <= 1.0 {
                    bessel_i0(beta * (1.0 - u * u).sqrt()) / denom
                } else {
                    0.0
                };
                table.push(sinc * w);
            }
        }
        Self {
            profile,
            sample_rate,
            table,
            history: vec![0.0; RESAMPLER_TAPS - 1],
            frac_pos: 0.0,
            emitted: 0,
        }
    }

    /// Resample the next chunk; emits as many outputs as the available
    /// input span allows (history is zero-primed at stream start).
    pub fn process(&mut self, input: &[f64]) -> Vec<f64> {
        let mut ext = Vec::with_capacity(self.history.len() + input.len());
        ext.extend_from_slice(&self.history);
        ext.extend_from_slice(input);
        let mut out = Vec::with_capacity(input.len() + 2);
        // Output n samples the input position; the kernel needs TAPS
        // samples starting at floor(pos).
        loop {
            let base = self.frac_pos.floor();
            let idx = base as i64;
            if idx as usize + RESAMPLER_TAPS > ext.len() {
                break;
            }
            let mu = self.frac_pos - base;
            let scaled = mu * RESAMPLER_PHASES as f64;
            let p0 = scaled.floor() as usize;
            let w1 = scaled - p0 as f64;
            let w0 = 1.0 - w1;
            let t0 = &self.table[p0 * RESAMPLER_TAPS..p0 * RESAMPLER_TAPS + RESAMPLER_TAPS];
            let t1 = &self.table[(p0 + 1) * RESAMPLER_TAPS..(p0 + 1) * RESAMPLER_TAPS + RESAMPLER_TAPS];
            let seg = &ext[idx as usize..idx as usize + RESAMPLER_TAPS];
            let mut acc = 0.0;
            for k in 0..RESAMPLER_TAPS {
                acc += seg[k] * (w0 * t0[k] + w1 * t1[k]);
            }
            out.push(acc);
            let t = self.emitted as f64 / self.sample_rate;
            let step = 1.0 + self.profile.ppm_at(t) * 1e-6;
            self.frac_pos += step;
            self.emitted += 1;
        }
        // Keep the last TAPS-1+fractional span as history for the next
        // chunk and rebase the position.
        let consumed = ext.len() - (RESAMPLER_TAPS - 1);
        self.history.clear();
        self.history.extend_from_slice(&ext[consumed..]);
        self.frac_pos -= consumed as f64;
        out
    }
}

/// Uniform mid-tread quantization to unsigned codes. Full scale +1 maps
/// to the top code, -1 to zero; clipped samples are counted, not fatal.
pub fn adc_quantize(signal: &[f64], bits: u32) -> (Vec<u16>, u64) {
    let levels = (1u32 << bits) - 1;
    let mut clipped = 0u64;
    let codes = signal
        .iter()
        .map(|&x| {
            let scaled = (x + 1.0) / 2.0 * levels as f64;
            let rounded = libm::round(scaled);
            if rounded < 0.0 {
                clipped += 1;
                0u16
            } else if rounded > levels as f64 {
                clipped += 1;
                levels as u16
            } else {
                rounded as u16
            }
        })
        .collect();
    (codes, clipped)
}

/// Map unsigned ADC codes back to [-1, 1] floats (the receiver's view).
pub fn adc_dequantize(codes: &[u16], bits: u32) -> Vec<f32> {
    let levels = ((1u32 << bits) - 1) as f32;
    codes.iter().map(|&c| c as f32 * 2.0 / levels - 1.0).collect()
}

/// Per-run channel statistics.
#[derive(Debug, Clone, Default)]
pub struct ChannelStats {
    pub clipped_samples: u64,
    pub total_samples: u64,
    /// Mean removed by AC coupling (for KK DC restoration).
    pub removed_dc: f64,
    /// Gain applied before quantization.
    pub adc_gain: f64,
    /// Signal power frozen on the first buffer (noise PSD reference).
    pub signal_power: f64,
}

/// Streaming channel: applies the full path buffer by buffer, carrying
/// filter state, resampler history, and the calibration fixed on the
/// first buffer. Output buffers hold exactly `out_len` samples each.
pub struct ChannelStream {
    cfg: ChannelConfig,
    noise: NoiseState,
    pd_state: BiquadState,
    adc_state: BiquadState,
    hp_state: HighpassState,
    removed: (f64, u64),
    obpf: Option<ObpfStream>,
    resampler: ClockResampler,
    pending: Vec<f64>,
    out_len: usize,
    out_seq: u64,
    stats: ChannelStats,
    calibrated: bool,
    sps: SamplesPerSymbol,
}

impl ChannelStream {
    pub fn new(cfg: ChannelConfig, out_len: usize) -> Result<Self, DspError> {
        cfg.validate()?;
        let resampler = ClockResampler::new(cfg.clock, cfg.adc_rate);
        let seed = cfg.seed;
        let obpf = match cfg.obpf_bw {
            Some(bw) if bw < cfg.adc_rate => {
                Some(ObpfStream::new(cfg.obpf_center, bw, cfg.adc_rate))
            }
            _ => None,
        };
        Ok(Self {
            cfg,
            noise: NoiseState::new(seed),
            pd_state: BiquadState::default(),
            adc_state: BiquadState::default(),
            hp_state: HighpassState::default(),
            removed: (0.0, 0),
            obpf,
            resampler,
            pending: Vec::new(),
            out_len,
            out_seq: 0,
            stats: ChannelStats::default(),
            calibrated: false,
            sps: SamplesPerSymbol::new(2, 1),
        })
    }

    pub fn stats(&self) -> &ChannelStats {
        &self.stats
    }

    /// Push one transmitted field buffer; returns zero or more completed
    /// ADC buffers.
    pub fn push(&mut self, field: &SampleBuffer) -> Result<Vec<SampleBuffer>, DspError> {
        if (field.sample_rate - self.cfg.adc_rate).abs() > 1e-3 {
            return Err(DspError::Config(alloc::format!(
                "field rendered at {} Hz but ADC runs at {} Hz",
                field.sample_rate,
                self.cfg.adc_rate
            )));
        }
        self.sps = field.samples_per_symbol;
        let cx: Vec<Complex32> = match &field.samples {
            Samples::Real(v) => v.iter().map(|&x| Complex32::new(x, 0.0)).collect(),
            Samples::Complex(v) => v.clone(),
        };

        if !self.calibrated {
            self.stats.signal_power =
                cx.iter().map(|s| s.norm_sqr() as f64).sum::<f64>() / cx.len() as f64;
        }

        // Optical path.
        let noisy = load_noise(
            &cx,
            self.stats.signal_power,
            self.cfg.osnr_db,
            self.cfg.adc_rate,
            &mut self.noise,
        )?;
        let filtered = match self.obpf.as_mut() {
            Some(obpf) => obpf.push(&noisy),
            None => noisy,
        };

        // Electrical path.
        let mut elec = photodiode(&filtered, &self.cfg, &mut self.pd_state);
        if self.cfg.ac_coupled {
            ac_couple(&mut elec, &self.cfg, &mut self.hp_state, &mut self.removed);
            self.stats.removed_dc = self.removed.0 / self.removed.1 as f64;
        }
        if let Some(bw) = self.cfg.adc_bw {
            Biquad::lowpass(bw, self.cfg.adc_rate).process(&mut elec, &mut self.adc_state);
        }

        // Receiver clock.
        let resampled = self.resampler.process(&elec);

        if !self.calibrated {
            let peak = resampled.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
            self.stats.adc_gain = if peak > 0.0 { self.cfg.headroom / peak } else { 1.0 };
            self.calibrated = true;
        }
        let g = self.stats.adc_gain;
        self.pending.extend(resampled.iter().map(|&v| v * g));

        let mut out = Vec::new();
        while self.pending.len() >= self.out_len {
            let chunk: Vec<f64> = self.pending.drain(..self.out_len).collect();
            let (codes, clipped) = adc_quantize(&chunk, self.cfg.adc_bits);
            self.stats.clipped_samples += clipped;
            self.stats.total_samples += chunk.len() as u64;
            let samples = adc_dequantize(&codes, self.cfg.adc_bits);
            out.push(SampleBuffer::real(
                samples,
                self.cfg.adc_rate,
                self.sps,
                self.out_seq,
            ));
            self.out_seq += 1;
        }
        Ok(out)
    }

    /// ADC codes for one buffer (file-writing path); same math as `push`.
    pub fn quantize_codes(&self, chunk: &[f64]) -> (Vec<u16>, u64) {
        adc_quantize(chunk, self.cfg.adc_bits)
    }
}
