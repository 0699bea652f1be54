//! 100% overlap-save block framing and frequency-domain convolution.
//!
//! A buffer of 2^22 samples splits into 8192 blocks of 1024 samples with
//! 512-sample hop: block b covers stream samples [512b - 512, 512b + 512),
//! the first block borrowing its leading half from the predecessor
//! buffer's tail. After bin-wise filtering with a zero-phase kernel whose
//! centered support stays within +/-256 taps, the central window
//! [256, 768) of each block is free of circular wrap and the kept windows
//! tile the stream. Concatenated output sample g therefore equals the
//! zero-phase-filtered input sample g - 256; the 513-tap limit is exactly
//! the support that keeps this window clean.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex32;

use crate::buffer::{SampleBuffer, BLOCK_HOP, BLOCK_LEN, BUFFER_LEN};
use crate::error::DspError;
use crate::fft::{BlockFft, BlockWork, FftPlan, VALID_RANGE};

/// Largest FIR supported by the 1024-point block grid without circular
/// ISI in the kept window.
pub const MAX_BLOCK_TAPS: usize = 513;

/// Overlap-save view of one buffer: 1024-sample windows at 512 hop.
pub struct FramedBlocks<'a, T> {
    first: Vec<T>,
    samples: &'a [T],
    n_blocks: usize,
}

impl<'a, T: Copy> FramedBlocks<'a, T> {
    /// `prev_tail` is the final 512 samples of the predecessor buffer
    /// (zeros at stream start); `samples` must be a non-empty multiple of
    /// 512.
    pub fn new(prev_tail: &[T], samples: &'a [T]) -> Result<Self, DspError> {
        if prev_tail.len() != BLOCK_HOP {
            return Err(DspError::SizeMismatch {
                expected: BLOCK_HOP,
                got: prev_tail.len(),
            });
        }
        if samples.is_empty() || samples.len() % BLOCK_HOP != 0 {
            return Err(DspError::SizeMismatch {
                expected: BLOCK_HOP,
                got: samples.len(),
            });
        }
        let mut first = Vec::with_capacity(BLOCK_LEN);
        first.extend_from_slice(prev_tail);
        first.extend_from_slice(&samples[..BLOCK_HOP]);
        Ok(Self {
            first,
            samples,
            n_blocks: samples.len() / BLOCK_HOP,
        })
    }

    pub fn n_blocks(&self) -> usize {
        self.n_blocks
    }

    /// 1024-sample window of block `b`.
    pub fn block(&self, b: usize) -> &[T] {
        if b == 0 {
            &self.first
        } else {
            &self.samples[b * BLOCK_HOP - BLOCK_HOP..b * BLOCK_HOP + BLOCK_HOP]
        }
    }

    /// Tail to hand to the successor buffer.
    pub fn next_tail(&self) -> &[T] {
        &self.samples[self.samples.len() - BLOCK_HOP..]
    }
}

/// Frame a full pipeline buffer (exactly 2^22 real samples) into its 8192
/// blocks, returning the framed view and the tail for the next buffer.
pub fn overlap_save_frame<'a>(
    prev_tail: &[f32],
    buffer: &'a SampleBuffer,
) -> Result<(FramedBlocks<'a, f32>, Vec<f32>), DspError> {
    if buffer.len() != BUFFER_LEN {
        return Err(DspError::BufferLength {
            expected: BUFFER_LEN,
            got: buffer.len(),
        });
    }
    let samples = buffer.real_samples()?;
    let framed = FramedBlocks::new(prev_tail, samples)?;
    let tail = framed.next_tail().to_vec();
    Ok((framed, tail))
}

/// Zero-phase 1024-bin spectrum of a centered FIR: tap m of the odd-length
/// kernel sits at circular index m - (len-1)/2. Real symmetric taps yield
/// a real spectrum.
pub fn centered_taps_to_fd(taps: &[f64]) -> Result<Vec<Complex32>, DspError> {
    if taps.len() > MAX_BLOCK_TAPS || taps.len() % 2 == 0 {
        return Err(DspError::SizeMismatch {
            expected: MAX_BLOCK_TAPS,
            got: taps.len(),
        });
    }
    let half = (taps.len() - 1) / 2;
    let mut padded = vec![num_complex::Complex64::new(0.0, 0.0); BLOCK_LEN];
    for (m, &t) in taps.iter().enumerate() {
        let idx = (m + BLOCK_LEN - half) % BLOCK_LEN;
        padded[idx].re = t;
    }
    let plan = FftPlan::<f64>::new(BLOCK_LEN);
    let mut scratch = vec![num_complex::Complex64::new(0.0, 0.0); BLOCK_LEN];
    plan.forward(&mut padded, &mut scratch);
    // Undo the unitary 1/sqrt(N) so the spectrum is the plain DTFT of the
    // taps and bin-wise multiplication applies the filter at unit gain.
    let scale = (BLOCK_LEN as f64).sqrt();
    Ok(padded
        .iter()
        .map(|v| Complex32::new((v.re * scale) as f32, (v.im * scale) as f32))
        .collect())
}

/// Run a real sample stream through the full overlap-save filter path
/// (frame, forward FFT, bin-wise multiply, inverse FFT, keep the valid
/// window). Output sample g equals the zero-phase-filtered input sample
/// g - 256. Used by equivalence tests against direct time-domain
/// convolution; the receiver chains run the same stages with their own
/// kernels.
pub fn block_filter_stream(taps_fd: &[Complex32], stream: &[f32]) -> Result<Vec<f32>, DspError> {
    if taps_fd.len() != BLOCK_LEN {
        return Err(DspError::SizeMismatch {
            expected: BLOCK_LEN,
            got: taps_fd.len(),
        });
    }
    if stream.is_empty() || stream.len() % BLOCK_HOP != 0 {
        return Err(DspError::SizeMismatch {
            expected: BLOCK_HOP,
            got: stream.len(),
        });
    }
    let fft = BlockFft::new();
    let mut work = BlockWork::new();
    let zeros = vec![0.0f32; BLOCK_HOP];
    let framed = FramedBlocks::new(&zeros, stream)?;
    let mut out = Vec::with_capacity(stream.len());
    for b in 0..framed.n_blocks() {
        let mut spec = fft.forward_real(framed.block(b), b as u32, &mut work)?;
        for (bin, h) in spec.bins.iter_mut().zip(taps_fd.iter()) {
            *bin *= h;
        }
        let td = fft.inverse(&spec, 1024, &mut work)?;
        out.extend(td[VALID_RANGE].iter().map(|v| v.re));
    }
    Ok(out)
}

/// Streaming causal overlap-save convolver for arbitrary power-of-two FFT
/// sizes, used by the transmitter's pulse shaper. Emits exactly one
/// output per input sample: y[i] = sum_k h[k] x[i-k], with zero history
/// before the first call.
pub struct FdConvolver {
    fft_size: usize,
    taps_len: usize,
    taps_fd: Vec<num_complex::Complex64>,
    plan: FftPlan<f64>,
    history: Vec<num_complex::Complex64>,
}

impl FdConvolver {
    pub fn new(taps: &[f64], fft_size: usize) -> Result<Self, DspError> {
        if !fft_size.is_power_of_two() || taps.is_empty() || taps.len() >= fft_size {
            return Err(DspError::SizeMismatch {
                expected: fft_size,
                got: taps.len(),
            });
        }
        let plan = FftPlan::<f64>::new(fft_size);
        let mut taps_fd = vec![num_complex::Complex64::new(0.0, 0.0); fft_size];
        for (i, &t) in taps.iter().enumerate() {
            taps_fd[i].re = t;
        }
        let mut scratch = vec![num_complex::Complex64::new(0.0, 0.0); fft_size];
        plan.forward(&mut taps_fd, &mut scratch);
        let scale = (fft_size as f64).sqrt();
        for v in taps_fd.iter_mut() {
            *v *= scale;
        }
        Ok(Self {
            fft_size,
            taps_len: taps.len(),
            taps_fd,
            plan,
            history: vec![num_complex::Complex64::new(0.0, 0.0); taps.len() - 1],
        })
    }

    /// Convolve the next chunk of the stream.
    pub fn process(&mut self, input: &[num_complex::Complex64]) -> Vec<num_complex::Complex64> {
        let hop = self.fft_size - (self.taps_len - 1);
        let mut out = Vec::with_capacity(input.len());
        let mut scratch = vec![num_complex::Complex64::new(0.0, 0.0); self.fft_size];
        let mut data = vec![num_complex::Complex64::new(0.0, 0.0); self.fft_size];
        let mut pos = 0;
        while pos < input.len() {
            let take = hop.min(input.len() - pos);
            let hist = self.history.len();
            data[..hist].copy_from_slice(&self.history);
            data[hist..hist + take].copy_from_slice(&input[pos..pos + take]);
            for v in data[hist + take..].iter_mut() {
                *v = num_complex::Complex64::new(0.0, 0.0);
            }
            // Update history before transforming in place.
            if take >= hist {
                self.history
                    .copy_from_slice(&input[pos + take - hist..pos + take]);
            } else {
                self.history.rotate_left(take);
                let keep = hist - take;
                self.history[keep..].copy_from_slice(&input[pos..pos + take]);
            }
            self.plan.forward(&mut data, &mut scratch);
            for (v, h) in data.iter_mut().zip(self.taps_fd.iter()) {
                *v *= h;
            }
            self.plan.inverse(&mut data, &mut scratch);
            out.extend_from_slice(&data[hist..hist + take]);
            pos += take;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::buffer::SamplesPerSymbol;

    fn lcg(state: &mut u64) -> f64 {
        *state = state
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        ((*state >> 33) as f64 / (1u64 << 31) as f64) - 1.0
    }

    /// Direct time-domain convolution oracle.
    fn direct_convolve(signal: &[f64], taps: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; signal.len() + taps.len() - 1];
        for (i, &s) in signal.iter().enumerate() {
            for (j, &h) in taps.iter().enumerate() {
                out[i + j] += s * h;
            }
        }
        out
    }

    #[test]
    fn ramp_buffer_frames_as_documented() {
        let samples: Vec<f32> = (0..BUFFER_LEN).map(|i| i as f32).collect();
        let buf = SampleBuffer::real(samples, 4e9, SamplesPerSymbol::new(2, 1), 0);
        let zeros = vec![0.0f32; BLOCK_HOP];
        let (framed, tail) = overlap_save_frame(&zeros, &buf).unwrap();
        assert_eq!(framed.n_blocks(), crate::buffer::BLOCKS_PER_BUFFER);
        // Block 0 = 512 zeros then the ramp 0..512.
        let b0 = framed.block(0);
        assert!(b0[..512].iter().all(|&v| v == 0.0));
        for (i, &v) in b0[512..].iter().enumerate() {
            assert_eq!(v, i as f32);
        }
        assert_eq!(tail[0], (BUFFER_LEN - BLOCK_HOP) as f32);
    }

    #[test]
    fn consecutive_buffers_cover_the_stream_without_gaps() {
        // Two short pseudo-buffers; check the framed windows tile the
        // concatenated stream: block b covers [512b - 512, 512b + 512).
        let mut state = 5u64;
        let stream: Vec<f32> = (0..4096).map(|_| lcg(&mut state) as f32).collect();
        let (first, second) = stream.split_at(2048);
        let zeros = vec![0.0f32; BLOCK_HOP];
        let fa = FramedBlocks::new(&zeros, first).unwrap();
        let fb = FramedBlocks::new(fa.next_tail(), second).unwrap();
        for b in 0..fb.n_blocks() {
            let global_b = b + fa.n_blocks();
            let lo = global_b * BLOCK_HOP - BLOCK_HOP;
            for (j, &v) in fb.block(b).iter().enumerate() {
                assert_eq!(v, stream[lo + j], "block {global_b} sample {j}");
            }
        }
    }

    #[test]
    fn identity_fir_through_block_path_reproduces_input() {
        let mut state = 17u64;
        let stream: Vec<f32> = (0..8192).map(|_| lcg(&mut state) as f32).collect();
        let taps_fd = centered_taps_to_fd(&[1.0]).unwrap();
        let out = block_filter_stream(&taps_fd, &stream).unwrap();
        assert_eq!(out.len(), stream.len());
        // Output leads by 256: out[g] = x[g - 256].
        for g in 256..out.len() {
            assert!(
                (out[g] - stream[g - 256]).abs() < 2e-6,
                "sample {g}: {} vs {}",
                out[g],
                stream[g - 256]
            );
        }
    }

    #[test]
    fn block_path_matches_direct_convolution_up_to_max_taps() {
        for &n_taps in &[3usize, 129, 503, MAX_BLOCK_TAPS] {
            let mut state = n_taps as u64;
            let taps: Vec<f64> = (0..n_taps)
                .map(|_| lcg(&mut state) / n_taps as f64)
                .collect();
            let stream: Vec<f32> = (0..4096).map(|_| lcg(&mut state) as f32).collect();
            let taps_fd = centered_taps_to_fd(&taps).unwrap();
            let out = block_filter_stream(&taps_fd, &stream).unwrap();

            let stream64: Vec<f64> = stream.iter().map(|&v| v as f64).collect();
            let direct = direct_convolve(&stream64, &taps);
            // Zero-phase alignment: filtered[i] = direct[i + half]; output
            // leads by 256.
            let half = (n_taps - 1) / 2;
            let ref_norm = (direct.iter().map(|v| v * v).sum::<f64>() / direct.len() as f64).sqrt();
            let mut err = 0.0f64;
            let mut cnt = 0usize;
            for g in 256..out.len() {
                let want = direct[g - 256 + half];
                err += (out[g] as f64 - want).powi(2);
                cnt += 1;
            }
            let rel = (err / cnt as f64).sqrt() / ref_norm;
            assert!(rel < 1e-5, "{n_taps} taps: relative error {rel}");
        }
    }

    #[test]
    fn oversized_kernels_are_rejected() {
        let taps = vec![0.1; 515];
        assert!(centered_taps_to_fd(&taps).is_err());
    }

    #[test]
    fn wrong_buffer_length_is_rejected() {
        let buf = SampleBuffer::real(vec![0.0; 1024], 4e9, SamplesPerSymbol::new(2, 1), 0);
        let zeros = vec![0.0f32; BLOCK_HOP];
        assert!(matches!(
            overlap_save_frame(&zeros, &buf),
            Err(DspError::BufferLength { .. })
        ));
    }

    #[test]
    fn streaming_convolver_matches_direct_convolution() {
        let mut state = 999u64;
        let taps: Vec<f64> = (0..65).map(|_| lcg(&mut state) * 0.1).collect();
        let signal: Vec<f64> = (0..3000).map(|_| lcg(&mut state)).collect();
        let mut conv = FdConvolver::new(&taps, 512).unwrap();
        // Feed in uneven chunks to exercise the history handling.
        let mut out = Vec::new();
        for chunk in signal.chunks(700) {
            let cx: Vec<num_complex::Complex64> = chunk
                .iter()
                .map(|&v| num_complex::Complex64::new(v, 0.0))
                .collect();
            out.extend(conv.process(&cx));
        }
        let direct = direct_convolve(&signal, &taps);
        for (i, o) in out.iter().enumerate() {
            assert!(
                (o.re - direct[i]).abs() < 1e-9,
                "sample {i}: {} vs {}",
                o.re,
                direct[i]
            );
        }
    }
}
