//! Power-of-two FFTs and the 1024-bin block spectrum used by the
//! overlap-save chains.
//!
//! Transforms are unitary (1/sqrt(N) in both directions) so filter and
//! signal spectra compose without scale bookkeeping. The Stockham
//! autosort formulation avoids a bit-reversal pass; each stage streams
//! between the data and a scratch buffer.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

#[allow(unused_imports)]
use num_traits::Float;

use num_complex::{Complex, Complex32};

use crate::error::DspError;

/// Plan for a fixed power-of-two size. Holds forward and inverse twiddle
/// tables; the transform itself is allocation-free.
pub struct FftPlan<T> {
    n: usize,
    fwd: Vec<Complex<T>>,
    inv: Vec<Complex<T>>,
    scale: T,
}

impl<T: Float + 'static> FftPlan<T> {
    pub fn new(n: usize) -> Self {
        assert!(n.is_power_of_two() && n >= 2, "FFT size must be a power of two >= 2");
        // Twiddles laid out stage by stage: sub-size n, n/2, ..., 2.
        let mut fwd = Vec::with_capacity(n - 1);
        let mut inv = Vec::with_capacity(n - 1);
        let mut sub = n;
        while sub > 1 {
            let m = sub / 2;
            for p in 0..m {
                let theta = -2.0 * core::f64::consts::PI * p as f64 / sub as f64;
                let (s, c) = theta.sin_cos();
                fwd.push(Complex::new(T::from(c).unwrap(), T::from(s).unwrap()));
                inv.push(Complex::new(T::from(c).unwrap(), T::from(-s).unwrap()));
            }
            sub = m;
        }
        let scale = T::from(1.0 / (n as f64).sqrt()).unwrap();
        Self { n, fwd, inv, scale }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    /// Unitary forward transform in place. `scratch` must match the data
    /// length.
    pub fn forward(&self, data: &mut [Complex<T>], scratch: &mut [Complex<T>]) {
        self.run(data, scratch, false);
    }

    /// Unitary inverse transform in place.
    pub fn inverse(&self, data: &mut [Complex<T>], scratch: &mut [Complex<T>]) {
        self.run(data, scratch, true);
    }

    fn run(&self, data: &mut [Complex<T>], scratch: &mut [Complex<T>], inverse: bool) {
        assert_eq!(data.len(), self.n, "data length must match plan size");
        assert_eq!(scratch.len(), self.n, "scratch length must match plan size");
        let tw = if inverse { &self.inv } else { &self.fwd };

        let mut sub = self.n;
        let mut stride = 1usize;
        let mut tw_base = 0usize;
        let mut in_data = true; // current source buffer
        while sub > 1 {
            let m = sub / 2;
            let (src, dst): (&[Complex<T>], &mut [Complex<T>]) = if in_data {
                (&*data, &mut *scratch)
            } else {
                (&*scratch, &mut *data)
            };
            for p in 0..m {
                let wp = tw[tw_base + p];
                let src_a = &src[stride * p..stride * p + stride];
                let src_b = &src[stride * (p + m)..stride * (p + m) + stride];
                let (dst_a, dst_rest) = dst[stride * 2 * p..].split_at_mut(stride);
                let dst_b = &mut dst_rest[..stride];
                for q in 0..stride {
                    let a = src_a[q];
                    let b = src_b[q];
                    dst_a[q] = a + b;
                    dst_b[q] = (a - b) * wp;
                }
            }
            tw_base += m;
            sub = m;
            stride *= 2;
            in_data = !in_data;
        }
        if !in_data {
            data.copy_from_slice(scratch);
        }
        for v in data.iter_mut() {
            *v = v.scale(self.scale);
        }
    }
}

/// Frequency-domain view of one 1024-sample overlap-save block.
///
/// Bin k corresponds to frequency k/1024 of the sample rate for k < 512
/// and (k - 1024)/1024 above. The valid output window under 100%
/// overlap-save is the central half, [`VALID_RANGE`]; kernels whose
/// centered support stays within +/-256 taps leave that window free of
/// circular wrap-around.
#[derive(Debug, Clone)]
pub struct BlockSpectrum {
    pub bins: Vec<Complex32>,
    pub block_index: u32,
}

/// Valid sample window of an overlap-save block after filtering.
pub const VALID_RANGE: Range<usize> = 256..768;

impl BlockSpectrum {
    pub fn valid_range(&self) -> Range<usize> {
        VALID_RANGE
    }
}

/// Reusable per-worker workspace for block transforms.
pub struct BlockWork {
    scratch: Vec<Complex32>,
}

impl BlockWork {
    pub fn new() -> Self {
        Self {
            scratch: vec![Complex32::new(0.0, 0.0); crate::buffer::BLOCK_LEN],
        }
    }
}

impl Default for BlockWork {
    fn default() -> Self {
        Self::new()
    }
}

/// 1024/512-point transform pair for block processing.
pub struct BlockFft {
    plan1024: FftPlan<f32>,
    plan512: FftPlan<f32>,
}

impl BlockFft {
    pub fn new() -> Self {
        Self {
            plan1024: FftPlan::new(crate::buffer::BLOCK_LEN),
            plan512: FftPlan::new(crate::buffer::BLOCK_LEN / 2),
        }
    }

    /// Forward transform of one 1024-sample block.
    pub fn forward(
        &self,
        block: &[Complex32],
        block_index: u32,
        work: &mut BlockWork,
    ) -> Result<BlockSpectrum, DspError> {
        if block.len() != crate::buffer::BLOCK_LEN {
            return Err(DspError::SizeMismatch {
                expected: crate::buffer::BLOCK_LEN,
                got: block.len(),
            });
        }
        let mut bins = block.to_vec();
        self.plan1024.forward(&mut bins, &mut work.scratch);
        Ok(BlockSpectrum { bins, block_index })
    }

    /// Forward transform of a real-valued block. The spectrum is
    /// Hermitian-symmetric.
    pub fn forward_real(
        &self,
        block: &[f32],
        block_index: u32,
        work: &mut BlockWork,
    ) -> Result<BlockSpectrum, DspError> {
        if block.len() != crate::buffer::BLOCK_LEN {
            return Err(DspError::SizeMismatch {
                expected: crate::buffer::BLOCK_LEN,
                got: block.len(),
            });
        }
        let mut bins: Vec<Complex32> = block.iter().map(|&s| Complex32::new(s, 0.0)).collect();
        self.plan1024.forward(&mut bins, &mut work.scratch);
        Ok(BlockSpectrum { bins, block_index })
    }

    /// Inverse transform to the time domain.
    ///
    /// * `out_size == 1024`: plain unitary inverse; round-trips `forward`.
    /// * `out_size == 512`: 2x decimating inverse. Keeps the central
    ///   +/-256-bin band of the centered spectrum and inverts at half
    ///   rate; out-of-band content is discarded, not aliased. For a
    ///   band-limited input this equals taking every other sample of the
    ///   1024-point inverse, amplitude preserved.
    pub fn inverse(
        &self,
        spec: &BlockSpectrum,
        out_size: usize,
        work: &mut BlockWork,
    ) -> Result<Vec<Complex32>, DspError> {
        if spec.bins.len() != crate::buffer::BLOCK_LEN {
            return Err(DspError::SizeMismatch {
                expected: crate::buffer::BLOCK_LEN,
                got: spec.bins.len(),
            });
        }
        match out_size {
            1024 => {
                let mut data = spec.bins.clone();
                self.plan1024.inverse(&mut data, &mut work.scratch);
                Ok(data)
            }
            512 => {
                let half = crate::buffer::BLOCK_LEN / 2;
                let mut data = vec![Complex32::new(0.0, 0.0); half];
                let mut scratch = vec![Complex32::new(0.0, 0.0); half];
                // Central band: bins [0, 256) stay, bins [768, 1024) fold
                // to the upper half of the 512-bin grid.
                data[..256].copy_from_slice(&spec.bins[..256]);
                data[256..].copy_from_slice(&spec.bins[768..]);
                self.plan512.inverse(&mut data, &mut scratch);
                // sqrt(512/1024) keeps tone amplitudes unchanged across the
                // rate change.
                let gain = core::f32::consts::FRAC_1_SQRT_2;
                for v in data.iter_mut() {
                    *v = v.scale(gain);
                }
                Ok(data)
            }
            other => Err(DspError::UnsupportedOutputSize(other)),
        }
    }
}

impl Default for BlockFft {
    fn default() -> Self {
        Self::new()
    }
}

/// Signed frequency index of bin `k` on an `n`-bin grid: k for the lower
/// half, k - n above.
pub fn signed_bin(k: usize, n: usize) -> i32 {
    if k < n / 2 {
        k as i32
    } else {
        k as i32 - n as i32
    }
}
