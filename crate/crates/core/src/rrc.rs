//! Root-raised-cosine pulse shaping and matched filtering.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::DspError;

/// Root-raised-cosine filter specification.
///
/// The analytic magnitude response is 1 at DC, rolls off as a half cosine
/// over the transition band, and is exactly zero beyond (1+beta)/(2T).
#[derive(Debug, Clone, Copy)]
pub struct RrcSpec {
    /// Roll-off factor in [0, 1].
    pub rolloff: f64,
    /// Symbol rate in symbols/s.
    pub baud: f64,
}

impl RrcSpec {
    pub fn new(rolloff: f64, baud: f64) -> Self {
        Self { rolloff, baud }
    }

    /// One-sided support edge (1+beta)/(2T) in Hz.
    pub fn band_edge(&self) -> f64 {
        (1.0 + self.rolloff) * self.baud / 2.0
    }

    /// Closed-form magnitude response at frequency `f` Hz, normalized so
    /// the DC response is 1. Zero for |f| beyond the support edge.
    pub fn response(&self, f: f64) -> f64 {
        let t = 1.0 / self.baud;
        let af = f.abs();
        let lo = (1.0 - self.rolloff) / (2.0 * t);
        let hi = (1.0 + self.rolloff) / (2.0 * t);
        if af <= lo {
            1.0
        } else if af < hi {
            let u = (af - lo) * t / self.rolloff;
            (core::f64::consts::PI * u / 2.0).cos()
        } else {
            0.0
        }
    }

    /// Impulse response at `t` seconds, peak-normalized shape (not energy
    /// normalized). Handles the removable singularities.
    pub fn impulse(&self, t: f64) -> f64 {
        let beta = self.rolloff;
        let ts = t * self.baud; // time in symbols
        let pi = core::f64::consts::PI;
        if ts.abs() < 1e-9 {
            return 1.0 + beta * (4.0 / pi - 1.0);
        }
        if beta > 0.0 {
            let singular = 1.0 / (4.0 * beta);
            if (ts.abs() - singular).abs() < 1e-9 {
                let a = pi / (4.0 * beta);
                return beta / core::f64::consts::SQRT_2
                    * ((1.0 + 2.0 / pi) * a.sin() + (1.0 - 2.0 / pi) * a.cos());
            }
        }
        let num = (pi * ts * (1.0 - beta)).sin() + 4.0 * beta * ts * (pi * ts * (1.0 + beta)).cos();
        let den = pi * ts * (1.0 - (4.0 * beta * ts) * (4.0 * beta * ts));
        num / den
    }
}

/// Sample the RRC impulse response into a symmetric, unit-energy FIR.
///
/// `n_taps` must be odd so the filter has an exact center; `sample_rate`
/// must cover the pulse bandwidth (1+beta)*baud.
pub fn rrc_filter_taps(spec: &RrcSpec, sample_rate: f64, n_taps: usize) -> Result<Vec<f64>, DspError> {
    assert!(n_taps % 2 == 1, "RRC tap count must be odd");
    let required = (1.0 + spec.rolloff) * spec.baud;
    if sample_rate < required {
        return Err(DspError::NyquistViolation {
            required_hz: required,
            got_hz: sample_rate,
        });
    }
    let center = (n_taps / 2) as i64;
    let mut taps: Vec<f64> = (0..n_taps as i64)
        .map(|i| spec.impulse((i - center) as f64 / sample_rate))
        .collect();
    let energy: f64 = taps.iter().map(|t| t * t).sum();
    let norm = 1.0 / energy.sqrt();
    for t in taps.iter_mut() {
        *t *= norm;
    }
    Ok(taps)
}
