//! Linear convolution with output truncated to the input length.
//!
//! Kernels with at most [`DIRECT_MAX_TAPS`] non-zero taps are convolved
//! directly (zero taps skipped, so impulse kernels are exact). Longer kernels
//! go through block overlap-add with an FFT.

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

pub const DIRECT_MAX_TAPS: usize = 128;

/// Returns `out[n] = full[n + offset]` for `n < signal.len()`, where `full`
/// is the complete linear convolution of `signal` and `kernel`.
pub fn convolve_truncated(signal: &[f64], kernel: &[f64], offset: usize) -> Vec<f64> {
    let nonzero = kernel.iter().filter(|&&k| k != 0.0).count();
    if nonzero <= DIRECT_MAX_TAPS {
        convolve_direct(signal, kernel, offset)
    } else {
        OverlapAdd::new(kernel).process(signal, offset)
    }
}

/// Direct-form convolution. Zero taps contribute nothing and are skipped.
pub fn convolve_direct(signal: &[f64], kernel: &[f64], offset: usize) -> Vec<f64> {
    let n = signal.len();
    let mut out = vec![0.0; n];
    for (k, &tap) in kernel.iter().enumerate() {
        if tap == 0.0 {
            continue;
        }
        // out[m] += tap * signal[m + offset - k]
        let shift = offset as isize - k as isize;
        let (start, end) = if shift >= 0 {
            (0, n.saturating_sub(shift as usize))
        } else {
            ((-shift) as usize, n)
        };
        for m in start.min(n)..end {
            out[m] += tap * signal[(m as isize + shift) as usize];
        }
    }
    out
}

/// A kernel prepared for repeated FFT overlap-add convolution.
pub struct OverlapAdd {
    kernel_len: usize,
    block: usize,
    fft_len: usize,
    spectrum: Vec<Complex<f64>>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl OverlapAdd {
    pub fn new(kernel: &[f64]) -> Self {
        let kernel_len = kernel.len().max(1);
        let fft_len = (2 * kernel_len).next_power_of_two().max(1024);
        let block = fft_len - kernel_len + 1;
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(fft_len);
        let inverse = planner.plan_fft_inverse(fft_len);
        let mut spectrum = vec![Complex::new(0.0, 0.0); fft_len];
        for (s, &k) in spectrum.iter_mut().zip(kernel) {
            s.re = k;
        }
        forward.process(&mut spectrum);
        OverlapAdd {
            kernel_len,
            block,
            fft_len,
            spectrum,
            forward,
            inverse,
        }
    }

    pub fn process(&self, signal: &[f64], offset: usize) -> Vec<f64> {
        let n = signal.len();
        let full_len = n + self.kernel_len - 1;
        let needed = (n + offset).min(full_len);
        let mut full = vec![0.0; needed];
        let scale = 1.0 / self.fft_len as f64;
        let mut buf = vec![Complex::new(0.0, 0.0); self.fft_len];

        let mut start = 0;
        while start < n && start < needed {
            let end = (start + self.block).min(n);
            for (b, &x) in buf.iter_mut().zip(&signal[start..end]) {
                *b = Complex::new(x, 0.0);
            }
            for b in buf[end - start..].iter_mut() {
                *b = Complex::new(0.0, 0.0);
            }
            self.forward.process(&mut buf);
            for (b, h) in buf.iter_mut().zip(&self.spectrum) {
                *b *= h;
            }
            self.inverse.process(&mut buf);
            let produced = end - start + self.kernel_len - 1;
            for (i, b) in buf.iter().take(produced).enumerate() {
                if let Some(slot) = full.get_mut(start + i) {
                    *slot += b.re * scale;
                }
            }
            start = end;
        }

        let mut out = vec![0.0; n];
        for (m, o) in out.iter_mut().enumerate() {
            if let Some(&v) = full.get(m + offset) {
                *o = v;
            }
        }
        out
    }
}
