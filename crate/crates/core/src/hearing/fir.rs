use std::f64::consts::PI;

use super::nalr::{interp_log, Prescription};
use crate::audio::AudioBuffer;
use crate::convolve::convolve_truncated;
use crate::error::{Error, Result};

/// 140 taps rounded up to odd.
pub const DEFAULT_TAPS: usize = 141;

const MIN_TAPS: usize = 65;
const SYMMETRY_TOLERANCE: f64 = 1e-12;
const MAX_REFINEMENTS: usize = 60;
const REFINE_TOLERANCE_DB: f64 = 0.005;

/// Odd-length, symmetric (linear-phase) FIR filter.
#[derive(Debug, Clone, PartialEq)]
pub struct FirFilter {
    taps: Vec<f64>,
    sample_rate: u32,
}

impl FirFilter {
    pub fn new(taps: Vec<f64>, sample_rate: u32) -> Result<Self> {
        if taps.len().is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!(
                "FIR length {} is even; linear-phase filters here have odd length",
                taps.len()
            )));
        }
        if sample_rate == 0 {
            return Err(Error::InvalidParameter("sample rate must be positive".into()));
        }
        if taps.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidParameter("non-finite FIR tap".into()));
        }
        let n = taps.len();
        if (0..n / 2).any(|k| (taps[k] - taps[n - 1 - k]).abs() > SYMMETRY_TOLERANCE) {
            return Err(Error::InvalidParameter("FIR taps are not symmetric".into()));
        }
        Ok(FirFilter { taps, sample_rate })
    }

    /// Length-`n_taps` filter with a single 1 at the center.
    pub fn identity(n_taps: usize, sample_rate: u32) -> Result<Self> {
        let mut taps = vec![0.0; n_taps];
        if let Some(center) = taps.get_mut(n_taps / 2) {
            *center = 1.0;
        }
        FirFilter::new(taps, sample_rate)
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    /// Group delay in frames.
    pub fn delay(&self) -> usize {
        (self.taps.len() - 1) / 2
    }

    /// Magnitude response in dB at `freq` Hz.
    pub fn response_db(&self, freq: f64) -> f64 {
        let w = 2.0 * PI * freq / f64::from(self.sample_rate);
        let (re, im) = self
            .taps
            .iter()
            .enumerate()
            .fold((0.0, 0.0), |(re, im), (k, &h)| {
                let phase = w * k as f64;
                (re + h * phase.cos(), im - h * phase.sin())
            });
        10.0 * (re * re + im * im).log10()
    }

    pub(crate) fn filter_channel(&self, x: &[f64], compensate_delay: bool) -> Vec<f64> {
        let offset = if compensate_delay { self.delay() } else { 0 };
        convolve_truncated(x, &self.taps, offset)
    }
}

/// Convolves every channel with `filter`, truncated to the input length.
/// With `compensate_delay` the output is advanced by the filter's group
/// delay so it lines up with the input.
pub fn apply_fir(signal: &AudioBuffer, filter: &FirFilter, compensate_delay: bool) -> Result<AudioBuffer> {
    if signal.sample_rate() != filter.sample_rate {
        return Err(Error::Misaligned(format!(
            "filter designed for {} Hz applied to {} Hz audio",
            filter.sample_rate,
            signal.sample_rate()
        )));
    }
    let channels = signal
        .channels()
        .iter()
        .map(|c| filter.filter_channel(c, compensate_delay))
        .collect();
    AudioBuffer::new(signal.sample_rate(), channels)
}

/// Frequency-sampling design: zero-phase impulse response of the target
/// magnitude on a dense uniform grid, truncated to `n_taps` around the
/// center and tapered with a Hann window.
fn frequency_sampled(anchors: &[(f64, f64)], n_taps: usize, sample_rate: u32, grid: usize) -> Vec<f64> {
    let fs = f64::from(sample_rate);
    let bins = grid / 2;
    let magnitude: Vec<f64> = (0..=bins)
        .map(|k| {
            let f = k as f64 * fs / grid as f64;
            10f64.powf(interp_log(anchors, f.max(f64::MIN_POSITIVE)) / 20.0)
        })
        .collect();

    let cosines: Vec<f64> = (0..grid).map(|j| (2.0 * PI * j as f64 / grid as f64).cos()).collect();
    let half = (n_taps - 1) / 2;
    let window = |offset: usize| 0.5 + 0.5 * (PI * offset as f64 / (half + 1) as f64).cos();
    let zero_phase: Vec<f64> = (0..=half)
        .map(|n| {
            let mut acc = magnitude[0] + magnitude[bins] * if n % 2 == 0 { 1.0 } else { -1.0 };
            for (k, &m) in magnitude.iter().enumerate().take(bins).skip(1) {
                acc += 2.0 * m * cosines[k * n % grid];
            }
            acc / grid as f64 * window(n)
        })
        .collect();

    (0..n_taps)
        .map(|k| zero_phase[k.abs_diff(half)])
        .collect()
}

/// Linear-phase FIR realizing `prescription`.
///
/// The target magnitude interpolates the prescribed gains linearly in
/// log-frequency and holds them flat beyond the outermost anchors. The
/// truncated, windowed response smooths steep slopes, so the anchor values
/// fed to the design are refined until the realized response at every anchor
/// below Nyquist matches the prescription. An all-zero prescription yields an
/// exact centered impulse.
pub fn design_nalr_fir(prescription: &Prescription, n_taps: usize, sample_rate: u32) -> Result<FirFilter> {
    if n_taps.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!("n_taps must be odd, got {n_taps}")));
    }
    if n_taps < MIN_TAPS {
        return Err(Error::InvalidParameter(format!("n_taps must be at least {MIN_TAPS}, got {n_taps}")));
    }
    if prescription.gains_db.iter().any(|g| !g.is_finite()) {
        return Err(Error::InvalidParameter("prescribed gains must be finite".into()));
    }
    if prescription.frequencies.len() != prescription.gains_db.len() || prescription.frequencies.is_empty() {
        return Err(Error::InvalidParameter("prescription frequencies and gains differ in length".into()));
    }
    if prescription.is_transparent() {
        return FirFilter::identity(n_taps, sample_rate);
    }

    let nyquist = f64::from(sample_rate) / 2.0;
    let grid = (16 * n_taps).next_power_of_two().max(4096);
    let prescribed: Vec<(f64, f64)> = prescription
        .frequencies
        .iter()
        .copied()
        .zip(prescription.gains_db.iter().copied())
        .collect();

    let mut anchors = prescribed.clone();
    let mut best: Option<(f64, Vec<f64>)> = None;
    for _ in 0..MAX_REFINEMENTS {
        let taps = frequency_sampled(&anchors, n_taps, sample_rate, grid);
        let filter = FirFilter { taps, sample_rate };
        let errors: Vec<f64> = prescribed
            .iter()
            .map(|&(f, g)| if f < nyquist { g - filter.response_db(f) } else { 0.0 })
            .collect();
        let worst = errors.iter().fold(0.0_f64, |m, e| m.max(e.abs()));
        if best.as_ref().is_none_or(|(w, _)| worst < *w) {
            best = Some((worst, filter.taps));
        }
        if worst < REFINE_TOLERANCE_DB {
            break;
        }
        for (anchor, e) in anchors.iter_mut().zip(&errors) {
            anchor.1 += e;
        }
    }
    let (_, taps) = best.expect("at least one design pass");
    FirFilter::new(taps, sample_rate)
}
