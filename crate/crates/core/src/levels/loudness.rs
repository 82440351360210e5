use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::audio::{db_to_linear, AudioBuffer};
use crate::error::{Error, Result};

const ABSOLUTE_GATE_LUFS: f64 = -70.0;
const RELATIVE_GATE_LU: f64 = -10.0;
const LOUDNESS_OFFSET: f64 = -0.691;
const MIN_SAMPLE_RATE: u32 = 8000;

/// Maximum accepted distance between requested and achieved loudness.
pub const NORMALIZE_TOLERANCE_LU: f64 = 0.1;

/// Integrated loudness. Silent or fully gated-out programs have no defined
/// loudness.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "Option<f64>", into = "Option<f64>")]
pub enum Loudness {
    Lufs(f64),
    Undefined,
}

impl Loudness {
    pub fn value(self) -> Option<f64> {
        match self {
            Loudness::Lufs(v) => Some(v),
            Loudness::Undefined => None,
        }
    }

    pub fn is_defined(self) -> bool {
        matches!(self, Loudness::Lufs(_))
    }
}

impl From<Option<f64>> for Loudness {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Loudness::Undefined, Loudness::Lufs)
    }
}

impl From<Loudness> for Option<f64> {
    fn from(l: Loudness) -> Self {
        l.value()
    }
}

/// Second-order IIR section, `a0` normalized to 1.
#[derive(Clone, Copy)]
struct Biquad {
    b0: f64,
    b1: f64,
    b2: f64,
    a1: f64,
    a2: f64,
}

impl Biquad {
    /// K-weighting stage 1: high shelf modelling the head.
    fn high_shelf(fs: f64) -> Self {
        let gain_db = 3.999_843_853_973_347;
        let q = 0.707_175_236_955_419_3;
        let center = 1_681.974_450_955_532;
        let k = (PI * center / fs).tan();
        let vh = 10f64.powf(gain_db / 20.0);
        let vb = vh.powf(0.499_666_774_154_541_6);
        let a0 = 1.0 + k / q + k * k;
        Biquad {
            b0: (vh + vb * k / q + k * k) / a0,
            b1: 2.0 * (k * k - vh) / a0,
            b2: (vh - vb * k / q + k * k) / a0,
            a1: 2.0 * (k * k - 1.0) / a0,
            a2: (1.0 - k / q + k * k) / a0,
        }
    }

    /// K-weighting stage 2: RLB high-pass.
    fn high_pass(fs: f64) -> Self {
        let q = 0.500_327_037_325_395_3;
        let center = 38.135_470_876_139_82;
        let k = (PI * center / fs).tan();
        let a0 = 1.0 + k / q + k * k;
        Biquad {
            b0: 1.0,
            b1: -2.0,
            b2: 1.0,
            a1: 2.0 * (k * k - 1.0) / a0,
            a2: (1.0 - k / q + k * k) / a0,
        }
    }

    fn run(&self, x: &[f64]) -> Vec<f64> {
        let (mut x1, mut x2, mut y1, mut y2) = (0.0, 0.0, 0.0, 0.0);
        x.iter()
            .map(|&x0| {
                let y0 = self.b0 * x0 + self.b1 * x1 + self.b2 * x2 - self.a1 * y1 - self.a2 * y2;
                x2 = x1;
                x1 = x0;
                y2 = y1;
                y1 = y0;
                y0
            })
            .collect()
    }
}

fn block_loudness(power: f64) -> f64 {
    LOUDNESS_OFFSET + 10.0 * power.log10()
}

/// Channel-summed mean-square power of each 400 ms gating block, blocks
/// starting every 100 ms.
fn gating_block_powers(buffer: &AudioBuffer) -> Vec<f64> {
    let fs = f64::from(buffer.sample_rate());
    let step = (fs / 10.0).round() as usize;
    let hop_count = buffer.num_frames() / step;
    // Sum of squares per 100 ms hop, summed over channels (all weights 1).
    let mut hops = vec![0.0; hop_count];
    for channel in buffer.channels() {
        let weighted = Biquad::high_pass(fs).run(&Biquad::high_shelf(fs).run(channel));
        for (h, chunk) in hops.iter_mut().zip(weighted.chunks_exact(step)) {
            *h += chunk.iter().map(|v| v * v).sum::<f64>();
        }
    }
    hops.windows(4)
        .map(|w| w.iter().sum::<f64>() / (4 * step) as f64)
        .collect()
}

/// Gated integrated loudness with K-weighting, 400 ms blocks at 75 % overlap,
/// an absolute gate at -70 LUFS and a relative gate 10 LU below the
/// absolute-gated level.
pub fn integrated_loudness(buffer: &AudioBuffer) -> Result<Loudness> {
    if buffer.sample_rate() < MIN_SAMPLE_RATE {
        return Err(Error::InvalidParameter(format!(
            "loudness needs at least {MIN_SAMPLE_RATE} Hz, got {}",
            buffer.sample_rate()
        )));
    }
    let blocks = gating_block_powers(buffer);
    let above_absolute: Vec<f64> = blocks
        .into_iter()
        .filter(|&p| p > 0.0 && block_loudness(p) > ABSOLUTE_GATE_LUFS)
        .collect();
    if above_absolute.is_empty() {
        return Ok(Loudness::Undefined);
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let relative_gate = block_loudness(mean(&above_absolute)) + RELATIVE_GATE_LU;
    let gated: Vec<f64> = above_absolute
        .into_iter()
        .filter(|&p| block_loudness(p) > relative_gate)
        .collect();
    if gated.is_empty() {
        return Ok(Loudness::Undefined);
    }
    Ok(Loudness::Lufs(block_loudness(mean(&gated))))
}

/// Linear gain that brings `buffer` to `target` LUFS.
///
/// The gain is re-measured once; if gating shifts the result by more than
/// the tolerance it is corrected a single time.
pub fn loudness_gain(buffer: &AudioBuffer, target: f64) -> Result<f64> {
    let current = integrated_loudness(buffer)?
        .value()
        .ok_or(Error::UndefinedLoudness)?;
    let mut gain = db_to_linear(target - current);
    if let Loudness::Lufs(achieved) = integrated_loudness(&buffer.scaled(gain)?)? {
        if (achieved - target).abs() > NORMALIZE_TOLERANCE_LU {
            gain *= db_to_linear(target - achieved);
        }
    }
    Ok(gain)
}

/// Scales `buffer` by a single factor so its integrated loudness is `target`.
pub fn normalize_to_loudness(buffer: &AudioBuffer, target: f64) -> Result<AudioBuffer> {
    buffer.scaled(loudness_gain(buffer, target)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sine(fs: u32, freq: f64, amp: f64, secs: f64) -> Vec<f64> {
        (0..(secs * f64::from(fs)) as usize)
            .map(|i| amp * (2.0 * PI * freq * i as f64 / f64::from(fs)).sin())
            .collect()
    }

    fn stereo_one_sided(fs: u32, x: Vec<f64>) -> AudioBuffer {
        let n = x.len();
        AudioBuffer::new(fs, vec![x, vec![0.0; n]]).unwrap()
    }

    /// Reference meter at 48 kHz built from the filter coefficients tabulated
    /// in the recommendation, with its own gating loop.
    fn reference_meter_48k(buffer: &AudioBuffer) -> Option<f64> {
        assert_eq!(buffer.sample_rate(), 48000);
        let stage1 = ([1.535_124_859_586_97, -2.691_696_189_406_38, 1.198_392_810_852_85], [-1.690_659_293_182_41, 0.732_480_774_215_85]);
        let stage2 = ([1.0, -2.0, 1.0], [-1.990_047_454_833_98, 0.990_072_250_366_21]);
        let filt = |x: &[f64], (b, a): ([f64; 3], [f64; 2])| {
            let mut y = vec![0.0; x.len()];
            for n in 0..x.len() {
                let xm = |k: usize| if n >= k { x[n - k] } else { 0.0 };
                let ym = |y: &Vec<f64>, k: usize| if n >= k { y[n - k] } else { 0.0 };
                y[n] = b[0] * xm(0) + b[1] * xm(1) + b[2] * xm(2) - a[0] * ym(&y, 1) - a[1] * ym(&y, 2);
            }
            y
        };
        let weighted: Vec<Vec<f64>> = buffer.channels().iter().map(|c| filt(&filt(c, stage1), stage2)).collect();
        let block = 19200;
        let hop = 4800;
        let mut z = Vec::new();
        let mut start = 0;
        while start + block <= buffer.num_frames() {
            let p: f64 = weighted.iter().map(|c| c[start..start + block].iter().map(|v| v * v).sum::<f64>() / block as f64).sum();
            z.push(p);
            start += hop;
        }
        let l = |p: f64| -0.691 + 10.0 * p.log10();
        let abs: Vec<f64> = z.into_iter().filter(|&p| l(p) > -70.0).collect();
        if abs.is_empty() {
            return None;
        }
        let gate = l(abs.iter().sum::<f64>() / abs.len() as f64) - 10.0;
        let rel: Vec<f64> = abs.into_iter().filter(|&p| l(p) > gate).collect();
        Some(l(rel.iter().sum::<f64>() / rel.len() as f64))
    }

    #[test]
    fn silence_is_undefined() {
        let b = AudioBuffer::silence(44100, 2, 44100).unwrap();
        assert_eq!(integrated_loudness(&b).unwrap(), Loudness::Undefined);
        assert!(matches!(normalize_to_loudness(&b, -23.0), Err(Error::UndefinedLoudness)));
    }

    #[test]
    fn too_short_is_undefined() {
        let b = stereo_one_sided(44100, sine(44100, 997.0, 1.0, 0.3));
        assert_eq!(integrated_loudness(&b).unwrap(), Loudness::Undefined);
    }

    #[test]
    fn full_scale_997_hz_reads_minus_3_01() {
        for fs in [44100, 48000] {
            let b = stereo_one_sided(fs, sine(fs, 997.0, 1.0, 10.0));
            let l = integrated_loudness(&b).unwrap().value().unwrap();
            assert!((l + 3.01).abs() < 0.1, "{fs} Hz: {l}");
        }
    }

    #[test]
    fn matches_reference_meter() {
        let mut signals = vec![
            stereo_one_sided(48000, sine(48000, 997.0, 1.0, 5.0)),
            stereo_one_sided(48000, sine(48000, 100.0, 0.5, 5.0)),
        ];
        // Loud tone followed by a quiet one exercises the relative gate.
        let mut x = sine(48000, 3000.0, 0.8, 3.0);
        x.extend(sine(48000, 3000.0, 0.01, 3.0));
        let y = sine(48000, 500.0, 0.3, 6.0);
        signals.push(AudioBuffer::new(48000, vec![x, y]).unwrap());
        for s in &signals {
            let ours = integrated_loudness(s).unwrap().value().unwrap();
            let theirs = reference_meter_48k(s).unwrap();
            assert!((ours - theirs).abs() < 0.01, "{ours} vs {theirs}");
        }
    }

    #[test]
    fn rejects_low_rates() {
        let b = AudioBuffer::silence(4000, 1, 4000).unwrap();
        assert!(integrated_loudness(&b).is_err());
    }

    #[test]
    fn scaling_shifts_loudness_exactly() {
        let b = stereo_one_sided(44100, sine(44100, 440.0, 0.5, 5.0));
        let l0 = integrated_loudness(&b).unwrap().value().unwrap();
        let l1 = integrated_loudness(&b.scaled(db_to_linear(-10.0)).unwrap()).unwrap().value().unwrap();
        assert!((l0 - l1 - 10.0).abs() < 0.05);
    }

    #[test]
    fn normalization() {
        let b = stereo_one_sided(44100, sine(44100, 997.0, 0.1, 5.0));
        let l = integrated_loudness(&b).unwrap().value().unwrap();
        assert!((loudness_gain(&b, l).unwrap() - 1.0).abs() < 1e-3);

        let at_23 = normalize_to_loudness(&b, -23.0).unwrap();
        let g = loudness_gain(&at_23, -13.0).unwrap();
        assert!((g / db_to_linear(10.0) - 1.0).abs() < 0.01);
        let at_13 = normalize_to_loudness(&at_23, -13.0).unwrap();
        let measured = integrated_loudness(&at_13).unwrap().value().unwrap();
        assert!((measured + 13.0).abs() < NORMALIZE_TOLERANCE_LU);
    }

    #[test]
    fn normalization_is_a_single_scalar() {
        let mut x = sine(44100, 200.0, 0.2, 2.0);
        x.extend(sine(44100, 5000.0, 0.02, 2.0));
        let b = AudioBuffer::new(44100, vec![x.clone(), x]).unwrap();
        let out = normalize_to_loudness(&b, -20.0).unwrap();
        let ratios: Vec<f64> = b.channels().iter().flatten().zip(out.channels().iter().flatten())
            .filter(|(a, _)| a.abs() > 1e-6).map(|(a, o)| o / a).collect();
        let r0 = ratios[0];
        assert!(ratios.iter().all(|r| ((r - r0) / r0).abs() < 1e-12));
    }

    #[test]
    fn loudness_serializes_as_nullable_number() {
        assert_eq!(serde_json::to_string(&Loudness::Lufs(-23.5)).unwrap(), "-23.5");
        assert_eq!(serde_json::to_string(&Loudness::Undefined).unwrap(), "null");
        let back: Loudness = serde_json::from_str("null").unwrap();
        assert_eq!(back, Loudness::Undefined);
    }
}
