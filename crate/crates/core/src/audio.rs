//! Multichannel sample buffers and decibel conversions.

use crate::error::{Error, Result};

/// Non-interleaved multichannel audio at a fixed sample rate.
///
/// Every channel has the same number of frames and every sample is finite.
/// Buffers are immutable once built; processing functions return new ones.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioBuffer {
    sample_rate: u32,
    channels: Vec<Vec<f64>>,
}

impl AudioBuffer {
    pub fn new(sample_rate: u32, channels: Vec<Vec<f64>>) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::InvalidBuffer("sample rate must be positive".into()));
        }
        if channels.is_empty() {
            return Err(Error::InvalidBuffer("at least one channel is required".into()));
        }
        let frames = channels[0].len();
        if let Some(bad) = channels.iter().position(|c| c.len() != frames) {
            return Err(Error::InvalidBuffer(format!(
                "channel {bad} has {} frames, channel 0 has {frames}",
                channels[bad].len()
            )));
        }
        if channels.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::InvalidBuffer("non-finite sample".into()));
        }
        Ok(AudioBuffer {
            sample_rate,
            channels,
        })
    }

    /// A buffer of `frames` zeros on each of `channels` channels.
    pub fn silence(sample_rate: u32, channels: usize, frames: usize) -> Result<Self> {
        AudioBuffer::new(sample_rate, vec![vec![0.0; frames]; channels])
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn num_channels(&self) -> usize {
        self.channels.len()
    }

    pub fn num_frames(&self) -> usize {
        self.channels[0].len()
    }

    pub fn duration_secs(&self) -> f64 {
        self.num_frames() as f64 / self.sample_rate as f64
    }

    pub fn channel(&self, index: usize) -> &[f64] {
        &self.channels[index]
    }

    pub fn channels(&self) -> &[Vec<f64>] {
        &self.channels
    }

    pub fn into_channels(self) -> Vec<Vec<f64>> {
        self.channels
    }

    /// Largest absolute sample value over all channels.
    pub fn peak(&self) -> f64 {
        self.channels
            .iter()
            .flatten()
            .fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    /// Sum of squares over all channels and frames.
    pub fn energy(&self) -> f64 {
        self.channels.iter().flatten().map(|x| x * x).sum()
    }

    pub fn is_silent(&self) -> bool {
        self.channels.iter().flatten().all(|&x| x == 0.0)
    }

    /// Checks that `other` has the same rate, channel count and length.
    pub fn check_aligned(&self, other: &AudioBuffer, what: &str) -> Result<()> {
        if self.sample_rate != other.sample_rate {
            return Err(Error::Misaligned(format!(
                "{what}: sample rate {} vs {}",
                self.sample_rate, other.sample_rate
            )));
        }
        if self.num_channels() != other.num_channels() {
            return Err(Error::Misaligned(format!(
                "{what}: {} vs {} channels",
                self.num_channels(),
                other.num_channels()
            )));
        }
        if self.num_frames() != other.num_frames() {
            return Err(Error::Misaligned(format!(
                "{what}: {} vs {} frames",
                self.num_frames(),
                other.num_frames()
            )));
        }
        Ok(())
    }

    /// Applies `f` to every sample.
    pub fn map(&self, mut f: impl FnMut(f64) -> f64) -> Result<AudioBuffer> {
        let channels = self
            .channels
            .iter()
            .map(|c| c.iter().map(|&x| f(x)).collect())
            .collect();
        AudioBuffer::new(self.sample_rate, channels)
    }

    /// Multiplies every sample by `gain`.
    pub fn scaled(&self, gain: f64) -> Result<AudioBuffer> {
        self.map(|x| x * gain)
    }

    /// Combines two aligned buffers sample by sample.
    pub fn zip_with(
        &self,
        other: &AudioBuffer,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<AudioBuffer> {
        self.check_aligned(other, "elementwise operation")?;
        let channels = self
            .channels
            .iter()
            .zip(&other.channels)
            .map(|(a, b)| a.iter().zip(b).map(|(&x, &y)| f(x, y)).collect())
            .collect();
        AudioBuffer::new(self.sample_rate, channels)
    }

    pub fn add(&self, other: &AudioBuffer) -> Result<AudioBuffer> {
        self.zip_with(other, |x, y| x + y)
    }

    pub fn sub(&self, other: &AudioBuffer) -> Result<AudioBuffer> {
        self.zip_with(other, |x, y| x - y)
    }

    /// Hard-clips every sample to `[-limit, limit]`.
    pub fn clipped(&self, limit: f64) -> Result<AudioBuffer> {
        self.map(|x| x.clamp(-limit, limit))
    }
}

/// `10^(db / 20)`.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 20.0)
}

/// `20 log10(factor)`; the factor must be strictly positive.
pub fn linear_to_db(factor: f64) -> Result<f64> {
    if factor > 0.0 && factor.is_finite() {
        Ok(20.0 * factor.log10())
    } else {
        Err(Error::NonPositiveFactor(factor))
    }
}
