use serde::{Deserialize, Serialize};

use crate::audio::AudioBuffer;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompressorParams {
    pub threshold_db: f64,
    pub ratio: f64,
    pub attack_ms: f64,
    pub release_ms: f64,
    pub makeup_db: f64,
}

impl Default for CompressorParams {
    fn default() -> Self {
        CompressorParams {
            threshold_db: -6.0,
            ratio: 6.0,
            attack_ms: 5.0,
            release_ms: 100.0,
            makeup_db: 0.0,
        }
    }
}

impl CompressorParams {
    pub fn validate(&self) -> Result<()> {
        let finite = [self.threshold_db, self.ratio, self.attack_ms, self.release_ms, self.makeup_db]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidParameter("compressor parameters must be finite".into()));
        }
        if self.ratio < 1.0 {
            return Err(Error::InvalidParameter(format!("compressor ratio {} < 1", self.ratio)));
        }
        if self.attack_ms <= 0.0 || self.release_ms <= 0.0 {
            return Err(Error::InvalidParameter("attack and release must be positive".into()));
        }
        Ok(())
    }

    /// Static gain reduction in dB (non-negative) for a peak level in dBFS.
    fn reduction_db(&self, level_db: f64) -> f64 {
        let over = level_db - self.threshold_db;
        if over > 0.0 {
            over * (1.0 - 1.0 / self.ratio)
        } else {
            0.0
        }
    }
}

fn one_pole(time_ms: f64, sample_rate: u32) -> f64 {
    (-1.0 / (time_ms * 1e-3 * f64::from(sample_rate))).exp()
}

/// Stereo-linked feed-forward peak compressor with a hard knee, followed by
/// a hard clip at full scale.
///
/// The detector is the per-frame peak across channels. Its static gain
/// reduction (in dB) is held by a release-time peak follower and then
/// smoothed with the attack time constant.
pub fn compress(buffer: &AudioBuffer, params: &CompressorParams) -> Result<AudioBuffer> {
    params.validate()?;
    let attack = one_pole(params.attack_ms, buffer.sample_rate());
    let release = one_pole(params.release_ms, buffer.sample_rate());

    let frames = buffer.num_frames();
    let mut gains = Vec::with_capacity(frames);
    let (mut held, mut smoothed) = (0.0_f64, 0.0_f64);
    for i in 0..frames {
        let peak = buffer.channels().iter().fold(0.0_f64, |m, c| m.max(c[i].abs()));
        let target = if peak > 0.0 {
            params.reduction_db(20.0 * peak.log10())
        } else {
            0.0
        };
        held = target.max(release * held + (1.0 - release) * target);
        smoothed = attack * smoothed + (1.0 - attack) * held;
        let gain_db = params.makeup_db - smoothed;
        gains.push(if gain_db == 0.0 { 1.0 } else { 10f64.powf(gain_db / 20.0) });
    }

    let channels = buffer
        .channels()
        .iter()
        .map(|c| c.iter().zip(&gains).map(|(&x, &g)| (x * g).clamp(-1.0, 1.0)).collect())
        .collect();
    AudioBuffer::new(buffer.sample_rate(), channels)
}
