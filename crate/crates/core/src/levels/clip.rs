use serde::{Deserialize, Serialize};

use crate::audio::AudioBuffer;

/// Samples with `|x| >= CLIP_LEVEL` count as clipped.
pub const CLIP_LEVEL: f64 = 1.0;

/// Clipped samples in a single channel that switch the compressor on.
pub const CLIP_TRIGGER_COUNT: usize = 25_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClipReport {
    pub counts: Vec<usize>,
    pub threshold: usize,
}

impl ClipReport {
    pub fn max_count(&self) -> usize {
        self.counts.iter().copied().max().unwrap_or(0)
    }
}

/// Per-channel count of samples at or beyond full scale, over the whole
/// buffer.
pub fn count_clipped(buffer: &AudioBuffer) -> ClipReport {
    ClipReport {
        counts: buffer
            .channels()
            .iter()
            .map(|c| c.iter().filter(|x| x.abs() >= CLIP_LEVEL).count())
            .collect(),
        threshold: CLIP_TRIGGER_COUNT,
    }
}

/// True when any one channel reaches the trigger count.
pub fn should_compress(report: &ClipReport) -> bool {
    report.max_count() >= report.threshold
}
