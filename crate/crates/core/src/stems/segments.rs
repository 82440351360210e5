use serde::{Deserialize, Serialize};

use super::{StemSet, Track};
use crate::audio::AudioBuffer;
use crate::error::{Error, Result};

pub const DEFAULT_SEGMENT_SECONDS: f64 = 6.0;
pub const DEFAULT_RATIO_THRESHOLD: f64 = 0.1;

/// A window in which one track carries a given share of the total stem
/// energy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub start: usize,
    pub length: usize,
    pub track: Track,
    pub energy_ratio: f64,
}

fn window_energy(buffer: &AudioBuffer, start: usize, len: usize) -> f64 {
    buffer
        .channels()
        .iter()
        .map(|c| c[start..start + len].iter().map(|x| x * x).sum::<f64>())
        .sum()
}

/// Energy-based source activity detection.
///
/// The song is cut into non-overlapping windows of `segment_frames` (a
/// trailing partial window is dropped). Windows where `track` holds at least
/// `ratio_threshold` of the summed energy of all four tracks are returned in
/// order.
pub fn salient_segments(
    stems: &StemSet,
    track: Track,
    segment_frames: usize,
    ratio_threshold: f64,
) -> Result<Vec<Segment>> {
    if segment_frames == 0 {
        return Err(Error::InvalidParameter("segment length must be positive".into()));
    }
    if !(0.0..=1.0).contains(&ratio_threshold) {
        return Err(Error::InvalidParameter(format!(
            "ratio threshold {ratio_threshold} outside [0, 1]"
        )));
    }
    let frames = stems.reference().num_frames();
    let mut out = Vec::new();
    for start in (0..frames / segment_frames).map(|w| w * segment_frames) {
        let energies = Track::ALL.map(|t| window_energy(stems.get(t), start, segment_frames));
        let total: f64 = energies.iter().sum();
        let ratio = if total > 0.0 {
            (energies[track as usize] / total).clamp(0.0, 1.0)
        } else {
            0.0
        };
        if ratio >= ratio_threshold {
            out.push(Segment {
                start,
                length: segment_frames,
                track,
                energy_ratio: ratio,
            });
        }
    }
    Ok(out)
}
