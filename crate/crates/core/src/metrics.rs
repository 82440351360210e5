//! Signal-to-distortion ratio and per-song evaluation.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::audio::AudioBuffer;
use crate::error::{Error, Result};
use crate::stems::{StemSet, Track};

/// Reported SDR values are clamped to `[-SDR_CAP, SDR_CAP]` dB.
pub const SDR_CAP: f64 = 100.0;

/// SDR in dB, clamped to the cap range.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SdrScore(f64);

impl SdrScore {
    pub fn new(db: f64) -> Self {
        SdrScore(if db.is_nan() { -SDR_CAP } else { db.clamp(-SDR_CAP, SDR_CAP) })
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// `10 log10(sum ref^2 / sum (ref - est)^2)` over all channels and frames.
pub fn sdr(reference: &AudioBuffer, estimate: &AudioBuffer) -> Result<SdrScore> {
    reference.check_aligned(estimate, "SDR reference vs estimate")?;
    let signal = reference.energy();
    if signal == 0.0 {
        return Err(Error::ZeroReference);
    }
    let error: f64 = reference
        .channels()
        .iter()
        .zip(estimate.channels())
        .flat_map(|(r, e)| r.iter().zip(e).map(|(a, b)| (a - b) * (a - b)))
        .sum();
    if error == 0.0 {
        return Ok(SdrScore::new(SDR_CAP));
    }
    Ok(SdrScore::new(10.0 * (signal / error).log10()))
}

/// SDR figures for one song.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SongScores {
    pub overall_sdr: Option<SdrScore>,
    /// Empty when stems were not supplied.
    pub per_track_sdr: BTreeMap<Track, SdrScore>,
}

/// Overall SDR, plus per-track SDR when both stem sets are given.
pub fn evaluate_song(
    reference: &AudioBuffer,
    estimate: &AudioBuffer,
    reference_stems: Option<&StemSet>,
    estimate_stems: Option<&StemSet>,
) -> Result<SongScores> {
    let overall = sdr(reference, estimate)?;
    let mut per_track = BTreeMap::new();
    if let (Some(refs), Some(ests)) = (reference_stems, estimate_stems) {
        for track in Track::ALL {
            per_track.insert(track, sdr(refs.get(track), ests.get(track))?);
        }
    }
    Ok(SongScores {
        overall_sdr: Some(overall),
        per_track_sdr: per_track,
    })
}
