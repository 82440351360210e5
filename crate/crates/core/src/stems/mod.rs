//! VDBO stem sets: ensembling, residual repair of the "other" track, and
//! salient-segment selection.

pub mod provider;
mod segments;

pub use provider::StemProvider;
pub use segments::{salient_segments, Segment, DEFAULT_RATIO_THRESHOLD, DEFAULT_SEGMENT_SECONDS};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::audio::AudioBuffer;
use crate::error::{Error, Result};

/// One of the four component tracks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Track {
    Vocals,
    Drums,
    Bass,
    Other,
}

impl Track {
    pub const ALL: [Track; 4] = [Track::Vocals, Track::Drums, Track::Bass, Track::Other];

    pub fn name(self) -> &'static str {
        match self {
            Track::Vocals => "vocals",
            Track::Drums => "drums",
            Track::Bass => "bass",
            Track::Other => "other",
        }
    }
}

impl fmt::Display for Track {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Track {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Track::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::UnknownTrack(s.to_string()))
    }
}

/// The four time-aligned component signals of one song.
#[derive(Debug, Clone, PartialEq)]
pub struct StemSet {
    vocals: AudioBuffer,
    drums: AudioBuffer,
    bass: AudioBuffer,
    other: AudioBuffer,
}

impl StemSet {
    pub fn new(
        vocals: AudioBuffer,
        drums: AudioBuffer,
        bass: AudioBuffer,
        other: AudioBuffer,
    ) -> Result<Self> {
        vocals.check_aligned(&drums, "drums vs vocals")?;
        vocals.check_aligned(&bass, "bass vs vocals")?;
        vocals.check_aligned(&other, "other vs vocals")?;
        Ok(StemSet {
            vocals,
            drums,
            bass,
            other,
        })
    }

    /// Builds a set from buffers in [`Track::ALL`] order.
    pub fn from_tracks(tracks: [AudioBuffer; 4]) -> Result<Self> {
        let [v, d, b, o] = tracks;
        StemSet::new(v, d, b, o)
    }

    pub fn get(&self, track: Track) -> &AudioBuffer {
        match track {
            Track::Vocals => &self.vocals,
            Track::Drums => &self.drums,
            Track::Bass => &self.bass,
            Track::Other => &self.other,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (Track, &AudioBuffer)> {
        Track::ALL.into_iter().map(move |t| (t, self.get(t)))
    }

    /// Returns a copy with `track` replaced.
    pub fn with_track(&self, track: Track, buffer: AudioBuffer) -> Result<StemSet> {
        let mut tracks = Track::ALL.map(|t| self.get(t).clone());
        tracks[track as usize] = buffer;
        StemSet::from_tracks(tracks)
    }

    /// Any track; all four share rate, channels and length.
    pub fn reference(&self) -> &AudioBuffer {
        &self.vocals
    }

    pub fn check_aligned_with(&self, mix: &AudioBuffer) -> Result<()> {
        mix.check_aligned(self.reference(), "stems vs mixture")
    }

    /// Plain sum of the four tracks.
    pub fn sum(&self) -> Result<AudioBuffer> {
        self.vocals.add(&self.drums)?.add(&self.bass)?.add(&self.other)
    }
}

/// Sample-wise weighted mean of aligned stem sets.
///
/// Weights default to equal and are normalized to sum to one. Sets with zero
/// weight are ignored, so one-hot weights return the selected set unchanged.
pub fn ensemble_average(sets: &[StemSet], weights: Option<&[f64]>) -> Result<StemSet> {
    let first = sets
        .first()
        .ok_or_else(|| Error::InvalidParameter("ensemble needs at least one stem set".into()))?;
    for (i, s) in sets.iter().enumerate().skip(1) {
        s.reference()
            .check_aligned(first.reference(), &format!("ensemble member {i}"))?;
    }

    let weights: Vec<f64> = match weights {
        Some(w) => {
            if w.len() != sets.len() {
                return Err(Error::InvalidParameter(format!(
                    "{} weights for {} stem sets",
                    w.len(),
                    sets.len()
                )));
            }
            if w.iter().any(|&x| !x.is_finite() || x < 0.0) {
                return Err(Error::InvalidParameter("weights must be finite and non-negative".into()));
            }
            w.to_vec()
        }
        None => vec![1.0; sets.len()],
    };
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Err(Error::InvalidParameter("ensemble weights sum to zero".into()));
    }

    let active: Vec<(&StemSet, f64)> = sets
        .iter()
        .zip(&weights)
        .filter(|(_, &w)| w > 0.0)
        .map(|(s, &w)| (s, w / total))
        .collect();
    if let [(only, _)] = active.as_slice() {
        return Ok((*only).clone());
    }

    // Accumulate deviations from the first member so that identical members
    // reproduce it exactly.
    let (base, _) = active[0];
    let tracks = Track::ALL.map(|track| {
        let base_buf = base.get(track);
        let channels = (0..base_buf.num_channels())
            .map(|c| {
                let b = base_buf.channel(c);
                let mut acc = vec![0.0; b.len()];
                for &(set, w) in &active[1..] {
                    for ((a, &x), &y) in acc.iter_mut().zip(set.get(track).channel(c)).zip(b) {
                        *a += w * (x - y);
                    }
                }
                b.iter().zip(acc).map(|(&y, a)| y + a).collect()
            })
            .collect();
        AudioBuffer::new(base_buf.sample_rate(), channels)
    });
    let [v, d, b, o] = tracks;
    StemSet::new(v?, d?, b?, o?)
}

/// `mix - vocals - drums - bass`.
pub fn compute_residual(mix: &AudioBuffer, stems: &StemSet) -> Result<AudioBuffer> {
    stems.check_aligned_with(mix)?;
    mix.sub(&stems.vocals)?.sub(&stems.drums)?.sub(&stems.bass)
}

pub const DEFAULT_BLEND_WEIGHT: f64 = 0.5;

/// Equal-weight average of the predicted "other" track and the residual.
pub fn blend_other(predicted_other: &AudioBuffer, residual: &AudioBuffer) -> Result<AudioBuffer> {
    blend_other_weighted(predicted_other, residual, DEFAULT_BLEND_WEIGHT)
}

/// `(1 - w) * predicted + w * residual`, `w` in `[0, 1]`.
pub fn blend_other_weighted(
    predicted_other: &AudioBuffer,
    residual: &AudioBuffer,
    residual_weight: f64,
) -> Result<AudioBuffer> {
    if !(0.0..=1.0).contains(&residual_weight) {
        return Err(Error::InvalidParameter(format!(
            "blend weight {residual_weight} outside [0, 1]"
        )));
    }
    predicted_other.check_aligned(residual, "residual vs predicted other")?;
    let keep = 1.0 - residual_weight;
    predicted_other.zip_with(residual, |p, r| keep * p + residual_weight * r)
}
