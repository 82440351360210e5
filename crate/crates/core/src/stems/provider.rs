use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{StemSet, Track};
use crate::audio::AudioBuffer;
use crate::error::{Error, Result};
use crate::wav::{read_wav, write_wav, WavFormat};

/// Source of a separated stem set for a mixture.
///
/// Stands in for a neural separator: stems are either read from disk or
/// derived from known ground truth.
#[derive(Debug, Clone)]
pub enum StemProvider {
    /// `<dir>/vocals.wav`, `drums.wav`, `bass.wav`, `other.wav`.
    Directory(PathBuf),
    /// Returns the supplied stems unchanged.
    Oracle(StemSet),
    /// Ground truth plus seeded white Gaussian noise at `snr_db` relative to
    /// each track's own power.
    NoisyOracle {
        truth: StemSet,
        snr_db: f64,
        seed: u64,
    },
}

impl StemProvider {
    pub fn directory(dir: impl Into<PathBuf>) -> Self {
        StemProvider::Directory(dir.into())
    }

    pub fn oracle(truth: StemSet) -> Self {
        StemProvider::Oracle(truth)
    }

    pub fn noisy_oracle(truth: StemSet, snr_db: f64, seed: u64) -> Self {
        StemProvider::NoisyOracle {
            truth,
            snr_db,
            seed,
        }
    }

    /// Produces stems for `mix`, checking they match its rate, channel count
    /// and length.
    pub fn stems_for(&self, mix: &AudioBuffer) -> Result<StemSet> {
        let stems = match self {
            StemProvider::Directory(dir) => read_stem_dir(dir)?,
            StemProvider::Oracle(truth) => truth.clone(),
            StemProvider::NoisyOracle {
                truth,
                snr_db,
                seed,
            } => add_noise(truth, *snr_db, *seed)?,
        };
        stems.check_aligned_with(mix)?;
        Ok(stems)
    }
}

pub fn stem_path(dir: &Path, track: Track) -> PathBuf {
    dir.join(format!("{}.wav", track.name()))
}

/// Reads the four VDBO files from `dir`.
pub fn read_stem_dir(dir: impl AsRef<Path>) -> Result<StemSet> {
    let dir = dir.as_ref();
    let [v, d, b, o] = Track::ALL.map(|t| read_wav(stem_path(dir, t)));
    StemSet::new(v?, d?, b?, o?)
}

pub fn write_stem_dir(stems: &StemSet, dir: impl AsRef<Path>, format: WavFormat) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for (track, buffer) in stems.iter() {
        write_wav(buffer, stem_path(dir, track), format)?;
    }
    Ok(())
}

fn add_noise(truth: &StemSet, snr_db: f64, seed: u64) -> Result<StemSet> {
    if !snr_db.is_finite() {
        return Err(Error::InvalidParameter(format!("noise SNR {snr_db} dB is not finite")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut noisy = Vec::with_capacity(4);
    for (_, buffer) in truth.iter() {
        let count = (buffer.num_channels() * buffer.num_frames()) as f64;
        let power = buffer.energy() / count;
        let sigma = (power / 10f64.powf(snr_db / 10.0)).sqrt();
        if sigma == 0.0 {
            noisy.push(buffer.clone());
            continue;
        }
        let normal = Normal::new(0.0, sigma)
            .map_err(|e| Error::InvalidParameter(format!("noise distribution: {e}")))?;
        let channels = buffer
            .channels()
            .iter()
            .map(|c| c.iter().map(|&x| x + normal.sample(&mut rng)).collect())
            .collect();
        noisy.push(AudioBuffer::new(buffer.sample_rate(), channels)?);
    }
    let [v, d, b, o]: [AudioBuffer; 4] = noisy.try_into().expect("four tracks");
    StemSet::new(v, d, b, o)
}
