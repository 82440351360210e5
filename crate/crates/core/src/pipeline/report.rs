use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::EnhanceOptions;
use crate::error::{Error, Result};
use crate::levels::{CompressorParams, CLIP_TRIGGER_COUNT};
use crate::metrics::SdrScore;
use crate::stems::Track;
use crate::wav::WavFormat;

pub const SCHEMA_VERSION: u32 = 1;

/// Processing stages in their fixed order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Ensemble,
    Residual,
    Remix,
    Normalize,
    Nalr,
    ClipCheck,
    Compress,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptionsEcho {
    pub use_residual: bool,
    pub use_compressor_heuristic: bool,
    pub ensemble_weights: Option<Vec<f64>>,
    pub blend_weight: f64,
    pub n_taps: usize,
    pub compressor: CompressorParams,
    pub output_format: WavFormat,
}

impl From<&EnhanceOptions> for OptionsEcho {
    fn from(o: &EnhanceOptions) -> Self {
        OptionsEcho {
            use_residual: o.use_residual,
            use_compressor_heuristic: o.use_compressor_heuristic,
            ensemble_weights: o.ensemble_weights.clone(),
            blend_weight: o.blend_weight,
            n_taps: o.n_taps,
            compressor: o.compressor,
            output_format: o.output_format,
        }
    }
}

/// Per-song record of what the pipeline measured and decided.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnhanceReport {
    pub schema_version: u32,
    pub song_id: String,
    pub ensemble_size: usize,
    pub input_loudness_lufs: Option<f64>,
    pub remix_loudness_lufs: Option<f64>,
    pub normalization_gain_db: Option<f64>,
    /// Clipped samples per channel after amplification, before compression.
    pub clip_counts: Vec<usize>,
    pub clip_threshold: usize,
    pub compressor_applied: bool,
    pub output_peak: Option<f64>,
    pub stages: Vec<Stage>,
    pub overall_sdr: Option<SdrScore>,
    pub per_track_sdr: BTreeMap<Track, SdrScore>,
    pub options: Option<OptionsEcho>,
    pub output_path: Option<String>,
    pub error: Option<String>,
}

impl EnhanceReport {
    pub fn new(song_id: impl Into<String>) -> Self {
        EnhanceReport {
            schema_version: SCHEMA_VERSION,
            song_id: song_id.into(),
            ensemble_size: 0,
            input_loudness_lufs: None,
            remix_loudness_lufs: None,
            normalization_gain_db: None,
            clip_counts: Vec::new(),
            clip_threshold: CLIP_TRIGGER_COUNT,
            compressor_applied: false,
            output_peak: None,
            stages: Vec::new(),
            overall_sdr: None,
            per_track_sdr: BTreeMap::new(),
            options: None,
            output_path: None,
            error: None,
        }
    }

    pub fn failed(song_id: impl Into<String>, error: &Error) -> Self {
        EnhanceReport {
            error: Some(error.to_string()),
            ..EnhanceReport::new(song_id)
        }
    }

    pub fn is_error(&self) -> bool {
        self.error.is_some()
    }
}

/// Writes reports as one JSON array.
pub fn write_reports(path: impl AsRef<Path>, reports: &[EnhanceReport]) -> Result<()> {
    let path = path.as_ref();
    let text = serde_json::to_string_pretty(reports).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}
