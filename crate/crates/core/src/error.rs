use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("unsupported codec in {0} (only PCM and IEEE float are accepted)")]
    UnsupportedCodec(PathBuf),

    #[error("unsupported sample format in {path}: {detail}")]
    UnsupportedFormat { path: PathBuf, detail: String },

    #[error("malformed WAV file {path}: {detail}")]
    Malformed { path: PathBuf, detail: String },

    #[error("truncated WAV file {0}")]
    Truncated(PathBuf),

    #[error("WAV file {0} contains no audio frames")]
    EmptyAudio(PathBuf),

    #[error("invalid audio buffer: {0}")]
    InvalidBuffer(String),

    #[error("misaligned signals: {0}")]
    Misaligned(String),

    #[error("expected {expected} channel(s), got {actual}")]
    ChannelCount { expected: usize, actual: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("cannot convert non-positive factor {0} to decibels")]
    NonPositiveFactor(f64),

    #[error("undefined loudness (signal is silent or fully gated out)")]
    UndefinedLoudness,

    #[error("audiogram is missing the {0} Hz anchor required by the prescription")]
    MissingAnchor(u32),

    #[error("invalid audiogram: {0}")]
    InvalidAudiogram(String),

    #[error("unknown track name `{0}` (expected vocals, drums, bass or other)")]
    UnknownTrack(String),

    #[error("reference signal is all zeros")]
    ZeroReference,

    #[error("invalid JSON in {path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
