//! Loudness measurement and normalization, clip detection, and dynamic
//! range compression.

mod clip;
mod compressor;
mod loudness;

pub use clip::{count_clipped, should_compress, ClipReport, CLIP_LEVEL, CLIP_TRIGGER_COUNT};
pub use compressor::{compress, CompressorParams};
pub use loudness::{integrated_loudness, loudness_gain, normalize_to_loudness, Loudness, NORMALIZE_TOLERANCE_LU};
